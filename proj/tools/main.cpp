#include "cli.hpp"

int main(int argc, char** argv) { return fa::cli::run(argc, argv); }

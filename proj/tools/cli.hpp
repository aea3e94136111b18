#pragma once

#include "fa/io.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace fa::cli {

// Exit codes: decision true / success, decision false, usage, resource cap.
enum Exit : int { kTrue = 0, kFalse = 1, kUsage = 2, kCap = 3 };

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Named bindings kept as one JSON file each, listed in <dir>/manifest.json.
class Workspace {
public:
    Workspace() = default;
    explicit Workspace(std::filesystem::path dir);

    bool open() const { return !dir_.empty(); }
    const std::filesystem::path& dir() const { return dir_; }
    bool has(const std::string& name) const;
    // Stored object with its "kind" field.
    Json get(const std::string& name) const;
    void put(const std::string& name, const Json& object);
    std::vector<std::string> names() const;

private:
    void save_manifest() const;
    std::filesystem::path dir_;
    Json manifest_;
};

// Sets available by name without a workspace.
std::vector<std::string> builtin_names();
std::optional<AutomaticSet> builtin_set(const std::string& name);
SpanningSet default_f7_span();
SpanningSet default_z4_span();

// Set expressions:
//   S ::= S | S  (union)   S & S  (intersection)   S + S  (sum)   !S  (complement)
//       | name | lang(path) | load(path) | cycle(elem, delta) | translate(S, elem...)
//       | project(S, coord) | product(S, S) | finite(elem, ...) | whole() | empty() | (S)
// Binding strength: ! over + over & over |. Elements are integer arrays or integers.
struct SetContext {
    // For cycle/finite/whole/empty and lang(); when absent, the span of the first
    // named or loaded set to its left.
    std::optional<SpanningSet> span;
    std::function<std::optional<AutomaticSet>(const std::string&)> lookup;
    std::filesystem::path base;  // relative file paths resolve here
};
AutomaticSet eval_set_expr(const std::string& text, const SetContext& ctx);

// Runs the command line; writes JSON to --out or stdout and a one-line summary
// to stderr.
int run(int argc, char** argv);

}  // namespace fa::cli

#include "cli.hpp"

#include <regex>

namespace fa::cli {

namespace fs = std::filesystem;

Workspace::Workspace(fs::path dir) : dir_(std::move(dir)) {
    fs::create_directories(dir_);
    auto m = dir_ / "manifest.json";
    if (fs::exists(m)) {
        manifest_ = read_json_file(m.string());
        if (!manifest_.contains("bindings") || !manifest_["bindings"].is_object())
            throw FormatError(m.string() + ": manifest needs a \"bindings\" object");
    } else {
        manifest_ = {{"bindings", Json::object()}};
        save_manifest();
    }
}

bool Workspace::has(const std::string& name) const { return open() && manifest_["bindings"].contains(name); }

Json Workspace::get(const std::string& name) const {
    if (!has(name)) throw UsageError("no binding named \"" + name + "\"");
    return read_json_file((dir_ / manifest_["bindings"][name]["file"].get<std::string>()).string());
}

void Workspace::put(const std::string& name, const Json& object) {
    if (!open()) throw UsageError("--workspace is required to store \"" + name + "\"");
    static const std::regex ok("[A-Za-z_][A-Za-z0-9_.-]*");
    if (!std::regex_match(name, ok)) throw UsageError("invalid binding name \"" + name + "\"");
    std::string file = name + ".json";
    write_json_file((dir_ / file).string(), object);
    manifest_["bindings"][name] = {{"kind", object.value("kind", "Unknown")}, {"file", file}};
    save_manifest();
}

std::vector<std::string> Workspace::names() const {
    std::vector<std::string> out;
    if (open())
        for (auto& [k, v] : manifest_["bindings"].items()) out.push_back(k);
    return out;
}

void Workspace::save_manifest() const {
    // Sorted bindings keep the manifest byte-stable.
    Json sorted = {{"bindings", Json::object()}};
    auto keys = std::vector<std::string>{};
    for (auto& [k, v] : manifest_["bindings"].items()) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    for (auto& k : keys) sorted["bindings"][k] = manifest_["bindings"][k];
    write_json_file((dir_ / "manifest.json").string(), sorted);
}

}  // namespace fa::cli

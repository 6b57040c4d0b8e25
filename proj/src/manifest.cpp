#include "opm/manifest.hpp"

#include <ctime>
#include <fstream>

#include "opm/errors.hpp"
#include "opm/hashutil.hpp"

namespace opm {

void RunManifest::add_input(const std::string& path) { input_hashes[path] = hex64(fnv1a64_file(path)); }

nlohmann::json RunManifest::to_json() const {
    nlohmann::json j;
    j["command"] = command;
    j["argv"] = argv;
    j["config"] = resolved_config;
    j["seed"] = seed;
    j["deterministic"] = deterministic;
    j["inputs"] = input_hashes;
    j["outputs"] = outputs;
    j["tool_version"] = kToolVersion;
    if (!deterministic) {
        char buf[32];
        std::time_t now = std::time(nullptr);
        std::tm tm{};
        gmtime_r(&now, &tm);
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
        j["timestamp"] = buf;
    }
    return j;
}

void RunManifest::write(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ValidationError("manifest not writable: " + path);
    out << to_json().dump(2) << "\n";
}

}  // namespace opm

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace opm {

inline constexpr const char* kToolVersion = "0.1.0";

// Everything needed to reproduce a run byte for byte: the command line, the
// fully resolved config, seeds, and digests of every input file. The
// timestamp is dropped in deterministic mode so reruns emit identical bytes.
struct RunManifest {
    std::string command;
    std::vector<std::string> argv;
    nlohmann::json resolved_config;
    std::uint64_t seed = 0;
    bool deterministic = false;
    std::map<std::string, std::string> input_hashes;
    std::vector<std::string> outputs;

    void add_input(const std::string& path);
    nlohmann::json to_json() const;
    void write(const std::string& path) const;
};

}  // namespace opm

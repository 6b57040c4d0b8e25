#pragma once

#include <cstdint>
#include <string>

namespace opm {

// FNV-1a, used for config hashes and input digests in run manifests
std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t seed = 0xcbf29ce484222325ull);
std::uint64_t fnv1a64(const std::string& s);
std::uint64_t fnv1a64_file(const std::string& path);  // throws ValidationError when unreadable
std::string hex64(std::uint64_t v);

}  // namespace opm

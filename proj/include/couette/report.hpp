#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace couette {

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

// Lists every artifact a CLI run wrote, with hashes, next to the hash of the config text.
class Manifest {
public:
    Manifest(std::string subcommand, const std::string& config_text, std::uint64_t seed);

    void add(const std::string& path);
    void add(const std::vector<std::string>& paths);
    // writes <dir>/manifest.json; artifact paths are stored relative to dir
    std::string write(const std::string& dir) const;
    const std::string& config_hash() const { return config_hash_; }

private:
    std::string sub_, config_hash_;
    std::uint64_t seed_;
    std::vector<std::string> paths_;
};

}  // namespace couette

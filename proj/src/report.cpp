#include "couette/report.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <memory>
#include <openssl/evp.h>
#include <sstream>
#include <stdexcept>

namespace couette {

std::string sha256_hex(const std::string& bytes) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), md, &len) != 1)
        throw std::runtime_error("sha256 failed");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return os.str();
}

std::string sha256_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return sha256_hex(ss.str());
}

Manifest::Manifest(std::string subcommand, const std::string& config_text, std::uint64_t seed)
    : sub_(std::move(subcommand)), config_hash_(sha256_hex(config_text)), seed_(seed) {}

void Manifest::add(const std::string& path) { paths_.push_back(path); }

void Manifest::add(const std::vector<std::string>& paths) {
    for (const auto& p : paths) add(p);
}

std::string Manifest::write(const std::string& dir) const {
    namespace fs = std::filesystem;
    nlohmann::json art = nlohmann::json::array();
    for (const auto& p : paths_)
        art.push_back({{"path", fs::relative(p, dir).generic_string()},
                       {"bytes", fs::file_size(p)},
                       {"sha256", sha256_file(p)}});
    const nlohmann::json j = {{"subcommand", sub_}, {"seed", seed_}, {"config_sha256", config_hash_}, {"artifacts", art}};
    const std::string path = (fs::path(dir) / "manifest.json").string();
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << j.dump(2) << '\n';
    return path;
}

}  // namespace couette

#include "manifest.hpp"

#include "bemcal/csv.hpp"
#include "bemcal/error.hpp"

#include <array>
#include <fstream>
#include <memory>

#include <fmt/format.h>
#include <openssl/evp.h>

namespace bemcal::cli {

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError(fmt::format("{}: cannot open for hashing", path.string()));
    }
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256 initialisation failed");
    }
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
    return hex;
}

nlohmann::ordered_json digest_map(std::span<const std::filesystem::path> files, const std::filesystem::path& base) {
    nlohmann::ordered_json out = nlohmann::ordered_json::object();
    for (const auto& f : files) {
        out[std::filesystem::relative(f, base).generic_string()] = sha256_file(f);
    }
    return out;
}

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& doc) {
    csv::write_text(path, doc.dump(2) + "\n");
}

}  // namespace bemcal::cli

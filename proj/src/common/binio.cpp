#include "hematch/common/binio.hpp"

#include <cstdio>

namespace hematch {

std::vector<uint8_t> read_file(const std::filesystem::path& p) {
    std::FILE* f = std::fopen(p.c_str(), "rb");
    if (!f) throw FormatError("cannot open " + p.string());
    std::fseek(f, 0, SEEK_END);
    long len = std::ftell(f);
    std::fseek(f, 0, SEEK_SET);
    std::vector<uint8_t> buf(size_t(len < 0 ? 0 : len));
    size_t got = buf.empty() ? 0 : std::fread(buf.data(), 1, buf.size(), f);
    std::fclose(f);
    if (got != buf.size()) throw FormatError("short read on " + p.string());
    return buf;
}

void write_file(const std::filesystem::path& p, std::span<const uint8_t> data) {
    std::FILE* f = std::fopen(p.c_str(), "wb");
    if (!f) throw FormatError("cannot open " + p.string() + " for writing");
    size_t put = data.empty() ? 0 : std::fwrite(data.data(), 1, data.size(), f);
    int rc = std::fclose(f);
    if (put != data.size() || rc != 0) throw FormatError("short write on " + p.string());
}

std::string read_text_file(const std::filesystem::path& p) {
    auto bytes = read_file(p);
    return std::string(bytes.begin(), bytes.end());
}

void write_text_file(const std::filesystem::path& p, const std::string& text) {
    write_file(p, {reinterpret_cast<const uint8_t*>(text.data()), text.size()});
}

} // namespace hematch

#pragma once

// Internal helpers for the binary and CSV file formats. All binary fields
// are little-endian; doubles are written as their IEEE-754 bit patterns.

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "rbmc/errors.hpp"

namespace rbmc::io {

inline void write_bytes(std::ostream& out, const void* data, std::size_t n) {
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

template <typename T>
void write_le(std::ostream& out, T value) {
    static_assert(std::is_integral_v<T>);
    unsigned char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        buf[i] = static_cast<unsigned char>(
            (static_cast<std::uint64_t>(value) >> (8 * i)) & 0xff);
    }
    write_bytes(out, buf, sizeof(T));
}

inline void write_f64_le(std::ostream& out, double value) {
    write_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(value));
}

template <typename T>
bool read_le(std::istream& in, T& value) {
    unsigned char buf[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) return false;
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    }
    value = static_cast<T>(v);
    return true;
}

inline bool read_f64_le(std::istream& in, double& value) {
    std::uint64_t bits = 0;
    if (!read_le(in, bits)) return false;
    value = std::bit_cast<double>(bits);
    return true;
}

/// Shortest decimal representation that round-trips exactly.
inline std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

/// Locale-independent parse; the entire token must be consumed.
inline double parse_double(std::string_view token, const std::string& context) {
    double value = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc{} || res.ptr != last) {
        throw FormatError(context + ": cannot parse number '" + std::string(token) + "'");
    }
    return value;
}

inline std::uint64_t parse_u64(std::string_view token, const std::string& context) {
    std::uint64_t value = 0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
    if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
        throw FormatError(context + ": cannot parse integer '" + std::string(token) + "'");
    }
    return value;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

/// Strips one trailing '\r' so CRLF files parse like LF files.
inline std::string_view strip_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

inline std::ofstream open_output(const std::filesystem::path& path, bool binary) {
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    return out;
}

inline std::ifstream open_input(const std::filesystem::path& path, bool binary) {
    std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    return in;
}

}  // namespace rbmc::io

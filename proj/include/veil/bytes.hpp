#ifndef VEIL_BYTES_HPP
#define VEIL_BYTES_HPP

#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace veil {

using Bytes = std::vector<std::uint8_t>;
using ByteSpan = std::span<const std::uint8_t>;

/// Thrown on configuration/usage errors (bad sizes, unparsable input).
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

inline ByteSpan as_span(const Bytes& b) { return ByteSpan(b.data(), b.size()); }

inline ByteSpan as_span(std::string_view s) {
    return ByteSpan(reinterpret_cast<const std::uint8_t*>(s.data()), s.size());
}

inline Bytes to_bytes(std::string_view s) {
    return Bytes(s.begin(), s.end());
}

inline Bytes concat(std::initializer_list<ByteSpan> parts) {
    std::size_t total = 0;
    for (const auto& p : parts) total += p.size();
    Bytes out;
    out.reserve(total);
    for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

/// dst[i] ^= src[i] for the length of src; src must fit in dst from offset.
inline void xor_into(Bytes& dst, std::size_t offset, ByteSpan src) {
    if (offset + src.size() > dst.size()) throw Error("xor_into: range out of bounds");
    for (std::size_t i = 0; i < src.size(); ++i) dst[offset + i] ^= src[i];
}

inline Bytes xored(ByteSpan a, ByteSpan b) {
    if (a.size() != b.size()) throw Error("xored: length mismatch");
    Bytes out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] ^ b[i];
    return out;
}

inline void put_u32_be(Bytes& dst, std::size_t offset, std::uint32_t v) {
    dst[offset]     = static_cast<std::uint8_t>(v >> 24);
    dst[offset + 1] = static_cast<std::uint8_t>(v >> 16);
    dst[offset + 2] = static_cast<std::uint8_t>(v >> 8);
    dst[offset + 3] = static_cast<std::uint8_t>(v);
}

inline std::uint32_t get_u32_be(ByteSpan src, std::size_t offset) {
    return (std::uint32_t(src[offset]) << 24) | (std::uint32_t(src[offset + 1]) << 16) |
           (std::uint32_t(src[offset + 2]) << 8) | std::uint32_t(src[offset + 3]);
}

inline void put_u16_be(Bytes& dst, std::size_t offset, std::uint16_t v) {
    dst[offset]     = static_cast<std::uint8_t>(v >> 8);
    dst[offset + 1] = static_cast<std::uint8_t>(v);
}

inline std::uint16_t get_u16_be(ByteSpan src, std::size_t offset) {
    return static_cast<std::uint16_t>((std::uint16_t(src[offset]) << 8) | src[offset + 1]);
}

inline std::size_t hamming_distance(ByteSpan a, ByteSpan b) {
    if (a.size() != b.size()) throw Error("hamming_distance: length mismatch");
    std::size_t bits = 0;
    for (std::size_t i = 0; i < a.size(); ++i) bits += __builtin_popcount(a[i] ^ b[i]);
    return bits;
}

inline std::string to_hex(ByteSpan b) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(b.size() * 2);
    for (std::uint8_t v : b) {
        out.push_back(digits[v >> 4]);
        out.push_back(digits[v & 0xF]);
    }
    return out;
}

} // namespace veil

#endif

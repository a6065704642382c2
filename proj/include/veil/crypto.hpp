#ifndef VEIL_CRYPTO_HPP
#define VEIL_CRYPTO_HPP

#include <array>
#include <cstdint>

#include "veil/bytes.hpp"

// Keyed primitive contracts consumed by the rest of the protocol stack.
// Everything here is a pure function of its inputs; no hidden state, safe
// for concurrent use from any number of threads.
//
// Concrete constructions (128-bit throughout):
//   kdf             SHA-256(label ‖ len(material) ‖ material), truncated
//   prg             AES-128-CTR keystream, zero initial counter block
//   prp (16 octets) one raw AES-128 block operation
//   prp (24 octets) 4-round balanced Feistel, AES-CMAC round function
//   mac             AES-128-CMAC
//   stream          AES-128-CTR with caller-supplied 16-octet counter block
namespace veil::crypto {

constexpr std::size_t kKeyLen = 16;
constexpr std::size_t kIvLen = 16;
constexpr std::size_t kMacLen = 16;
constexpr std::size_t kWideBlockLen = 24;

/// Longest keystream a single prg() call may produce.
constexpr std::size_t kMaxStream = 1u << 20;

struct SymKey {
    std::array<std::uint8_t, kKeyLen> bytes{};

    static SymKey from(ByteSpan b) {
        if (b.size() != kKeyLen) throw Error("SymKey: need exactly 16 octets");
        SymKey k;
        std::memcpy(k.bytes.data(), b.data(), kKeyLen);
        return k;
    }
    ByteSpan span() const { return ByteSpan(bytes.data(), bytes.size()); }
    bool operator==(const SymKey&) const = default;
};

/// Independent derived keys for each use of the same key material.
enum class KdfLabel : std::uint8_t {
    Prg = 0x01,
    Prp = 0x02,
    Mac = 0x03,
    Enc = 0x04,
};

/// Derive a 16-octet key from arbitrary non-empty material.
SymKey kdf(ByteSpan material, KdfLabel label);

/// Deterministic keystream of exactly `len` octets. prg(k, a) is a prefix of
/// prg(k, b) whenever a <= b. Throws if len > kMaxStream.
Bytes prg(const SymKey& key, std::size_t len);

/// Length-preserving keyed permutation over 16- or 24-octet blocks.
Bytes prp_encrypt(const SymKey& key, ByteSpan block);
Bytes prp_decrypt(const SymKey& key, ByteSpan block);

/// 16-octet tag over an arbitrary message.
Bytes mac(const SymKey& key, ByteSpan msg);

// Length-preserving stream cipher; decrypt inverts encrypt under the same
// (key, nonce). Pure XOR keystream: the packet codec relies on
//   stream_encrypt(k, n, p) = p ^ keystream(k, n)
// (positionwise), which holds for CTR mode and is asserted by tests.
Bytes stream_encrypt(const SymKey& key, ByteSpan nonce, ByteSpan msg);
Bytes stream_decrypt(const SymKey& key, ByteSpan nonce, ByteSpan msg);

} // namespace veil::crypto

#endif

#ifndef VEIL_CODEC_HPP
#define VEIL_CODEC_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "veil/crypto.hpp"
#include "veil/rng.hpp"

// Onion packet wire format and processing: layered packet creation,
// splittable-packet creation, per-hop layer removal, and in-network
// splitting. Every operation is size-preserving: a packet is exactly
// header_len() + payload_len octets before and after each hop.
//
// Wire layout (defaults, octet offsets):
//   [0,16)      iv       per-packet initial vector, advanced at each hop
//   [16,40)     fs       forwarding segment (node-local encryption of s ‖ R)
//   [40,56)     gamma    per-hop MAC over fs ‖ beta ‖ payload
//   [56,371)    beta     opaque layered header, (r-1) blocks of 45 octets
//   [371,1395)  payload  stream-encrypted payload, 1024 octets
namespace veil::codec {

using crypto::SymKey;

struct PacketParams {
    std::size_t max_hops = 8; ///< r: paths carry at most max_hops-1 nodes
    std::size_t iv_len = 16;
    std::size_t fs_len = 24;
    std::size_t mac_len = 16;
    std::size_t ctrl_len = 1;
    std::size_t exp_len = 4;
    std::size_t payload_len = 1024; ///< m

    std::size_t secret_block() const { return ctrl_len + exp_len; }     // b
    std::size_t public_block() const { return fs_len + mac_len; }       // c
    std::size_t hop_block() const { return secret_block() + public_block(); } // d
    std::size_t beta_len() const { return (max_hops - 1) * hop_block(); }
    std::size_t header_len() const { return iv_len + fs_len + mac_len + beta_len(); }
    std::size_t packet_len() const { return header_len() + payload_len; }
    std::size_t max_path_nodes() const { return max_hops - 1; }

    /// Sender-chosen octets per split child.
    std::size_t child_payload_len() const { return payload_len / 2 - header_len(); }
    /// Deterministic padding appended to each child at the split node.
    std::size_t child_pad_len() const { return payload_len / 2 + header_len(); }

    /// Throws on widths the primitives cannot serve or on m too small to split.
    void validate() const;
};

enum class Ctrl : std::uint8_t {
    Fwd = 0x00,
    Split = 0x01,
};

struct RoutingSegment {
    static constexpr std::uint32_t kDeliverLocal = 0xFFFFFFFF;

    std::uint32_t ingress = 0;
    std::uint32_t egress = 0;

    bool delivers_locally() const { return egress == kDeliverLocal; }
    Bytes encode() const;
    static RoutingSegment decode(ByteSpan b);
    bool operator==(const RoutingSegment&) const = default;
};

struct OnionPacket {
    Bytes iv;
    Bytes fs;
    Bytes gamma;
    Bytes beta;
    Bytes payload;

    Bytes serialize() const;
    static OnionPacket parse(const PacketParams& params, ByteSpan wire);
    std::size_t wire_size() const {
        return iv.size() + fs.size() + gamma.size() + beta.size() + payload.size();
    }
};

/// Per-hop sender-side secrets for one flowlet.
struct HopMaterial {
    SymKey s;
    Bytes fs;                  ///< forwarding segment created by this hop's node
    Ctrl ctrl = Ctrl::Fwd;
    std::uint32_t exp = 0;     ///< absolute seconds, exp_min + delta
    std::uint32_t delta = 0;   ///< per-flowlet expiration offset, fixed at setup
};

struct PathMaterial {
    std::vector<HopMaterial> hops;
    SymKey s_sd; ///< end-to-end key shared with the receiving host
};

struct LayerOutput {
    Ctrl ctrl;
    std::uint32_t exp;
    RoutingSegment route;
    SymKey flow_key; ///< recovered s: replay keying and split both need it
    OnionPacket next;
};

/// Encrypt (s, route) under the node-local secret. 24 opaque octets.
Bytes fs_create(const SymKey& sv, const SymKey& s, const RoutingSegment& route);

/// Inverse of fs_create under the same sv. Any 24-octet input decodes to
/// some pair; authenticity comes from the packet MAC.
std::pair<SymKey, RoutingSegment> fs_open(const SymKey& sv, ByteSpan fs);

/// Build a layered packet over `hops` (outermost first), starting from iv0.
/// Each hop's removal authenticates the packet and recovers that hop's
/// (ctrl, exp, route); after the last hop the payload equals `payload`.
OnionPacket create_onion(const PacketParams& params, std::span<const HopMaterial> hops,
                         ByteSpan iv0, ByteSpan payload);

/// Build a packet that node `split_index` (1 <= split_index <= n-1) expands
/// into two full-size children carrying `child_payload0/1` (t octets each).
/// Children address node split_index itself and then traverse the rest of
/// the path like ordinary packets.
OnionPacket create_splittable(const PacketParams& params, std::span<const HopMaterial> hops,
                              ByteSpan iv, ByteSpan iv0, ByteSpan iv1, ByteSpan child_payload0,
                              ByteSpan child_payload1, std::size_t split_index);

/// One hop of processing under the node-local secret. nullopt = MAC
/// mismatch, drop the packet. Expiry is the caller's check.
std::optional<LayerOutput> remove_layer(const PacketParams& params, const OnionPacket& packet,
                                        const SymKey& sv);

/// Expand a SPLIT packet's payload into two full-size children, appending
/// the labeled deterministic padding. Garbage in yields well-formed garbage;
/// downstream MACs reject.
std::pair<OnionPacket, OnionPacket> split_onion(const PacketParams& params, ByteSpan payload,
                                                const SymKey& s, ByteSpan iv);

/// Advance an IV exactly as remove_layer does at a hop holding key s.
Bytes advance_iv(const SymKey& s, ByteSpan iv);

/// IV field of the packet as the receiving host sees it (after every hop).
Bytes delivery_iv(std::span<const HopMaterial> hops, ByteSpan iv0);

/// Draw per-hop expiration offsets (once per flowlet) and stamp
/// exp_i = exp_min + delta_i into the hop materials.
void assign_expirations(std::vector<HopMaterial>& hops, std::uint32_t exp_min,
                        std::uint32_t delta_max, Rng& rng);

/// Re-stamp exp_i for a new packet, reusing the flowlet's fixed deltas.
void refresh_expirations(std::vector<HopMaterial>& hops, std::uint32_t exp_min);

// --- End-to-end payload framing -----------------------------------------
//
// The first payload octet under the end-to-end key is a type tag; receivers
// use it to tell data from chaff. Sealed layout: tag ‖ len(2, BE) ‖ data ‖
// zero padding, all stream-encrypted under kdf(s_sd, ENC) keyed on the
// delivery IV.

enum class PayloadKind : std::uint8_t {
    Data = 0x00,
    Chaff = 0x01,
};

struct OpenedPayload {
    PayloadKind kind;
    Bytes data;
};

Bytes seal_payload(const SymKey& s_sd, ByteSpan delivery_iv, PayloadKind kind, ByteSpan data,
                   std::size_t sealed_len);

/// nullopt on unknown tag or out-of-range length field.
std::optional<OpenedPayload> open_payload(const SymKey& s_sd, ByteSpan delivery_iv,
                                          ByteSpan sealed);

} // namespace veil::codec

#endif

#include "veil/codec.hpp"

#include <algorithm>
#include <cassert>

namespace veil::codec {

namespace {

using crypto::KdfLabel;

constexpr std::string_view kLeftLabel = "left";
constexpr std::string_view kRightLabel = "right";
constexpr std::string_view kFillLabel = "fill";

SymKey hop_stream_key(const SymKey& s, ByteSpan iv) {
    return crypto::kdf(concat({s.span(), iv}), KdfLabel::Prg);
}

SymKey hop_mac_key(const SymKey& s, ByteSpan iv) {
    return crypto::kdf(concat({s.span(), iv}), KdfLabel::Mac);
}

SymKey payload_key(const SymKey& s) { return crypto::kdf(s.span(), KdfLabel::Enc); }

SymKey iv_chain_key(const SymKey& s) { return crypto::kdf(s.span(), KdfLabel::Prp); }

SymKey split_pad_key(const SymKey& s, ByteSpan iv, std::string_view label) {
    return crypto::kdf(concat({s.span(), iv, as_span(label)}), KdfLabel::Prg);
}

Bytes hop_keystream(const PacketParams& params, const SymKey& s, ByteSpan iv) {
    return crypto::prg(hop_stream_key(s, iv), params.max_hops * params.hop_block());
}

Bytes compute_gamma(const SymKey& s, ByteSpan iv, ByteSpan fs, ByteSpan beta, ByteSpan payload) {
    return crypto::mac(hop_mac_key(s, iv), concat({fs, beta, payload}));
}

void require(bool cond, const char* what) {
    if (!cond) throw Error(std::string("codec: ") + what);
}

} // namespace

void PacketParams::validate() const {
    require(max_hops >= 2, "max_hops must be at least 2");
    require(iv_len == crypto::kIvLen, "iv width must match the 16-octet primitives");
    require(fs_len == crypto::kWideBlockLen, "fs width must match the 24-octet permutation");
    require(mac_len == crypto::kMacLen, "mac width must match the 16-octet tag");
    require(ctrl_len == 1 && exp_len == 4, "ctrl/exp widths are fixed at 1 and 4 octets");
    require(payload_len % 2 == 0, "payload length must be even");
    require(payload_len >= 2 * header_len(), "payload too small to hold two child packets");
}

Bytes RoutingSegment::encode() const {
    Bytes out(8);
    put_u32_be(out, 0, ingress);
    put_u32_be(out, 4, egress);
    return out;
}

RoutingSegment RoutingSegment::decode(ByteSpan b) {
    require(b.size() == 8, "routing segment must be 8 octets");
    return RoutingSegment{get_u32_be(b, 0), get_u32_be(b, 4)};
}

Bytes OnionPacket::serialize() const {
    return concat({as_span(iv), as_span(fs), as_span(gamma), as_span(beta), as_span(payload)});
}

OnionPacket OnionPacket::parse(const PacketParams& params, ByteSpan wire) {
    require(wire.size() == params.packet_len(), "wrong serialized packet length");
    OnionPacket p;
    std::size_t off = 0;
    auto take = [&](std::size_t n) {
        Bytes part(wire.begin() + off, wire.begin() + off + n);
        off += n;
        return part;
    };
    p.iv = take(params.iv_len);
    p.fs = take(params.fs_len);
    p.gamma = take(params.mac_len);
    p.beta = take(params.beta_len());
    p.payload = take(params.payload_len);
    return p;
}

Bytes fs_create(const SymKey& sv, const SymKey& s, const RoutingSegment& route) {
    return crypto::prp_encrypt(iv_chain_key(sv), concat({s.span(), as_span(route.encode())}));
}

std::pair<SymKey, RoutingSegment> fs_open(const SymKey& sv, ByteSpan fs) {
    require(fs.size() == crypto::kWideBlockLen, "forwarding segment must be 24 octets");
    Bytes plain = crypto::prp_decrypt(iv_chain_key(sv), fs);
    SymKey s = SymKey::from(ByteSpan(plain.data(), crypto::kKeyLen));
    RoutingSegment route = RoutingSegment::decode(ByteSpan(plain.data() + crypto::kKeyLen, 8));
    return {s, route};
}

Bytes advance_iv(const SymKey& s, ByteSpan iv) { return crypto::prp_encrypt(iv_chain_key(s), iv); }

Bytes delivery_iv(std::span<const HopMaterial> hops, ByteSpan iv0) {
    Bytes iv(iv0.begin(), iv0.end());
    for (const auto& hop : hops) iv = advance_iv(hop.s, as_span(iv));
    return iv;
}

OnionPacket create_onion(const PacketParams& params, std::span<const HopMaterial> hops,
                         ByteSpan iv0, ByteSpan payload) {
    params.validate();
    const std::size_t n = hops.size();
    require(n >= 1 && n <= params.max_path_nodes(), "path length out of range");
    require(iv0.size() == params.iv_len, "bad iv length");
    require(payload.size() == params.payload_len, "bad payload length");
    for (const auto& hop : hops) {
        require(hop.fs.size() == params.fs_len, "bad forwarding segment length");
    }

    const std::size_t d = params.hop_block();
    const std::size_t b = params.secret_block();
    const std::size_t r = params.max_hops;
    const std::size_t beta_len = params.beta_len();

    // Per-hop IVs and header keystreams.
    std::vector<Bytes> ivs(n);
    std::vector<Bytes> streams(n);
    ivs[0] = Bytes(iv0.begin(), iv0.end());
    for (std::size_t i = 1; i < n; ++i) ivs[i] = advance_iv(hops[i - 1].s, as_span(ivs[i - 1]));
    for (std::size_t i = 0; i < n; ++i) {
        streams[i] = hop_keystream(params, hops[i].s, as_span(ivs[i]));
    }

    // Filler: the keystream tail each hop's removal shifts into the header.
    // phi after step i has length (i+1)*d and equals the trailing octets of
    // the header the next hop must see for its MAC to verify.
    Bytes phi;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        phi.resize(phi.size() + d, 0);
        xor_into(phi, 0, ByteSpan(streams[i].data() + (r - 1 - i) * d, (i + 1) * d));
    }

    // Innermost layer: pre-compensated ctrl/exp, deterministic fill, filler.
    const HopMaterial& last = hops[n - 1];
    Bytes beta(beta_len, 0);
    beta[0] = static_cast<std::uint8_t>(last.ctrl);
    put_u32_be(beta, 1, last.exp);
    xor_into(beta, 0, ByteSpan(streams[n - 1].data(), b));
    const std::size_t fill_len = (r - n) * d - b;
    if (fill_len > 0) {
        Bytes fill = crypto::prg(split_pad_key(last.s, as_span(ivs[n - 1]), kFillLabel), fill_len);
        std::copy(fill.begin(), fill.end(), beta.begin() + b);
    }
    std::copy(phi.begin(), phi.end(), beta.begin() + (r - n) * d);

    Bytes onion = crypto::stream_encrypt(payload_key(last.s), as_span(ivs[n - 1]), payload);
    Bytes gamma = compute_gamma(last.s, as_span(ivs[n - 1]), as_span(last.fs), as_span(beta),
                                as_span(onion));

    // Outer layers, innermost to outermost.
    for (std::size_t idx = n - 1; idx-- > 0;) {
        const HopMaterial& hop = hops[idx];
        Bytes next_beta(beta_len);
        next_beta[0] = static_cast<std::uint8_t>(hop.ctrl);
        put_u32_be(next_beta, 1, hop.exp);
        std::copy(hops[idx + 1].fs.begin(), hops[idx + 1].fs.end(), next_beta.begin() + b);
        std::copy(gamma.begin(), gamma.end(), next_beta.begin() + b + params.fs_len);
        std::copy(beta.begin(), beta.begin() + (r - 2) * d, next_beta.begin() + d);
        xor_into(next_beta, 0, ByteSpan(streams[idx].data(), beta_len));

        beta = std::move(next_beta);
        onion = crypto::stream_encrypt(payload_key(hop.s), as_span(ivs[idx]), as_span(onion));
        gamma = compute_gamma(hop.s, as_span(ivs[idx]), as_span(hop.fs), as_span(beta),
                              as_span(onion));
    }

    OnionPacket packet;
    packet.iv = std::move(ivs[0]);
    packet.fs = hops[0].fs;
    packet.gamma = std::move(gamma);
    packet.beta = std::move(beta);
    packet.payload = std::move(onion);
    return packet;
}

std::optional<LayerOutput> remove_layer(const PacketParams& params, const OnionPacket& packet,
                                        const SymKey& sv) {
    require(packet.iv.size() == params.iv_len && packet.fs.size() == params.fs_len &&
                packet.gamma.size() == params.mac_len && packet.beta.size() == params.beta_len() &&
                packet.payload.size() == params.payload_len,
            "malformed packet");

    auto [s, route] = fs_open(sv, as_span(packet.fs));

    Bytes expect = compute_gamma(s, as_span(packet.iv), as_span(packet.fs), as_span(packet.beta),
                                 as_span(packet.payload));
    if (expect != packet.gamma) return std::nullopt;

    const std::size_t d = params.hop_block();
    const std::size_t b = params.secret_block();
    Bytes stream = hop_keystream(params, s, as_span(packet.iv));

    // zeta = (beta ‖ 0^d) ^ keystream, then parse one hop block off the front.
    Bytes zeta(params.max_hops * d, 0);
    std::copy(packet.beta.begin(), packet.beta.end(), zeta.begin());
    xor_into(zeta, 0, as_span(stream));

    std::uint8_t ctrl_octet = zeta[0];
    if (ctrl_octet != static_cast<std::uint8_t>(Ctrl::Fwd) &&
        ctrl_octet != static_cast<std::uint8_t>(Ctrl::Split)) {
        return std::nullopt;
    }

    LayerOutput out;
    out.ctrl = static_cast<Ctrl>(ctrl_octet);
    out.exp = get_u32_be(as_span(zeta), 1);
    out.route = route;
    out.flow_key = s;
    out.next.iv = advance_iv(s, as_span(packet.iv));
    out.next.fs = Bytes(zeta.begin() + b, zeta.begin() + b + params.fs_len);
    out.next.gamma = Bytes(zeta.begin() + b + params.fs_len, zeta.begin() + d);
    out.next.beta = Bytes(zeta.begin() + d, zeta.end());
    out.next.payload =
        crypto::stream_decrypt(payload_key(s), as_span(packet.iv), as_span(packet.payload));
    return out;
}

std::pair<OnionPacket, OnionPacket> split_onion(const PacketParams& params, ByteSpan payload,
                                                const SymKey& s, ByteSpan iv) {
    require(payload.size() == params.payload_len, "bad payload length");
    const std::size_t half = params.payload_len / 2;

    auto expand = [&](ByteSpan trunk, std::string_view label) {
        Bytes pad = crypto::prg(split_pad_key(s, iv, label), params.child_pad_len());
        Bytes wire = concat({trunk, as_span(pad)});
        return OnionPacket::parse(params, as_span(wire));
    };
    OnionPacket left = expand(payload.subspan(0, half), kLeftLabel);
    OnionPacket right = expand(payload.subspan(half, half), kRightLabel);
    return {std::move(left), std::move(right)};
}

OnionPacket create_splittable(const PacketParams& params, std::span<const HopMaterial> hops,
                              ByteSpan iv, ByteSpan iv0, ByteSpan iv1, ByteSpan child_payload0,
                              ByteSpan child_payload1, std::size_t split_index) {
    params.validate();
    const std::size_t n = hops.size();
    require(n >= 2 && n <= params.max_path_nodes(), "path length out of range");
    require(split_index >= 1 && split_index <= n - 1, "split index out of range");
    require(child_payload0.size() == params.child_payload_len() &&
                child_payload1.size() == params.child_payload_len(),
            "bad child payload length");
    require(iv.size() == params.iv_len && iv0.size() == params.iv_len &&
                iv1.size() == params.iv_len,
            "bad iv length");

    const std::size_t t = params.child_payload_len();
    const std::size_t m = params.payload_len;
    const std::size_t half = m / 2;

    // IV the parent carries when it reaches the split node; keys the padding
    // the node will regenerate.
    Bytes iv_at_split(iv.begin(), iv.end());
    for (std::size_t i = 0; i < split_index; ++i) {
        iv_at_split = advance_iv(hops[i].s, as_span(iv_at_split));
    }

    std::vector<HopMaterial> tail_hops(hops.begin() + split_index, hops.end());
    for (auto& hop : tail_hops) hop.ctrl = Ctrl::Fwd;

    auto build_child = [&](ByteSpan child_iv, ByteSpan chosen, std::string_view label) {
        Bytes target_pad =
            crypto::prg(split_pad_key(hops[split_index].s, as_span(iv_at_split), label),
                        params.child_pad_len());

        // The split node appends target_pad to the *encrypted* truncation, so
        // the plaintext tail must pre-compensate the payload-layer keystreams
        // (stream cipher is XOR keystream).
        Bytes mask(m, 0);
        Bytes civ(child_iv.begin(), child_iv.end());
        for (const auto& hop : tail_hops) {
            mask = crypto::stream_encrypt(payload_key(hop.s), as_span(civ), as_span(mask));
            civ = advance_iv(hop.s, as_span(civ));
        }
        Bytes plain(m);
        std::copy(chosen.begin(), chosen.end(), plain.begin());
        for (std::size_t j = t; j < m; ++j) plain[j] = target_pad[j - t] ^ mask[j];

        OnionPacket child = create_onion(params, tail_hops, child_iv, as_span(plain));
        // By construction the serialized child ends in target_pad.
        assert(std::equal(target_pad.begin(), target_pad.end(),
                          child.serialize().begin() + half));
        return child;
    };

    OnionPacket child0 = build_child(iv0, child_payload0, kLeftLabel);
    OnionPacket child1 = build_child(iv1, child_payload1, kRightLabel);

    Bytes wire0 = child0.serialize();
    Bytes wire1 = child1.serialize();
    Bytes parent_payload = concat(
        {ByteSpan(wire0.data(), half), ByteSpan(wire1.data(), half)});

    std::vector<HopMaterial> head_hops(hops.begin(), hops.begin() + split_index + 1);
    for (std::size_t i = 0; i < head_hops.size(); ++i) {
        head_hops[i].ctrl = (i == split_index) ? Ctrl::Split : Ctrl::Fwd;
    }
    return create_onion(params, head_hops, iv, as_span(parent_payload));
}

void assign_expirations(std::vector<HopMaterial>& hops, std::uint32_t exp_min,
                        std::uint32_t delta_max, Rng& rng) {
    for (auto& hop : hops) {
        hop.delta = static_cast<std::uint32_t>(rng.uniform_u64(std::uint64_t(delta_max) + 1));
        hop.exp = exp_min + hop.delta;
    }
}

void refresh_expirations(std::vector<HopMaterial>& hops, std::uint32_t exp_min) {
    for (auto& hop : hops) hop.exp = exp_min + hop.delta;
}

Bytes seal_payload(const SymKey& s_sd, ByteSpan delivery_iv, PayloadKind kind, ByteSpan data,
                   std::size_t sealed_len) {
    require(data.size() + 3 <= sealed_len, "data too long for sealed payload");
    require(data.size() <= 0xFFFF, "data too long for length field");
    Bytes plain(sealed_len, 0);
    plain[0] = static_cast<std::uint8_t>(kind);
    put_u16_be(plain, 1, static_cast<std::uint16_t>(data.size()));
    std::copy(data.begin(), data.end(), plain.begin() + 3);
    return crypto::stream_encrypt(payload_key(s_sd), delivery_iv, as_span(plain));
}

std::optional<OpenedPayload> open_payload(const SymKey& s_sd, ByteSpan delivery_iv,
                                          ByteSpan sealed) {
    if (sealed.size() < 3) return std::nullopt;
    Bytes plain = crypto::stream_decrypt(payload_key(s_sd), delivery_iv, sealed);
    if (plain[0] != static_cast<std::uint8_t>(PayloadKind::Data) &&
        plain[0] != static_cast<std::uint8_t>(PayloadKind::Chaff)) {
        return std::nullopt;
    }
    std::size_t len = get_u16_be(as_span(plain), 1);
    if (3 + len > plain.size()) return std::nullopt;
    OpenedPayload out;
    out.kind = static_cast<PayloadKind>(plain[0]);
    out.data = Bytes(plain.begin() + 3, plain.begin() + 3 + len);
    return out;
}

} // namespace veil::codec

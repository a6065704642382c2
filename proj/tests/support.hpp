#ifndef VEIL_TESTS_SUPPORT_HPP
#define VEIL_TESTS_SUPPORT_HPP

#include <vector>

#include "veil/codec.hpp"
#include "veil/rng.hpp"

// Shared test fixtures: a hand-rolled provisioning oracle that stands in for
// the setup phase, and small statistics helpers for the DERIVED examples.
namespace veil::test {

inline crypto::SymKey random_key(Rng& rng) {
    return crypto::SymKey::from(as_span(rng.bytes(crypto::kKeyLen)));
}

struct TestPath {
    std::vector<crypto::SymKey> svs; ///< node-local secrets, one per hop
    codec::PathMaterial material;
};

/// Provision an n-node path: node i forwards out of link id i+1, the last
/// node delivers locally. Expirations default far in the future.
inline TestPath make_test_path(const codec::PacketParams& params, std::size_t n, Rng& rng,
                               std::uint32_t exp = 0x7FFFFFFF) {
    (void)params;
    TestPath tp;
    tp.material.s_sd = random_key(rng);
    for (std::size_t i = 0; i < n; ++i) {
        crypto::SymKey sv = random_key(rng);
        crypto::SymKey s = random_key(rng);
        codec::RoutingSegment route;
        route.ingress = static_cast<std::uint32_t>(i);
        route.egress = (i + 1 == n) ? codec::RoutingSegment::kDeliverLocal
                                    : static_cast<std::uint32_t>(i + 1);
        codec::HopMaterial hop;
        hop.s = s;
        hop.fs = codec::fs_create(sv, s, route);
        hop.ctrl = codec::Ctrl::Fwd;
        hop.exp = exp;
        tp.svs.push_back(sv);
        tp.material.hops.push_back(std::move(hop));
    }
    return tp;
}

/// Walk a packet through nodes first..last, asserting nothing; returns the
/// per-hop outputs (empty element means the packet was dropped there).
inline std::vector<std::optional<codec::LayerOutput>> walk_path(
    const codec::PacketParams& params, const TestPath& tp, codec::OnionPacket packet,
    std::size_t first = 0) {
    std::vector<std::optional<codec::LayerOutput>> outs;
    for (std::size_t i = first; i < tp.svs.size(); ++i) {
        auto out = codec::remove_layer(params, packet, tp.svs[i]);
        outs.push_back(out);
        if (!out) break;
        packet = out->next;
    }
    return outs;
}

/// Pearson chi-square statistic against a uniform expectation.
inline double chi_square_uniform(const std::vector<std::size_t>& counts) {
    std::size_t total = 0;
    for (auto c : counts) total += c;
    double expected = static_cast<double>(total) / counts.size();
    double stat = 0.0;
    for (auto c : counts) {
        double diff = static_cast<double>(c) - expected;
        stat += diff * diff / expected;
    }
    return stat;
}

inline double bit_difference_fraction(ByteSpan a, ByteSpan b) {
    return static_cast<double>(hamming_distance(a, b)) / (8.0 * a.size());
}

} // namespace veil::test

#endif

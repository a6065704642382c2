#ifndef VEIL_SHAPING_HPP
#define VEIL_SHAPING_HPP

#include <cstdint>
#include <deque>
#include <optional>

#include "veil/codec.hpp"
#include "veil/rng.hpp"

// End-to-end traffic shaping. A sender-side flowlet emits exactly one packet
// per slot of width 1/rate for its whole lifetime: splittable chaff when a
// per-hop Bernoulli draw fires, else queued data, else plain chaff. Nodes
// keep a small per-flowlet chaff reserve (split children) to bridge upstream
// holes; a node that can serve a slot neither from data nor from chaff
// counts a failure, and more than fail_threshold consecutive failures
// terminate the flowlet.
namespace veil::shaping {

struct FlowletConfig {
    double rate_pps = 100.0;                 ///< B
    std::int64_t lifetime_ns = 60'000'000'000; ///< T
    std::uint32_t fail_threshold = 2;        ///< H
    std::size_t chaff_cap = 3;               ///< L_chf
    std::vector<double> split_prob;          ///< Pr_i^split per hop index
    std::uint32_t pad_max = 16;              ///< trailing shutdown chaff slots
    std::uint32_t exp_lead_s = 1;            ///< exp_min = now + lead
    std::uint32_t delta_max_s = 5;           ///< per-hop expiration offset bound

    void validate() const;
};

/// Trailing pad slots drawn at shutdown, uniform over [0, pad_max].
std::uint32_t draw_shutdown_padding(std::uint32_t pad_max, Rng& rng);

class SenderFlowlet {
public:
    struct Emission {
        enum class Kind { Data, Chaff, SplitChaff };
        Kind kind;
        codec::OnionPacket packet;
        std::size_t split_hop = 0; ///< meaningful for SplitChaff
    };

    SenderFlowlet(const codec::PacketParams& params, codec::PathMaterial path,
                  FlowletConfig cfg, std::int64_t start_ns, std::uint64_t seed);

    void enqueue_data(Bytes app_payload);
    std::size_t data_backlog() const { return data_queue_.size(); }

    /// No more data will be enqueued: once the queue drains, pad with a
    /// random number of chaff slots and stop.
    void request_shutdown() { shutdown_requested_ = true; }

    std::int64_t slot_period_ns() const { return slot_period_ns_; }
    std::int64_t next_slot_ns() const { return start_ns_ + slot_period_ns_ * next_slot_; }
    bool active() const { return active_; }
    std::uint64_t slots_emitted() const { return next_slot_; }

    /// Emit this slot's packet, or nullopt when the flowlet has ended
    /// (lifetime exhausted, or data drained and padding spent).
    std::optional<Emission> emit_slot(std::int64_t now_ns);

private:
    codec::OnionPacket build_data(std::int64_t now_ns, ByteSpan app_payload);
    codec::OnionPacket build_chaff(std::int64_t now_ns);
    codec::OnionPacket build_split_chaff(std::int64_t now_ns, std::size_t hop);
    void stamp_expirations(std::int64_t now_ns);

    codec::PacketParams params_;
    codec::PathMaterial path_;
    FlowletConfig cfg_;
    std::int64_t start_ns_;
    std::int64_t slot_period_ns_;
    Rng rng_;
    std::deque<Bytes> data_queue_;
    std::uint64_t next_slot_ = 0;
    bool shutdown_requested_ = false;
    std::optional<std::uint32_t> pad_remaining_;
    bool active_ = true;
};

/// Node-side per-flowlet state: processed-and-ready data packets, the chaff
/// reserve of cached split children, and the failure counter. The owner
/// (one node's event loop) runs the codec pipeline; this class only tracks
/// queues and the termination rule.
class NodeFlowlet {
public:
    struct CachedChild {
        codec::OnionPacket packet;
        std::uint32_t exp; ///< this node's layer expiration, peeked at split time
    };

    struct ReadyPacket {
        Bytes wire;
        std::uint32_t egress;
    };

    enum class Action { EmitData, EmitChaff, CountFailure, Terminate };

    struct Tick {
        Action action;
        std::optional<ReadyPacket> data;       ///< set for EmitData
        std::optional<codec::OnionPacket> child; ///< set for EmitChaff
    };

    NodeFlowlet(std::uint32_t fail_threshold, std::size_t chaff_cap)
        : fail_threshold_(fail_threshold), chaff_cap_(chaff_cap) {}

    void accept_data(ReadyPacket packet) { data_queue_.push_back(std::move(packet)); }

    /// Cache both split children; entries past the capacity are dropped
    /// newest-first. Returns how many were kept.
    std::size_t accept_split(CachedChild first, CachedChild second);

    /// One slot: serve data, else chaff (expired entries evicted first),
    /// else count a failure; more than fail_threshold consecutive failures
    /// terminate the flowlet.
    Tick tick(std::uint32_t now_s);

    bool terminated() const { return terminated_; }
    std::uint32_t fail_count() const { return fail_count_; }
    std::size_t chaff_depth() const { return chaff_queue_.size(); }
    std::size_t data_depth() const { return data_queue_.size(); }
    std::uint64_t chaff_dropped() const { return chaff_dropped_; }
    std::uint64_t chaff_expired() const { return chaff_expired_; }

private:
    std::uint32_t fail_threshold_;
    std::size_t chaff_cap_;
    std::uint32_t fail_count_ = 0;
    bool terminated_ = false;
    std::deque<ReadyPacket> data_queue_;
    std::deque<CachedChild> chaff_queue_;
    std::uint64_t chaff_dropped_ = 0;
    std::uint64_t chaff_expired_ = 0;
};

} // namespace veil::shaping

#endif

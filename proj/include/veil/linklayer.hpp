#ifndef VEIL_LINKLAYER_HPP
#define VEIL_LINKLAYER_HPP

#include <cstdint>
#include <deque>
#include <optional>

#include "veil/crypto.hpp"
#include "veil/rng.hpp"

// Neighbor link encryption and padding. Every slot on a link direction
// carries exactly one fixed-size frame: a PROTOCOL frame when a packet is
// queued, a LINK_CHAFF frame otherwise. Chaff only crosses the link and is
// absorbed by the neighbor.
//
// Frame wire layout: nonce(16) ‖ ct, where ct = stream(tag(1) ‖ body) under
// the direction key. Total length is constant: 17 + packet_len octets.
namespace veil::linklayer {

enum class FrameKind : std::uint8_t {
    Protocol = 0x00,
    LinkChaff = 0x01,
};

struct ScheduleEntry {
    std::int64_t begin_ns = 0;
    std::int64_t end_ns = 0; ///< exclusive
    double rate_pps = 0.0;
};

struct LinkConfig {
    crypto::SymKey key;          ///< provisioned; stands in for the DH agreement
    double base_rate = 100.0;    ///< frames per second outside any schedule entry
    std::vector<ScheduleEntry> schedule;
    std::size_t packet_len = 1395;
    std::size_t queue_cap = 64;  ///< beyond this, offered packets are dropped
    std::uint64_t seed = 0;      ///< chaff body generator

    void validate() const;
    std::size_t frame_len() const { return crypto::kIvLen + 1 + packet_len; }
};

/// Rate in force at `now`: the matching schedule entry's historic mean plus
/// k_f standard deviations, else the base rate. Takes only link-level
/// aggregates, never a flowlet's instantaneous rate.
double scheduled_rate(const LinkConfig& cfg, std::int64_t now_ns, double hist_mean_pps,
                      double hist_std_pps, double k_factor);

/// One direction of a link; the peer holds a LinkReceiver with the same
/// (key, direction).
class LinkSender {
public:
    LinkSender(const LinkConfig& cfg, int direction);

    /// Queue a packet for the next slots. False = queue full, packet dropped.
    bool offer(Bytes packet);

    /// Emit the frame for one slot: a queued packet if any, chaff otherwise.
    Bytes send_slot();

    std::size_t queue_depth() const { return queue_.size(); }
    std::uint64_t frames_sent() const { return frames_sent_; }
    std::uint64_t packets_dropped() const { return packets_dropped_; }

private:
    Bytes seal(FrameKind kind, ByteSpan body);

    LinkConfig cfg_;
    crypto::SymKey dir_key_;
    std::uint64_t nonce_counter_ = 0;
    std::uint64_t frames_sent_ = 0;
    std::uint64_t packets_dropped_ = 0;
    std::deque<Bytes> queue_;
    Rng chaff_rng_;
};

class LinkReceiver {
public:
    LinkReceiver(const LinkConfig& cfg, int direction);

    /// Decrypt one frame. A protocol frame yields its packet; chaff and
    /// malformed frames yield nothing (malformed ones are counted).
    std::optional<Bytes> receive(ByteSpan frame);

    std::uint64_t chaff_seen() const { return chaff_seen_; }
    std::uint64_t malformed_seen() const { return malformed_seen_; }

private:
    LinkConfig cfg_;
    crypto::SymKey dir_key_;
    std::uint64_t chaff_seen_ = 0;
    std::uint64_t malformed_seen_ = 0;
};

} // namespace veil::linklayer

#endif

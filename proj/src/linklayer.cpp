#include "veil/linklayer.hpp"

namespace veil::linklayer {

namespace {

crypto::SymKey direction_key(const crypto::SymKey& link_key, int direction) {
    if (direction != 0 && direction != 1) throw Error("linklayer: direction must be 0 or 1");
    std::uint8_t tag = static_cast<std::uint8_t>(direction);
    return crypto::kdf(concat({link_key.span(), ByteSpan(&tag, 1)}), crypto::KdfLabel::Enc);
}

// Frame counter sits in the high 8 octets; the low 8 are block-counter
// space, so successive frames can never reuse keystream blocks.
Bytes make_nonce(std::uint64_t counter) {
    Bytes nonce(crypto::kIvLen, 0);
    for (int i = 0; i < 8; ++i) {
        nonce[7 - i] = static_cast<std::uint8_t>(counter >> (8 * i));
    }
    return nonce;
}

} // namespace

void LinkConfig::validate() const {
    if (base_rate <= 0.0) throw Error("linklayer: base rate must be positive");
    if (packet_len == 0) throw Error("linklayer: packet length must be positive");
    for (const auto& e : schedule) {
        if (e.end_ns <= e.begin_ns) throw Error("linklayer: empty schedule interval");
        if (e.rate_pps <= 0.0) throw Error("linklayer: schedule rate must be positive");
        for (const auto& o : schedule) {
            if (&e != &o && e.begin_ns < o.end_ns && o.begin_ns < e.end_ns) {
                throw Error("linklayer: overlapping schedule intervals");
            }
        }
    }
}

double scheduled_rate(const LinkConfig& cfg, std::int64_t now_ns, double hist_mean_pps,
                      double hist_std_pps, double k_factor) {
    for (const auto& e : cfg.schedule) {
        if (now_ns >= e.begin_ns && now_ns < e.end_ns) {
            return hist_mean_pps + k_factor * hist_std_pps;
        }
    }
    return cfg.base_rate;
}

LinkSender::LinkSender(const LinkConfig& cfg, int direction)
    : cfg_(cfg),
      dir_key_(direction_key(cfg.key, direction)),
      chaff_rng_(Rng::derive(cfg.seed, {0x11A6u, static_cast<std::uint64_t>(direction)})) {
    cfg_.validate();
}

bool LinkSender::offer(Bytes packet) {
    if (packet.size() != cfg_.packet_len) throw Error("linklayer: wrong packet length offered");
    if (queue_.size() >= cfg_.queue_cap) {
        ++packets_dropped_;
        return false;
    }
    queue_.push_back(std::move(packet));
    return true;
}

Bytes LinkSender::seal(FrameKind kind, ByteSpan body) {
    Bytes nonce = make_nonce(nonce_counter_++);
    Bytes plain(1 + body.size());
    plain[0] = static_cast<std::uint8_t>(kind);
    std::copy(body.begin(), body.end(), plain.begin() + 1);
    Bytes ct = crypto::stream_encrypt(dir_key_, as_span(nonce), as_span(plain));
    ++frames_sent_;
    return concat({as_span(nonce), as_span(ct)});
}

Bytes LinkSender::send_slot() {
    if (!queue_.empty()) {
        Bytes packet = std::move(queue_.front());
        queue_.pop_front();
        return seal(FrameKind::Protocol, as_span(packet));
    }
    Bytes padding = chaff_rng_.bytes(cfg_.packet_len);
    return seal(FrameKind::LinkChaff, as_span(padding));
}

LinkReceiver::LinkReceiver(const LinkConfig& cfg, int direction)
    : cfg_(cfg), dir_key_(direction_key(cfg.key, direction)) {
    cfg_.validate();
}

std::optional<Bytes> LinkReceiver::receive(ByteSpan frame) {
    if (frame.size() != cfg_.frame_len()) {
        ++malformed_seen_;
        return std::nullopt;
    }
    ByteSpan nonce = frame.subspan(0, crypto::kIvLen);
    Bytes plain = crypto::stream_decrypt(dir_key_, nonce, frame.subspan(crypto::kIvLen));
    if (plain[0] == static_cast<std::uint8_t>(FrameKind::LinkChaff)) {
        ++chaff_seen_;
        return std::nullopt;
    }
    if (plain[0] != static_cast<std::uint8_t>(FrameKind::Protocol)) {
        ++malformed_seen_;
        return std::nullopt;
    }
    return Bytes(plain.begin() + 1, plain.end());
}

} // namespace veil::linklayer

#include "veil/shaping.hpp"

#include <cmath>

namespace veil::shaping {

namespace {

constexpr std::int64_t kNsPerSecond = 1'000'000'000;

std::uint32_t seconds_of(std::int64_t ns) { return static_cast<std::uint32_t>(ns / kNsPerSecond); }

} // namespace

void FlowletConfig::validate() const {
    if (rate_pps <= 0.0) throw Error("shaping: rate must be positive");
    if (lifetime_ns <= 0) throw Error("shaping: lifetime must be positive");
    if (fail_threshold < 1) throw Error("shaping: fail threshold must be at least 1");
    for (double p : split_prob) {
        if (p < 0.0 || p > 1.0) throw Error("shaping: split probability out of [0,1]");
    }
}

std::uint32_t draw_shutdown_padding(std::uint32_t pad_max, Rng& rng) {
    return static_cast<std::uint32_t>(rng.uniform_u64(std::uint64_t(pad_max) + 1));
}

SenderFlowlet::SenderFlowlet(const codec::PacketParams& params, codec::PathMaterial path,
                             FlowletConfig cfg, std::int64_t start_ns, std::uint64_t seed)
    : params_(params), path_(std::move(path)), cfg_(std::move(cfg)), start_ns_(start_ns),
      rng_(seed) {
    params_.validate();
    cfg_.validate();
    if (path_.hops.empty() || path_.hops.size() > params_.max_path_nodes()) {
        throw Error("shaping: path length out of range");
    }
    if (cfg_.split_prob.empty()) cfg_.split_prob.assign(path_.hops.size(), 0.0);
    if (cfg_.split_prob.size() != path_.hops.size()) {
        throw Error("shaping: split probability list must match the path length");
    }
    slot_period_ns_ = static_cast<std::int64_t>(std::llround(double(kNsPerSecond) / cfg_.rate_pps));
    if (slot_period_ns_ <= 0) throw Error("shaping: rate too high for the ns clock");
    codec::assign_expirations(path_.hops, 0, cfg_.delta_max_s, rng_);
}

void SenderFlowlet::enqueue_data(Bytes app_payload) {
    if (app_payload.size() + 3 > params_.payload_len) {
        throw Error("shaping: application payload too large for one packet");
    }
    data_queue_.push_back(std::move(app_payload));
}

void SenderFlowlet::stamp_expirations(std::int64_t now_ns) {
    codec::refresh_expirations(path_.hops, seconds_of(now_ns) + cfg_.exp_lead_s);
}

codec::OnionPacket SenderFlowlet::build_data(std::int64_t now_ns, ByteSpan app_payload) {
    stamp_expirations(now_ns);
    Bytes iv = rng_.bytes(params_.iv_len);
    Bytes div = codec::delivery_iv(path_.hops, as_span(iv));
    Bytes sealed = codec::seal_payload(path_.s_sd, as_span(div), codec::PayloadKind::Data,
                                       app_payload, params_.payload_len);
    return codec::create_onion(params_, path_.hops, as_span(iv), as_span(sealed));
}

codec::OnionPacket SenderFlowlet::build_chaff(std::int64_t now_ns) {
    stamp_expirations(now_ns);
    Bytes iv = rng_.bytes(params_.iv_len);
    Bytes div = codec::delivery_iv(path_.hops, as_span(iv));
    Bytes sealed = codec::seal_payload(path_.s_sd, as_span(div), codec::PayloadKind::Chaff,
                                       ByteSpan{}, params_.payload_len);
    return codec::create_onion(params_, path_.hops, as_span(iv), as_span(sealed));
}

codec::OnionPacket SenderFlowlet::build_split_chaff(std::int64_t now_ns, std::size_t hop) {
    stamp_expirations(now_ns);
    Bytes iv = rng_.bytes(params_.iv_len);
    Bytes iv0 = rng_.bytes(params_.iv_len);
    Bytes iv1 = rng_.bytes(params_.iv_len);

    std::span<const codec::HopMaterial> tail(path_.hops.data() + hop, path_.hops.size() - hop);
    auto child_payload = [&](ByteSpan child_iv) {
        Bytes div = codec::delivery_iv(tail, child_iv);
        Bytes sealed = codec::seal_payload(path_.s_sd, as_span(div), codec::PayloadKind::Chaff,
                                           ByteSpan{}, params_.payload_len);
        sealed.resize(params_.child_payload_len());
        return sealed;
    };
    Bytes pay0 = child_payload(as_span(iv0));
    Bytes pay1 = child_payload(as_span(iv1));
    return codec::create_splittable(params_, path_.hops, as_span(iv), as_span(iv0), as_span(iv1),
                                    as_span(pay0), as_span(pay1), hop);
}

std::optional<SenderFlowlet::Emission> SenderFlowlet::emit_slot(std::int64_t now_ns) {
    if (!active_) return std::nullopt;
    if (now_ns - start_ns_ >= cfg_.lifetime_ns) {
        active_ = false;
        return std::nullopt;
    }

    // Shutdown padding: once the data queue drains after a shutdown request,
    // emit a uniform random number of trailing chaff slots, then stop.
    if (shutdown_requested_ && data_queue_.empty()) {
        if (!pad_remaining_) pad_remaining_ = draw_shutdown_padding(cfg_.pad_max, rng_);
        if (*pad_remaining_ == 0) {
            active_ = false;
            return std::nullopt;
        }
        --*pad_remaining_;
        ++next_slot_;
        return Emission{Emission::Kind::Chaff, build_chaff(now_ns), 0};
    }

    // Splittable chaff wins the slot; ties break toward the smallest hop.
    std::optional<std::size_t> split_hop;
    for (std::size_t i = 1; i < path_.hops.size(); ++i) {
        if (rng_.bernoulli(cfg_.split_prob[i]) && !split_hop) split_hop = i;
    }
    ++next_slot_;
    if (split_hop) {
        return Emission{Emission::Kind::SplitChaff, build_split_chaff(now_ns, *split_hop),
                        *split_hop};
    }
    if (!data_queue_.empty()) {
        Bytes payload = std::move(data_queue_.front());
        data_queue_.pop_front();
        return Emission{Emission::Kind::Data, build_data(now_ns, as_span(payload)), 0};
    }
    return Emission{Emission::Kind::Chaff, build_chaff(now_ns), 0};
}

std::size_t NodeFlowlet::accept_split(CachedChild first, CachedChild second) {
    std::size_t kept = 0;
    for (auto* child : {&first, &second}) {
        if (chaff_queue_.size() < chaff_cap_) {
            chaff_queue_.push_back(std::move(*child));
            ++kept;
        } else {
            ++chaff_dropped_;
        }
    }
    return kept;
}

NodeFlowlet::Tick NodeFlowlet::tick(std::uint32_t now_s) {
    if (terminated_) throw Error("shaping: tick on a terminated flowlet");

    if (!data_queue_.empty()) {
        Tick t{Action::EmitData, std::move(data_queue_.front()), std::nullopt};
        data_queue_.pop_front();
        fail_count_ = 0;
        return t;
    }

    // Evict cached children whose own layer would already be expired.
    while (!chaff_queue_.empty() && chaff_queue_.front().exp <= now_s) {
        chaff_queue_.pop_front();
        ++chaff_expired_;
    }
    if (!chaff_queue_.empty()) {
        Tick t{Action::EmitChaff, std::nullopt, std::move(chaff_queue_.front().packet)};
        chaff_queue_.pop_front();
        fail_count_ = 0;
        return t;
    }

    ++fail_count_;
    if (fail_count_ > fail_threshold_) {
        terminated_ = true;
        return Tick{Action::Terminate, std::nullopt, std::nullopt};
    }
    return Tick{Action::CountFailure, std::nullopt, std::nullopt};
}

} // namespace veil::shaping

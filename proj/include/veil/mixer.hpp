#ifndef VEIL_MIXER_HPP
#define VEIL_MIXER_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "veil/bytes.hpp"
#include "veil/rng.hpp"

// Setup-phase batching: accumulate setup messages into batches of a fixed
// size, emit each batch in a uniformly random order. One mixer per node;
// callers provide mutual exclusion.
namespace veil::mixer {

struct MixerConfig {
    std::size_t batch_size = 16;
    std::uint64_t seed = 0;

    void validate() const {
        if (batch_size == 0) throw Error("mixer: batch_size must be at least 1");
    }
};

class Mixer {
public:
    explicit Mixer(const MixerConfig& cfg) : cfg_(cfg), rng_(cfg.seed) { cfg_.validate(); }

    /// Buffers msg; returns the whole batch, uniformly permuted, when it is
    /// the batch_size-th message.
    std::optional<std::vector<Bytes>> offer(Bytes msg) {
        pending_.push_back(std::move(msg));
        if (pending_.size() < cfg_.batch_size) return std::nullopt;
        std::vector<Bytes> batch;
        batch.swap(pending_);
        rng_.shuffle(batch);
        return batch;
    }

    /// Emit a partial batch (liveness valve for low-rate simulations; off in
    /// acceptance runs, which only ever flush full batches).
    std::optional<std::vector<Bytes>> flush() {
        if (pending_.empty()) return std::nullopt;
        std::vector<Bytes> batch;
        batch.swap(pending_);
        rng_.shuffle(batch);
        return batch;
    }

    std::size_t pending_count() const { return pending_.size(); }

private:
    MixerConfig cfg_;
    Rng rng_;
    std::vector<Bytes> pending_;
};

/// Mean residence added by batching at an arrival rate of r_setup msgs/s.
inline double expected_batch_latency(std::size_t batch_size, double setup_rate) {
    if (setup_rate <= 0.0) throw Error("mixer: setup rate must be positive");
    return static_cast<double>(batch_size) / setup_rate;
}

} // namespace veil::mixer

#endif

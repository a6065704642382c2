#include "veil/replay.hpp"

#include <algorithm>
#include <cmath>

namespace veil::replay {

namespace {

constexpr double kLn2Sq = 0.4804530139182014; // (ln 2)^2

// The detector dimensions its bit array for target_fp / kInternalFpFactor.
// A blocked layout pays a false-positive inflation from block-load
// dispersion; this factor plus the two-block probe split keeps the measured
// rate within 2x of the configured target (see tests).
constexpr double kInternalFpFactor = 8.0;

std::uint64_t splitmix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t read_u64_le(ByteSpan b, std::size_t off) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[off + static_cast<std::size_t>(i)];
    return v;
}

double std_bits_per_key(double p) { return -std::log(p) / kLn2Sq; }

/// Analytic expected FP of a two-block split filter with Poisson block loads.
double split_filter_fp(double bits_per_key, int k, double bits_per_block) {
    int k_half = k / 2;
    double lam = 2.0 * bits_per_block / bits_per_key; // keys touching a block
    double total = 0.0;
    double pmf = std::exp(-lam); // Poisson(0)
    for (int load = 0; load < 512; ++load) {
        if (load > 0) pmf *= lam / load;
        double fill = 1.0 - std::exp(-double(k_half) * load / bits_per_block);
        total += pmf * std::pow(fill, k_half);
        if (pmf < 1e-18 && load > lam) break;
    }
    return total * total;
}

} // namespace

void ReplayConfig::validate() const {
    if (ttl_ns <= 0) throw Error("replay: ttl must be positive");
    if (!(target_fp > 0.0 && target_fp < 1.0)) throw Error("replay: target_fp out of (0,1)");
    if (capacity == 0) throw Error("replay: capacity must be positive");
    if (block_size == 0 || block_size % 8 != 0) throw Error("replay: block_size must be a multiple of 8");
}

Bytes replay_key(const crypto::SymKey& s, ByteSpan iv) {
    return crypto::mac(crypto::kdf(s.span(), crypto::KdfLabel::Mac), iv);
}

std::size_t size_filter(const ReplayConfig& cfg) {
    cfg.validate();
    double bits = double(cfg.capacity) * std_bits_per_key(cfg.target_fp);
    std::size_t bytes = static_cast<std::size_t>(std::ceil(bits / 8.0));
    std::size_t blocks = std::max<std::size_t>(1, (bytes + cfg.block_size - 1) / cfg.block_size);
    return 3 * blocks * cfg.block_size;
}

RotatingBloom::RotatingBloom(const ReplayConfig& cfg, std::int64_t origin_ns)
    : cfg_(cfg), origin_ns_(origin_ns), last_now_ns_(origin_ns) {
    cfg_.validate();
    half_ttl_ns_ = cfg_.ttl_ns / 2;
    if (half_ttl_ns_ == 0) throw Error("replay: ttl too small for the ns clock");

    bits_per_block_ = cfg_.block_size * 8;
    double bpk = std_bits_per_key(cfg_.target_fp / kInternalFpFactor);
    double bits = double(cfg_.capacity) * bpk;
    n_blocks_ = std::max<std::size_t>(
        2, static_cast<std::size_t>(std::ceil(bits / double(bits_per_block_))));

    // Even k minimizing the analytic blocked false-positive rate.
    int best_k = 2;
    double best_fp = 1.0;
    int k_cap = std::max(4, static_cast<int>(std::lround(bpk)));
    for (int k = 2; k <= k_cap; k += 2) {
        double fp = split_filter_fp(bpk, k, double(bits_per_block_));
        if (fp < best_fp) {
            best_fp = fp;
            best_k = k;
        }
    }
    k_ = best_k;

    std::size_t words = n_blocks_ * (cfg_.block_size / 8);
    for (auto& f : filters_) f.words.assign(words, 0);
}

std::size_t RotatingBloom::memory_bytes() const { return 3 * n_blocks_ * cfg_.block_size; }

std::int64_t RotatingBloom::epoch_of(std::int64_t now_ns) const {
    return (now_ns - origin_ns_) / half_ttl_ns_;
}

void RotatingBloom::advance_epochs(std::int64_t epoch) {
    if (epoch <= current_epoch_) return;
    std::int64_t first = std::max(current_epoch_ + 1, epoch - 2);
    for (std::int64_t e = first; e <= epoch; ++e) filters_[e % 3].clear();
    current_epoch_ = epoch;
}

template <typename WordFn>
void RotatingBloom::for_each_probe_bit(ByteSpan key, WordFn&& fn) const {
    std::uint64_t h1 = splitmix(read_u64_le(key, 0));
    std::uint64_t h2 = splitmix(read_u64_le(key, 8) ^ 0x5bf03635ULL);
    const std::size_t words_per_block = cfg_.block_size / 8;
    const int k_half = k_ / 2;

    std::uint64_t block_pick = h1;
    for (int half = 0; half < 2; ++half) {
        std::size_t block = static_cast<std::size_t>(block_pick % n_blocks_) * words_per_block;
        std::uint64_t idx = h2 ^ (0x9e3779b97f4a7c15ULL * std::uint64_t(half + 1));
        for (int j = 0; j < k_half; ++j) {
            idx = splitmix(idx);
            std::size_t bit = static_cast<std::size_t>(idx % bits_per_block_);
            if (!fn(block + bit / 64, std::uint64_t{1} << (bit % 64))) return;
        }
        block_pick = splitmix(h1 ^ h2);
    }
}

bool RotatingBloom::contains(const Subfilter& f, ByteSpan key) const {
    bool present = true;
    for_each_probe_bit(key, [&](std::size_t word, std::uint64_t mask) {
        if (!(f.words[word] & mask)) {
            present = false;
            return false;
        }
        return true;
    });
    return present;
}

void RotatingBloom::insert(Subfilter& f, ByteSpan key) const {
    for_each_probe_bit(key, [&](std::size_t word, std::uint64_t mask) {
        f.words[word] |= mask;
        return true;
    });
}

bool RotatingBloom::test_all(ByteSpan key) const {
    for (const auto& f : filters_) {
        if (contains(f, key)) return true;
    }
    return false;
}

RotatingBloom::Verdict RotatingBloom::check_and_insert(ByteSpan key, std::int64_t now_ns) {
    if (key.size() < 16) throw Error("replay: key must be at least 16 octets");
    if (now_ns < last_now_ns_) throw Error("replay: time went backwards");
    if (now_ns < origin_ns_) throw Error("replay: time before detector origin");
    last_now_ns_ = now_ns;

    advance_epochs(epoch_of(now_ns));
    if (test_all(key)) return Verdict::Replay;
    insert(filters_[current_epoch_ % 3], key);
    return Verdict::Fresh;
}

} // namespace veil::replay

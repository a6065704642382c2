#ifndef VEIL_REPLAY_HPP
#define VEIL_REPLAY_HPP

#include <cstdint>
#include <vector>

#include "veil/crypto.hpp"

// Rotating blocked-Bloom-filter replay detector. Three subfilters rotate on
// a ttl/2 epoch grid: a key inserted in epoch i lives in subfilter i mod 3
// until that subfilter is cleared at the start of epoch i+3, giving every
// insertion a guaranteed memory lifetime in [ttl, 1.5*ttl]. State depends
// only on (capacity, target_fp), never on the number of flowlets.
namespace veil::replay {

struct ReplayConfig {
    std::int64_t ttl_ns = 6'000'000'000; ///< maximum packet lifetime
    double target_fp = 1e-6;
    std::size_t capacity = 1'000'000; ///< expected insertions per ttl/2 window
    std::size_t block_size = 64;      ///< octets per cache-line block

    void validate() const;
};

/// Replay key for a packet: keyed digest of the recovered (s, iv) pair, so
/// an adversary cannot predict filter positions.
Bytes replay_key(const crypto::SymKey& s, ByteSpan iv);

/// Standard Bloom dimensioning: bits = -n ln(p) / (ln 2)^2 per subfilter,
/// three subfilters, each rounded up to whole blocks. This is the sizing
/// *formula* (also served by the CLI); the detector itself adds a small
/// safety factor to absorb the blocked-layout false-positive inflation.
std::size_t size_filter(const ReplayConfig& cfg);

class RotatingBloom {
public:
    enum class Verdict { Fresh, Replay };

    RotatingBloom(const ReplayConfig& cfg, std::int64_t origin_ns);

    /// Clears due subfilters first, then tests all three; a fresh key is
    /// inserted into the current epoch's subfilter. `now` must be
    /// non-decreasing across calls and not before the origin.
    Verdict check_and_insert(ByteSpan key, std::int64_t now_ns);

    /// Membership probe without insertion or rotation; measurement hook for
    /// false-positive accounting.
    bool probe(ByteSpan key) const { return test_all(key); }

    std::size_t memory_bytes() const;
    std::int64_t epoch_of(std::int64_t now_ns) const;

private:
    struct Subfilter {
        std::vector<std::uint64_t> words;
        void clear() { std::fill(words.begin(), words.end(), 0); }
    };

    void advance_epochs(std::int64_t epoch);
    template <typename WordFn>
    void for_each_probe_bit(ByteSpan key, WordFn&& fn) const;
    bool contains(const Subfilter& f, ByteSpan key) const;
    void insert(Subfilter& f, ByteSpan key) const;
    bool test_all(ByteSpan key) const;

    ReplayConfig cfg_;
    std::int64_t origin_ns_;
    std::int64_t half_ttl_ns_;
    std::int64_t current_epoch_ = 0;
    std::int64_t last_now_ns_;
    std::size_t n_blocks_;
    std::size_t bits_per_block_;
    int k_; ///< probe bits per key, split across two blocks
    Subfilter filters_[3];
};

} // namespace veil::replay

#endif

#include "doctest.h"

#include <algorithm>
#include <map>
#include <set>

#include "support.hpp"
#include "veil/mixer.hpp"

using namespace veil;
using namespace veil::mixer;

namespace {

Bytes msg(std::uint8_t tag) { return Bytes{tag}; }

} // namespace

TEST_CASE("batch size 1 passes every message through immediately") {
    Mixer m(MixerConfig{1, 7});
    for (std::uint8_t i = 0; i < 10; ++i) {
        auto out = m.offer(msg(i));
        REQUIRE(out.has_value());
        REQUIRE(out->size() == 1);
        CHECK((*out)[0][0] == i);
    }
}

TEST_CASE("a batch emits exactly when full and preserves the message set") {
    Mixer m(MixerConfig{4, 8});
    CHECK_FALSE(m.offer(msg('a')).has_value());
    CHECK_FALSE(m.offer(msg('b')).has_value());
    CHECK_FALSE(m.offer(msg('c')).has_value());
    CHECK(m.pending_count() == 3);
    auto out = m.offer(msg('d'));
    REQUIRE(out.has_value());
    CHECK(m.pending_count() == 0);

    std::multiset<std::uint8_t> got;
    for (const auto& b : *out) got.insert(b[0]);
    CHECK(got == std::multiset<std::uint8_t>({'a', 'b', 'c', 'd'}));
}

TEST_CASE("conservation across a long run, final partial batch via flush") {
    Mixer m(MixerConfig{5, 9});
    std::multiset<int> offered, emitted;
    Rng rng(50);
    for (int i = 0; i < 1234; ++i) {
        int v = static_cast<int>(rng.uniform_u64(256));
        offered.insert(v);
        auto out = m.offer(msg(static_cast<std::uint8_t>(v)));
        if (out) {
            for (const auto& b : *out) emitted.insert(b[0]);
        }
    }
    if (auto rest = m.flush()) {
        for (const auto& b : *rest) emitted.insert(b[0]);
    }
    CHECK(offered == emitted);
    CHECK_FALSE(m.flush().has_value());
}

TEST_CASE("within-batch order is a uniform permutation (chi-square, 24 bins)") {
    Mixer m(MixerConfig{4, 10});
    std::map<std::array<std::uint8_t, 4>, std::size_t> freq;
    const int batches = 10'000;
    for (int i = 0; i < batches; ++i) {
        m.offer(msg(0));
        m.offer(msg(1));
        m.offer(msg(2));
        auto out = m.offer(msg(3));
        REQUIRE(out.has_value());
        std::array<std::uint8_t, 4> perm{};
        for (int j = 0; j < 4; ++j) perm[j] = (*out)[j][0];
        ++freq[perm];
    }
    CHECK(freq.size() == 24);
    std::vector<std::size_t> counts;
    for (const auto& [perm, count] : freq) counts.push_back(count);
    // 23 dof at the 1% level: critical value 41.64
    CHECK(test::chi_square_uniform(counts) < 41.64);
}

TEST_CASE("expected batch latency follows batch/rate") {
    CHECK(expected_batch_latency(16, 10'000.0) == doctest::Approx(0.0016));
    CHECK(expected_batch_latency(128, 10'000.0) == doctest::Approx(0.0128));
    CHECK(expected_batch_latency(32, 100.0) == doctest::Approx(2.0 * expected_batch_latency(16, 100.0)));
    CHECK_THROWS_AS(expected_batch_latency(16, 0.0), Error);
}

TEST_CASE("mean queueing delay under Poisson arrivals matches (m-1)/(2r)") {
    // oracle: message j of a batch of m waits for (m-j) exponential
    // interarrivals of mean 1/r, so the mean over members is (m-1)/(2r)
    Rng rng(51);
    const double rate = 1000.0;
    for (std::size_t batch : {4ul, 16ul, 64ul}) {
        double t = 0.0;
        std::vector<double> arrivals;
        double total_wait = 0.0;
        std::size_t n_msgs = 0;
        for (int b = 0; b < 3000; ++b) {
            arrivals.clear();
            for (std::size_t j = 0; j < batch; ++j) {
                t += rng.exponential(1.0 / rate);
                arrivals.push_back(t);
            }
            for (double a : arrivals) total_wait += t - a; // batch emits at t
            n_msgs += batch;
        }
        double mean = total_wait / n_msgs;
        double expected = double(batch - 1) / (2.0 * rate);
        CHECK(mean > 0.8 * expected);
        CHECK(mean < 1.2 * expected);
    }
}

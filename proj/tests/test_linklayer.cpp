#include "doctest.h"

#include "support.hpp"
#include "veil/linklayer.hpp"

using namespace veil;
using namespace veil::linklayer;

namespace {

LinkConfig test_config(Rng& rng) {
    LinkConfig cfg;
    cfg.key = test::random_key(rng);
    cfg.packet_len = 200; // smaller packets keep the byte-frequency test fast
    cfg.seed = rng.next_u64();
    return cfg;
}

} // namespace

TEST_CASE("protocol frames round-trip bit-exactly") {
    Rng rng(60);
    LinkConfig cfg = test_config(rng);
    LinkSender tx(cfg, 0);
    LinkReceiver rx(cfg, 0);

    Bytes packet = rng.bytes(cfg.packet_len);
    CHECK(tx.offer(packet));
    Bytes frame = tx.send_slot();
    CHECK(frame.size() == cfg.frame_len());
    auto got = rx.receive(as_span(frame));
    REQUIRE(got.has_value());
    CHECK(*got == packet);
}

TEST_CASE("an empty queue emits full-length chaff that the peer absorbs") {
    Rng rng(61);
    LinkConfig cfg = test_config(rng);
    LinkSender tx(cfg, 1);
    LinkReceiver rx(cfg, 1);

    Bytes frame = tx.send_slot();
    CHECK(frame.size() == cfg.frame_len());
    CHECK_FALSE(rx.receive(as_span(frame)).has_value());
    CHECK(rx.chaff_seen() == 1);
}

TEST_CASE("all frames on a link have identical length regardless of content") {
    Rng rng(62);
    LinkConfig cfg = test_config(rng);
    LinkSender tx(cfg, 0);
    std::size_t len = 0;
    for (int i = 0; i < 50; ++i) {
        if (i % 3 == 0) tx.offer(rng.bytes(cfg.packet_len));
        Bytes frame = tx.send_slot();
        if (len == 0) len = frame.size();
        CHECK(frame.size() == len);
    }
}

TEST_CASE("queued packets beyond capacity are dropped, the rest sent in order") {
    Rng rng(63);
    LinkConfig cfg = test_config(rng);
    cfg.queue_cap = 2;
    LinkSender tx(cfg, 0);
    LinkReceiver rx(cfg, 0);

    Bytes p1 = rng.bytes(cfg.packet_len);
    Bytes p2 = rng.bytes(cfg.packet_len);
    Bytes p3 = rng.bytes(cfg.packet_len);
    CHECK(tx.offer(p1));
    CHECK(tx.offer(p2));
    CHECK_FALSE(tx.offer(p3));
    CHECK(tx.packets_dropped() == 1);

    auto f1 = rx.receive(as_span(tx.send_slot()));
    auto f2 = rx.receive(as_span(tx.send_slot()));
    REQUIRE(f1.has_value());
    REQUIRE(f2.has_value());
    CHECK(*f1 == p1);
    CHECK(*f2 == p2);
    CHECK_FALSE(rx.receive(as_span(tx.send_slot())).has_value()); // chaff now
}

TEST_CASE("malformed frames are dropped and counted") {
    Rng rng(64);
    LinkConfig cfg = test_config(rng);
    LinkReceiver rx(cfg, 0);
    CHECK_FALSE(rx.receive(as_span(rng.bytes(10))).has_value());
    CHECK(rx.malformed_seen() == 1);
}

TEST_CASE("frames under the wrong key decrypt to garbage the stack rejects") {
    Rng rng(65);
    LinkConfig cfg = test_config(rng);
    LinkConfig other = test_config(rng);
    LinkSender tx(cfg, 0);
    LinkReceiver rx(other, 0);

    int passed_protocol = 0;
    for (int i = 0; i < 1000; ++i) {
        tx.offer(rng.bytes(cfg.packet_len));
        auto got = rx.receive(as_span(tx.send_slot()));
        if (got.has_value()) ++passed_protocol;
    }
    // tag decrypts to a uniform octet: ~1/256 of frames land on each kind
    CHECK(passed_protocol > 0);
    CHECK(passed_protocol < 20);
    CHECK(rx.chaff_seen() > 0);
    CHECK(rx.chaff_seen() < 20);
    CHECK(rx.malformed_seen() + rx.chaff_seen() + std::uint64_t(passed_protocol) == 1000);
}

TEST_CASE("byte frequencies of protocol and chaff frames are indistinguishable") {
    Rng rng(66);
    LinkConfig cfg = test_config(rng);
    LinkSender tx(cfg, 0);

    std::vector<std::size_t> proto_counts(256, 0), chaff_counts(256, 0);
    for (int i = 0; i < 10'000; ++i) {
        bool protocol = (i % 2 == 0);
        if (protocol) tx.offer(Bytes(cfg.packet_len, 0x00)); // worst case: all-zero payload
        Bytes frame = tx.send_slot();
        auto& counts = protocol ? proto_counts : chaff_counts;
        for (std::size_t j = crypto::kIvLen; j < frame.size(); ++j) ++counts[frame[j]];
    }
    // two-sample chi-square over the 256 byte values, dof 255
    double stat = 0.0;
    for (int v = 0; v < 256; ++v) {
        double a = static_cast<double>(proto_counts[v]);
        double b = static_cast<double>(chaff_counts[v]);
        if (a + b == 0) continue;
        double diff = a - b;
        stat += diff * diff / (a + b);
    }
    CHECK(stat < 310.5); // 255 dof at the 1% level
}

TEST_CASE("scheduled rate uses aggregates inside intervals, base rate outside") {
    Rng rng(67);
    LinkConfig cfg = test_config(rng);
    cfg.base_rate = 50.0;
    cfg.schedule = {{1000, 2000, 0.0}};
    cfg.schedule[0].rate_pps = 1.0; // entry rate recorded, formula drives the value

    CHECK(scheduled_rate(cfg, 1500, 100.0, 0.0, 2.0) == doctest::Approx(100.0));
    CHECK(scheduled_rate(cfg, 1500, 100.0, 10.0, 2.0) == doctest::Approx(120.0));
    CHECK(scheduled_rate(cfg, 2500, 100.0, 10.0, 2.0) == doctest::Approx(50.0));

    LinkConfig bad = cfg;
    bad.schedule.push_back({1500, 2500, 1.0});
    CHECK_THROWS_AS(bad.validate(), Error);
}

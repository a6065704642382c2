#include "doctest.h"

#include <set>

#include "support.hpp"
#include "veil/crypto.hpp"

using namespace veil;
using namespace veil::crypto;
using veil::test::random_key;

TEST_CASE("kdf is deterministic and label-separated") {
    Rng rng(1);
    Bytes material = rng.bytes(32);

    CHECK(kdf(as_span(material), KdfLabel::Prg) == kdf(as_span(material), KdfLabel::Prg));
    CHECK(kdf(as_span(material), KdfLabel::Prg) != kdf(as_span(material), KdfLabel::Mac));
    CHECK(kdf(as_span(material), KdfLabel::Prp) != kdf(as_span(material), KdfLabel::Enc));
    CHECK_THROWS_AS(kdf(ByteSpan{}, KdfLabel::Prg), Error);
}

TEST_CASE("kdf separates distinct materials: 10^4 random pairs, no collision") {
    Rng rng(2);
    std::set<std::array<std::uint8_t, kKeyLen>> seen;
    for (int i = 0; i < 10000; ++i) {
        Bytes material = rng.bytes(24);
        auto key = kdf(as_span(material), KdfLabel::Prg);
        CHECK_MESSAGE(seen.insert(key.bytes).second, "collision at trial ", i);
    }
}

TEST_CASE("prg zero length and prefix property") {
    Rng rng(3);
    SymKey k = random_key(rng);

    CHECK(prg(k, 0).empty());

    Bytes long_stream = prg(k, 32);
    Bytes short_stream = prg(k, 16);
    CHECK(std::equal(short_stream.begin(), short_stream.end(), long_stream.begin()));

    // randomized a <= b pairs
    for (int i = 0; i < 50; ++i) {
        std::size_t b = 1 + rng.uniform_u64(4096);
        std::size_t a = rng.uniform_u64(b + 1);
        Bytes sb = prg(k, b);
        Bytes sa = prg(k, a);
        CHECK(std::equal(sa.begin(), sa.end(), sb.begin()));
    }

    CHECK_THROWS_AS(prg(k, kMaxStream + 1), Error);
}

TEST_CASE("prg streams under distinct keys differ in about half their bits") {
    Rng rng(4);
    Bytes a = prg(random_key(rng), 1024);
    Bytes b = prg(random_key(rng), 1024);
    double frac = test::bit_difference_fraction(as_span(a), as_span(b));
    CHECK(frac > 0.45);
    CHECK(frac < 0.55);
}

TEST_CASE("prp round-trips on both supported widths") {
    Rng rng(5);
    for (std::size_t width : {std::size_t{16}, std::size_t{24}}) {
        for (int i = 0; i < 10000; ++i) {
            SymKey k = random_key(rng);
            Bytes block = rng.bytes(width);
            Bytes ct = prp_encrypt(k, as_span(block));
            CHECK(ct.size() == width);
            if (prp_decrypt(k, as_span(ct)) != block) {
                FAIL("round-trip failed at width ", width, " trial ", i);
            }
        }
    }
}

TEST_CASE("prp under the wrong key does not invert") {
    Rng rng(6);
    int hits = 0;
    for (int i = 0; i < 10000; ++i) {
        SymKey k1 = random_key(rng);
        SymKey k2 = random_key(rng);
        Bytes block = rng.bytes(24);
        if (prp_decrypt(k2, as_span(prp_encrypt(k1, as_span(block)))) == block) ++hits;
    }
    CHECK(hits == 0);
}

TEST_CASE("prp rejects unsupported widths") {
    Rng rng(7);
    SymKey k = random_key(rng);
    CHECK_THROWS_AS(prp_encrypt(k, as_span(rng.bytes(17))), Error);
    CHECK_THROWS_AS(prp_decrypt(k, as_span(rng.bytes(8))), Error);
}

TEST_CASE("mac is deterministic and sensitive to single-bit flips") {
    Rng rng(8);
    SymKey k = random_key(rng);
    Bytes msg = rng.bytes(300);
    CHECK(mac(k, as_span(msg)) == mac(k, as_span(msg)));
    CHECK(mac(k, as_span(msg)).size() == kMacLen);

    int unchanged = 0;
    for (int i = 0; i < 1000; ++i) {
        Bytes flipped = msg;
        std::size_t bit = rng.uniform_u64(msg.size() * 8);
        flipped[bit / 8] ^= std::uint8_t(1u << (bit % 8));
        if (mac(k, as_span(flipped)) == mac(k, as_span(msg))) ++unchanged;
    }
    CHECK(unchanged == 0);

    unchanged = 0;
    Bytes tag = mac(k, as_span(msg));
    for (int i = 0; i < 1000; ++i) {
        SymKey flipped = k;
        std::size_t bit = rng.uniform_u64(kKeyLen * 8);
        flipped.bytes[bit / 8] ^= std::uint8_t(1u << (bit % 8));
        if (mac(flipped, as_span(msg)) == tag) ++unchanged;
    }
    CHECK(unchanged == 0);
}

TEST_CASE("stream cipher round-trips and preserves length") {
    Rng rng(9);
    SymKey k = random_key(rng);
    Bytes nonce = rng.bytes(kIvLen);
    Bytes msg = rng.bytes(1024);

    Bytes ct = stream_encrypt(k, as_span(nonce), as_span(msg));
    CHECK(ct.size() == msg.size());
    CHECK(stream_decrypt(k, as_span(nonce), as_span(ct)) == msg);

    CHECK(stream_encrypt(k, as_span(nonce), ByteSpan{}).empty());

    Bytes nonce2 = rng.bytes(kIvLen);
    CHECK(stream_encrypt(k, as_span(nonce2), as_span(msg)) != ct);

    CHECK_THROWS_AS(stream_encrypt(k, as_span(rng.bytes(8)), as_span(msg)), Error);
}

TEST_CASE("stream cipher is a pure XOR keystream (codec relies on this)") {
    Rng rng(10);
    SymKey k = random_key(rng);
    Bytes nonce = rng.bytes(kIvLen);
    Bytes p1 = rng.bytes(512);
    Bytes p2 = rng.bytes(512);
    Bytes ks1 = xored(as_span(stream_encrypt(k, as_span(nonce), as_span(p1))), as_span(p1));
    Bytes ks2 = xored(as_span(stream_encrypt(k, as_span(nonce), as_span(p2))), as_span(p2));
    CHECK(ks1 == ks2);
}

TEST_CASE("all primitives are pure functions of their inputs") {
    Rng rng(11);
    SymKey k = random_key(rng);
    Bytes nonce = rng.bytes(kIvLen);
    Bytes msg = rng.bytes(100);
    Bytes block = rng.bytes(24);

    CHECK(prg(k, 64) == prg(k, 64));
    CHECK(prp_encrypt(k, as_span(block)) == prp_encrypt(k, as_span(block)));
    CHECK(mac(k, as_span(msg)) == mac(k, as_span(msg)));
    CHECK(stream_encrypt(k, as_span(nonce), as_span(msg)) ==
          stream_encrypt(k, as_span(nonce), as_span(msg)));
}

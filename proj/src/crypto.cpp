#include "veil/crypto.hpp"

#include <openssl/evp.h>
#include <openssl/params.h>

#include <memory>

namespace veil::crypto {

namespace {

struct CipherCtxFree {
    void operator()(EVP_CIPHER_CTX* c) const { EVP_CIPHER_CTX_free(c); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxFree>;

struct MdCtxFree {
    void operator()(EVP_MD_CTX* c) const { EVP_MD_CTX_free(c); }
};

struct MacFree {
    void operator()(EVP_MAC* m) const { EVP_MAC_free(m); }
};
struct MacCtxFree {
    void operator()(EVP_MAC_CTX* c) const { EVP_MAC_CTX_free(c); }
};

[[noreturn]] void fail(const char* what) { throw Error(std::string("crypto: ") + what); }

Bytes sha256(ByteSpan msg) {
    std::unique_ptr<EVP_MD_CTX, MdCtxFree> ctx(EVP_MD_CTX_new());
    if (!ctx) fail("EVP_MD_CTX_new");
    if (EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) fail("DigestInit");
    if (EVP_DigestUpdate(ctx.get(), msg.data(), msg.size()) != 1) fail("DigestUpdate");
    Bytes out(32);
    unsigned int n = 0;
    if (EVP_DigestFinal_ex(ctx.get(), out.data(), &n) != 1 || n != 32) fail("DigestFinal");
    return out;
}

/// AES-128-CTR over `msg` with the given 16-octet initial counter block.
Bytes aes_ctr(const SymKey& key, ByteSpan counter_block, ByteSpan msg) {
    if (counter_block.size() != kIvLen) fail("CTR nonce must be 16 octets");
    Bytes out(msg.size());
    if (msg.empty()) return out;
    CipherCtx ctx(EVP_CIPHER_CTX_new());
    if (!ctx) fail("EVP_CIPHER_CTX_new");
    if (EVP_EncryptInit_ex(ctx.get(), EVP_aes_128_ctr(), nullptr, key.bytes.data(),
                           counter_block.data()) != 1) {
        fail("EncryptInit(ctr)");
    }
    int len = 0;
    if (EVP_EncryptUpdate(ctx.get(), out.data(), &len, msg.data(),
                          static_cast<int>(msg.size())) != 1) {
        fail("EncryptUpdate(ctr)");
    }
    int fin = 0;
    if (EVP_EncryptFinal_ex(ctx.get(), out.data() + len, &fin) != 1) fail("EncryptFinal(ctr)");
    return out;
}

/// One raw AES-128 block operation (no padding, no chaining).
std::array<std::uint8_t, 16> aes_block(const SymKey& key, ByteSpan block, bool encrypt) {
    CipherCtx ctx(EVP_CIPHER_CTX_new());
    if (!ctx) fail("EVP_CIPHER_CTX_new");
    if (EVP_CipherInit_ex(ctx.get(), EVP_aes_128_ecb(), nullptr, key.bytes.data(), nullptr,
                          encrypt ? 1 : 0) != 1) {
        fail("CipherInit(ecb)");
    }
    EVP_CIPHER_CTX_set_padding(ctx.get(), 0);
    std::array<std::uint8_t, 16> out{};
    int len = 0;
    if (EVP_CipherUpdate(ctx.get(), out.data(), &len, block.data(), 16) != 1 || len != 16) {
        fail("CipherUpdate(ecb)");
    }
    int fin = 0;
    if (EVP_CipherFinal_ex(ctx.get(), out.data() + len, &fin) != 1) fail("CipherFinal(ecb)");
    return out;
}

Bytes cmac(const SymKey& key, ByteSpan msg) {
    static EVP_MAC* mac_algo = [] {
        EVP_MAC* m = EVP_MAC_fetch(nullptr, "CMAC", nullptr);
        if (!m) fail("EVP_MAC_fetch(CMAC)");
        return m;
    }();
    std::unique_ptr<EVP_MAC_CTX, MacCtxFree> ctx(EVP_MAC_CTX_new(mac_algo));
    if (!ctx) fail("EVP_MAC_CTX_new");
    char cipher_name[] = "AES-128-CBC";
    OSSL_PARAM params[] = {
        OSSL_PARAM_construct_utf8_string("cipher", cipher_name, 0),
        OSSL_PARAM_construct_end(),
    };
    if (EVP_MAC_init(ctx.get(), key.bytes.data(), key.bytes.size(), params) != 1) {
        fail("EVP_MAC_init");
    }
    if (!msg.empty() && EVP_MAC_update(ctx.get(), msg.data(), msg.size()) != 1) {
        fail("EVP_MAC_update");
    }
    Bytes out(kMacLen);
    std::size_t n = 0;
    if (EVP_MAC_final(ctx.get(), out.data(), &n, out.size()) != 1 || n != kMacLen) {
        fail("EVP_MAC_final");
    }
    return out;
}

// Feistel round keys for the 24-octet permutation, derived per round so the
// two halves never see correlated round functions.
std::array<SymKey, 4> feistel_round_keys(const SymKey& key) {
    std::array<SymKey, 4> rk;
    for (std::uint8_t i = 0; i < 4; ++i) {
        std::uint8_t tag[2] = {'w', i};
        rk[i] = kdf(concat({key.span(), ByteSpan(tag, 2)}), KdfLabel::Prp);
    }
    return rk;
}

std::array<std::uint8_t, 12> feistel_round(const SymKey& rk, ByteSpan half) {
    Bytes t = cmac(rk, half);
    std::array<std::uint8_t, 12> out{};
    std::memcpy(out.data(), t.data(), 12);
    return out;
}

} // namespace

SymKey kdf(ByteSpan material, KdfLabel label) {
    if (material.empty()) throw Error("kdf: empty material");
    Bytes input(5);
    input[0] = static_cast<std::uint8_t>(label);
    put_u32_be(input, 1, static_cast<std::uint32_t>(material.size()));
    input.insert(input.end(), material.begin(), material.end());
    Bytes digest = sha256(input);
    return SymKey::from(ByteSpan(digest.data(), kKeyLen));
}

Bytes prg(const SymKey& key, std::size_t len) {
    if (len > kMaxStream) throw Error("prg: requested keystream too long");
    Bytes zeros(len, 0);
    static const Bytes zero_block(kIvLen, 0);
    return aes_ctr(key, as_span(zero_block), as_span(zeros));
}

Bytes prp_encrypt(const SymKey& key, ByteSpan block) {
    if (block.size() == kIvLen) {
        auto out = aes_block(key, block, true);
        return Bytes(out.begin(), out.end());
    }
    if (block.size() == kWideBlockLen) {
        auto rk = feistel_round_keys(key);
        Bytes left(block.begin(), block.begin() + 12);
        Bytes right(block.begin() + 12, block.end());
        for (int i = 0; i < 4; ++i) {
            auto f = feistel_round(rk[i], as_span(right));
            Bytes next_right(12);
            for (int j = 0; j < 12; ++j) next_right[j] = left[j] ^ f[j];
            left = right;
            right = next_right;
        }
        return concat({as_span(left), as_span(right)});
    }
    throw Error("prp_encrypt: unsupported block length");
}

Bytes prp_decrypt(const SymKey& key, ByteSpan block) {
    if (block.size() == kIvLen) {
        auto out = aes_block(key, block, false);
        return Bytes(out.begin(), out.end());
    }
    if (block.size() == kWideBlockLen) {
        auto rk = feistel_round_keys(key);
        Bytes left(block.begin(), block.begin() + 12);
        Bytes right(block.begin() + 12, block.end());
        for (int i = 3; i >= 0; --i) {
            auto f = feistel_round(rk[i], as_span(left));
            Bytes prev_left(12);
            for (int j = 0; j < 12; ++j) prev_left[j] = right[j] ^ f[j];
            right = left;
            left = prev_left;
        }
        return concat({as_span(left), as_span(right)});
    }
    throw Error("prp_decrypt: unsupported block length");
}

Bytes mac(const SymKey& key, ByteSpan msg) { return cmac(key, msg); }

Bytes stream_encrypt(const SymKey& key, ByteSpan nonce, ByteSpan msg) {
    if (nonce.size() != kIvLen) throw Error("stream_encrypt: nonce must be 16 octets");
    return aes_ctr(key, nonce, msg);
}

Bytes stream_decrypt(const SymKey& key, ByteSpan nonce, ByteSpan msg) {
    return stream_encrypt(key, nonce, msg);
}

} // namespace veil::crypto

#include "mvgls/sha1.hpp"

#include <array>
#include <cstdint>
#include <cstring>

namespace mvgls {

namespace {

inline std::uint32_t rotl(std::uint32_t x, int n) { return (x << n) | (x >> (32 - n)); }

struct Sha1 {
    std::array<std::uint32_t, 5> h{0x67452301u, 0xEFCDAB89u, 0x98BADCFEu, 0x10325476u,
                                   0xC3D2E1F0u};
    std::uint64_t total = 0;
    unsigned char block[64];
    std::size_t fill = 0;

    void process(const unsigned char* p) {
        std::uint32_t w[80];
        for (int i = 0; i < 16; ++i)
            w[i] = (std::uint32_t(p[4 * i]) << 24) | (std::uint32_t(p[4 * i + 1]) << 16) |
                   (std::uint32_t(p[4 * i + 2]) << 8) | std::uint32_t(p[4 * i + 3]);
        for (int i = 16; i < 80; ++i) w[i] = rotl(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);
        std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4];
        for (int i = 0; i < 80; ++i) {
            std::uint32_t f, k;
            if (i < 20) {
                f = (b & c) | (~b & d);
                k = 0x5A827999u;
            } else if (i < 40) {
                f = b ^ c ^ d;
                k = 0x6ED9EBA1u;
            } else if (i < 60) {
                f = (b & c) | (b & d) | (c & d);
                k = 0x8F1BBCDCu;
            } else {
                f = b ^ c ^ d;
                k = 0xCA62C1D6u;
            }
            std::uint32_t tmp = rotl(a, 5) + f + e + k + w[i];
            e = d;
            d = c;
            c = rotl(b, 30);
            b = a;
            a = tmp;
        }
        h[0] += a;
        h[1] += b;
        h[2] += c;
        h[3] += d;
        h[4] += e;
    }

    void update(const void* data, std::size_t len) {
        const unsigned char* p = static_cast<const unsigned char*>(data);
        total += len;
        while (len > 0) {
            std::size_t take = std::min(len, sizeof block - fill);
            std::memcpy(block + fill, p, take);
            fill += take;
            p += take;
            len -= take;
            if (fill == sizeof block) {
                process(block);
                fill = 0;
            }
        }
    }

    std::string finish() {
        std::uint64_t bits = total * 8;
        unsigned char pad = 0x80;
        update(&pad, 1);
        unsigned char zero = 0;
        while (fill != 56) update(&zero, 1);
        unsigned char len[8];
        for (int i = 0; i < 8; ++i) len[i] = (unsigned char)(bits >> (56 - 8 * i));
        update(len, 8);
        static const char* hex = "0123456789abcdef";
        std::string out;
        out.reserve(40);
        for (std::uint32_t v : h)
            for (int i = 28; i >= 0; i -= 4) out += hex[(v >> i) & 0xF];
        return out;
    }
};

}  // namespace

std::string sha1_hex(std::string_view bytes) {
    Sha1 s;
    s.update(bytes.data(), bytes.size());
    return s.finish();
}

std::string git_blob_hash(std::string_view content) {
    Sha1 s;
    std::string header = "blob " + std::to_string(content.size());
    s.update(header.data(), header.size() + 1);  // includes the NUL terminator
    s.update(content.data(), content.size());
    return s.finish();
}

}  // namespace mvgls

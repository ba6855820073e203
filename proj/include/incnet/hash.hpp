#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "incnet/tensor.hpp"

namespace incnet {

// FNV-1a over raw bytes; used for trunk/branch immutability checks.
inline std::uint64_t fnv1a64(const void* bytes, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t hash_tensor(const Tensor& t, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (auto e : t.shape()) h = fnv1a64(&e, sizeof(e), h);
    return fnv1a64(t.data(), t.size() * sizeof(double), h);
}

inline std::uint64_t hash_tensors(const std::vector<Tensor>& ts, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (const auto& t : ts) h = hash_tensor(t, h);
    return h;
}

inline std::string hash_hex(std::uint64_t h) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[i] = digits[h & 0xf];
        h >>= 4;
    }
    return s;
}

// CRC-32 (IEEE 802.3), table-driven; guards the model file format.
class Crc32 {
  public:
    Crc32() : crc_(0xffffffffU) {}

    void update(const void* bytes, std::size_t len) {
        const auto* p = static_cast<const unsigned char*>(bytes);
        const auto& tab = table();
        for (std::size_t i = 0; i < len; ++i)
            crc_ = tab[(crc_ ^ p[i]) & 0xff] ^ (crc_ >> 8);
    }

    std::uint32_t value() const { return crc_ ^ 0xffffffffU; }

    static std::uint32_t of(const void* bytes, std::size_t len) {
        Crc32 c;
        c.update(bytes, len);
        return c.value();
    }

  private:
    static const std::uint32_t* table() {
        static const auto tab = [] {
            static std::uint32_t t[256];
            for (std::uint32_t i = 0; i < 256; ++i) {
                std::uint32_t c = i;
                for (int k = 0; k < 8; ++k)
                    c = (c & 1) ? 0xedb88320U ^ (c >> 1) : c >> 1;
                t[i] = c;
            }
            return t;
        }();
        return tab;
    }

    std::uint32_t crc_;
};

}  // namespace incnet

#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace mvqa {

// SplitMix64 generator. All randomness in the pipeline flows through this
// engine so that outputs are bit-identical across platforms; the std
// distributions are implementation-defined and must not be used on any
// generation path.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform double in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, n) via 128-bit multiply rejection.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) return 0;
        while (true) {
            std::uint64_t x = next_u64();
            __uint128_t m = static_cast<__uint128_t>(x) * n;
            std::uint64_t lo = static_cast<std::uint64_t>(m);
            if (lo >= n || lo >= (0ULL - n) % n) return static_cast<std::uint64_t>(m >> 64);
        }
    }

    // Inclusive integer range.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    bool chance(double p) { return uniform() < p; }

    template <typename Vec>
    void shuffle(Vec& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            using std::swap;
            swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

// FNV-1a over a byte stream; used to derive child seeds from (root, labels)
// so that adding work items never reshuffles randomness of earlier ones.
inline std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::string_view> labels) {
    std::uint64_t h = fnv1a(0xcbf29ce484222325ULL, &root, sizeof(root));
    for (auto s : labels) {
        h = fnv1a(h, s.data(), s.size());
        unsigned char sep = 0x1f;
        h = fnv1a(h, &sep, 1);
    }
    return h;
}

inline std::uint64_t derive_seed(std::uint64_t root, std::string_view label, std::uint64_t index) {
    std::uint64_t h = fnv1a(0xcbf29ce484222325ULL, &root, sizeof(root));
    h = fnv1a(h, label.data(), label.size());
    h = fnv1a(h, &index, sizeof(index));
    return h;
}

}  // namespace mvqa

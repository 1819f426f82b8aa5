#ifndef QUIZFORGE_RNG_HPP
#define QUIZFORGE_RNG_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace quizforge {

// Deterministic stream RNG built on splitmix64. A stream is identified by
// (seed, label); the same pair reproduces the same draw sequence on every
// platform. Streams fork into sub-streams by label, so independent tasks
// (test copies, question slots) get draws that do not depend on scheduling.
class Rng {
public:
    Rng(std::uint64_t seed, std::string_view stream_label)
        : base_(mix_label(seed, stream_label)), state_(base_) {}

    // Derives a child stream. Forking depends only on this stream's identity,
    // not on how many values have been drawn from it.
    Rng fork(std::string_view stream_label) const { return Rng(base_, stream_label); }

    std::uint64_t next() {
        std::uint64_t z = (state_ += UINT64_C(0x9E3779B97F4A7C15));
        z = (z ^ (z >> 30)) * UINT64_C(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)) * UINT64_C(0x94D049BB133111EB);
        return z ^ (z >> 31);
    }

    // Uniform in [0, bound). Unbiased via rejection; bound must be >= 1.
    // std::uniform_int_distribution is implementation-defined, so we roll our
    // own to keep output stable across standard libraries.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = next();
            if (r >= threshold) return r % bound;
        }
    }

    // Uniform in [0, 1) with 53 bits of precision.
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Fisher-Yates; std::shuffle is avoided for the same portability reason.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            using std::swap;
            swap(v[i - 1], v[j]);
        }
    }

    // k distinct indices out of [0, n), in draw order (partial Fisher-Yates).
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
        std::vector<std::size_t> pool(n);
        for (std::size_t i = 0; i < n; ++i) pool[i] = i;
        std::vector<std::size_t> picked;
        picked.reserve(k);
        for (std::size_t i = 0; i < k && i < n; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(below(n - i));
            std::swap(pool[i], pool[j]);
            picked.push_back(pool[i]);
        }
        return picked;
    }

private:
    static std::uint64_t mix_label(std::uint64_t seed, std::string_view label) {
        // FNV-1a over the label bytes, folded into the seed, then whitened.
        std::uint64_t h = UINT64_C(0xCBF29CE484222325);
        for (const char c : label) {
            h ^= static_cast<unsigned char>(c);
            h *= UINT64_C(0x100000001B3);
        }
        std::uint64_t z = seed ^ h;
        for (int i = 0; i < 3; ++i) {
            z += UINT64_C(0x9E3779B97F4A7C15);
            z = (z ^ (z >> 30)) * UINT64_C(0xBF58476D1CE4E5B9);
            z = (z ^ (z >> 27)) * UINT64_C(0x94D049BB133111EB);
            z = z ^ (z >> 31);
        }
        return z;
    }

    std::uint64_t base_;
    std::uint64_t state_;
};

} // namespace quizforge

#endif

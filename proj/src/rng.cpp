#include "onebit/rng.hpp"

#include <cmath>

namespace onebit {

std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

inline std::uint64_t fnv1a64(const unsigned char* bytes, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (std::size_t i = 0; i < n; ++i) {
        h ^= bytes[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t splitmix_finalize(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64_next(sm);
}

std::uint64_t Rng::next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
}

double Rng::gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, q;
    do {
        u = 2.0 * uniform01() - 1.0;
        v = 2.0 * uniform01() - 1.0;
        q = u * u + v * v;
    } while (q >= 1.0 || q == 0.0);
    const double f = std::sqrt(-2.0 * std::log(q) / q);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
}

double Rng::laplace(double scale) {
    const double u = uniform01() - 0.5;
    const double mag = std::log(1.0 - 2.0 * std::abs(u));
    return u >= 0.0 ? -scale * mag : scale * mag;
}

double Rng::rademacher() {
    return (next_u64() & 1u) ? 1.0 : -1.0;
}

SeedStream::SeedStream(std::uint64_t base)
    : state_(splitmix_finalize(base ^ 0x9e3779b97f4a7c15ULL)) {}

SeedStream& SeedStream::tag(std::string_view s) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(s.data());
    state_ = splitmix_finalize(state_ ^ fnv1a64(bytes, s.size()));
    return *this;
}

SeedStream& SeedStream::tag(std::uint64_t v) {
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    state_ = splitmix_finalize(state_ ^ fnv1a64(bytes, 8));
    return *this;
}

std::uint64_t derive_seed(std::uint64_t base, std::string_view tag) {
    return SeedStream(base).tag(tag).value();
}

std::uint64_t derive_seed(std::uint64_t base, std::string_view tag, std::uint64_t v) {
    return SeedStream(base).tag(tag).tag(v).value();
}

std::uint64_t derive_seed(std::uint64_t base, std::string_view tag1, std::uint64_t v1,
                          std::string_view tag2, std::uint64_t v2) {
    return SeedStream(base).tag(tag1).tag(v1).tag(tag2).tag(v2).value();
}

}  // namespace onebit

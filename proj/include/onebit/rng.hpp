#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace onebit {

std::uint64_t splitmix64_next(std::uint64_t& state);

// xoshiro256++ seeded through splitmix64. Self-contained so that streams are
// reproducible for a given seed independent of the standard library build.
class Rng {
  public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();
    double uniform01();                        // [0, 1)
    double uniform(double lo, double hi);      // [lo, hi)
    double gaussian();                         // N(0,1), Marsaglia polar
    double laplace(double scale);              // density exp(-|x|/scale)/(2 scale)
    double rademacher();                       // -1 or +1, equiprobable

  private:
    std::array<std::uint64_t, 4> s_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Deterministic seed derivation: fold each tag into the state with FNV-1a
// over the tag bytes followed by the splitmix64 finalizer. Integer tags
// contribute their 8 little-endian bytes, string tags their characters.
class SeedStream {
  public:
    explicit SeedStream(std::uint64_t base);
    SeedStream& tag(std::string_view s);
    SeedStream& tag(std::uint64_t v);
    std::uint64_t value() const { return state_; }

  private:
    std::uint64_t state_;
};

std::uint64_t derive_seed(std::uint64_t base, std::string_view tag);
std::uint64_t derive_seed(std::uint64_t base, std::string_view tag, std::uint64_t v);
std::uint64_t derive_seed(std::uint64_t base, std::string_view tag1, std::uint64_t v1,
                          std::string_view tag2, std::uint64_t v2);

}  // namespace onebit

#pragma once

#include <cstdint>
#include <string>

namespace decoy {

/// Renders a double with the fewest digits that parse back to the same bits.
std::string format_double(double value);

/// Formats with six significant digits (report output).
std::string format_sig6(double value);

/// Splitmix-style generator; keeps file and trace output reproducible across
/// standard library implementations (std distributions are not portable).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed + 0x9e3779b97f4a7c15ull) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound).
    std::uint64_t next_below(std::uint64_t bound) { return next_u64() % bound; }

  private:
    std::uint64_t state_;
};

/// FNV-1a 64-bit digest, hex-encoded; used for artifact checksums.
std::string fnv1a_hex(const std::string& bytes);

} // namespace decoy

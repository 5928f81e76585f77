#include "fwbq/rng.hpp"

#include <cmath>

namespace fwbq {

namespace {

// splitmix64 finaliser; full-period mixing of a 64-bit state.
std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

RngSeed deriveSeed(RngSeed base, std::uint64_t context) {
  return RngSeed{mix64(base.value ^ mix64(context + 0x51ed270b7a9f4c6dULL))};
}

Rng::Rng(RngSeed seed) : engine_(mix64(seed.value)) {}

std::uint64_t Rng::nextU64() { return engine_(); }

double Rng::uniform() {
  // Top 53 bits -> [0, 1) with full double resolution.
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  if (hasSpare_) {
    hasSpare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double scale = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * scale;
  hasSpare_ = true;
  return u * scale;
}

}  // namespace fwbq

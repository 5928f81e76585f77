#pragma once

#include <cstdint>
#include <random>

namespace fwbq {

struct RngSeed {
  std::uint64_t value = 0;
};

// Mixes a base seed with a context tag (iteration index, method index, ...)
// so that independent call sites get decorrelated, reproducible substreams.
RngSeed deriveSeed(RngSeed base, std::uint64_t context);

// mt19937_64 plus hand-rolled variate transforms.  The standard
// distributions are implementation-defined, so we keep the uniform and
// normal transforms in our own code to make sample streams reproducible
// for a given seed on a given platform.
class Rng {
 public:
  explicit Rng(RngSeed seed);

  std::uint64_t nextU64();
  double uniform();                      // [0, 1)
  double uniform(double lo, double hi);  // [lo, hi)
  double normal();                       // standard normal, polar method

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool hasSpare_ = false;
};

}  // namespace fwbq

#pragma once

#include <cstddef>
#include <cstdint>

#include "mfe/dataset.hpp"

namespace mfe {

/// Two Gaussian classes that differ only on `n_informative` features, where
/// the class means are +-shift; every other feature is N(0, 1) noise.
struct SyntheticSpec {
  std::size_t n_samples = 40;
  std::size_t n_features = 500;
  std::size_t n_informative = 5;
  double shift = 1.0;
};

struct SyntheticData {
  Dataset ds;
  IndexList informative;  // ascending, drawn uniformly among all features
};

/// Labels alternate +1, -1 so both classes have ceil/floor(N/2) samples.
/// Throws ConfigError if n_informative > n_features or N < 2.
SyntheticData make_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace mfe

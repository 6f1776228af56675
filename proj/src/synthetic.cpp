#include "mfe/synthetic.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "mfe/error.hpp"
#include "mfe/random.hpp"

namespace mfe {

SyntheticData make_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  if (spec.n_samples < 2) throw ConfigError("synthetic data needs at least two samples");
  if (spec.n_features < 1 || spec.n_informative > spec.n_features)
    throw ConfigError(fmt::format("cannot place {} informative features among {}", spec.n_informative,
                                  spec.n_features));
  Rng pick(derive_seed(seed, 0));
  IndexList all(spec.n_features);
  std::iota(all.begin(), all.end(), Index{0});
  pick.shuffle(std::span<Index>(all));
  IndexList informative(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(spec.n_informative));
  std::sort(informative.begin(), informative.end());
  std::vector<bool> is_informative(spec.n_features, false);
  for (Index m : informative) is_informative[m] = true;

  Rng rng(derive_seed(seed, 1));
  std::vector<int> labels(spec.n_samples);
  std::vector<double> values(spec.n_samples * spec.n_features);
  for (std::size_t n = 0; n < spec.n_samples; ++n) {
    labels[n] = n % 2 == 0 ? 1 : -1;
    for (std::size_t m = 0; m < spec.n_features; ++m)
      values[n * spec.n_features + m] = rng.normal() + (is_informative[m] ? spec.shift * labels[n] : 0.0);
  }
  return {Dataset(std::move(labels), std::move(values), spec.n_features), std::move(informative)};
}

}  // namespace mfe

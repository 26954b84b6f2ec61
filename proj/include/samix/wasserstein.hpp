#pragma once

#include <string>
#include <vector>

#include "samix/image.hpp"

namespace samix {

// Per-frequency amplitude samples pooled over a corpus (all channels).
// Flat layout: samples[freq * count + s], freq = r * width + c (centered).
struct AmplitudeSamples {
  int height = 0;
  int width = 0;
  int count = 0;  // images * channels
  std::vector<double> samples;

  const double* at(int r, int c) const {
    return samples.data() + (static_cast<size_t>(r) * width + c) * count;
  }
};

// Per-frequency 1-Wasserstein distances between two corpora.
struct DistanceMap {
  int height = 0;
  int width = 0;
  std::vector<double> values;  // centered layout
  std::string source_id;
  std::string target_id;
  int source_count = 0;
  int target_count = 0;

  double at(int r, int c) const { return values[static_cast<size_t>(r) * width + c]; }
};

AmplitudeSamples collect_amplitudes(const std::vector<Image>& corpus);

// Empirical W1 on a common quantile grid of max(|a|,|b|) levels. Exactly the
// mean absolute sorted difference when the lengths agree.
double wasserstein1(const std::vector<double>& a, const std::vector<double>& b);

DistanceMap distance_map(const AmplitudeSamples& source, const AmplitudeSamples& target);

}  // namespace samix

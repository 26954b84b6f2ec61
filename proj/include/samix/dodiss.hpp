#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "samix/oracle.hpp"
#include "samix/spectral.hpp"
#include "samix/wasserstein.hpp"

namespace samix {

// Per-frequency model error rate under distance-modulated basis perturbation.
struct SensitivityMap {
  int height = 0;
  int width = 0;
  std::vector<double> values;  // centered layout, entries in [0,1]
  std::string oracle_id;
  int dataset_size = 0;
  uint64_t seed = 0;
  double clean_error = 0.0;

  double at(int r, int c) const { return values[static_cast<size_t>(r) * width + c]; }
};

struct DodissConfig {
  int batch_size = 128;
  int workers = 1;
  bool both_signs = false;       // average error over r=+1 and r=-1 sweeps
  bool shared_sign = false;      // one sign per image instead of per channel
  int subsample = 0;             // 0 = whole corpus (an explicit deviation flag otherwise)
  bool clamp_inputs = false;     // clamp perturbed images to [0,1] before the oracle
  uint64_t seed = 0;
};

// Error rate of the oracle on the corpus perturbed at one frequency.
// Signs are drawn from rng per image (and per channel unless shared_sign).
double sensitivity_at(PredictionOracle& oracle, const LabeledCorpus& corpus, FrequencyIndex idx,
                      double magnitude, std::mt19937_64& rng, const DodissConfig& cfg = {});

// Full DoDiSS map: sensitivity_at over the centered half-plane with magnitude
// dmap(i,j), mirrored to the conjugate half. Deterministic under cfg.seed for
// any worker count.
SensitivityMap dodiss_map(PredictionOracle& oracle, const LabeledCorpus& corpus,
                          const DistanceMap& dmap, const DodissConfig& cfg);

// Clean (unperturbed) error rate.
double clean_error_rate(PredictionOracle& oracle, const LabeledCorpus& corpus, int batch_size = 128);

// Mean absolute value of a map; the scalar generalizability summary.
double map_l1_mean(const std::vector<double>& values);

}  // namespace samix

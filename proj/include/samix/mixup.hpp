#pragma once

#include <cstdint>
#include <vector>

#include "samix/dodiss.hpp"
#include "samix/oracle.hpp"
#include "samix/spectral.hpp"

namespace samix {

struct MixConfig {
  int iterations = 10;        // T
  double delta = 0.1;         // projected-gradient step size
  double lambda_init = 0.5;
  double fd_step = 0.01;      // central-difference half-width for dL/dlambda
  bool faithful_endpoints = false;  // ablation variant: lam*M*At + (1-lam*M)*As
  bool record_trace = true;

  void validate() const {
    if (iterations < 1) throw DataError("MixConfig: iterations must be >= 1");
    if (!(delta > 0.0)) throw DataError("MixConfig: delta must be positive");
    if (lambda_init < 0.0 || lambda_init > 1.0) throw DataError("MixConfig: lambda_init must be in [0,1]");
    if (!(fd_step > 0.0 && fd_step < 0.5)) throw DataError("MixConfig: fd_step must be in (0, 0.5)");
  }
};

struct MixResult {
  double lambda_star = 0.0;
  Image image;
  std::vector<double> loss_trace;  // initial loss plus one value per iteration
};

// Sensitivity-weighted amplitude blend:
//   lam * M * A_t + (1 - lam) * (1 - M) * A_s
// The faithful-endpoints variant uses lam*M*A_t + (1 - lam*M)*A_s instead.
std::vector<double> mix_amplitude(const std::vector<double>& amp_source,
                                  const std::vector<double>& amp_target,
                                  const SensitivityMap& sensitivity, double lambda,
                                  bool faithful_endpoints = false);

// Inverse transform of the mixed amplitude with the source phase.
std::vector<double> reconstruct(const std::vector<double>& amp_mixed, const Spectrum& source_spectrum,
                                double* imag_residual = nullptr);

// Per-channel spectra of one source/target image pair, precomputed once so
// the lambda search only pays for mixing and the inverse transform.
struct MixPair {
  std::vector<Spectrum> source;                  // one per channel, phase retained
  std::vector<std::vector<double>> amp_target;   // one amplitude map per channel
  // Source phase as unit vectors, so repeated reconstructions skip the trig.
  std::vector<std::vector<double>> cos_phase, sin_phase;

  MixPair(const Image& x_source, const Image& x_target);
  int channels() const { return static_cast<int>(source.size()); }

  Image mixed_image(const SensitivityMap& sensitivity, double lambda, bool faithful_endpoints) const;
};

// Projected gradient ascent on the scalar mixing weight, maximizing the oracle
// task loss. Steps are signed moves of size delta, halved whenever the
// finite-difference derivative changes sign, so the walk bisects onto an
// interior maximizer instead of oscillating across it.
MixResult adversarial_lambda(PredictionOracle& oracle, const Image& x_source, int y_source,
                             const Image& x_target, const SensitivityMap& sensitivity,
                             const MixConfig& cfg);

struct MixTriple {
  size_t source_index;
  size_t target_index;
  double lambda_star;
  double final_loss;
  Image mixed;
};

// Pairs each source image with a uniformly drawn target image and runs the
// adversarial search. Deterministic under the given seed.
std::vector<MixTriple> generate_batch(PredictionOracle& oracle, const LabeledCorpus& source_batch,
                                      const std::vector<Image>& target_pool,
                                      const SensitivityMap& sensitivity, const MixConfig& cfg,
                                      uint64_t seed);

}  // namespace samix

#include "samix/mixup.hpp"

#include <algorithm>
#include <cmath>

#include "samix/rng.hpp"

namespace samix {

std::vector<double> mix_amplitude(const std::vector<double>& amp_source,
                                  const std::vector<double>& amp_target,
                                  const SensitivityMap& sensitivity, double lambda,
                                  bool faithful_endpoints) {
  const size_t n = sensitivity.values.size();
  if (amp_source.size() != n || amp_target.size() != n)
    throw DataError("mix_amplitude: amplitude/sensitivity shape mismatch");
  if (lambda < 0.0 || lambda > 1.0) throw DataError("mix_amplitude: lambda must be in [0,1]");
  std::vector<double> out(n);
  for (size_t k = 0; k < n; ++k) {
    const double m = sensitivity.values[k];
    out[k] = faithful_endpoints
                 ? lambda * m * amp_target[k] + (1.0 - lambda * m) * amp_source[k]
                 : lambda * m * amp_target[k] + (1.0 - lambda) * (1.0 - m) * amp_source[k];
  }
  return out;
}

std::vector<double> reconstruct(const std::vector<double>& amp_mixed, const Spectrum& source_spectrum,
                                double* imag_residual) {
  Spectrum mixed;
  mixed.height = source_spectrum.height;
  mixed.width = source_spectrum.width;
  mixed.amplitude = amp_mixed;
  mixed.phase = source_spectrum.phase;
  return ifft2(mixed, imag_residual);
}

MixPair::MixPair(const Image& x_source, const Image& x_target) {
  if (x_source.height != x_target.height || x_source.width != x_target.width ||
      x_source.channels != x_target.channels)
    throw DataError("MixPair: source/target dimensions differ");
  for (int ch = 0; ch < x_source.channels; ++ch) {
    source.push_back(fft2(x_source.plane(ch), x_source.height, x_source.width));
    amp_target.push_back(fft2(x_target.plane(ch), x_target.height, x_target.width).amplitude);
    const auto& ph = source.back().phase;
    std::vector<double> cp(ph.size()), sp(ph.size());
    for (size_t k = 0; k < ph.size(); ++k) {
      cp[k] = std::cos(ph[k]);
      sp[k] = std::sin(ph[k]);
    }
    cos_phase.push_back(std::move(cp));
    sin_phase.push_back(std::move(sp));
  }
}

Image MixPair::mixed_image(const SensitivityMap& sensitivity, double lambda,
                           bool faithful_endpoints) const {
  const int h = source.front().height, w = source.front().width;
  Image out(h, w, channels());
  for (int ch = 0; ch < channels(); ++ch) {
    auto amp = mix_amplitude(source[ch].amplitude, amp_target[ch], sensitivity, lambda, faithful_endpoints);
    auto vals = ifft2_phasor(amp, cos_phase[ch], sin_phase[ch], h, w);
    std::copy(vals.begin(), vals.end(), out.plane(ch));
  }
  return out;
}

MixResult adversarial_lambda(PredictionOracle& oracle, const Image& x_source, int y_source,
                             const Image& x_target, const SensitivityMap& sensitivity,
                             const MixConfig& cfg) {
  cfg.validate();
  if (!oracle.supports_loss()) throw OracleError("adversarial_lambda: oracle has no loss evaluation");
  if (sensitivity.height != x_source.height || sensitivity.width != x_source.width)
    throw DataError("adversarial_lambda: sensitivity map dimensions do not match the image");

  MixPair pair(x_source, x_target);
  std::vector<int> label{y_source};

  auto loss_at = [&](double lambda) {
    std::vector<Image> batch{pair.mixed_image(sensitivity, lambda, cfg.faithful_endpoints)};
    double value = oracle.loss(batch, label);
    if (!std::isfinite(value))
      throw OracleError("adversarial_lambda: non-finite oracle loss at lambda=" + std::to_string(lambda));
    return value;
  };

  double lambda = cfg.lambda_init;
  double step = cfg.delta;
  double prev_sign = 0.0;
  MixResult result;
  if (cfg.record_trace) result.loss_trace.push_back(loss_at(lambda));

  for (int t = 0; t < cfg.iterations; ++t) {
    const double hi = std::min(1.0, lambda + cfg.fd_step);
    const double lo = std::max(0.0, lambda - cfg.fd_step);
    const double g = (loss_at(hi) - loss_at(lo)) / (hi - lo);
    if (g != 0.0) {
      const double sign = g / (std::abs(g) + 1e-12);
      // A sign flip means the maximizer was stepped over; halving the step
      // turns the walk into a bisection around the peak.
      if (prev_sign != 0.0 && sign * prev_sign < 0.0) step *= 0.5;
      prev_sign = sign;
      lambda = std::clamp(lambda + step * sign, 0.0, 1.0);
    }
    if (cfg.record_trace) result.loss_trace.push_back(loss_at(lambda));
  }

  result.lambda_star = lambda;
  result.image = pair.mixed_image(sensitivity, lambda, cfg.faithful_endpoints);
  return result;
}

std::vector<MixTriple> generate_batch(PredictionOracle& oracle, const LabeledCorpus& source_batch,
                                      const std::vector<Image>& target_pool,
                                      const SensitivityMap& sensitivity, const MixConfig& cfg,
                                      uint64_t seed) {
  if (target_pool.empty()) throw DataError("generate_batch: empty target pool");
  std::vector<MixTriple> out;
  out.reserve(source_batch.images.size());
  for (size_t k = 0; k < source_batch.images.size(); ++k) {
    auto rng = derive_rng(seed, k);
    size_t t = std::uniform_int_distribution<size_t>(0, target_pool.size() - 1)(rng);
    MixResult res = adversarial_lambda(oracle, source_batch.images[k], source_batch.labels[k],
                                       target_pool[t], sensitivity, cfg);
    MixTriple triple;
    triple.source_index = k;
    triple.target_index = t;
    triple.lambda_star = res.lambda_star;
    std::vector<Image> batch{res.image};
    std::vector<int> label{source_batch.labels[k]};
    triple.final_loss = res.loss_trace.empty() ? oracle.loss(batch, label) : res.loss_trace.back();
    triple.mixed = std::move(res.image);
    out.push_back(std::move(triple));
  }
  return out;
}

}  // namespace samix

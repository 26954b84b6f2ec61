#include "samix/synth.hpp"

#include <cmath>

#include "samix/rng.hpp"
#include "samix/spectral.hpp"

namespace samix {

namespace {

constexpr double kTau = 6.283185307179586;

void add_cosine(Image& img, int fi, int fj, double amp, double phase) {
  for (int r = 0; r < img.height; ++r)
    for (int c = 0; c < img.width; ++c)
      img.at(0, r, c) += amp * std::cos(kTau * (static_cast<double>(fi) * r / img.height +
                                                static_cast<double>(fj) * c / img.width) +
                                        phase);
}

// Low-frequency amplitude rescale plus mild mid-band amplitude noise,
// phase untouched.
void apply_target_shift(Image& img, const SynthConfig& cfg, std::mt19937_64& rng) {
  Spectrum spec = fft2(img.plane(0), img.height, img.width);
  std::uniform_real_distribution<double> jitter(-cfg.band_noise, cfg.band_noise);
  const int h = img.height, w = img.width;
  for (int r = 0; r < h; ++r) {
    const int i = r - h / 2;
    for (int c = 0; c < w; ++c) {
      const int j = c - w / 2;
      const double radius = std::hypot(static_cast<double>(i), static_cast<double>(j));
      if (radius >= 1.0 && radius <= cfg.low_band_radius) {
        spec.amp(r, c) *= cfg.low_band_scale;
      } else if (radius >= cfg.band_noise_lo_radius && radius <= cfg.band_noise_hi_radius) {
        spec.amp(r, c) *= std::max(0.0, 1.0 + jitter(rng));
      }
    }
  }
  // Re-symmetrize the noisy band so the result stays real.
  for (int r = 0; r < h; ++r) {
    const int i = r - h / 2;
    for (int c = 0; c < w; ++c) {
      const int j = c - w / 2;
      const int rc = centered_row(conjugate_freq(i, h), h);
      const int cc = centered_col(conjugate_freq(j, w), w);
      if (rc < r || (rc == r && cc < c)) spec.amp(r, c) = spec.amp(rc, cc);
    }
  }
  auto vals = ifft2(spec);
  std::copy(vals.begin(), vals.end(), img.plane(0));
  img.clamp01();
}

}  // namespace

Image synth_image(const SynthConfig& cfg, int label, bool target_domain, uint64_t stream_a,
                  uint64_t stream_b) {
  auto rng = derive_rng(cfg.seed, stream_a, stream_b, static_cast<uint64_t>(label));
  const int n = cfg.size;
  Image img(n, n, 1);
  for (double& v : img.data) v = 0.5;

  std::uniform_real_distribution<double> phase(0.0, kTau);
  std::uniform_real_distribution<double> clutter_amp(cfg.clutter_amp_lo, cfg.clutter_amp_hi);
  std::uniform_real_distribution<double> cue_amp(cfg.cue_amp_lo, cfg.cue_amp_hi);
  std::uniform_real_distribution<double> cue2_amp(cfg.cue2_amp_lo, cfg.cue2_amp_hi);
  std::uniform_real_distribution<double> interference_amp(cfg.interference_amp_lo,
                                                          cfg.interference_amp_hi);
  std::uniform_int_distribution<int> clutter_freq(-static_cast<int>(cfg.clutter_radius),
                                                  static_cast<int>(cfg.clutter_radius));

  // Random-phase clutter, kept off the axes so it never collides with the
  // cue cells, including the aliased copies seen after 4x4 block pooling.
  for (int k = 0; k < cfg.clutter_components; ++k) {
    int fi = 0, fj = 0;
    while (fi == 0 || fj == 0) {
      fi = clutter_freq(rng);
      fj = clutter_freq(rng);
      if (std::hypot(fi, fj) > cfg.clutter_radius) fi = fj = 0;
    }
    add_cosine(img, fi, fj, clutter_amp(rng), phase(rng));
  }

  // Phase-coded cues: both classes have the same amplitude at the cue cells;
  // only the sign of the cosine differs.
  const double cue_phase = label == 0 ? 0.0 : 3.141592653589793;
  add_cosine(img, 0, cfg.cue_freq, cue_amp(rng), cue_phase);
  add_cosine(img, 0, cfg.cue2_freq, cue2_amp(rng), cue_phase);

  // Random-phase interference that shares the primary cue's pooled channel.
  add_cosine(img, 0, cfg.interference_freq, interference_amp(rng), phase(rng));

  std::uniform_real_distribution<double> noise(-cfg.pixel_noise, cfg.pixel_noise);
  for (double& v : img.data) v += noise(rng);

  if (target_domain) apply_target_shift(img, cfg, rng);
  img.clamp01();
  return img;
}

SynthDataset generate_synth(const SynthConfig& cfg) {
  SynthDataset out;
  auto fill = [&](LabeledCorpus& corpus, int count, bool target, uint64_t stream) {
    corpus.num_classes = 2;
    for (int k = 0; k < count; ++k) {
      int label = k % 2;
      corpus.images.push_back(synth_image(cfg, label, target, stream, static_cast<uint64_t>(k)));
      corpus.labels.push_back(label);
    }
  };
  fill(out.source_train, cfg.n_source_train, false, 1);
  fill(out.source_val, cfg.n_source_val, false, 2);
  fill(out.target_test, cfg.n_target_test, true, 3);
  for (int k = 0; k < cfg.k_target_train; ++k)
    out.target_train.push_back(synth_image(cfg, k % 2, true, 4, static_cast<uint64_t>(k)));
  return out;
}

}  // namespace samix

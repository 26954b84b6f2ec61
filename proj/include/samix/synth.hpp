#pragma once

#include <cstdint>
#include <vector>

#include "samix/image.hpp"

namespace samix {

// Two-class 32x32 texture benchmark with a controlled spectral domain shift.
// The class is carried by the PHASE (sign of the cosine) of two redundant cue
// frequencies on the horizontal axis: a strong primary cue at (0, cue_freq)
// and a weaker secondary cue at (0, cue2_freq). Both classes share identical
// amplitude statistics at the cue cells, so the sign survives any
// amplitude-only operation. A random-phase interference component sits at
// (0, interference_freq); after 4x4 block pooling it aliases onto the same
// pooled channel as the primary cue, so a model trained on clean source data
// reads the primary cue through a channel that the target-domain
// low-frequency rescale floods with doubled interference. The secondary cue's
// pooled channel stays clean, so reweighting toward it restores accuracy.
// Off-axis random-phase clutter provides a general noise floor.
struct SynthConfig {
  int size = 32;
  int n_source_train = 2000;
  int n_source_val = 500;
  int k_target_train = 1;
  int n_target_test = 500;
  uint64_t seed = 0;

  // Texture composition. Cue phases are fixed (sign = class); clutter phases
  // are random and clutter cells avoid the axes so nothing collides with the
  // cues, including after 4x4 block pooling.
  int clutter_components = 4;
  double clutter_radius = 4.0;       // clutter frequencies live inside this radius
  double clutter_amp_lo = 0.008;
  double clutter_amp_hi = 0.015;
  int cue_freq = 6;                  // primary cue at (0, cue_freq)
  double cue_amp_lo = 0.115;
  double cue_amp_hi = 0.125;
  int cue2_freq = 5;                 // secondary cue at (0, cue2_freq)
  double cue2_amp_lo = 0.021;
  double cue2_amp_hi = 0.027;
  int interference_freq = 2;         // random-phase component at (0, interference_freq)
  double interference_amp_lo = 0.0;
  double interference_amp_hi = 0.046;
  double pixel_noise = 0.02;

  // Target-domain shift.
  double low_band_radius = 4.0;
  double low_band_scale = 2.0;
  double band_noise_lo_radius = 5.0;
  double band_noise_hi_radius = 10.0;
  double band_noise = 0.2;
};

struct SynthDataset {
  LabeledCorpus source_train;
  LabeledCorpus source_val;
  std::vector<Image> target_train;   // unlabeled K-shot set
  LabeledCorpus target_test;
};

Image synth_image(const SynthConfig& cfg, int label, bool target_domain, uint64_t stream_a,
                  uint64_t stream_b);

SynthDataset generate_synth(const SynthConfig& cfg);

}  // namespace samix

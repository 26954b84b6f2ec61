#pragma once

#include "samix/augment.hpp"
#include "samix/dodiss.hpp"
#include "samix/mixup.hpp"
#include "samix/model.hpp"
#include "samix/synth.hpp"

namespace samix {

// End-to-end desk-scale recipe: supervised pretrain, geometric target
// augmentation, domain-distance map, DoDiSS, then SAMix fine-tuning.
struct PipelineConfig {
  AugmentPlan augment;
  DodissConfig dodiss;
  MixConfig mix;
  TrainConfig pretrain;    // supervised stage
  TrainConfig finetune;    // SAMix stage (mu applies here)
  int model_hidden = 64;
  bool model_pool = true;
  // Adversarial corpus expansion: before fine-tuning, run the adversarial
  // mixer once per pass over the source corpus against the pretrained model
  // and append each mixed image (with its source label) enrich_repeat times.
  // The SAMix arm trains on this expanded corpus; the source-only arm does not.
  int enrich_passes = 1;
  int enrich_repeat = 2;
  uint64_t seed = 0;
};

struct PipelineResult {
  ToyModel source_model;      // source-only arm: pretrain + supervised finetune
  ToyModel samix_model;       // pretrain + SAMix finetune
  DistanceMap dmap;
  SensitivityMap pre_map;     // DoDiSS of the pretrained model
  SensitivityMap post_map;    // DoDiSS of the SAMix-trained model
  double source_only_val_acc = 0.0;
  double source_only_target_acc = 0.0;
  double samix_val_acc = 0.0;
  double samix_target_acc = 0.0;
  double mean_lambda = 0.0;
};

PipelineResult run_pipeline(const SynthDataset& data, const PipelineConfig& cfg);

// Default pipeline configuration for the 32x32 synthetic benchmark.
PipelineConfig default_synth_pipeline(uint64_t seed);

}  // namespace samix

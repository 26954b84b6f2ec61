#pragma once

#include <string>

#include "samix/pipeline.hpp"

namespace samix {

// Structured run configuration for the train command. Schema-validated on
// load; unknown keys are rejected.
struct RunConfig {
  uint64_t seed = 0;
  std::string output_dir = ".";

  std::string source_train_dir;
  std::string source_train_labels;
  std::string source_val_dir;
  std::string source_val_labels;
  std::string target_train_dir;
  std::string target_test_dir;
  std::string target_test_labels;

  AugmentPlan augment;
  MixConfig mix;
  TrainConfig train;
  DodissConfig dodiss;
  int model_hidden = 64;
  bool model_pool = true;
  std::string oracle = "builtin";
};

RunConfig load_run_config(const std::string& path);

}  // namespace samix

#include "samix/config.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

namespace samix {

namespace {

using json = nlohmann::json;

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key()))
      throw UsageError("config: unknown key '" + it.key() + "' in " + where);
  }
}

template <typename T>
void maybe(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw UsageError("config: cannot open " + path);
  json doc;
  try {
    doc = json::parse(is);
  } catch (const json::exception& e) {
    throw UsageError(std::string("config: invalid JSON: ") + e.what());
  }

  check_keys(doc, {"seed", "output_dir", "corpus", "augment", "mix", "train", "dodiss", "model", "oracle"},
             "top level");

  RunConfig cfg;
  maybe(doc, "seed", cfg.seed);
  maybe(doc, "output_dir", cfg.output_dir);
  maybe(doc, "oracle", cfg.oracle);

  if (doc.contains("corpus")) {
    const json& c = doc["corpus"];
    check_keys(c, {"source_train", "source_train_labels", "source_val", "source_val_labels",
                   "target_train", "target_test", "target_test_labels"},
               "corpus");
    maybe(c, "source_train", cfg.source_train_dir);
    maybe(c, "source_train_labels", cfg.source_train_labels);
    maybe(c, "source_val", cfg.source_val_dir);
    maybe(c, "source_val_labels", cfg.source_val_labels);
    maybe(c, "target_train", cfg.target_train_dir);
    maybe(c, "target_test", cfg.target_test_dir);
    maybe(c, "target_test_labels", cfg.target_test_labels);
  }

  if (doc.contains("augment")) {
    const json& a = doc["augment"];
    check_keys(a, {"crop_lo", "crop_hi", "jigsaw_grid", "samples_per_image", "include_probability", "seed"},
               "augment");
    maybe(a, "crop_lo", cfg.augment.crop_lo);
    maybe(a, "crop_hi", cfg.augment.crop_hi);
    maybe(a, "jigsaw_grid", cfg.augment.jigsaw_grid);
    maybe(a, "samples_per_image", cfg.augment.samples_per_image);
    maybe(a, "include_probability", cfg.augment.include_probability);
    maybe(a, "seed", cfg.augment.seed);
    cfg.augment.validate();
  }

  if (doc.contains("mix")) {
    const json& m = doc["mix"];
    check_keys(m, {"iterations", "delta", "lambda_init", "fd_step", "faithful_endpoints"}, "mix");
    maybe(m, "iterations", cfg.mix.iterations);
    maybe(m, "delta", cfg.mix.delta);
    maybe(m, "lambda_init", cfg.mix.lambda_init);
    maybe(m, "fd_step", cfg.mix.fd_step);
    maybe(m, "faithful_endpoints", cfg.mix.faithful_endpoints);
    cfg.mix.validate();
  }

  if (doc.contains("train")) {
    const json& t = doc["train"];
    check_keys(t, {"mu", "epochs", "lr", "lr_decay", "decay_every", "batch_size", "seed"}, "train");
    maybe(t, "mu", cfg.train.mu);
    maybe(t, "epochs", cfg.train.epochs);
    maybe(t, "lr", cfg.train.lr);
    maybe(t, "lr_decay", cfg.train.lr_decay);
    maybe(t, "decay_every", cfg.train.decay_every);
    maybe(t, "batch_size", cfg.train.batch_size);
    maybe(t, "seed", cfg.train.seed);
    cfg.train.validate();
  }

  if (doc.contains("dodiss")) {
    const json& d = doc["dodiss"];
    check_keys(d, {"batch_size", "workers", "both_signs", "shared_sign", "subsample", "clamp", "seed"},
               "dodiss");
    maybe(d, "batch_size", cfg.dodiss.batch_size);
    maybe(d, "workers", cfg.dodiss.workers);
    maybe(d, "both_signs", cfg.dodiss.both_signs);
    maybe(d, "shared_sign", cfg.dodiss.shared_sign);
    maybe(d, "subsample", cfg.dodiss.subsample);
    maybe(d, "clamp", cfg.dodiss.clamp_inputs);
    maybe(d, "seed", cfg.dodiss.seed);
  }

  if (doc.contains("model")) {
    const json& m = doc["model"];
    check_keys(m, {"hidden", "pool"}, "model");
    maybe(m, "hidden", cfg.model_hidden);
    maybe(m, "pool", cfg.model_pool);
  }

  return cfg;
}

}  // namespace samix

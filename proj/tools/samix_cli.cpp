// samix: CLI surface over the spectral-adaptation pipeline.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 oracle/protocol error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "samix/config.hpp"
#include "samix/corpus.hpp"
#include "samix/heatmap.hpp"
#include "samix/mapfile.hpp"
#include "samix/pipeline.hpp"
#include "samix/png_io.hpp"
#include "samix/rng.hpp"
#include "samix/subprocess_oracle.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace samix;

namespace {

void summary(const json& j) { std::cout << j.dump() << "\n"; }

// "builtin:<checkpoint>" or "subprocess:<command>".
std::unique_ptr<PredictionOracle> make_oracle(const std::string& spec, int classes,
                                              std::unique_ptr<ToyModel>& keepalive, int pool = 1) {
  if (spec.rfind("builtin:", 0) == 0) {
    keepalive = std::make_unique<ToyModel>(load_model(spec.substr(8)));
    return std::make_unique<ToyModelOracle>(*keepalive, spec);
  }
  if (spec.rfind("subprocess:", 0) == 0) {
    std::string cmd = spec.substr(11);
    if (pool > 1) return std::make_unique<SubprocessOraclePool>(cmd, classes, pool);
    return std::make_unique<SubprocessOracle>(cmd, classes);
  }
  throw UsageError("oracle spec must start with builtin: or subprocess:");
}

int cmd_gen_synth(const std::string& out_dir, SynthConfig cfg) {
  SynthDataset data = generate_synth(cfg);
  save_corpus((fs::path(out_dir) / "source_train").string(), data.source_train.images,
              &data.source_train.labels);
  save_corpus((fs::path(out_dir) / "source_val").string(), data.source_val.images,
              &data.source_val.labels);
  save_corpus((fs::path(out_dir) / "target_train").string(), data.target_train, nullptr);
  save_corpus((fs::path(out_dir) / "target_test").string(), data.target_test.images,
              &data.target_test.labels);
  summary({{"command", "gen-synth"},
           {"out", out_dir},
           {"seed", cfg.seed},
           {"source_train", data.source_train.images.size()},
           {"source_val", data.source_val.images.size()},
           {"target_train", data.target_train.size()},
           {"target_test", data.target_test.images.size()}});
  return 0;
}

int cmd_augment_target(const std::string& in_dir, const std::string& out_dir, AugmentPlan plan) {
  auto few_shot = load_images(in_dir);
  auto out = augment_target(few_shot, plan);
  save_corpus(out_dir, out, nullptr);
  summary({{"command", "augment-target"}, {"in", in_dir}, {"out", out_dir},
           {"inputs", few_shot.size()}, {"outputs", out.size()}, {"seed", plan.seed}});
  return 0;
}

int cmd_distance_map(const std::string& source_dir, const std::string& target_dir,
                     const std::string& out_path) {
  auto source = collect_amplitudes(load_images(source_dir));
  auto target = collect_amplitudes(load_images(target_dir));
  DistanceMap map = distance_map(source, target);
  map.source_id = source_dir;
  map.target_id = target_dir;
  write_map_file(out_path, to_map_file(map));
  summary({{"command", "distance-map"}, {"out", out_path}, {"height", map.height},
           {"width", map.width}, {"mean_w1", map_l1_mean(map.values)}});
  return 0;
}

int cmd_dodiss(const std::string& corpus_dir, const std::string& labels, const std::string& dmap_path,
               const std::string& oracle_spec, int classes, const std::string& out_path,
               const DodissConfig& cfg, const std::string& heatmap_path) {
  LabeledCorpus corpus = load_labeled_corpus(corpus_dir, labels);
  DistanceMap dmap = distance_from_map_file(read_map_file(dmap_path));
  std::unique_ptr<ToyModel> keepalive;
  auto oracle = make_oracle(oracle_spec, classes > 0 ? classes : corpus.num_classes, keepalive,
                            cfg.workers);
  SensitivityMap ms = dodiss_map(*oracle, corpus, dmap, cfg);
  write_map_file(out_path, to_map_file(ms));
  if (!heatmap_path.empty()) export_heatmap(ms.values, ms.height, ms.width, heatmap_path);
  summary({{"command", "dodiss"}, {"out", out_path}, {"clean_error", ms.clean_error},
           {"l1_mean", map_l1_mean(ms.values)}, {"dataset_size", ms.dataset_size}, {"seed", ms.seed}});
  return 0;
}

int cmd_mix(const std::string& source_dir, const std::string& source_labels,
            const std::string& target_dir, const std::string& ms_path,
            const std::string& oracle_spec, const std::string& out_dir, const MixConfig& cfg,
            uint64_t seed) {
  LabeledCorpus source = load_labeled_corpus(source_dir, source_labels);
  auto target_pool = load_images(target_dir);
  SensitivityMap ms = sensitivity_from_map_file(read_map_file(ms_path));
  std::unique_ptr<ToyModel> keepalive;
  auto oracle = make_oracle(oracle_spec, source.num_classes, keepalive);

  auto triples = generate_batch(*oracle, source, target_pool, ms, cfg, seed);

  fs::create_directories(out_dir);
  std::ofstream manifest(fs::path(out_dir) / "manifest.txt");
  if (!manifest) throw DataError("mix: cannot write manifest in " + out_dir);
  manifest.precision(17);
  double lambda_sum = 0.0;
  for (const auto& t : triples) {
    std::ostringstream name;
    name.width(5);
    name.fill('0');
    name << t.source_index;
    std::string file = "mixed_" + name.str() + ".png";
    write_png((fs::path(out_dir) / file).string(), t.mixed);
    manifest << file << " source_index=" << t.source_index << " target_index=" << t.target_index
             << " lambda=" << t.lambda_star << " loss=" << t.final_loss << "\n";
    lambda_sum += t.lambda_star;
  }
  summary({{"command", "mix"}, {"out", out_dir}, {"count", triples.size()},
           {"mean_lambda", triples.empty() ? 0.0 : lambda_sum / triples.size()}, {"seed", seed}});
  return 0;
}

int cmd_train(const RunConfig& cfg, const std::string& mode, const std::string& out_model,
              const std::string& ms_path, const std::string& init_model) {
  LabeledCorpus train = load_labeled_corpus(cfg.source_train_dir, cfg.source_train_labels);
  LabeledCorpus val;
  bool have_val = !cfg.source_val_dir.empty();
  if (have_val) val = load_labeled_corpus(cfg.source_val_dir, cfg.source_val_labels);

  ToyModel model;
  if (!init_model.empty()) {
    model = load_model(init_model);
  } else {
    const Image& probe = train.images.front();
    auto rng = derive_rng(cfg.seed, 0x100du);
    model = make_toy_model(probe.height, probe.width, probe.channels, cfg.model_hidden,
                           train.num_classes, cfg.model_pool, rng);
  }

  std::vector<EpochMetrics> log;
  if (mode == "source-only") {
    log = train_supervised(model, train, have_val ? &val : nullptr, cfg.train);
  } else if (mode == "samix") {
    if (ms_path.empty()) throw UsageError("train --mode samix requires --ms <sensitivity map>");
    if (cfg.target_train_dir.empty()) throw UsageError("train --mode samix requires corpus.target_train");
    SensitivityMap ms = sensitivity_from_map_file(read_map_file(ms_path));
    auto target_pool = load_images(cfg.target_train_dir);
    log = train_samix(model, train, have_val ? &val : nullptr, nullptr, target_pool, &ms, cfg.mix,
                      cfg.train);
  } else {
    throw UsageError("train mode must be source-only or samix");
  }

  fs::create_directories(cfg.output_dir);
  std::ofstream metrics(fs::path(cfg.output_dir) / "metrics.jsonl");
  for (const auto& m : log) {
    json row = {{"epoch", m.epoch}, {"train_loss", m.train_loss}, {"js_loss", m.js_loss},
                {"mean_lambda", m.mean_lambda}};
    if (m.source_val_acc >= 0.0) row["source_val_acc"] = m.source_val_acc;
    metrics << row.dump() << "\n";
  }

  save_model(out_model, model,
             {{"mode", mode}, {"seed", std::to_string(cfg.seed)},
              {"epochs", std::to_string(cfg.train.epochs)}});
  json out = {{"command", "train"}, {"mode", mode}, {"model", out_model},
              {"final_train_loss", log.empty() ? 0.0 : log.back().train_loss}};
  if (!log.empty() && log.back().source_val_acc >= 0.0) out["source_val_acc"] = log.back().source_val_acc;
  summary(out);
  return 0;
}

int cmd_eval(const std::string& model_path, const std::string& corpus_dir, const std::string& labels) {
  ToyModel model = load_model(model_path);
  LabeledCorpus corpus = load_labeled_corpus(corpus_dir, labels);
  double acc = accuracy(model, corpus);
  summary({{"command", "eval"}, {"model", model_path}, {"corpus", corpus_dir},
           {"count", corpus.images.size()}, {"accuracy", acc}});
  return 0;
}

int cmd_heatmap(const std::string& in_path, const std::string& out_path) {
  MapFile file = read_map_file(in_path);
  export_heatmap(file.payload, static_cast<int>(file.height), static_cast<int>(file.width), out_path);
  auto [mn, mx] = std::minmax_element(file.payload.begin(), file.payload.end());
  summary({{"command", "heatmap"}, {"in", in_path}, {"out", out_path}, {"min", *mn}, {"max", *mx}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral adversarial mixup toolkit"};
  app.require_subcommand(1);

  // gen-synth
  auto* gen = app.add_subcommand("gen-synth", "Generate the synthetic two-domain benchmark");
  std::string gen_out;
  SynthConfig synth_cfg;
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--seed", synth_cfg.seed, "RNG seed");
  gen->add_option("--source-train", synth_cfg.n_source_train, "Source training images");
  gen->add_option("--source-val", synth_cfg.n_source_val, "Source validation images");
  gen->add_option("--k", synth_cfg.k_target_train, "K-shot target training images");
  gen->add_option("--target-test", synth_cfg.n_target_test, "Target test images");

  // augment-target
  auto* aug = app.add_subcommand("augment-target", "Geometric expansion of a K-shot target set");
  std::string aug_in, aug_out;
  AugmentPlan plan;
  aug->add_option("--in", aug_in, "Directory of target PNGs")->required();
  aug->add_option("--out", aug_out, "Output directory")->required();
  aug->add_option("--seed", plan.seed, "RNG seed");
  aug->add_option("--samples", plan.samples_per_image, "Samples per input image");
  aug->add_option("--grid", plan.jigsaw_grid, "Jigsaw grid size");
  aug->add_option("--crop-lo", plan.crop_lo, "Crop fraction lower bound");
  aug->add_option("--crop-hi", plan.crop_hi, "Crop fraction upper bound");
  aug->add_option("--include-prob", plan.include_probability, "Per-transform inclusion probability");

  // distance-map
  auto* dist = app.add_subcommand("distance-map", "Per-frequency W1 between two corpora");
  std::string dist_source, dist_target, dist_out;
  dist->add_option("--source", dist_source, "Source corpus directory")->required();
  dist->add_option("--target", dist_target, "Target corpus directory (augment first)")->required();
  dist->add_option("--out", dist_out, "Output map file")->required();

  // dodiss
  auto* dod = app.add_subcommand("dodiss", "Spectral sensitivity map of an oracle");
  std::string dod_corpus, dod_labels, dod_dmap, dod_oracle, dod_out, dod_heatmap;
  int dod_classes = 0;
  DodissConfig dod_cfg;
  dod->add_option("--corpus", dod_corpus, "Labeled corpus directory")->required();
  dod->add_option("--labels", dod_labels, "Labels CSV")->required();
  dod->add_option("--dmap", dod_dmap, "Distance map file")->required();
  dod->add_option("--oracle", dod_oracle, "builtin:<ckpt> or subprocess:<cmd>")->required();
  dod->add_option("--classes", dod_classes, "Class count (subprocess oracles)");
  dod->add_option("--out", dod_out, "Output map file")->required();
  dod->add_option("--heatmap", dod_heatmap, "Optional heatmap PNG");
  dod->add_option("--seed", dod_cfg.seed, "RNG seed");
  dod->add_option("--batch", dod_cfg.batch_size, "Oracle batch size");
  dod->add_option("--workers", dod_cfg.workers, "Parallel frequency workers");
  dod->add_option("--subsample", dod_cfg.subsample, "Cap corpus size (0 = whole dataset)");
  dod->add_flag("--both-signs", dod_cfg.both_signs, "Average +1/-1 sign sweeps");
  dod->add_flag("--shared-sign", dod_cfg.shared_sign, "One sign per image across channels");
  dod->add_flag("--clamp", dod_cfg.clamp_inputs, "Clamp perturbed images to [0,1]");

  // mix
  auto* mix = app.add_subcommand("mix", "Generate adversarially mixed target-style images");
  std::string mix_source, mix_labels, mix_target, mix_ms, mix_oracle, mix_out;
  MixConfig mix_cfg;
  uint64_t mix_seed = 0;
  mix->add_option("--source", mix_source, "Source corpus directory")->required();
  mix->add_option("--source-labels", mix_labels, "Source labels CSV")->required();
  mix->add_option("--target", mix_target, "Target pool directory")->required();
  mix->add_option("--ms", mix_ms, "Sensitivity map file")->required();
  mix->add_option("--oracle", mix_oracle, "builtin:<ckpt> or subprocess:<cmd>")->required();
  mix->add_option("--out", mix_out, "Output directory")->required();
  mix->add_option("--seed", mix_seed, "RNG seed");
  mix->add_option("--iterations", mix_cfg.iterations, "Gradient-ascent iterations");
  mix->add_option("--delta", mix_cfg.delta, "Step size");
  mix->add_option("--lambda-init", mix_cfg.lambda_init, "Initial lambda");
  mix->add_option("--fd-step", mix_cfg.fd_step, "Finite-difference half-width");
  mix->add_flag("--faithful-endpoints", mix_cfg.faithful_endpoints, "Ablation mixing variant");

  // train
  auto* tr = app.add_subcommand("train", "Train the toy classifier");
  std::string tr_config, tr_mode = "source-only", tr_out, tr_ms, tr_init;
  tr->add_option("--config", tr_config, "RunConfig JSON")->required();
  tr->add_option("--mode", tr_mode, "source-only | samix");
  tr->add_option("--out-model", tr_out, "Output checkpoint")->required();
  tr->add_option("--ms", tr_ms, "Sensitivity map (samix mode)");
  tr->add_option("--init-model", tr_init, "Warm-start checkpoint");

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a labeled corpus");
  std::string ev_model, ev_corpus, ev_labels;
  ev->add_option("--model", ev_model, "Checkpoint")->required();
  ev->add_option("--corpus", ev_corpus, "Corpus directory")->required();
  ev->add_option("--labels", ev_labels, "Labels CSV")->required();

  // heatmap
  auto* hm = app.add_subcommand("heatmap", "Render a map file as a grayscale PNG");
  std::string hm_in, hm_out;
  hm->add_option("--in", hm_in, "Map file")->required();
  hm->add_option("--out", hm_out, "Output PNG")->required();

  try {
    app.parse(argc, argv);
    if (gen->parsed()) return cmd_gen_synth(gen_out, synth_cfg);
    if (aug->parsed()) return cmd_augment_target(aug_in, aug_out, plan);
    if (dist->parsed()) return cmd_distance_map(dist_source, dist_target, dist_out);
    if (dod->parsed())
      return cmd_dodiss(dod_corpus, dod_labels, dod_dmap, dod_oracle, dod_classes, dod_out, dod_cfg,
                        dod_heatmap);
    if (mix->parsed())
      return cmd_mix(mix_source, mix_labels, mix_target, mix_ms, mix_oracle, mix_out, mix_cfg, mix_seed);
    if (tr->parsed()) return cmd_train(load_run_config(tr_config), tr_mode, tr_out, tr_ms, tr_init);
    if (ev->parsed()) return cmd_eval(ev_model, ev_corpus, ev_labels);
    if (hm->parsed()) return cmd_heatmap(hm_in, hm_out);
    return 1;
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const OracleError& e) {
    std::cerr << "oracle error: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

// Acceptance battery for the spectral-adaptation toolkit. Each numbered
// criterion prints exactly one PASS/FAIL line; the process exits nonzero if
// any criterion fails.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <vector>

#include "samix/dodiss.hpp"
#include "samix/mapfile.hpp"
#include "samix/mixup.hpp"
#include "samix/model.hpp"
#include "samix/pipeline.hpp"
#include "samix/rng.hpp"
#include "samix/spectral.hpp"
#include "samix/subprocess_oracle.hpp"
#include "samix/wasserstein.hpp"

using namespace samix;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int criterion, bool ok, const std::string& name, const std::string& detail) {
  std::cout << (ok ? "PASS" : "FAIL") << " criterion " << criterion << ": " << name;
  if (!detail.empty()) std::cout << " (" << detail << ")";
  std::cout << std::endl;
  if (!ok) ++failures;
}

std::vector<double> random_channel(std::mt19937_64& rng, int h, int w) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(static_cast<size_t>(h) * w);
  for (double& v : x) v = u(rng);
  return x;
}

// ---------------------------------------------------------------- criterion 1

void criterion1() {
  auto rng = derive_rng(1001);
  bool ok = true;
  std::ostringstream detail;
  double worst_rt = 0.0;

  for (auto [h, w] : {std::pair{32, 32}, {64, 64}, {256, 256}, {33, 47}}) {
    for (int rep = 0; rep < 100 && ok; ++rep) {
      auto x = random_channel(rng, h, w);
      auto back = ifft2(fft2(x, h, w));
      for (size_t k = 0; k < x.size(); ++k) worst_rt = std::max(worst_rt, std::abs(x[k] - back[k]));
      if (worst_rt >= 1e-9) ok = false;
    }
  }

  double worst_norm = 0.0;
  for (auto [h, w] : {std::pair{32, 32}, {33, 47}}) {
    for (int i = -(h / 2); i < (h + 1) / 2 && ok; ++i)
      for (int j = -(w / 2); j < (w + 1) / 2; ++j) {
        Image b = fourier_basis_image({i, j}, h, w);
        double norm = 0.0;
        bool finite = true;
        for (double v : b.data) {
          norm += v * v;
          finite = finite && std::isfinite(v);
        }
        worst_norm = std::max(worst_norm, std::abs(std::sqrt(norm) - 1.0));
        if (!finite || worst_norm >= 1e-9) {
          ok = false;
          break;
        }
      }
  }

  double worst_pert = 0.0;
  for (int rep = 0; rep < 100 && ok; ++rep) {
    Image img(32, 32, 1);
    for (double& v : img.data) v = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    std::uniform_int_distribution<int> fi(-16, 15);
    double mag = std::uniform_real_distribution<double>(0.1, 3.0)(rng);
    Image out = perturb(img, {fi(rng), fi(rng)}, mag, rep % 2 ? 1 : -1);
    double norm = 0.0;
    for (size_t k = 0; k < img.data.size(); ++k) {
      double d = out.data[k] - img.data[k];
      norm += d * d;
    }
    worst_pert = std::max(worst_pert, std::abs(std::sqrt(norm) - mag));
    if (worst_pert >= 1e-9) ok = false;
  }

  detail << "max round-trip err " << worst_rt << ", max norm dev " << worst_norm
         << ", max perturb dev " << worst_pert;
  report(1, ok, "spectral round trips, basis norms, perturbation norm identity", detail.str());
}

// ---------------------------------------------------------------- criterion 2

double w1_sorted(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double acc = 0.0;
  for (size_t k = 0; k < a.size(); ++k) acc += std::abs(a[k] - b[k]);
  return acc / a.size();
}

double w1_assignment(std::vector<double> a, const std::vector<double>& b) {
  std::vector<size_t> perm(a.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (size_t k = 0; k < a.size(); ++k) cost += std::abs(a[k] - b[perm[k]]);
    best = std::min(best, cost / a.size());
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

void criterion2() {
  auto rng = derive_rng(1002);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  auto draw = [&](int n) {
    std::vector<double> v(n);
    for (double& x : v) x = u(rng);
    return v;
  };
  bool ok = true;

  for (int rep = 0; rep < 1000 && ok; ++rep) {
    int n = std::uniform_int_distribution<int>(1, 64)(rng);
    auto a = draw(n), b = draw(n);
    if (wasserstein1(a, b) != w1_sorted(a, b)) ok = false;
  }
  for (int rep = 0; rep < 200 && ok; ++rep) {
    int n = std::uniform_int_distribution<int>(1, 6)(rng);
    auto a = draw(n), b = draw(n);
    if (std::abs(wasserstein1(a, b) - w1_assignment(a, b)) > 1e-12) ok = false;
  }
  for (int rep = 0; rep < 200 && ok; ++rep) {
    int n = std::uniform_int_distribution<int>(1, 32)(rng);
    auto a = draw(n), b = draw(n), c = draw(n);
    double ab = wasserstein1(a, b), bc = wasserstein1(b, c), ac = wasserstein1(a, c);
    if (std::abs(ab - wasserstein1(b, a)) > 1e-12) ok = false;
    if (wasserstein1(a, a) != 0.0) ok = false;
    if (ac > ab + bc + 1e-12) ok = false;
  }
  report(2, ok, "Wasserstein sorted-difference, assignment oracle, metric axioms", "");
}

// ---------------------------------------------------------------- criterion 3

void criterion3() {
  bool ok = true;
  std::ostringstream detail;

  SensitivityMap m1, m0, mh;
  m1.height = m0.height = mh.height = 2;
  m1.width = m0.width = mh.width = 2;
  m1.values.assign(4, 1.0);
  m0.values.assign(4, 0.0);
  mh.values.assign(4, 0.5);
  std::vector<double> as = {4.0, 4.0, 4.0, 4.0}, at = {2.0, 2.0, 2.0, 2.0};
  ok = ok && mix_amplitude(as, at, m1, 1.0) == at;
  ok = ok && mix_amplitude(as, at, m0, 0.0) == as;
  for (double v : mix_amplitude(as, at, mh, 0.5)) ok = ok && v == 1.5;

  auto rng = derive_rng(1003);
  Image src(24, 24, 1), tgt(24, 24, 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& v : src.data) v = u(rng);
  for (double& v : tgt.data) v = u(rng);

  Spectrum spec = fft2(src.plane(0), 24, 24);
  auto identity = reconstruct(spec.amplitude, spec);
  double worst = 0.0;
  for (size_t k = 0; k < identity.size(); ++k)
    worst = std::max(worst, std::abs(identity[k] - src.data[k]));
  ok = ok && worst < 1e-9;

  SensitivityMap full;
  full.height = full.width = 24;
  full.values.assign(576, 1.0);
  MixPair pair(src, tgt);
  Image swapped = pair.mixed_image(full, 1.0, false);
  Spectrum ref = fft2(src.plane(0), 24, 24);
  ref.amplitude = fft2(tgt.plane(0), 24, 24).amplitude;
  auto expect = ifft2(ref);
  double worst_swap = 0.0;
  for (size_t k = 0; k < expect.size(); ++k)
    worst_swap = std::max(worst_swap, std::abs(swapped.data[k] - expect[k]));
  ok = ok && worst_swap < 1e-9;

  detail << "identity err " << worst << ", swap err " << worst_swap;
  report(3, ok, "mixing endpoints, reconstruction identity, amplitude-swap reference", detail.str());
}

// ---------------------------------------------------------------- criterion 4

class ProbeOracle : public PredictionOracle {
 public:
  explicit ProbeOracle(std::function<double(double)> f) : f_(std::move(f)) {}
  int num_classes() const override { return 2; }
  std::vector<std::vector<double>> predict(const std::vector<Image>& batch) override {
    return std::vector<std::vector<double>>(batch.size(), {0.5, 0.5});
  }
  bool supports_loss() const override { return true; }
  double loss(const std::vector<Image>& batch, const std::vector<int>&) override {
    return f_(batch.front().data[0]);
  }

 private:
  std::function<double(double)> f_;
};

void criterion4() {
  auto rng = derive_rng(1004);
  std::uniform_real_distribution<double> peak(0.05, 0.95), amp(0.5, 4.0), power(1.5, 3.0);
  Image src(8, 8, 1);
  Image tgt(8, 8, 1);
  for (double& v : tgt.data) v = 1.0;
  SensitivityMap full;
  full.height = full.width = 8;
  full.values.assign(64, 1.0);
  MixConfig cfg;  // T=10, delta=0.1 defaults

  int close = 0, monotone = 0;
  for (int rep = 0; rep < 100; ++rep) {
    double lhat = peak(rng);
    // A peak within the finite-difference window of the start makes the
    // initial loss already optimal to roundoff; keep surfaces informative.
    while (std::abs(lhat - cfg.lambda_init) < 0.01) lhat = peak(rng);
    double a = amp(rng), p = power(rng);
    auto f = [=](double v) { return 2.0 - a * std::pow(std::abs(v - lhat), p); };
    ProbeOracle oracle(f);
    MixResult res = adversarial_lambda(oracle, src, 0, tgt, full, cfg);

    double best_l = 0.0, best_v = f(0.0);
    for (int k = 1; k <= 1000; ++k) {
      double v = f(k / 1000.0);
      if (v > best_v) {
        best_v = v;
        best_l = k / 1000.0;
      }
    }
    if (std::abs(res.lambda_star - best_l) <= 0.05) ++close;
    if (res.loss_trace.back() >= res.loss_trace.front()) ++monotone;
  }
  std::ostringstream detail;
  detail << close << "/100 within 0.05 of the grid maximizer, " << monotone << "/100 non-decreasing";
  report(4, close >= 95 && monotone == 100, "adversarial lambda vs 1001-point grid oracle",
         detail.str());
}

// ---------------------------------------------------------------- criterion 5

class FixedOracle : public PredictionOracle {
 public:
  explicit FixedOracle(int classes) : classes_(classes) {}
  int num_classes() const override { return classes_; }
  std::vector<std::vector<double>> predict(const std::vector<Image>& batch) override {
    std::vector<double> row(classes_, 0.0);
    row[0] = 1.0;
    return std::vector<std::vector<double>>(batch.size(), row);
  }
  bool concurrent_safe() const override { return true; }
  std::string id() const override { return "fixed"; }

 private:
  int classes_;
};

class BandOracle : public PredictionOracle {
 public:
  BandOracle(FrequencyIndex idx, int h, int w) : basis_(fourier_basis_image(idx, h, w)) {}
  int num_classes() const override { return 2; }
  std::vector<std::vector<double>> predict(const std::vector<Image>& batch) override {
    std::vector<std::vector<double>> out;
    for (const Image& img : batch) {
      double proj = 0.0;
      for (size_t k = 0; k < img.plane_size(); ++k) proj += img.plane(0)[k] * basis_.data[k];
      out.push_back(proj > 0.0 ? std::vector<double>{0.0, 1.0} : std::vector<double>{1.0, 0.0});
    }
    return out;
  }
  bool concurrent_safe() const override { return true; }
  std::string id() const override { return "band"; }

 private:
  Image basis_;
};

void criterion5() {
  bool ok = true;
  std::ostringstream detail;

  // Constant-prediction oracle: error = label imbalance everywhere, exactly.
  {
    LabeledCorpus corpus;
    corpus.num_classes = 2;
    auto rng = derive_rng(1005);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 8; ++k) {
      Image img(8, 8, 1);
      for (double& v : img.data) v = u(rng);
      corpus.images.push_back(img);
      corpus.labels.push_back(k < 6 ? 0 : 1);
    }
    FixedOracle oracle(2);
    DistanceMap dmap;
    dmap.height = dmap.width = 8;
    dmap.values.assign(64, 1.0);
    DodissConfig cfg;
    cfg.seed = 5;
    SensitivityMap map = dodiss_map(oracle, corpus, dmap, cfg);
    for (double v : map.values) ok = ok && v == 0.25;

    // Zero distance map: clean error everywhere, exactly.
    dmap.values.assign(64, 0.0);
    SensitivityMap zero = dodiss_map(oracle, corpus, dmap, cfg);
    for (double v : zero.values) ok = ok && v == zero.clean_error;
  }

  // Band classifier: sensitivity concentrated on the used frequency pair.
  double on_mean = 0.0, off_mean = 0.0;
  {
    const FrequencyIndex on{2, 3};
    Image basis = fourier_basis_image(on, 16, 16);
    LabeledCorpus corpus;
    corpus.num_classes = 2;
    for (int k = 0; k < 16; ++k) {
      int label = k % 2;
      Image img(16, 16, 1);
      for (size_t p = 0; p < img.plane_size(); ++p)
        img.data[p] = (label ? 0.5 : -0.5) * basis.data[p];
      corpus.images.push_back(std::move(img));
      corpus.labels.push_back(label);
    }
    BandOracle oracle(on, 16, 16);
    DistanceMap dmap;
    dmap.height = dmap.width = 16;
    dmap.values.assign(256, 1.0);
    DodissConfig cfg;
    cfg.seed = 6;
    cfg.both_signs = true;
    SensitivityMap map = dodiss_map(oracle, corpus, dmap, cfg);

    int on_count = 0, off_count = 0;
    for (int r = 0; r < 16; ++r)
      for (int c = 0; c < 16; ++c) {
        bool hot = (r == centered_row(2, 16) && c == centered_col(3, 16)) ||
                   (r == centered_row(-2, 16) && c == centered_col(-3, 16));
        if (hot) {
          on_mean += map.at(r, c);
          ++on_count;
        } else {
          off_mean += map.at(r, c);
          ++off_count;
        }
      }
    on_mean /= on_count;
    off_mean /= off_count;
    ok = ok && (on_mean - off_mean >= 0.2);
  }

  detail << "band sensitivity on " << on_mean << " vs off " << off_mean;
  report(5, ok, "sensitivity-map sanity battery", detail.str());
}

// ---------------------------------------------------------------- criterion 6

void criterion6() {
  auto rng = derive_rng(1006);
  ToyModel model = make_toy_model(2, 2, 1, 3, 2, false, rng);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Image> source, mixed;
  std::vector<int> labels;
  for (int k = 0; k < 3; ++k) {
    Image a(2, 2, 1), b(2, 2, 1);
    for (double& v : a.data) v = u(rng);
    for (double& v : b.data) v = u(rng);
    source.push_back(a);
    mixed.push_back(b);
    labels.push_back(k % 2);
  }

  double worst = 0.0;
  auto check = [&](const std::function<double(const ToyModel&, ModelGrad*)>& loss_fn) {
    ToyModel m = model;
    ModelGrad analytic;
    loss_fn(m, &analytic);
    const double h = 1e-5;
    for (int which = 0; which < 4; ++which) {
      auto& params = m.param(which);
      auto& grads = analytic.param(which);
      for (size_t k = 0; k < params.size(); ++k) {
        const double saved = params[k];
        params[k] = saved + h;
        double up = loss_fn(m, nullptr);
        params[k] = saved - h;
        double down = loss_fn(m, nullptr);
        params[k] = saved;
        double fd = (up - down) / (2.0 * h);
        double rel = std::abs(fd - grads[k]) / std::max(1.0, std::abs(grads[k]));
        worst = std::max(worst, rel);
      }
    }
  };

  check([&](const ToyModel& m, ModelGrad* g) { return task_loss(m, source, labels, g); });
  check([&](const ToyModel& m, ModelGrad* g) { return samix_loss(m, source, mixed, labels, 0.01, g); });
  check([&](const ToyModel& m, ModelGrad* g) { return samix_loss(m, source, mixed, labels, 0.7, g); });

  std::ostringstream detail;
  detail << "worst relative error " << worst;
  report(6, worst < 1e-6, "analytic gradients vs central finite differences", detail.str());
}

// ---------------------------------------------------------------- criterion 7

void criterion7() {
  const int seeds = 5;
  double drop_sum = 0.0, gain_sum = 0.0;
  int l1_down = 0;
  std::ostringstream detail;
  detail.precision(3);

  auto t0 = std::chrono::steady_clock::now();
  for (int s = 0; s < seeds; ++s) {
    SynthConfig synth;
    synth.seed = 9000 + s;
    SynthDataset data = generate_synth(synth);
    PipelineConfig cfg = default_synth_pipeline(synth.seed);
    PipelineResult res = run_pipeline(data, cfg);

    double drop = res.source_only_val_acc - res.source_only_target_acc;
    double gain = res.samix_target_acc - res.source_only_target_acc;
    drop_sum += drop;
    gain_sum += gain;
    double pre = map_l1_mean(res.pre_map.values);
    double post = map_l1_mean(res.post_map.values);
    if (post < pre) ++l1_down;
    detail << (s ? "; " : "") << "seed " << synth.seed << ": drop " << 100 * drop << " gain "
           << 100 * gain << " l1 " << pre << "->" << post;
  }
  auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  double mean_drop = 100.0 * drop_sum / seeds;
  double mean_gain = 100.0 * gain_sum / seeds;
  bool ok = mean_drop >= 10.0 && mean_gain >= 5.0 && l1_down == seeds && secs < 900.0;
  detail << "; mean drop " << mean_drop << " pts, mean gain " << mean_gain << " pts, l1 down "
         << l1_down << "/" << seeds << ", " << secs << " s";
  report(7, ok, "end-to-end synthetic domain-shift benchmark", detail.str());
}

// ---------------------------------------------------------------- criterion 8

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void criterion8() {
  bool ok = true;
  std::ostringstream detail;
  fs::path tmp = fs::temp_directory_path() / ("samix-acc-" + std::to_string(::getpid()));
  fs::create_directories(tmp);

  // Fixed-seed runs are bit-identical end to end.
  {
    SynthConfig synth;
    synth.seed = 31337;
    synth.n_source_train = 32;
    synth.n_source_val = 8;
    synth.n_target_test = 8;
    SynthDataset a = generate_synth(synth);
    SynthDataset b = generate_synth(synth);
    for (size_t k = 0; k < a.source_train.images.size() && ok; ++k)
      ok = a.source_train.images[k].data == b.source_train.images[k].data;
    ok = ok && a.target_train.front().data == b.target_train.front().data;

    TrainConfig tc;
    tc.mu = 0.0;
    tc.epochs = 3;
    tc.batch_size = 8;
    tc.seed = 7;
    auto rng1 = derive_rng(7, 0x100du);
    auto rng2 = derive_rng(7, 0x100du);
    ToyModel m1 = make_toy_model(32, 32, 1, 16, 2, true, rng1);
    ToyModel m2 = make_toy_model(32, 32, 1, 16, 2, true, rng2);
    train_supervised(m1, a.source_train, nullptr, tc);
    train_supervised(m2, b.source_train, nullptr, tc);
    save_model((tmp / "m1.ckpt").string(), m1, {{"seed", "7"}});
    save_model((tmp / "m2.ckpt").string(), m2, {{"seed", "7"}});
    ok = ok && slurp((tmp / "m1.ckpt").string()) == slurp((tmp / "m2.ckpt").string());
    if (!ok) detail << "fixed-seed run mismatch; ";

    // Map file round trip.
    DistanceMap dmap = distance_map(collect_amplitudes(a.source_train.images),
                                    collect_amplitudes(a.source_val.images));
    write_map_file((tmp / "a.map").string(), to_map_file(dmap));
    write_map_file((tmp / "b.map").string(), read_map_file((tmp / "a.map").string()));
    bool maps = slurp((tmp / "a.map").string()) == slurp((tmp / "b.map").string());
    if (!maps) detail << "map round trip mismatch; ";
    ok = ok && maps;

    // Checkpoint round trip.
    std::vector<std::pair<std::string, std::string>> meta;
    ToyModel loaded = load_model((tmp / "m1.ckpt").string(), &meta);
    save_model((tmp / "m1b.ckpt").string(), loaded, meta);
    bool ckpts = slurp((tmp / "m1.ckpt").string()) == slurp((tmp / "m1b.ckpt").string());
    if (!ckpts) detail << "checkpoint round trip mismatch; ";
    ok = ok && ckpts;

    // Subprocess oracle vs in-process model through the shipped worker.
    SubprocessOracle remote(std::string(SAMIX_BIN_DIR) + "/samix_oracle_worker " +
                                (tmp / "m1.ckpt").string(),
                            2, 60.0);
    std::vector<Image> batch(a.source_val.images.begin(), a.source_val.images.begin() + 4);
    auto rp = remote.predict(batch);
    auto lp = forward(m1, batch);
    double worst = 0.0;
    for (size_t k = 0; k < lp.size(); ++k)
      for (size_t i = 0; i < lp[k].size(); ++i) worst = std::max(worst, std::abs(rp[k][i] - lp[k][i]));
    std::vector<int> labels(a.source_val.labels.begin(), a.source_val.labels.begin() + 4);
    worst = std::max(worst, std::abs(remote.loss(batch, labels) - task_loss(m1, batch, labels)));
    if (worst > 1e-6) detail << "subprocess deviation " << worst << "; ";
    ok = ok && worst <= 1e-6;

    // Shipped uniform fixture child.
    SubprocessOracle fixture("python3 " + std::string(SAMIX_FIXTURE_DIR) + "/uniform_oracle.py 2", 2,
                             60.0);
    auto up = fixture.predict(batch);
    for (const auto& row : up)
      for (double p : row) ok = ok && p == 0.5;
  }

  std::error_code ec;
  fs::remove_all(tmp, ec);
  report(8, ok, "determinism, binary formats, subprocess agreement", detail.str());
}

}  // namespace

int main() {
  try {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
  } catch (const std::exception& e) {
    std::cout << "FAIL (exception): " << e.what() << std::endl;
    return 1;
  }
  return failures == 0 ? 0 : 1;
}

#include "samix/dodiss.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "samix/rng.hpp"

namespace samix {

namespace {

double error_rate(PredictionOracle& oracle, const std::vector<Image>& images,
                  const std::vector<int>& labels, int batch_size) {
  const size_t n = images.size();
  size_t wrong = 0;
  for (size_t start = 0; start < n; start += batch_size) {
    size_t end = std::min(n, start + batch_size);
    std::vector<Image> batch(images.begin() + start, images.begin() + end);
    auto probs = oracle.predict(batch);
    if (probs.size() != batch.size())
      throw OracleError("oracle returned " + std::to_string(probs.size()) + " rows for batch of " +
                        std::to_string(batch.size()) + " starting at index " + std::to_string(start));
    for (size_t k = 0; k < probs.size(); ++k) {
      double sum = 0.0;
      for (double p : probs[k]) {
        if (!std::isfinite(p) || p < 0.0)
          throw OracleError("malformed probability vector at batch index " + std::to_string(start + k));
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-6)
        throw OracleError("probability row does not sum to 1 at batch index " + std::to_string(start + k));
      if (argmax_class(probs[k]) != labels[start + k]) ++wrong;
    }
  }
  return static_cast<double>(wrong) / static_cast<double>(n);
}

double perturbed_error(PredictionOracle& oracle, const LabeledCorpus& corpus, const Image& basis,
                       double magnitude, const std::vector<std::vector<int>>& signs,
                       const DodissConfig& cfg) {
  std::vector<Image> perturbed;
  perturbed.reserve(corpus.images.size());
  for (size_t k = 0; k < corpus.images.size(); ++k) {
    Image img = corpus.images[k];
    perturb_inplace(img, basis, magnitude, signs[k]);
    if (cfg.clamp_inputs) img.clamp01();
    perturbed.push_back(std::move(img));
  }
  return error_rate(oracle, perturbed, corpus.labels, cfg.batch_size);
}

std::vector<std::vector<int>> draw_signs(const LabeledCorpus& corpus, std::mt19937_64& rng,
                                         bool shared_sign) {
  std::vector<std::vector<int>> signs(corpus.images.size());
  std::bernoulli_distribution coin(0.5);
  for (size_t k = 0; k < corpus.images.size(); ++k) {
    int c = corpus.images[k].channels;
    signs[k].resize(c);
    if (shared_sign) {
      int s = coin(rng) ? 1 : -1;
      std::fill(signs[k].begin(), signs[k].end(), s);
    } else {
      for (int ch = 0; ch < c; ++ch) signs[k][ch] = coin(rng) ? 1 : -1;
    }
  }
  return signs;
}

LabeledCorpus subsample_corpus(const LabeledCorpus& corpus, int cap, uint64_t seed) {
  if (cap <= 0 || static_cast<size_t>(cap) >= corpus.images.size()) return corpus;
  std::vector<size_t> order(corpus.images.size());
  for (size_t k = 0; k < order.size(); ++k) order[k] = k;
  auto rng = derive_rng(seed, 0x5ab5u);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(cap);
  std::sort(order.begin(), order.end());
  LabeledCorpus out;
  out.num_classes = corpus.num_classes;
  for (size_t k : order) {
    out.images.push_back(corpus.images[k]);
    out.labels.push_back(corpus.labels[k]);
  }
  return out;
}

}  // namespace

double clean_error_rate(PredictionOracle& oracle, const LabeledCorpus& corpus, int batch_size) {
  if (corpus.images.empty()) throw DataError("clean_error_rate: empty corpus");
  return error_rate(oracle, corpus.images, corpus.labels, batch_size);
}

double sensitivity_at(PredictionOracle& oracle, const LabeledCorpus& corpus, FrequencyIndex idx,
                      double magnitude, std::mt19937_64& rng, const DodissConfig& cfg) {
  if (corpus.images.empty()) throw DataError("sensitivity_at: empty corpus");
  if (!(magnitude >= 0.0) || !std::isfinite(magnitude))
    throw DataError("sensitivity_at: magnitude must be finite and non-negative");
  const Image& first = corpus.images.front();
  Image basis = fourier_basis_image(idx, first.height, first.width);
  if (cfg.both_signs) {
    std::vector<std::vector<int>> plus(corpus.images.size()), minus(corpus.images.size());
    for (size_t k = 0; k < corpus.images.size(); ++k) {
      plus[k].assign(corpus.images[k].channels, 1);
      minus[k].assign(corpus.images[k].channels, -1);
    }
    return 0.5 * (perturbed_error(oracle, corpus, basis, magnitude, plus, cfg) +
                  perturbed_error(oracle, corpus, basis, magnitude, minus, cfg));
  }
  auto signs = draw_signs(corpus, rng, cfg.shared_sign);
  return perturbed_error(oracle, corpus, basis, magnitude, signs, cfg);
}

SensitivityMap dodiss_map(PredictionOracle& oracle, const LabeledCorpus& corpus,
                          const DistanceMap& dmap, const DodissConfig& cfg) {
  if (corpus.images.empty()) throw DataError("dodiss_map: empty corpus");
  const Image& first = corpus.images.front();
  if (dmap.height != first.height || dmap.width != first.width)
    throw DataError("dodiss_map: distance map dimensions do not match image dimensions");

  LabeledCorpus working = subsample_corpus(corpus, cfg.subsample, cfg.seed);

  SensitivityMap out;
  out.height = dmap.height;
  out.width = dmap.width;
  out.values.assign(static_cast<size_t>(dmap.height) * dmap.width, 0.0);
  out.oracle_id = oracle.id();
  out.dataset_size = static_cast<int>(working.images.size());
  out.seed = cfg.seed;
  out.clean_error = clean_error_rate(oracle, working, cfg.batch_size);

  const int h = dmap.height, w = dmap.width;
  // Canonical half-plane entries; conjugates are mirrored afterwards.
  std::vector<std::pair<int, int>> canonical;
  for (int r = 0; r < h; ++r) {
    const int i = r - h / 2;
    for (int c = 0; c < w; ++c) {
      const int j = c - w / 2;
      const int rc = centered_row(conjugate_freq(i, h), h);
      const int cc = centered_col(conjugate_freq(j, w), w);
      if (rc < r || (rc == r && cc < c)) continue;
      canonical.emplace_back(r, c);
    }
  }

  auto compute_entry = [&](int r, int c) {
    double magnitude = dmap.at(r, c);
    if (magnitude == 0.0) {
      out.values[static_cast<size_t>(r) * w + c] = out.clean_error;
      return;
    }
    auto rng = derive_rng(cfg.seed, static_cast<uint64_t>(r), static_cast<uint64_t>(c));
    out.values[static_cast<size_t>(r) * w + c] =
        sensitivity_at(oracle, working, FrequencyIndex{r - h / 2, c - w / 2}, magnitude, rng, cfg);
  };

  int workers = std::max(1, cfg.workers);
  if (workers > 1 && oracle.concurrent_safe()) {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) {
      pool.emplace_back([&] {
        for (size_t k = next.fetch_add(1); k < canonical.size(); k = next.fetch_add(1))
          compute_entry(canonical[k].first, canonical[k].second);
      });
    }
    for (auto& th : pool) th.join();
  } else {
    for (auto [r, c] : canonical) compute_entry(r, c);
  }

  // Mirror to the conjugate half.
  for (int r = 0; r < h; ++r) {
    const int i = r - h / 2;
    for (int c = 0; c < w; ++c) {
      const int j = c - w / 2;
      const int rc = centered_row(conjugate_freq(i, h), h);
      const int cc = centered_col(conjugate_freq(j, w), w);
      if (rc < r || (rc == r && cc < c))
        out.values[static_cast<size_t>(r) * w + c] = out.values[static_cast<size_t>(rc) * w + cc];
    }
  }
  return out;
}

double map_l1_mean(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double acc = 0.0;
  for (double v : values) acc += std::abs(v);
  return acc / static_cast<double>(values.size());
}

}  // namespace samix

#include "samix/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "samix/rng.hpp"

namespace samix {

std::vector<double>& ToyModel::param(int which) {
  switch (which) {
    case 0: return w1;
    case 1: return b1;
    case 2: return w2;
    default: return b2;
  }
}

void ModelGrad::resize_like(const ToyModel& m) {
  w1.assign(m.w1.size(), 0.0);
  b1.assign(m.b1.size(), 0.0);
  w2.assign(m.w2.size(), 0.0);
  b2.assign(m.b2.size(), 0.0);
}

void ModelGrad::zero() {
  std::fill(w1.begin(), w1.end(), 0.0);
  std::fill(b1.begin(), b1.end(), 0.0);
  std::fill(w2.begin(), w2.end(), 0.0);
  std::fill(b2.begin(), b2.end(), 0.0);
}

std::vector<double>& ModelGrad::param(int which) {
  switch (which) {
    case 0: return w1;
    case 1: return b1;
    case 2: return w2;
    default: return b2;
  }
}

ToyModel make_toy_model(int h, int w, int c, int hidden, int classes, bool use_pool,
                        std::mt19937_64& rng) {
  if (hidden < 1 || classes < 2) throw DataError("make_toy_model: need hidden >= 1 and classes >= 2");
  if (use_pool && (h % 8 != 0 || w % 8 != 0))
    throw DataError("make_toy_model: 8x8 pooling requires dimensions divisible by 8");
  ToyModel m;
  m.input_h = h;
  m.input_w = w;
  m.input_c = c;
  m.use_pool = use_pool;
  m.hidden = hidden;
  m.classes = classes;
  const int d = m.input_dim();
  std::normal_distribution<double> gauss(0.0, 1.0);
  m.w1.resize(static_cast<size_t>(hidden) * d);
  for (double& v : m.w1) v = gauss(rng) * std::sqrt(2.0 / d);
  m.b1.assign(hidden, 0.0);
  m.w2.resize(static_cast<size_t>(classes) * hidden);
  for (double& v : m.w2) v = gauss(rng) * std::sqrt(1.0 / hidden);
  m.b2.assign(classes, 0.0);
  return m;
}

std::vector<double> model_input(const ToyModel& model, const Image& image) {
  if (image.height != model.input_h || image.width != model.input_w || image.channels != model.input_c)
    throw DataError("model input dimensions do not match the model");
  if (!model.use_pool) return image.data;
  const int ph = 8, pw = 8;
  const int bh = image.height / ph, bw = image.width / pw;
  std::vector<double> x(static_cast<size_t>(image.channels) * ph * pw);
  for (int ch = 0; ch < image.channels; ++ch)
    for (int r = 0; r < ph; ++r)
      for (int c = 0; c < pw; ++c) {
        double acc = 0.0;
        for (int rr = 0; rr < bh; ++rr)
          for (int cc = 0; cc < bw; ++cc) acc += image.at(ch, r * bh + rr, c * bw + cc);
        x[(static_cast<size_t>(ch) * ph + r) * pw + c] = acc / (bh * bw);
      }
  return x;
}

namespace {

struct ForwardCache {
  std::vector<double> x;       // input_dim
  std::vector<double> hidden;  // post-ReLU
  std::vector<double> probs;
};

ForwardCache forward_one(const ToyModel& m, const Image& img) {
  ForwardCache cache;
  cache.x = model_input(m, img);
  const int d = m.input_dim();
  cache.hidden.resize(m.hidden);
  for (int i = 0; i < m.hidden; ++i) {
    double z = m.b1[i];
    const double* row = m.w1.data() + static_cast<size_t>(i) * d;
    for (int k = 0; k < d; ++k) z += row[k] * cache.x[k];
    cache.hidden[i] = z > 0.0 ? z : 0.0;
  }
  std::vector<double> logits(m.classes);
  for (int i = 0; i < m.classes; ++i) {
    double z = m.b2[i];
    const double* row = m.w2.data() + static_cast<size_t>(i) * m.hidden;
    for (int k = 0; k < m.hidden; ++k) z += row[k] * cache.hidden[k];
    logits[i] = z;
  }
  double zmax = *std::max_element(logits.begin(), logits.end());
  double norm = 0.0;
  cache.probs.resize(m.classes);
  for (int i = 0; i < m.classes; ++i) {
    cache.probs[i] = std::exp(logits[i] - zmax);
    norm += cache.probs[i];
  }
  for (double& p : cache.probs) p /= norm;
  return cache;
}

// Accumulates parameter gradients given dL/dlogits for one cached sample.
void backward_one(const ToyModel& m, const ForwardCache& cache, const std::vector<double>& dlogits,
                  ModelGrad& grad) {
  const int d = m.input_dim();
  std::vector<double> dhidden(m.hidden, 0.0);
  for (int i = 0; i < m.classes; ++i) {
    grad.b2[i] += dlogits[i];
    double* grow = grad.w2.data() + static_cast<size_t>(i) * m.hidden;
    const double* wrow = m.w2.data() + static_cast<size_t>(i) * m.hidden;
    for (int k = 0; k < m.hidden; ++k) {
      grow[k] += dlogits[i] * cache.hidden[k];
      dhidden[k] += wrow[k] * dlogits[i];
    }
  }
  for (int i = 0; i < m.hidden; ++i) {
    if (cache.hidden[i] <= 0.0) continue;  // ReLU gate
    grad.b1[i] += dhidden[i];
    double* grow = grad.w1.data() + static_cast<size_t>(i) * d;
    for (int k = 0; k < d; ++k) grow[k] += dhidden[i] * cache.x[k];
  }
}

// dJS/dlogits through a softmax output p against mixture midpoint m.
std::vector<double> js_dlogits(const std::vector<double>& p, const std::vector<double>& mid,
                               double scale) {
  const int n = static_cast<int>(p.size());
  std::vector<double> gp(n);
  for (int i = 0; i < n; ++i)
    gp[i] = 0.5 * std::log(std::max(p[i], 1e-300) / std::max(mid[i], 1e-300));
  double dot = 0.0;
  for (int i = 0; i < n; ++i) dot += gp[i] * p[i];
  std::vector<double> dlogits(n);
  for (int i = 0; i < n; ++i) dlogits[i] = scale * p[i] * (gp[i] - dot);
  return dlogits;
}

}  // namespace

std::vector<std::vector<double>> forward(const ToyModel& model, const std::vector<Image>& batch) {
  std::vector<std::vector<double>> out;
  out.reserve(batch.size());
  for (const Image& img : batch) out.push_back(forward_one(model, img).probs);
  return out;
}

double task_loss(const ToyModel& model, const std::vector<Image>& batch,
                 const std::vector<int>& labels, ModelGrad* grad) {
  if (batch.size() != labels.size()) throw DataError("task_loss: batch/label size mismatch");
  if (batch.empty()) throw DataError("task_loss: empty batch");
  if (grad) grad->resize_like(model);
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  for (size_t k = 0; k < batch.size(); ++k) {
    const int y = labels[k];
    if (y < 0 || y >= model.classes) throw DataError("task_loss: label out of range");
    ForwardCache cache = forward_one(model, batch[k]);
    loss -= std::log(std::max(cache.probs[y], 1e-300)) * inv_b;
    if (grad) {
      std::vector<double> dlogits(cache.probs);
      dlogits[y] -= 1.0;
      for (double& v : dlogits) v *= inv_b;
      backward_one(model, cache, dlogits, *grad);
    }
  }
  return loss;
}

double js_divergence(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw DataError("js_divergence: length mismatch");
  double js = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0.0) js += 0.5 * p[i] * std::log(p[i] / m);
    if (q[i] > 0.0) js += 0.5 * q[i] * std::log(q[i] / m);
  }
  return js;
}

double samix_loss(const ToyModel& model, const std::vector<Image>& source_batch,
                  const std::vector<Image>& mixed_batch, const std::vector<int>& labels, double mu,
                  ModelGrad* grad, double* js_value) {
  if (source_batch.size() != mixed_batch.size() || source_batch.size() != labels.size())
    throw DataError("samix_loss: batch size mismatch");
  if (grad) grad->resize_like(model);
  const double inv_b = 1.0 / static_cast<double>(source_batch.size());
  double total = 0.0, js_total = 0.0;
  for (size_t k = 0; k < source_batch.size(); ++k) {
    const int y = labels[k];
    ForwardCache src = forward_one(model, source_batch[k]);
    ForwardCache mix = forward_one(model, mixed_batch[k]);
    total -= std::log(std::max(src.probs[y], 1e-300)) * inv_b;
    const double js = js_divergence(src.probs, mix.probs);
    js_total += js * inv_b;
    total += mu * js * inv_b;
    if (grad) {
      std::vector<double> mid(src.probs.size());
      for (size_t i = 0; i < mid.size(); ++i) mid[i] = 0.5 * (src.probs[i] + mix.probs[i]);

      std::vector<double> dsrc = js_dlogits(src.probs, mid, mu * inv_b);
      // cross-entropy contribution: (p - onehot) / B
      for (size_t i = 0; i < dsrc.size(); ++i) dsrc[i] += inv_b * src.probs[i];
      dsrc[y] -= inv_b;
      backward_one(model, src, dsrc, *grad);

      std::vector<double> dmix = js_dlogits(mix.probs, mid, mu * inv_b);
      backward_one(model, mix, dmix, *grad);
    }
  }
  if (js_value) *js_value = js_total;
  return total;
}

double accuracy(const ToyModel& model, const LabeledCorpus& corpus) {
  if (corpus.images.empty()) throw DataError("accuracy: empty corpus");
  size_t hit = 0;
  for (size_t k = 0; k < corpus.images.size(); ++k)
    if (argmax_class(forward_one(model, corpus.images[k]).probs) == corpus.labels[k]) ++hit;
  return static_cast<double>(hit) / static_cast<double>(corpus.images.size());
}

std::vector<EpochMetrics> train_samix(ToyModel& model, const LabeledCorpus& train,
                                      const LabeledCorpus* source_val, const LabeledCorpus* target_test,
                                      const std::vector<Image>& target_pool,
                                      const SensitivityMap* sensitivity, const MixConfig& mix_cfg,
                                      const TrainConfig& cfg) {
  cfg.validate();
  if (train.images.empty()) throw DataError("train_samix: empty training corpus");
  const bool mixing = cfg.mu > 0.0 && !target_pool.empty() && sensitivity != nullptr;
  const int decay_every = cfg.decay_every > 0 ? cfg.decay_every : std::max(1, cfg.epochs / 3);

  MixConfig inner = mix_cfg;
  inner.record_trace = false;

  std::vector<size_t> order(train.images.size());
  std::iota(order.begin(), order.end(), 0);

  std::vector<EpochMetrics> log;
  ModelGrad grad;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = cfg.lr * std::pow(cfg.lr_decay, epoch / decay_every);
    auto shuffle_rng = derive_rng(cfg.seed, 0x5e11u, static_cast<uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    // Separate stream for target pairing so the mu=0 path consumes the same
    // RNG sequence as plain supervised training.
    auto pair_rng = derive_rng(cfg.seed, 0x9a17u, static_cast<uint64_t>(epoch));

    EpochMetrics m;
    m.epoch = epoch;
    double lambda_sum = 0.0;
    size_t lambda_n = 0;
    size_t batches = 0;

    for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const size_t end = std::min(order.size(), start + static_cast<size_t>(cfg.batch_size));
      std::vector<Image> batch;
      std::vector<int> labels;
      batch.reserve(end - start);
      for (size_t k = start; k < end; ++k) {
        batch.push_back(train.images[order[k]]);
        labels.push_back(train.labels[order[k]]);
      }

      double loss;
      double js = 0.0;
      if (mixing) {
        ToyModelOracle oracle(model);
        std::vector<Image> mixed;
        mixed.reserve(batch.size());
        for (size_t k = 0; k < batch.size(); ++k) {
          size_t t = std::uniform_int_distribution<size_t>(0, target_pool.size() - 1)(pair_rng);
          MixResult res = adversarial_lambda(oracle, batch[k], labels[k], target_pool[t], *sensitivity, inner);
          lambda_sum += res.lambda_star;
          ++lambda_n;
          mixed.push_back(std::move(res.image));
        }
        loss = samix_loss(model, batch, mixed, labels, cfg.mu, &grad, &js);
      } else {
        loss = task_loss(model, batch, labels, &grad);
      }
      if (!std::isfinite(loss))
        throw DataError("training diverged at epoch " + std::to_string(epoch) + " batch " +
                        std::to_string(batches));
      m.train_loss += loss;
      m.js_loss += js;
      ++batches;

      for (int which = 0; which < 4; ++which) {
        auto& p = model.param(which);
        auto& g = grad.param(which);
        for (size_t k = 0; k < p.size(); ++k) p[k] -= lr * (g[k] + cfg.weight_decay * p[k]);
      }
    }
    m.train_loss /= static_cast<double>(batches);
    m.js_loss /= static_cast<double>(batches);
    m.mean_lambda = lambda_n ? lambda_sum / static_cast<double>(lambda_n) : 0.0;
    if (source_val) m.source_val_acc = accuracy(model, *source_val);
    if (target_test) m.target_acc = accuracy(model, *target_test);
    log.push_back(m);
  }
  return log;
}

std::vector<EpochMetrics> train_supervised(ToyModel& model, const LabeledCorpus& train,
                                           const LabeledCorpus* source_val, const TrainConfig& cfg) {
  return train_samix(model, train, source_val, nullptr, {}, nullptr, MixConfig{}, cfg);
}

}  // namespace samix

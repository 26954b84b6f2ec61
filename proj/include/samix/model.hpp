#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "samix/image.hpp"
#include "samix/mixup.hpp"
#include "samix/oracle.hpp"

namespace samix {

// flatten -> optional 8x8 average pool -> hidden ReLU layer -> softmax.
// All parameters double precision, row-major.
struct ToyModel {
  int input_h = 0;
  int input_w = 0;
  int input_c = 1;
  bool use_pool = false;  // average-pool each channel to 8x8 before flattening
  int hidden = 64;
  int classes = 2;

  std::vector<double> w1;  // hidden x input_dim
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // classes x hidden
  std::vector<double> b2;  // classes

  int pooled_h() const { return use_pool ? 8 : input_h; }
  int pooled_w() const { return use_pool ? 8 : input_w; }
  int input_dim() const { return pooled_h() * pooled_w() * input_c; }

  std::vector<double>& param(int which);  // 0..3 -> w1,b1,w2,b2
};

struct ModelGrad {
  std::vector<double> w1, b1, w2, b2;

  void resize_like(const ToyModel& m);
  void zero();
  std::vector<double>& param(int which);
};

ToyModel make_toy_model(int h, int w, int c, int hidden, int classes, bool use_pool,
                        std::mt19937_64& rng);

// Pooled, flattened input vector for one image.
std::vector<double> model_input(const ToyModel& model, const Image& image);

std::vector<std::vector<double>> forward(const ToyModel& model, const std::vector<Image>& batch);

// Mean cross-entropy; when grad is non-null, the exact analytic gradient.
double task_loss(const ToyModel& model, const std::vector<Image>& batch,
                 const std::vector<int>& labels, ModelGrad* grad = nullptr);

// Jensen-Shannon divergence with natural log; 0*log(0/x) taken as 0.
double js_divergence(const std::vector<double>& p, const std::vector<double>& q);

// L_T(source) + mu * mean JS(F(source), F(mixed)); mixed images are constants.
// The JS gradient flows through both branches.
double samix_loss(const ToyModel& model, const std::vector<Image>& source_batch,
                  const std::vector<Image>& mixed_batch, const std::vector<int>& labels, double mu,
                  ModelGrad* grad = nullptr, double* js_value = nullptr);

struct TrainConfig {
  double mu = 0.01;
  int epochs = 30;
  double lr = 0.05;
  double lr_decay = 0.1;
  int decay_every = 0;  // 0 -> epochs / 3
  double weight_decay = 0.0;  // L2 coefficient applied with the SGD step
  int batch_size = 128;
  uint64_t seed = 0;

  void validate() const {
    if (mu < 0.0) throw DataError("TrainConfig: mu must be non-negative");
    if (weight_decay < 0.0) throw DataError("TrainConfig: weight_decay must be non-negative");
    if (epochs < 1 || batch_size < 1 || !(lr > 0.0)) throw DataError("TrainConfig: bad epochs/batch/lr");
  }
};

struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;
  double js_loss = 0.0;
  double source_val_acc = -1.0;  // -1 when no val set given
  double target_acc = -1.0;
  double mean_lambda = 0.0;
};

// Minibatch SGD on Eq-style objective L_T + mu*JS with the adversarial inner
// loop choosing lambda per item. With mu == 0 or an empty target pool this is
// plain supervised training and consumes the identical RNG sequence.
std::vector<EpochMetrics> train_samix(ToyModel& model, const LabeledCorpus& train,
                                      const LabeledCorpus* source_val, const LabeledCorpus* target_test,
                                      const std::vector<Image>& target_pool,
                                      const SensitivityMap* sensitivity, const MixConfig& mix_cfg,
                                      const TrainConfig& cfg);

std::vector<EpochMetrics> train_supervised(ToyModel& model, const LabeledCorpus& train,
                                           const LabeledCorpus* source_val, const TrainConfig& cfg);

double accuracy(const ToyModel& model, const LabeledCorpus& corpus);

// In-process PredictionOracle over a toy model. Thread-safe: forward passes
// share no mutable state.
class ToyModelOracle : public PredictionOracle {
 public:
  explicit ToyModelOracle(const ToyModel& model, std::string id = "builtin")
      : model_(model), id_(std::move(id)) {}

  int num_classes() const override { return model_.classes; }
  std::vector<std::vector<double>> predict(const std::vector<Image>& batch) override {
    return forward(model_, batch);
  }
  bool supports_loss() const override { return true; }
  double loss(const std::vector<Image>& batch, const std::vector<int>& labels) override {
    return task_loss(model_, batch, labels);
  }
  bool concurrent_safe() const override { return true; }
  std::string id() const override { return id_; }

 private:
  const ToyModel& model_;
  std::string id_;
};

}  // namespace samix

#pragma once

#include <string>
#include <vector>

#include "samix/image.hpp"

namespace samix {

// Any deterministic model mapping an image batch to class probabilities,
// optionally with a mean task-loss evaluation.
class PredictionOracle {
 public:
  virtual ~PredictionOracle() = default;

  virtual int num_classes() const = 0;

  // One probability vector per image; rows sum to 1 within 1e-6.
  virtual std::vector<std::vector<double>> predict(const std::vector<Image>& batch) = 0;

  virtual bool supports_loss() const { return false; }
  virtual double loss(const std::vector<Image>& /*batch*/, const std::vector<int>& /*labels*/) {
    throw OracleError("oracle does not support loss evaluation");
  }

  // Whether predict/loss may be called from multiple threads at once.
  virtual bool concurrent_safe() const { return false; }

  virtual std::string id() const { return "oracle"; }
};

inline int argmax_class(const std::vector<double>& probs) {
  int best = 0;
  for (size_t k = 1; k < probs.size(); ++k)
    if (probs[k] > probs[best]) best = static_cast<int>(k);
  return best;
}

}  // namespace samix

#pragma once

#include <memory>
#include <mutex>
#include <condition_variable>
#include <string>
#include <vector>

#include "samix/oracle.hpp"

namespace samix {

// Oracle behind a child process speaking line-delimited JSON over its
// standard streams. One request in flight per process; requests are
// serialized by an internal mutex.
class SubprocessOracle : public PredictionOracle {
 public:
  explicit SubprocessOracle(std::string command, int num_classes,
                            double timeout_seconds = 60.0);
  ~SubprocessOracle() override;

  SubprocessOracle(const SubprocessOracle&) = delete;
  SubprocessOracle& operator=(const SubprocessOracle&) = delete;

  int num_classes() const override { return num_classes_; }
  std::vector<std::vector<double>> predict(const std::vector<Image>& batch) override;
  bool supports_loss() const override { return true; }
  double loss(const std::vector<Image>& batch, const std::vector<int>& labels) override;
  bool concurrent_safe() const override { return false; }
  std::string id() const override { return "subprocess:" + command_; }

 private:
  std::string roundtrip(const std::string& request_line);
  std::string request(const std::vector<Image>& batch, const std::vector<int>* labels, bool want_loss,
                      std::vector<std::vector<double>>* probs_out, double* loss_out);

  std::string command_;
  int num_classes_;
  double timeout_seconds_;
  int child_pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string read_buffer_;
  uint64_t next_id_ = 0;
  std::mutex mu_;
};

// Fixed-size pool of identical children; predict/loss dispatch to any free
// process, so callers may issue concurrent requests.
class SubprocessOraclePool : public PredictionOracle {
 public:
  SubprocessOraclePool(const std::string& command, int num_classes, int processes,
                       double timeout_seconds = 60.0);

  int num_classes() const override { return num_classes_; }
  std::vector<std::vector<double>> predict(const std::vector<Image>& batch) override;
  bool supports_loss() const override { return true; }
  double loss(const std::vector<Image>& batch, const std::vector<int>& labels) override;
  bool concurrent_safe() const override { return true; }
  std::string id() const override { return workers_.front()->id(); }

 private:
  size_t acquire();
  void release(size_t k);

  int num_classes_;
  std::vector<std::unique_ptr<SubprocessOracle>> workers_;
  std::vector<bool> busy_;
  std::mutex mu_;
  std::condition_variable cv_;
};

std::string base64_encode(const unsigned char* data, size_t len);
std::vector<unsigned char> base64_decode(const std::string& text);

}  // namespace samix

#include "samix/subprocess_oracle.hpp"

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstring>

#include <nlohmann/json.hpp>

using json = nlohmann::json;

namespace samix {

namespace {

const char kB64[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

}  // namespace

std::string base64_encode(const unsigned char* data, size_t len) {
  std::string out;
  out.reserve((len + 2) / 3 * 4);
  for (size_t i = 0; i < len; i += 3) {
    unsigned v = data[i] << 16;
    if (i + 1 < len) v |= data[i + 1] << 8;
    if (i + 2 < len) v |= data[i + 2];
    out.push_back(kB64[(v >> 18) & 63]);
    out.push_back(kB64[(v >> 12) & 63]);
    out.push_back(i + 1 < len ? kB64[(v >> 6) & 63] : '=');
    out.push_back(i + 2 < len ? kB64[v & 63] : '=');
  }
  return out;
}

std::vector<unsigned char> base64_decode(const std::string& text) {
  static int rev[256];
  static bool init = false;
  if (!init) {
    std::fill(std::begin(rev), std::end(rev), -1);
    for (int i = 0; i < 64; ++i) rev[static_cast<unsigned char>(kB64[i])] = i;
    init = true;
  }
  std::vector<unsigned char> out;
  unsigned acc = 0;
  int bits = 0;
  for (char ch : text) {
    if (ch == '=' || ch == '\n' || ch == '\r') continue;
    int v = rev[static_cast<unsigned char>(ch)];
    if (v < 0) throw DataError("base64: invalid character");
    acc = (acc << 6) | static_cast<unsigned>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<unsigned char>((acc >> bits) & 0xff));
    }
  }
  return out;
}

SubprocessOracle::SubprocessOracle(std::string command, int num_classes, double timeout_seconds)
    : command_(std::move(command)), num_classes_(num_classes), timeout_seconds_(timeout_seconds) {
  // A dead child must surface as a write error, not terminate the process.
  signal(SIGPIPE, SIG_IGN);
  int to_pipe[2], from_pipe[2];
  if (pipe(to_pipe) != 0 || pipe(from_pipe) != 0)
    throw OracleError("subprocess oracle: pipe() failed");
  pid_t pid = fork();
  if (pid < 0) throw OracleError("subprocess oracle: fork() failed");
  if (pid == 0) {
    dup2(to_pipe[0], STDIN_FILENO);
    dup2(from_pipe[1], STDOUT_FILENO);
    close(to_pipe[0]);
    close(to_pipe[1]);
    close(from_pipe[0]);
    close(from_pipe[1]);
    execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(to_pipe[0]);
  close(from_pipe[1]);
  child_pid_ = pid;
  to_child_ = to_pipe[1];
  from_child_ = from_pipe[0];
}

SubprocessOracle::~SubprocessOracle() {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  if (child_pid_ > 0) {
    kill(child_pid_, SIGTERM);
    int status = 0;
    waitpid(child_pid_, &status, 0);
  }
}

std::string SubprocessOracle::roundtrip(const std::string& request_line) {
  size_t written = 0;
  while (written < request_line.size()) {
    ssize_t n = write(to_child_, request_line.data() + written, request_line.size() - written);
    if (n <= 0) throw OracleError("subprocess oracle: child stdin closed (" + command_ + ")");
    written += static_cast<size_t>(n);
  }
  const int timeout_ms = static_cast<int>(timeout_seconds_ * 1000.0);
  for (;;) {
    auto nl = read_buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = read_buffer_.substr(0, nl);
      read_buffer_.erase(0, nl + 1);
      return line;
    }
    struct pollfd pfd{from_child_, POLLIN, 0};
    int rc = poll(&pfd, 1, timeout_ms);
    if (rc == 0) throw OracleError("subprocess oracle: request timed out after " +
                                   std::to_string(timeout_seconds_) + "s (" + command_ + ")");
    if (rc < 0) throw OracleError("subprocess oracle: poll() failed");
    char buf[65536];
    ssize_t n = read(from_child_, buf, sizeof(buf));
    if (n <= 0) throw OracleError("subprocess oracle: child exited (" + command_ + ")");
    read_buffer_.append(buf, static_cast<size_t>(n));
  }
}

std::string SubprocessOracle::request(const std::vector<Image>& batch, const std::vector<int>* labels,
                                      bool want_loss, std::vector<std::vector<double>>* probs_out,
                                      double* loss_out) {
  if (batch.empty()) throw DataError("subprocess oracle: empty batch");
  std::lock_guard<std::mutex> lock(mu_);
  const Image& first = batch.front();
  // f32 on the wire, interleaved [n, h, w, c] row-major.
  std::vector<float> pixels;
  pixels.reserve(batch.size() * first.plane_size() * first.channels);
  for (const Image& img : batch) {
    if (img.height != first.height || img.width != first.width || img.channels != first.channels)
      throw DataError("subprocess oracle: mixed dimensions within one batch");
    for (int r = 0; r < img.height; ++r)
      for (int c = 0; c < img.width; ++c)
        for (int ch = 0; ch < img.channels; ++ch)
          pixels.push_back(static_cast<float>(img.at(ch, r, c)));
  }

  const uint64_t id = next_id_++;
  json req;
  req["id"] = id;
  req["op"] = want_loss ? "loss" : "predict";
  req["shape"] = {batch.size(), first.height, first.width, first.channels};
  req["data"] = base64_encode(reinterpret_cast<const unsigned char*>(pixels.data()),
                              pixels.size() * sizeof(float));
  if (labels) req["labels"] = *labels;

  std::string reply_line = roundtrip(req.dump() + "\n");

  json reply;
  try {
    reply = json::parse(reply_line);
  } catch (const json::exception& e) {
    throw OracleError(std::string("subprocess oracle: malformed JSON reply: ") + e.what());
  }
  if (!reply.contains("id") || reply["id"].get<uint64_t>() != id)
    throw OracleError("subprocess oracle: reply id mismatch (expected " + std::to_string(id) + ")");
  if (reply.contains("error"))
    throw OracleError("subprocess oracle: child error: " + reply["error"].get<std::string>());

  if (want_loss) {
    if (!reply.contains("loss")) throw OracleError("subprocess oracle: reply missing 'loss'");
    *loss_out = reply["loss"].get<double>();
  } else {
    if (!reply.contains("probs")) throw OracleError("subprocess oracle: reply missing 'probs'");
    auto probs = reply["probs"].get<std::vector<std::vector<double>>>();
    if (probs.size() != batch.size())
      throw OracleError("subprocess oracle: wrong number of probability rows");
    *probs_out = std::move(probs);
  }
  return reply_line;
}

std::vector<std::vector<double>> SubprocessOracle::predict(const std::vector<Image>& batch) {
  std::vector<std::vector<double>> probs;
  request(batch, nullptr, false, &probs, nullptr);
  return probs;
}

double SubprocessOracle::loss(const std::vector<Image>& batch, const std::vector<int>& labels) {
  double value = 0.0;
  request(batch, &labels, true, nullptr, &value);
  if (!std::isfinite(value)) throw OracleError("subprocess oracle: non-finite loss from child");
  return value;
}

SubprocessOraclePool::SubprocessOraclePool(const std::string& command, int num_classes, int processes,
                                           double timeout_seconds)
    : num_classes_(num_classes) {
  if (processes < 1) throw UsageError("subprocess pool: need at least one process");
  for (int k = 0; k < processes; ++k)
    workers_.push_back(std::make_unique<SubprocessOracle>(command, num_classes, timeout_seconds));
  busy_.assign(workers_.size(), false);
}

size_t SubprocessOraclePool::acquire() {
  std::unique_lock<std::mutex> lock(mu_);
  for (;;) {
    for (size_t k = 0; k < busy_.size(); ++k) {
      if (!busy_[k]) {
        busy_[k] = true;
        return k;
      }
    }
    cv_.wait(lock);
  }
}

void SubprocessOraclePool::release(size_t k) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    busy_[k] = false;
  }
  cv_.notify_one();
}

std::vector<std::vector<double>> SubprocessOraclePool::predict(const std::vector<Image>& batch) {
  size_t k = acquire();
  try {
    auto out = workers_[k]->predict(batch);
    release(k);
    return out;
  } catch (...) {
    release(k);
    throw;
  }
}

double SubprocessOraclePool::loss(const std::vector<Image>& batch, const std::vector<int>& labels) {
  size_t k = acquire();
  try {
    double out = workers_[k]->loss(batch, labels);
    release(k);
    return out;
  } catch (...) {
    release(k);
    throw;
  }
}

}  // namespace samix

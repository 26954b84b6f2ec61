// Serves a toy-model checkpoint over the line-delimited JSON oracle protocol
// on stdin/stdout. Used to exercise the subprocess oracle path against the
// in-process model.

#include <cstring>
#include <iostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "samix/mapfile.hpp"
#include "samix/model.hpp"
#include "samix/subprocess_oracle.hpp"

using json = nlohmann::json;
using namespace samix;

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: samix_oracle_worker <checkpoint>\n";
    return 1;
  }
  ToyModel model;
  try {
    model = load_model(argv[1]);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  std::string line;
  while (std::getline(std::cin, line)) {
    if (line.empty()) continue;
    json reply;
    try {
      json req = json::parse(line);
      reply["id"] = req.at("id");
      auto shape = req.at("shape").get<std::vector<int>>();
      if (shape.size() != 4) throw std::runtime_error("shape must be [n,h,w,c]");
      const int n = shape[0], h = shape[1], w = shape[2], c = shape[3];
      auto bytes = base64_decode(req.at("data").get<std::string>());
      if (bytes.size() != static_cast<size_t>(n) * h * w * c * sizeof(float))
        throw std::runtime_error("data length does not match shape");
      const float* pix = reinterpret_cast<const float*>(bytes.data());

      std::vector<Image> batch;
      batch.reserve(n);
      for (int k = 0; k < n; ++k) {
        Image img(h, w, c);
        for (int r = 0; r < h; ++r)
          for (int col = 0; col < w; ++col)
            for (int ch = 0; ch < c; ++ch)
              img.at(ch, r, col) =
                  static_cast<double>(pix[((static_cast<size_t>(k) * h + r) * w + col) * c + ch]);
        batch.push_back(std::move(img));
      }

      const std::string op = req.at("op").get<std::string>();
      if (op == "predict") {
        reply["probs"] = forward(model, batch);
      } else if (op == "loss") {
        auto labels = req.at("labels").get<std::vector<int>>();
        reply["loss"] = task_loss(model, batch, labels);
      } else {
        throw std::runtime_error("unknown op '" + op + "'");
      }
    } catch (const std::exception& e) {
      reply["error"] = e.what();
      if (!reply.contains("id")) reply["id"] = 0;
    }
    std::cout << reply.dump() << "\n" << std::flush;
  }
  return 0;
}

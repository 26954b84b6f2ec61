#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "samix/error.hpp"

namespace samix {

// Real-valued h x w x c raster, row-major per channel (planar layout).
// Intensities are nominally in [0,1]; perturbed images may leave that range.
struct Image {
  int height = 0;
  int width = 0;
  int channels = 1;
  std::vector<double> data;  // channels * height * width

  Image() = default;
  Image(int h, int w, int c) : height(h), width(w), channels(c), data(static_cast<size_t>(h) * w * c, 0.0) {}

  double& at(int ch, int r, int col) {
    return data[(static_cast<size_t>(ch) * height + r) * width + col];
  }
  double at(int ch, int r, int col) const {
    return data[(static_cast<size_t>(ch) * height + r) * width + col];
  }

  // Pointer to one channel plane (height*width values).
  double* plane(int ch) { return data.data() + static_cast<size_t>(ch) * height * width; }
  const double* plane(int ch) const { return data.data() + static_cast<size_t>(ch) * height * width; }

  size_t plane_size() const { return static_cast<size_t>(height) * width; }

  void validate(const std::string& context = "image") const {
    if (height < 2 || width < 2)
      throw DataError(context + ": dimensions must be at least 2x2, got " + std::to_string(height) + "x" + std::to_string(width));
    if (channels != 1 && channels != 3)
      throw DataError(context + ": channels must be 1 or 3, got " + std::to_string(channels));
    if (data.size() != static_cast<size_t>(height) * width * channels)
      throw DataError(context + ": data length does not match dimensions");
    for (size_t i = 0; i < data.size(); ++i) {
      if (!std::isfinite(data[i]))
        throw DataError(context + ": non-finite value at flat index " + std::to_string(i));
    }
  }

  void clamp01() {
    for (double& v : data) v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
  }
};

struct LabeledCorpus {
  std::vector<Image> images;
  std::vector<int> labels;  // class indices in [0, num_classes)
  int num_classes = 0;
};

}  // namespace samix

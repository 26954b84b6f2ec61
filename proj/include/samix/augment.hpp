#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "samix/image.hpp"

namespace samix {

// Intensity-preserving geometric expansion of a K-shot target set.
struct AugmentPlan {
  double crop_lo = 0.7;  // crop fraction range, subset of (0,1]
  double crop_hi = 1.0;
  std::vector<int> rotation_set = {90, 180, 270};  // degrees, multiples of 90
  bool flip_horizontal = true;
  bool flip_vertical = true;
  int jigsaw_grid = 3;
  int samples_per_image = 64;
  double include_probability = 0.5;  // each transform joins the combination independently
  uint64_t seed = 0;

  void validate() const;
};

// quarter_turns in {1,2,3}; 90/270 require a square image.
Image rotate90(const Image& image, int quarter_turns);
Image flip(const Image& image, bool horizontal);

// Crop the given window and scale back to the source dimensions, nearest
// neighbor, so no new intensity values are synthesized.
Image crop_resize(const Image& image, int r0, int c0, int crop_h, int crop_w);

// Deterministic core: perm is a permutation of grid*grid slot indices.
// Remainder rows/cols attach to the last slot row/col; unequal slots are
// filled by nearest-neighbor resize of the source tile.
Image jigsaw_with_permutation(const Image& image, int grid, const std::vector<int>& perm);

Image jigsaw(const Image& image, int grid, std::mt19937_64& rng);

// K * samples_per_image outputs, each a random combination of
// crop -> rotate -> flip -> jigsaw. Bit-reproducible under a fixed seed.
std::vector<Image> augment_target(const std::vector<Image>& few_shot, const AugmentPlan& plan);

}  // namespace samix

#include "samix/augment.hpp"

#include <algorithm>
#include <numeric>

#include "samix/rng.hpp"

namespace samix {

void AugmentPlan::validate() const {
  if (!(crop_lo > 0.0 && crop_lo <= crop_hi && crop_hi <= 1.0))
    throw DataError("AugmentPlan: crop fraction range must satisfy 0 < lo <= hi <= 1");
  if (jigsaw_grid < 2) throw DataError("AugmentPlan: jigsaw grid must be at least 2");
  if (samples_per_image < 1) throw DataError("AugmentPlan: samples_per_image must be positive");
  if (include_probability < 0.0 || include_probability > 1.0)
    throw DataError("AugmentPlan: include_probability must be in [0,1]");
  for (int deg : rotation_set) {
    if (deg % 90 != 0 || deg <= 0 || deg >= 360)
      throw DataError("AugmentPlan: rotations must be 90, 180, or 270 degrees");
  }
}

Image rotate90(const Image& image, int quarter_turns) {
  int q = ((quarter_turns % 4) + 4) % 4;
  if (q == 0) return image;
  if (q != 2 && image.height != image.width)
    throw DataError("rotate90: 90/270 degree rotation requires a square image");
  const int h = image.height, w = image.width;
  Image out(h, w, image.channels);
  for (int ch = 0; ch < image.channels; ++ch) {
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        int sr, sc;
        switch (q) {
          case 1: sr = c; sc = h - 1 - r; break;           // 90 CCW
          case 2: sr = h - 1 - r; sc = w - 1 - c; break;   // 180
          default: sr = w - 1 - c; sc = r; break;          // 270 CCW
        }
        out.at(ch, r, c) = image.at(ch, sr, sc);
      }
    }
  }
  return out;
}

Image flip(const Image& image, bool horizontal) {
  Image out(image.height, image.width, image.channels);
  for (int ch = 0; ch < image.channels; ++ch)
    for (int r = 0; r < image.height; ++r)
      for (int c = 0; c < image.width; ++c)
        out.at(ch, r, c) = horizontal ? image.at(ch, r, image.width - 1 - c)
                                      : image.at(ch, image.height - 1 - r, c);
  return out;
}

Image crop_resize(const Image& image, int r0, int c0, int crop_h, int crop_w) {
  if (crop_h < 1 || crop_w < 1 || r0 < 0 || c0 < 0 || r0 + crop_h > image.height || c0 + crop_w > image.width)
    throw DataError("crop_resize: window out of bounds");
  Image out(image.height, image.width, image.channels);
  for (int ch = 0; ch < image.channels; ++ch)
    for (int r = 0; r < image.height; ++r)
      for (int c = 0; c < image.width; ++c) {
        int sr = r0 + static_cast<int>(static_cast<int64_t>(r) * crop_h / image.height);
        int sc = c0 + static_cast<int>(static_cast<int64_t>(c) * crop_w / image.width);
        out.at(ch, r, c) = image.at(ch, sr, sc);
      }
  return out;
}

namespace {

struct Slot {
  int r0, c0, h, w;
};

std::vector<Slot> jigsaw_slots(int h, int w, int g) {
  const int bh = h / g, bw = w / g;
  std::vector<Slot> slots;
  slots.reserve(static_cast<size_t>(g) * g);
  for (int tr = 0; tr < g; ++tr)
    for (int tc = 0; tc < g; ++tc) {
      Slot s;
      s.r0 = tr * bh;
      s.c0 = tc * bw;
      s.h = (tr == g - 1) ? h - s.r0 : bh;
      s.w = (tc == g - 1) ? w - s.c0 : bw;
      slots.push_back(s);
    }
  return slots;
}

}  // namespace

Image jigsaw_with_permutation(const Image& image, int grid, const std::vector<int>& perm) {
  if (grid < 2) throw DataError("jigsaw: grid must be at least 2");
  if (image.height < grid || image.width < grid)
    throw DataError("jigsaw: image smaller than grid");
  auto slots = jigsaw_slots(image.height, image.width, grid);
  if (perm.size() != slots.size()) throw DataError("jigsaw: permutation size mismatch");

  Image out(image.height, image.width, image.channels);
  for (size_t d = 0; d < slots.size(); ++d) {
    const Slot& dst = slots[d];
    const Slot& src = slots[perm[d]];
    for (int ch = 0; ch < image.channels; ++ch)
      for (int r = 0; r < dst.h; ++r)
        for (int c = 0; c < dst.w; ++c) {
          int sr = src.r0 + static_cast<int>(static_cast<int64_t>(r) * src.h / dst.h);
          int sc = src.c0 + static_cast<int>(static_cast<int64_t>(c) * src.w / dst.w);
          out.at(ch, dst.r0 + r, dst.c0 + c) = image.at(ch, sr, sc);
        }
  }
  return out;
}

Image jigsaw(const Image& image, int grid, std::mt19937_64& rng) {
  std::vector<int> perm(static_cast<size_t>(grid) * grid);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  return jigsaw_with_permutation(image, grid, perm);
}

std::vector<Image> augment_target(const std::vector<Image>& few_shot, const AugmentPlan& plan) {
  plan.validate();
  if (few_shot.empty()) throw DataError("augment_target: empty target set");
  const Image& first = few_shot.front();
  for (size_t k = 1; k < few_shot.size(); ++k) {
    if (few_shot[k].height != first.height || few_shot[k].width != first.width ||
        few_shot[k].channels != first.channels)
      throw DataError("augment_target: image " + std::to_string(k) + " has mismatched dimensions");
  }

  std::vector<Image> out;
  out.reserve(few_shot.size() * plan.samples_per_image);
  for (size_t k = 0; k < few_shot.size(); ++k) {
    for (int s = 0; s < plan.samples_per_image; ++s) {
      auto rng = derive_rng(plan.seed, k, static_cast<uint64_t>(s));
      std::bernoulli_distribution include(plan.include_probability);
      bool do_crop = include(rng);
      bool do_rotate = include(rng) && !plan.rotation_set.empty();
      bool do_flip = include(rng) && (plan.flip_horizontal || plan.flip_vertical);
      bool do_jigsaw = include(rng);

      Image img = few_shot[k];
      if (do_crop) {
        std::uniform_real_distribution<double> frac(plan.crop_lo, plan.crop_hi);
        double f = frac(rng);
        int ch = std::max(1, static_cast<int>(std::lround(f * img.height)));
        int cw = std::max(1, static_cast<int>(std::lround(f * img.width)));
        ch = std::min(ch, img.height);
        cw = std::min(cw, img.width);
        int r0 = std::uniform_int_distribution<int>(0, img.height - ch)(rng);
        int c0 = std::uniform_int_distribution<int>(0, img.width - cw)(rng);
        img = crop_resize(img, r0, c0, ch, cw);
      }
      if (do_rotate) {
        std::vector<int> options;
        for (int deg : plan.rotation_set)
          if (deg == 180 || img.height == img.width) options.push_back(deg);
        if (!options.empty()) {
          int deg = options[std::uniform_int_distribution<size_t>(0, options.size() - 1)(rng)];
          img = rotate90(img, deg / 90);
        }
      }
      if (do_flip) {
        std::vector<bool> options;
        if (plan.flip_horizontal) options.push_back(true);
        if (plan.flip_vertical) options.push_back(false);
        img = flip(img, options[std::uniform_int_distribution<size_t>(0, options.size() - 1)(rng)]);
      }
      if (do_jigsaw) img = jigsaw(img, plan.jigsaw_grid, rng);
      out.push_back(std::move(img));
    }
  }
  return out;
}

}  // namespace samix

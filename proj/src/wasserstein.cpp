#include "samix/wasserstein.hpp"

#include <algorithm>
#include <cmath>

#include "samix/spectral.hpp"

namespace samix {

AmplitudeSamples collect_amplitudes(const std::vector<Image>& corpus) {
  if (corpus.empty()) throw DataError("collect_amplitudes: empty corpus");
  const Image& first = corpus.front();
  for (size_t k = 1; k < corpus.size(); ++k) {
    if (corpus[k].height != first.height || corpus[k].width != first.width ||
        corpus[k].channels != first.channels)
      throw DataError("collect_amplitudes: image " + std::to_string(k) + " has mismatched dimensions");
  }
  AmplitudeSamples out;
  out.height = first.height;
  out.width = first.width;
  out.count = static_cast<int>(corpus.size()) * first.channels;
  out.samples.resize(static_cast<size_t>(out.height) * out.width * out.count);
  int s = 0;
  for (const Image& img : corpus) {
    for (int ch = 0; ch < img.channels; ++ch, ++s) {
      Spectrum spec = fft2(img.plane(ch), img.height, img.width);
      for (size_t f = 0; f < spec.amplitude.size(); ++f)
        out.samples[f * out.count + s] = spec.amplitude[f];
    }
  }
  return out;
}

namespace {

double w1_sorted(const double* a, int na, const double* b, int nb) {
  if (na == nb) {
    double acc = 0.0;
    for (int k = 0; k < na; ++k) acc += std::abs(a[k] - b[k]);
    return acc / na;
  }
  const int q = std::max(na, nb);
  double acc = 0.0;
  for (int k = 0; k < q; ++k) {
    double p = (k + 0.5) / q;
    int ia = std::min(static_cast<int>(p * na), na - 1);
    int ib = std::min(static_cast<int>(p * nb), nb - 1);
    acc += std::abs(a[ia] - b[ib]);
  }
  return acc / q;
}

}  // namespace

double wasserstein1(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw DataError("wasserstein1: empty sample vector");
  for (double v : a)
    if (!std::isfinite(v) || v < 0.0) throw DataError("wasserstein1: samples must be finite and non-negative");
  for (double v : b)
    if (!std::isfinite(v) || v < 0.0) throw DataError("wasserstein1: samples must be finite and non-negative");
  std::vector<double> sa(a), sb(b);
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  return w1_sorted(sa.data(), static_cast<int>(sa.size()), sb.data(), static_cast<int>(sb.size()));
}

DistanceMap distance_map(const AmplitudeSamples& source, const AmplitudeSamples& target) {
  if (source.height != target.height || source.width != target.width)
    throw DataError("distance_map: spectrum shape mismatch");
  const int h = source.height, w = source.width;
  DistanceMap map;
  map.height = h;
  map.width = w;
  map.values.assign(static_cast<size_t>(h) * w, 0.0);
  map.source_count = source.count;
  map.target_count = target.count;

  std::vector<double> sa(source.count), sb(target.count);
  for (int r = 0; r < h; ++r) {
    const int i = r - h / 2;
    for (int c = 0; c < w; ++c) {
      const int j = c - w / 2;
      // Conjugate partner in centered coordinates; compute the half-plane,
      // mirror the rest so Hermitian symmetry holds exactly.
      const int rc = centered_row(conjugate_freq(i, h), h);
      const int cc = centered_col(conjugate_freq(j, w), w);
      if (rc < r || (rc == r && cc < c)) {
        map.values[static_cast<size_t>(r) * w + c] = map.values[static_cast<size_t>(rc) * w + cc];
        continue;
      }
      std::copy(source.at(r, c), source.at(r, c) + source.count, sa.begin());
      std::copy(target.at(r, c), target.at(r, c) + target.count, sb.begin());
      std::sort(sa.begin(), sa.end());
      std::sort(sb.begin(), sb.end());
      map.values[static_cast<size_t>(r) * w + c] =
          w1_sorted(sa.data(), source.count, sb.data(), target.count);
    }
  }
  return map;
}

}  // namespace samix

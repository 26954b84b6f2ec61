#include "samix/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <map>
#include <mutex>

namespace samix {

namespace {

// FFTW plan creation is not thread-safe; plans are cached per shape and
// executed on per-call buffers via fftw_execute_dft.
struct PlanCache {
  std::mutex mu;
  std::map<std::tuple<int, int, int>, fftw_plan> plans;  // (h, w, sign)

  fftw_plan get(int h, int w, int sign) {
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_tuple(h, w, sign);
    auto it = plans.find(key);
    if (it != plans.end()) return it->second;
    fftw_complex* buf = fftw_alloc_complex(static_cast<size_t>(h) * w);
    fftw_plan p = fftw_plan_dft_2d(h, w, buf, buf, sign, FFTW_ESTIMATE);
    fftw_free(buf);
    plans.emplace(key, p);
    return p;
  }
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

struct FftwBuffer {
  fftw_complex* ptr;
  explicit FftwBuffer(size_t n) : ptr(fftw_alloc_complex(n)) {}
  ~FftwBuffer() { fftw_free(ptr); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
};

}  // namespace

bool frequency_in_bounds(FrequencyIndex idx, int h, int w) {
  return idx.i >= -(h / 2) && idx.i <= (h + 1) / 2 - 1 && idx.j >= -(w / 2) && idx.j <= (w + 1) / 2 - 1;
}

Spectrum fft2(const std::vector<double>& channel, int h, int w) {
  if (channel.size() != static_cast<size_t>(h) * w)
    throw DataError("fft2: channel size does not match " + std::to_string(h) + "x" + std::to_string(w));
  return fft2(channel.data(), h, w);
}

Spectrum fft2(const double* channel, int h, int w) {
  if (h < 2 || w < 2) throw DataError("fft2: dimensions must be at least 2x2");
  const size_t n = static_cast<size_t>(h) * w;
  for (size_t k = 0; k < n; ++k) {
    if (!std::isfinite(channel[k]))
      throw DataError("fft2: non-finite input at row " + std::to_string(k / w) + " col " + std::to_string(k % w));
  }
  FftwBuffer buf(n);
  for (size_t k = 0; k < n; ++k) {
    buf.ptr[k][0] = channel[k];
    buf.ptr[k][1] = 0.0;
  }
  fftw_execute_dft(plan_cache().get(h, w, FFTW_FORWARD), buf.ptr, buf.ptr);

  Spectrum spec;
  spec.height = h;
  spec.width = w;
  spec.amplitude.resize(n);
  spec.phase.resize(n);
  for (int kr = 0; kr < h; ++kr) {
    int r = (kr + h / 2) % h;  // natural -> centered
    for (int kc = 0; kc < w; ++kc) {
      int c = (kc + w / 2) % w;
      double re = buf.ptr[static_cast<size_t>(kr) * w + kc][0];
      double im = buf.ptr[static_cast<size_t>(kr) * w + kc][1];
      spec.amp(r, c) = std::hypot(re, im);
      spec.ph(r, c) = std::atan2(im, re);
    }
  }
  return spec;
}

std::vector<double> ifft2(const Spectrum& spec, double* imag_residual) {
  const int h = spec.height;
  const int w = spec.width;
  if (h < 2 || w < 2) throw DataError("ifft2: dimensions must be at least 2x2");
  const size_t n = static_cast<size_t>(h) * w;
  if (spec.amplitude.size() != n || spec.phase.size() != n)
    throw DataError("ifft2: amplitude/phase shape mismatch");
  for (size_t k = 0; k < n; ++k) {
    if (spec.amplitude[k] < 0.0)
      throw DataError("ifft2: negative amplitude at flat index " + std::to_string(k));
  }
  FftwBuffer buf(n);
  for (int r = 0; r < h; ++r) {
    int kr = (r - h / 2 + h) % h;  // centered -> natural
    for (int c = 0; c < w; ++c) {
      int kc = (c - w / 2 + w) % w;
      double a = spec.amp(r, c);
      double p = spec.ph(r, c);
      buf.ptr[static_cast<size_t>(kr) * w + kc][0] = a * std::cos(p);
      buf.ptr[static_cast<size_t>(kr) * w + kc][1] = a * std::sin(p);
    }
  }
  fftw_execute_dft(plan_cache().get(h, w, FFTW_BACKWARD), buf.ptr, buf.ptr);

  std::vector<double> out(n);
  double max_imag = 0.0;
  const double scale = 1.0 / static_cast<double>(n);
  for (size_t k = 0; k < n; ++k) {
    out[k] = buf.ptr[k][0] * scale;
    max_imag = std::max(max_imag, std::abs(buf.ptr[k][1] * scale));
  }
  if (imag_residual) *imag_residual = max_imag;
  return out;
}

std::vector<double> ifft2_phasor(const std::vector<double>& amplitude,
                                 const std::vector<double>& cos_phase,
                                 const std::vector<double>& sin_phase, int h, int w) {
  if (h < 2 || w < 2) throw DataError("ifft2_phasor: dimensions must be at least 2x2");
  const size_t n = static_cast<size_t>(h) * w;
  if (amplitude.size() != n || cos_phase.size() != n || sin_phase.size() != n)
    throw DataError("ifft2_phasor: amplitude/phasor shape mismatch");
  FftwBuffer buf(n);
  for (int r = 0; r < h; ++r) {
    int kr = (r - h / 2 + h) % h;  // centered -> natural
    const size_t row = static_cast<size_t>(r) * w;
    for (int c = 0; c < w; ++c) {
      int kc = (c - w / 2 + w) % w;
      const double a = amplitude[row + c];
      buf.ptr[static_cast<size_t>(kr) * w + kc][0] = a * cos_phase[row + c];
      buf.ptr[static_cast<size_t>(kr) * w + kc][1] = a * sin_phase[row + c];
    }
  }
  fftw_execute_dft(plan_cache().get(h, w, FFTW_BACKWARD), buf.ptr, buf.ptr);

  std::vector<double> out(n);
  const double scale = 1.0 / static_cast<double>(n);
  for (size_t k = 0; k < n; ++k) out[k] = buf.ptr[k][0] * scale;
  return out;
}

Image fourier_basis_image(FrequencyIndex idx, int h, int w) {
  if (!frequency_in_bounds(idx, h, w))
    throw DataError("fourier_basis_image: frequency (" + std::to_string(idx.i) + "," + std::to_string(idx.j) + ") out of bounds for " + std::to_string(h) + "x" + std::to_string(w));
  Spectrum spec;
  spec.height = h;
  spec.width = w;
  spec.amplitude.assign(static_cast<size_t>(h) * w, 0.0);
  spec.phase.assign(static_cast<size_t>(h) * w, 0.0);
  spec.amp(centered_row(idx.i, h), centered_col(idx.j, w)) = 1.0;
  // Conjugate partner; collapses onto the same entry on DC/Nyquist lines.
  spec.amp(centered_row(conjugate_freq(idx.i, h), h), centered_col(conjugate_freq(idx.j, w), w)) = 1.0;

  std::vector<double> vals = ifft2(spec);
  double norm_sq = 0.0;
  for (double v : vals) norm_sq += v * v;
  double norm = std::sqrt(norm_sq);
  Image basis(h, w, 1);
  for (size_t k = 0; k < vals.size(); ++k) basis.data[k] = vals[k] / norm;
  return basis;
}

Image perturb(const Image& image, FrequencyIndex idx, double magnitude, int sign) {
  return perturb(image, idx, magnitude, std::vector<int>(image.channels, sign));
}

Image perturb(const Image& image, FrequencyIndex idx, double magnitude, const std::vector<int>& signs) {
  if (!std::isfinite(magnitude) || magnitude < 0.0)
    throw DataError("perturb: magnitude must be finite and non-negative");
  Image basis = fourier_basis_image(idx, image.height, image.width);
  Image out = image;
  perturb_inplace(out, basis, magnitude, signs);
  return out;
}

void perturb_inplace(Image& image, const Image& basis, double magnitude, const std::vector<int>& signs) {
  if (signs.size() != static_cast<size_t>(image.channels))
    throw DataError("perturb: need one sign per channel");
  for (int ch = 0; ch < image.channels; ++ch) {
    if (signs[ch] != 1 && signs[ch] != -1) throw DataError("perturb: sign must be -1 or +1");
    double* plane = image.plane(ch);
    const double s = signs[ch] * magnitude;
    for (size_t k = 0; k < image.plane_size(); ++k) plane[k] += s * basis.data[k];
  }
}

}  // namespace samix

#pragma once

#include <vector>

#include "samix/image.hpp"

namespace samix {

// Centered 2-D DFT of one channel: DC sits at row floor(h/2), col floor(w/2).
struct Spectrum {
  int height = 0;
  int width = 0;
  std::vector<double> amplitude;  // h*w, non-negative
  std::vector<double> phase;      // h*w, in (-pi, pi]

  double& amp(int r, int c) { return amplitude[static_cast<size_t>(r) * width + c]; }
  double amp(int r, int c) const { return amplitude[static_cast<size_t>(r) * width + c]; }
  double& ph(int r, int c) { return phase[static_cast<size_t>(r) * width + c]; }
  double ph(int r, int c) const { return phase[static_cast<size_t>(r) * width + c]; }
};

// Signed frequency offset from DC. Valid range: -floor(n/2) <= k <= ceil(n/2)-1.
struct FrequencyIndex {
  int i = 0;
  int j = 0;
};

// Row/col of a frequency index in the centered layout.
inline int centered_row(int i, int h) { return i + h / 2; }
inline int centered_col(int j, int w) { return j + w / 2; }

// The conjugate partner of i, wrapped back into the valid signed range.
inline int conjugate_freq(int i, int n) {
  int neg = -i;
  if (neg > (n + 1) / 2 - 1) neg -= n;  // -(-n/2) wraps onto itself for even n
  return neg;
}

bool frequency_in_bounds(FrequencyIndex idx, int h, int w);

// Forward centered DFT of one real channel. Unnormalized: DC amplitude = |sum of pixels|.
Spectrum fft2(const std::vector<double>& channel, int h, int w);
Spectrum fft2(const double* channel, int h, int w);

// Inverse transform; returns the real part. If imag_residual is non-null it
// receives the max absolute imaginary component after 1/(h*w) normalization.
std::vector<double> ifft2(const Spectrum& spec, double* imag_residual = nullptr);

// Inverse transform taking the phase as precomputed unit vectors (cos, sin per
// centered cell). Avoids per-call trig when one phase field is reused across
// many amplitude variants, e.g. inside a line search over mixing weights.
std::vector<double> ifft2_phasor(const std::vector<double>& amplitude,
                                 const std::vector<double>& cos_phase,
                                 const std::vector<double>& sin_phase, int h, int w);

// Real unit-l2-norm spatial sinusoid from the Hermitian pair at (i,j), (-i,-j).
Image fourier_basis_image(FrequencyIndex idx, int h, int w);

// image + sign * magnitude * U_{i,j}, same basis added to every channel.
Image perturb(const Image& image, FrequencyIndex idx, double magnitude, int sign);

// Variant with an independent sign per channel (signs.size() == channels).
Image perturb(const Image& image, FrequencyIndex idx, double magnitude, const std::vector<int>& signs);

// Same but reusing a precomputed basis (hot path in sensitivity sweeps).
void perturb_inplace(Image& image, const Image& basis, double magnitude, const std::vector<int>& signs);

}  // namespace samix

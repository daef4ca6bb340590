#pragma once

#include <complex>

#include "moire/core.hpp"

namespace moire {

using SpectrumMatrix = Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic>;

/// Forward 2-D DFT of a real field (no normalization). Row r / col c of the
/// result is the coefficient for frequency index (r, c) with the usual wrap
/// (index > N/2 means negative frequency).
SpectrumMatrix fft2(const Eigen::ArrayXXd& field);

/// Inverse 2-D DFT (normalized by 1/(rows*cols)).
SpectrumMatrix ifft2(const SpectrumMatrix& spectrum);

/// 2-D DFT of a real field stored as a half spectrum (row frequencies
/// 0..rows/2); the remaining coefficients follow from Hermitian symmetry.
struct HalfSpectrum {
  Eigen::MatrixXcd t;  // (cols) x (rows/2+1), t(fc, fr) = F[fr, fc]
  int rows = 0, cols = 0;

  std::complex<double> at(int fr, int fc) const {
    fr = ((fr % rows) + rows) % rows;
    fc = ((fc % cols) + cols) % cols;
    if (fr <= rows / 2) return t(fc, fr);
    return std::conj(t((cols - fc) % cols, rows - fr));
  }
};

HalfSpectrum fft2_real(const Eigen::ArrayXXd& field);

/// Signed frequency index for DFT bin b of an N-long transform.
inline double signed_bin(int b, int n) { return b <= n / 2 ? double(b) : double(b - n); }

}  // namespace moire

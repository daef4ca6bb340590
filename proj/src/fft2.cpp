#include "moire/fft2.hpp"

#include <unsupported/Eigen/FFT>

namespace moire {

namespace {

// One FFT engine per thread; Eigen::FFT caches kissfft plans per length.
Eigen::FFT<double>& engine() {
  thread_local Eigen::FFT<double> fft;
  return fft;
}

Eigen::FFT<double>& engine_half() {
  thread_local Eigen::FFT<double> fft = [] {
    Eigen::FFT<double> f;
    f.SetFlag(Eigen::FFT<double>::HalfSpectrum);
    return f;
  }();
  return fft;
}

void fft_columns(SpectrumMatrix& m, bool inverse) {
  auto& fft = engine();
  const int n = static_cast<int>(m.rows());
  Eigen::VectorXcd out(n);
  for (int c = 0; c < m.cols(); ++c) {
    Eigen::VectorXcd in = m.col(c);
    if (inverse)
      fft.inv(out, in);
    else
      fft.fwd(out, in);
    m.col(c) = out;
  }
}

}  // namespace

SpectrumMatrix fft2(const Eigen::ArrayXXd& field) {
  SpectrumMatrix m = field.matrix().cast<std::complex<double>>();
  fft_columns(m, false);
  m.transposeInPlace();
  fft_columns(m, false);
  m.transposeInPlace();
  return m;
}

SpectrumMatrix ifft2(const SpectrumMatrix& spectrum) {
  SpectrumMatrix m = spectrum;
  fft_columns(m, true);
  m.transposeInPlace();
  fft_columns(m, true);
  m.transposeInPlace();
  return m;
}

HalfSpectrum fft2_real(const Eigen::ArrayXXd& field) {
  const int rows = static_cast<int>(field.rows());
  const int cols = static_cast<int>(field.cols());
  const int hr = rows / 2 + 1;

  auto& r2c = engine_half();
  Eigen::MatrixXcd stage(hr, cols);
  Eigen::VectorXd in(rows);
  Eigen::VectorXcd out(hr);
  for (int c = 0; c < cols; ++c) {
    in = field.col(c).matrix();
    r2c.fwd(out, in);
    stage.col(c) = out;
  }

  HalfSpectrum h;
  h.rows = rows;
  h.cols = cols;
  h.t = stage.transpose();  // (cols x hr); columns now contiguous over fc
  auto& c2c = engine();
  Eigen::VectorXcd inc(cols), outc(cols);
  for (int f = 0; f < hr; ++f) {
    inc = h.t.col(f);
    c2c.fwd(outc, inc);
    h.t.col(f) = outc;
  }
  return h;
}

}  // namespace moire

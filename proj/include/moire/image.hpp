#pragma once

#include <filesystem>
#include <string>

#include "moire/core.hpp"

namespace moire {

using ImageMatrix = Eigen::ArrayXXd;  // (rows, cols) indexing; row = y, col = x

/// Grayscale image with a physical pixel scale. Values live in [0,1]
/// internally and are quantized to 8 bits on export. Physical coordinates
/// are measured from the image center; y grows with the row index.
struct ImageGray {
  int width = 0;   // px
  int height = 0;  // px
  double scale = 20.0;  // px per mm
  ImageMatrix values;   // height x width

  ImageGray() = default;
  ImageGray(int w, int h, double px_per_mm)
      : width(w), height(h), scale(px_per_mm), values(ImageMatrix::Zero(h, w)) {}

  double x_mm(double col) const { return (col + 0.5) / scale - width / (2.0 * scale); }
  double y_mm(double row) const { return (row + 0.5) / scale - height / (2.0 * scale); }
  double width_mm() const { return width / scale; }
  double height_mm() const { return height / scale; }
};

/// Binary PGM (P5), 8 bit, intensity = round(value*255).
void write_pgm(const ImageGray& img, const std::filesystem::path& path);
ImageGray read_pgm(const std::filesystem::path& path, double scale_px_per_mm = 20.0);

/// Rows [r0, r1) x cols [c0, c1) covering the central `fraction` of the image.
struct Roi {
  int r0 = 0, r1 = 0, c0 = 0, c1 = 0;
  int rows() const { return r1 - r0; }
  int cols() const { return c1 - c0; }
};
Roi central_roi(int height, int width, double fraction);

}  // namespace moire

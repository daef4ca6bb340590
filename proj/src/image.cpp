#include "moire/image.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <vector>

namespace moire {

void write_pgm(const ImageGray& img, const std::filesystem::path& path) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("write_pgm: cannot open " + tmp.string());
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    std::vector<unsigned char> row(img.width);
    for (int r = 0; r < img.height; ++r) {
      for (int c = 0; c < img.width; ++c) {
        const double v = std::clamp(img.values(r, c), 0.0, 1.0);
        row[c] = static_cast<unsigned char>(std::lround(v * 255.0));
      }
      out.write(reinterpret_cast<const char*>(row.data()), row.size());
    }
    if (!out) throw Error("write_pgm: write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

namespace {
int next_pnm_int(std::istream& in) {
  // Skips whitespace and '#' comments per the PNM grammar.
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (!std::isspace(c)) {
      break;
    }
    c = in.get();
  }
  int value = 0;
  bool any = false;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    any = true;
    c = in.get();
  }
  if (!any) throw Error("read_pgm: malformed header");
  return value;
}
}  // namespace

ImageGray read_pgm(const std::filesystem::path& path, double scale_px_per_mm) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("read_pgm: cannot open " + path.string());
  char magic[2];
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '5')
    throw Error("read_pgm: not a binary PGM: " + path.string());
  const int w = next_pnm_int(in);
  const int h = next_pnm_int(in);
  const int maxval = next_pnm_int(in);
  if (w <= 0 || h <= 0 || maxval != 255)
    throw Error("read_pgm: unsupported dimensions/maxval in " + path.string());

  ImageGray img(w, h, scale_px_per_mm);
  std::vector<unsigned char> row(w);
  for (int r = 0; r < h; ++r) {
    in.read(reinterpret_cast<char*>(row.data()), row.size());
    if (!in) throw Error("read_pgm: truncated pixel data in " + path.string());
    for (int c = 0; c < w; ++c) img.values(r, c) = row[c] / 255.0;
  }
  return img;
}

Roi central_roi(int height, int width, double fraction) {
  fraction = std::clamp(fraction, 0.0, 1.0);
  const int mr = static_cast<int>(std::floor(height * (1.0 - fraction) / 2.0));
  const int mc = static_cast<int>(std::floor(width * (1.0 - fraction) / 2.0));
  return Roi{mr, height - mr, mc, width - mc};
}

}  // namespace moire

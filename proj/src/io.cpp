#include "moire/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace moire {

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot open " + tmp.string());
    out << content;
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path,
                                               const std::string& expected_header) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error("empty CSV: " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected_header)
    throw Error("unexpected CSV header in " + path.string() + ": " + line);
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    rows.push_back(std::move(fields));
  }
  return rows;
}

double to_double(const std::string& s) { return std::stod(s); }

}  // namespace

static const char* kFeaturesHeader = "frame,I,cx,cy,pox,poy,gpx,gpy,theta,lambda,band_energy";

void write_features_csv(const std::filesystem::path& path,
                        const std::vector<MoireObservables>& rows) {
  std::string out = std::string(kFeaturesHeader) + "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const MoireObservables& o = rows[i];
    out += std::to_string(i);
    for (double v : {o.mean_brightness, o.centroid.x(), o.centroid.y(), o.phase_offset.x(),
                     o.phase_offset.y(), o.phase_gradient.x(), o.phase_gradient.y(), o.theta,
                     o.lambda, o.band_energy})
      out += "," + format_double(v);
    out += "\n";
  }
  write_text_atomic(path, out);
}

std::vector<MoireObservables> read_features_csv(const std::filesystem::path& path) {
  std::vector<MoireObservables> out;
  for (const auto& f : read_csv(path, kFeaturesHeader)) {
    if (f.size() != 11) throw Error("malformed features row in " + path.string());
    MoireObservables o;
    o.mean_brightness = to_double(f[1]);
    o.centroid = Vec2d(to_double(f[2]), to_double(f[3]));
    o.phase_offset = Vec2d(to_double(f[4]), to_double(f[5]));
    o.phase_gradient = Vec2d(to_double(f[6]), to_double(f[7]));
    o.theta = to_double(f[8]);
    o.lambda = to_double(f[9]);
    o.band_energy = to_double(f[10]);
    out.push_back(o);
  }
  return out;
}

static const char* kWrenchHeader = "frame,sweep,Fx,Fy,Fz,Tx,Ty,Tz";

void write_wrenches_csv(const std::filesystem::path& path,
                        const std::vector<std::pair<Wrench, SweepKind>>& rows) {
  std::string out = std::string(kWrenchHeader) + "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Wrench& w = rows[i].first;
    out += std::to_string(i);
    out += ",";
    out += to_string(rows[i].second);
    for (double v : {w.fx, w.fy, w.fz, w.tx, w.ty, w.tz}) out += "," + format_double(v);
    out += "\n";
  }
  write_text_atomic(path, out);
}

std::vector<std::pair<Wrench, SweepKind>> read_wrenches_csv(const std::filesystem::path& path) {
  std::vector<std::pair<Wrench, SweepKind>> out;
  for (const auto& f : read_csv(path, kWrenchHeader)) {
    if (f.size() != 8) throw Error("malformed wrench row in " + path.string());
    Wrench w{to_double(f[2]), to_double(f[3]), to_double(f[4]),
             to_double(f[5]), to_double(f[6]), to_double(f[7])};
    out.emplace_back(w, sweep_kind_from_string(f[1]));
  }
  return out;
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& data) {
  std::string out = std::string(kFeaturesHeader) + ",Fx,Fy,Fz,Tx,Ty,Tz\n";
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    const Sample& s = data.samples[i];
    const MoireObservables& o = s.obs;
    out += std::to_string(i);
    for (double v : {o.mean_brightness, o.centroid.x(), o.centroid.y(), o.phase_offset.x(),
                     o.phase_offset.y(), o.phase_gradient.x(), o.phase_gradient.y(), o.theta,
                     o.lambda, o.band_energy, s.wrench.fx, s.wrench.fy, s.wrench.fz, s.wrench.tx,
                     s.wrench.ty, s.wrench.tz})
      out += "," + format_double(v);
    out += "\n";
  }
  write_text_atomic(path, out);
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

std::string frame_filename(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%06d.pgm", index);
  return buf;
}

}  // namespace moire

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "moire/estimator.hpp"

namespace moire {

/// Write via a temp file in the same directory, then rename.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

/// Full-precision, locale-independent float formatting (%.17g).
std::string format_double(double v);

/// Features CSV: `frame,I,cx,cy,pox,poy,gpx,gpy,theta,lambda,band_energy`,
/// one row per frame, deterministic order and formatting.
void write_features_csv(const std::filesystem::path& path,
                        const std::vector<MoireObservables>& rows);
std::vector<MoireObservables> read_features_csv(const std::filesystem::path& path);

/// Wrenches CSV: `frame,sweep,Fx,Fy,Fz,Tx,Ty,Tz`.
void write_wrenches_csv(const std::filesystem::path& path,
                        const std::vector<std::pair<Wrench, SweepKind>>& rows);
std::vector<std::pair<Wrench, SweepKind>> read_wrenches_csv(const std::filesystem::path& path);

/// Joined dataset CSV: the features columns plus `Fx,Fy,Fz,Tx,Ty,Tz`.
void write_dataset_csv(const std::filesystem::path& path, const Dataset& data);

/// FNV-1a 64-bit, hex-encoded; used as the config hash in manifests.
std::string fnv1a_hex(const std::string& bytes);

std::string frame_filename(int index);

}  // namespace moire

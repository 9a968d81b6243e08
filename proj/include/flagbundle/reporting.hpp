#pragma once

#include "flagbundle/classify.hpp"

#include <string>

namespace flagbundle {

/// Atomic write (temp file + rename) with deterministic content.
void write_atomic(const std::string& path, const std::string& content);

/// FNV-1a 64-bit digest, hex-encoded.
std::string digest_hex(const std::string& content);

std::string format_double(double v);

/// CSV of (radius, angle, value) rows for a real-valued grid family.
std::string grid_csv(const std::vector<PolarGrid::Point>& pts, const std::vector<double>& values,
                     const std::vector<bool>* valid = nullptr);

/// CSV with a leading integer key column (level/block index).
std::string keyed_grid_csv(const std::vector<PolarGrid::Point>& pts,
                           const std::vector<std::vector<double>>& values_per_key,
                           const std::string& key_name,
                           const std::vector<bool>* valid = nullptr);

std::string matrix_csv(const Mat& m);

}  // namespace flagbundle

// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#include "aa/property_table.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "core/error.hpp"

namespace cmadiff {

namespace {

// clang-format off
// Columns: stc  P_1  p_2  vol  H_1  H_2  P_i  alpha beta NCN  SASA  A1  A2  T  E  F
constexpr double kTable[kAlphabetSize][kNumProperties] = {
    /* A */ {1.28,  8.1, 0.046, 1.00,  0.62, -0.5,  6.11, 0.42, 0.23,  0.007,  1.181, 0.49, 1.064, -0.80, 15, -1.27},
    /* C */ {1.77,  5.5, 0.128, 2.43,  0.29, -1.0,  6.35, 0.17, 0.41, -0.036,  1.461, 0.26, 1.412,  0.83, 15, -1.09},
    /* D */ {1.60, 13.0, 0.105, 2.78, -0.90,  3.0,  2.95, 0.25, 0.20, -0.023,  1.587, 0.78, 0.866,  1.65,  5,  1.42},
    /* E */ {1.56, 12.3, 0.151, 3.78, -0.74,  3.0,  3.09, 0.42, 0.21,  0.006,  1.862, 0.84, 0.850, -0.92, 50,  1.60},
    /* F */ {2.90,  5.2, 0.290, 5.89,  1.19, -2.5,  5.67, 0.30, 0.38,  0.037,  2.228, 0.42, 1.091,  0.18, 55, -2.14},
    /* G */ {40.0,  9.0, 0.000, 0.00,  0.48,  0.0,  6.07, 0.13, 0.15,  0.179,  0.881, 0.48, 0.874, -0.55, 10,  1.86},
    /* H */ {2.99, 20.4, 0.230, 4.66, -0.40, -0.5,  7.69, 0.27, 0.30, -0.010,  2.025, 0.84, 1.105,  0.11, 10, -0.82},
    /* I */ {4.19,  5.2, 0.186, 4.00,  1.38, -1.8,  6.04, 0.30, 0.45,  0.021,  1.810, 0.34, 1.152, -1.53, 56, -2.89},
    /* K */ {1.89, 11.3, 0.219, 4.77, -1.50,  3.0,  9.99, 0.32, 0.27,  0.017,  2.258, 0.97, 0.930, -1.06, 13,  2.88},
    /* L */ {2.59,  4.9, 0.186, 4.00,  1.06, -1.8,  6.04, 0.39, 0.31,  0.051,  1.931, 0.40, 1.250, -1.01, 85, -2.29},
    /* M */ {2.35,  5.7, 0.221, 4.43,  0.64, -1.3,  5.71, 0.38, 0.32,  0.002,  2.034, 0.48, 0.826, -1.48, 16, -1.84},
    /* N */ {1.60, 11.6, 0.134, 2.95, -0.78,  2.0,  6.52, 0.21, 0.22,  0.005,  1.655, 0.81, 0.776,  3.00, 20,  1.77},
    /* P */ {2.67,  8.0, 0.131, 2.72,  0.12,  0.0,  6.80, 0.13, 0.34,  0.239,  1.468, 0.49, 1.064, -0.80, 49,  0.52},
    /* Q */ {1.56, 10.5, 0.180, 3.95, -0.85,  0.2,  5.65, 0.36, 0.25,  0.049,  1.932, 0.84, 1.015,  0.11, 15,  1.18},
    /* R */ {2.34, 10.5, 0.291, 6.13, -2.53,  3.0, 10.74, 0.36, 0.25,  0.043,  2.560, 0.95, 0.873, -1.15, 56,  2.79},
    /* S */ {1.31,  9.2, 0.062, 1.60, -0.18,  0.3,  5.70, 0.20, 0.28,  0.004,  1.290, 0.65, 1.012,  1.34, 67,  3.00},
    /* T */ {3.03,  8.6, 0.108, 2.60, -0.05, -0.4,  5.60, 0.21, 0.36,  0.003, 81.525, 0.70, 0.909,  0.27, 32,  1.18},
    /* V */ {3.67,  5.9, 0.140, 3.00,  1.08, -1.5,  6.02, 0.27, 0.49,  0.057,  1.645, 0.36, 1.383, -0.83, 32, -1.75},
    /* W */ {3.21,  5.4, 0.409, 8.08,  0.81, -3.4,  5.94, 0.32, 0.42,  0.037,  2.663, 0.51, 0.893, -0.97, 17, -3.78},
    /* Y */ {2.94,  6.2, 0.298, 6.47,  0.26, -2.3,  5.66, 0.25, 0.41,  0.023,  2.368, 0.76, 1.161, -0.29, 41, -3.30},
};
// clang-format on

void compute_column_stats(AminoAcidPropertyTable& t) {
  t.col_mean = t.values.colwise().mean().transpose();
  Eigen::MatrixXd centered = t.values.rowwise() - t.col_mean.transpose();
  t.col_std = centered.array().square().colwise().mean().sqrt().matrix().transpose();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

}  // namespace

int AminoAcidPropertyTable::row_index(char aa) {
  const auto pos = kAlphabet.find(aa);
  return pos == std::string_view::npos ? -1 : static_cast<int>(pos);
}

int AminoAcidPropertyTable::column_index(std::string_view name) {
  for (int i = 0; i < kNumProperties; ++i) {
    if (kPropertyNames[i] == name) return i;
  }
  return -1;
}

double AminoAcidPropertyTable::value(char aa, std::string_view column) const {
  const int r = row_index(aa);
  if (r < 0) fail(ErrorCode::InvalidArgument, std::string("unknown amino acid '") + aa + "'");
  const int c = column_index(column);
  if (c < 0) fail(ErrorCode::InvalidArgument, "unknown property column '" + std::string(column) + "'");
  return values(r, c);
}

Eigen::RowVectorXd AminoAcidPropertyTable::row(char aa) const {
  const int r = row_index(aa);
  if (r < 0) fail(ErrorCode::InvalidArgument, std::string("unknown amino acid '") + aa + "'");
  return values.row(r);
}

AminoAcidPropertyTable load_property_table() {
  AminoAcidPropertyTable t;
  t.values.resize(kAlphabetSize, kNumProperties);
  for (int r = 0; r < kAlphabetSize; ++r) {
    for (int c = 0; c < kNumProperties; ++c) t.values(r, c) = kTable[r][c];
  }
  compute_column_stats(t);
  return t;
}

AminoAcidPropertyTable load_property_table_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open property table CSV: " + path);

  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::Parse, "property table CSV is empty: " + path);
  auto header = split_csv_line(line);
  if (header.size() != kNumProperties + 1 || trim(header[0]) != "aa") {
    fail(ErrorCode::Parse,
         "property table CSV header must be `aa," + [] {
           std::string s;
           for (int i = 0; i < kNumProperties; ++i) {
             if (i) s += ',';
             s += kPropertyNames[i];
           }
           return s;
         }() + "`");
  }
  for (int i = 0; i < kNumProperties; ++i) {
    if (trim(header[i + 1]) != kPropertyNames[i]) {
      fail(ErrorCode::Parse, "property table CSV column " + std::to_string(i + 1) +
                                 " must be '" + std::string(kPropertyNames[i]) + "', got '" +
                                 trim(header[i + 1]) + "'");
    }
  }

  AminoAcidPropertyTable t;
  t.values.resize(kAlphabetSize, kNumProperties);
  std::array<bool, kAlphabetSize> seen{};
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != kNumProperties + 1) {
      fail(ErrorCode::Parse, "property table CSV line " + std::to_string(lineno) + ": expected " +
                                 std::to_string(kNumProperties + 1) + " fields, got " +
                                 std::to_string(fields.size()));
    }
    const std::string aa_field = trim(fields[0]);
    if (aa_field.size() != 1 || AminoAcidPropertyTable::row_index(aa_field[0]) < 0) {
      fail(ErrorCode::Parse, "property table CSV line " + std::to_string(lineno) +
                                 ": unknown amino acid '" + aa_field + "'");
    }
    const char aa = aa_field[0];
    const int r = AminoAcidPropertyTable::row_index(aa);
    if (seen[static_cast<size_t>(r)]) {
      fail(ErrorCode::Parse, "property table CSV: duplicate row for amino acid '" +
                                 std::string(1, aa) + "'");
    }
    seen[static_cast<size_t>(r)] = true;
    for (int c = 0; c < kNumProperties; ++c) {
      const std::string cell = trim(fields[c + 1]);
      size_t consumed = 0;
      double v = 0;
      bool ok = !cell.empty();
      if (ok) {
        try {
          v = std::stod(cell, &consumed);
        } catch (const std::exception&) {
          ok = false;
        }
      }
      if (!ok || consumed != cell.size() || !std::isfinite(v)) {
        fail(ErrorCode::Parse, "property table CSV: non-numeric cell for amino acid '" +
                                   std::string(1, aa) + "', column '" +
                                   std::string(kPropertyNames[c]) + "': '" + cell + "'");
      }
      t.values(r, c) = v;
    }
  }
  for (int r = 0; r < kAlphabetSize; ++r) {
    if (!seen[static_cast<size_t>(r)]) {
      fail(ErrorCode::Parse, std::string("property table CSV: missing row for amino acid '") +
                                 kAlphabet[static_cast<size_t>(r)] + "'");
    }
  }
  compute_column_stats(t);
  return t;
}

AminoAcidPropertyTable normalize_table(const AminoAcidPropertyTable& table) {
  AminoAcidPropertyTable out = table;
  for (int c = 0; c < kNumProperties; ++c) {
    if (table.col_std(c) == 0.0) {
      out.values.col(c).setZero();
    } else {
      out.values.col(c) =
          (table.values.col(c).array() - table.col_mean(c)) / table.col_std(c);
    }
  }
  compute_column_stats(out);
  out.normalized = true;
  return out;
}

std::vector<AnomalyFlag> validate_table(const AminoAcidPropertyTable& table) {
  std::vector<AnomalyFlag> flags;
  constexpr double kThreshold = 5.0;
  const int n = kAlphabetSize;
  for (int c = 0; c < kNumProperties; ++c) {
    const double col_sum = table.values.col(c).sum();
    const double col_sq_sum = table.values.col(c).array().square().sum();
    for (int r = 0; r < n; ++r) {
      const double v = table.values(r, c);
      const double mean = (col_sum - v) / (n - 1);
      const double var = (col_sq_sum - v * v) / (n - 1) - mean * mean;
      const double std = std::sqrt(std::max(var, 0.0));
      if (std == 0.0) continue;
      const double z = std::abs(v - mean) / std;
      if (z > kThreshold) {
        flags.push_back({kAlphabet[static_cast<size_t>(r)],
                         std::string(kPropertyNames[c]), v, z});
      }
    }
  }
  return flags;
}

}  // namespace cmadiff

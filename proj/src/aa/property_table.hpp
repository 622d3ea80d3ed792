// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace cmadiff {

// Canonical residue ordering; one-hot channel i encodes kAlphabet[i],
// channel 20 encodes padding.
inline constexpr std::string_view kAlphabet = "ACDEFGHIKLMNPQRSTVWY";
inline constexpr int kAlphabetSize = 20;
inline constexpr int kPaddingChannel = 20;
inline constexpr int kOneHotChannels = 21;
inline constexpr int kNumProperties = 16;

inline constexpr std::array<std::string_view, kNumProperties> kPropertyNames = {
    "stc", "P_1", "p_2", "vol", "H_1", "H_2", "P_i", "alpha",
    "beta", "NCN", "SASA", "A1",  "A2",  "T",  "E",  "F"};

// 20 residues x 16 physicochemical descriptors plus per-column statistics.
// `col_mean`/`col_std` are population moments over the 20 rows and are the
// reference frame for z-scored model inputs.
struct AminoAcidPropertyTable {
  Eigen::MatrixXd values;   // 20 x 16, rows in kAlphabet order
  Eigen::VectorXd col_mean; // 16
  Eigen::VectorXd col_std;  // 16, population (divide by 20)
  bool normalized = false;

  // -1 for any character outside the 20-letter alphabet.
  static int row_index(char aa);
  static int column_index(std::string_view name);

  double value(char aa, std::string_view column) const;
  Eigen::RowVectorXd row(char aa) const;
  Eigen::VectorXd col_min() const { return values.colwise().minCoeff().transpose(); }
  Eigen::VectorXd col_max() const { return values.colwise().maxCoeff().transpose(); }
};

// Embedded descriptor table. The two well-known oddities in the published
// data (Gly stc = 40.0, Thr SASA = 81.525) are kept verbatim; see
// validate_table for how they are surfaced.
AminoAcidPropertyTable load_property_table();

// Replaces the embedded values with a CSV file. Header must be
// `aa,stc,P_1,p_2,vol,H_1,H_2,P_i,alpha,beta,NCN,SASA,A1,A2,T,E,F` and the
// body must cover each amino acid exactly once.
AminoAcidPropertyTable load_property_table_csv(const std::string& path);

// Per-column z-score over the 20 rows; zero-variance columns map to zero.
AminoAcidPropertyTable normalize_table(const AminoAcidPropertyTable& table);

struct AnomalyFlag {
  char aa;
  std::string column;
  double value;
  double z;  // distance from the column mean in stds, cell excluded
};

// Flags cells more than 5 column standard deviations from the column mean.
// Statistics are computed leave-one-out (the inspected cell is excluded);
// including it would bound every z below sqrt(19) and hide any outlier.
// Reporting only — values are never edited.
std::vector<AnomalyFlag> validate_table(const AminoAcidPropertyTable& table);

}  // namespace cmadiff

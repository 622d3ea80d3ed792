// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <string>

#include "aa/property_table.hpp"

namespace cmadiff {

// Per-sequence model inputs: one-hot channels, per-residue descriptor rows,
// and their mean over the true length.
struct FeatureBundle {
  Eigen::MatrixXd one_hot;  // L_max x 21; rows >= length select padding
  Eigen::MatrixXd local;    // L_max x 16; rows >= length are zero
  Eigen::VectorXd global;   // 16, mean of local rows 0..length-1
  int length = 0;
};

// Rejects empty sequences, sequences longer than L_max, and any character
// outside the 20-letter alphabet (naming position and character).
void validate_sequence(const std::string& sequence, int l_max);

Eigen::MatrixXd encode_one_hot(const std::string& sequence, int l_max);

// When `normalized`, descriptor rows are z-scored with the table's column
// statistics (zero-variance columns become zero). Padding rows stay zero so
// the global mean over real positions is unaffected.
FeatureBundle featurize(const std::string& sequence, const AminoAcidPropertyTable& table,
                        int l_max, bool normalized);

}  // namespace cmadiff

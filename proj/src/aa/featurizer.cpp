// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#include "aa/featurizer.hpp"

#include "core/error.hpp"

namespace cmadiff {

void validate_sequence(const std::string& sequence, int l_max) {
  if (l_max < 1) fail(ErrorCode::InvalidArgument, "L_max must be at least 1");
  if (sequence.empty()) fail(ErrorCode::InvalidArgument, "sequence is empty");
  if (static_cast<int>(sequence.size()) > l_max) {
    fail(ErrorCode::InvalidArgument,
         "sequence length " + std::to_string(sequence.size()) + " exceeds L_max " +
             std::to_string(l_max));
  }
  for (size_t i = 0; i < sequence.size(); ++i) {
    if (AminoAcidPropertyTable::row_index(sequence[i]) < 0) {
      fail(ErrorCode::InvalidArgument,
           "non-standard amino acid at position " + std::to_string(i) + ": character '" +
               std::string(1, sequence[i]) + "'");
    }
  }
}

Eigen::MatrixXd encode_one_hot(const std::string& sequence, int l_max) {
  validate_sequence(sequence, l_max);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(l_max, kOneHotChannels);
  const int len = static_cast<int>(sequence.size());
  for (int i = 0; i < l_max; ++i) {
    const int ch = i < len
                       ? AminoAcidPropertyTable::row_index(sequence[static_cast<size_t>(i)])
                       : kPaddingChannel;
    m(i, ch) = 1.0;
  }
  return m;
}

FeatureBundle featurize(const std::string& sequence, const AminoAcidPropertyTable& table,
                        int l_max, bool normalized) {
  validate_sequence(sequence, l_max);
  FeatureBundle b;
  b.length = static_cast<int>(sequence.size());
  b.one_hot = encode_one_hot(sequence, l_max);
  b.local = Eigen::MatrixXd::Zero(l_max, kNumProperties);
  for (int i = 0; i < b.length; ++i) {
    Eigen::RowVectorXd row = table.row(sequence[static_cast<size_t>(i)]);
    if (normalized) {
      for (int c = 0; c < kNumProperties; ++c) {
        row(c) = table.col_std(c) == 0.0 ? 0.0
                                         : (row(c) - table.col_mean(c)) / table.col_std(c);
      }
    }
    b.local.row(i) = row;
  }
  b.global = b.local.topRows(b.length).colwise().mean().transpose();
  return b;
}

}  // namespace cmadiff

// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#include "evalkit/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>

#include "aa/featurizer.hpp"
#include "core/error.hpp"

namespace cmadiff {

namespace {

void check_letters(const std::string& sequence, const char* what) {
  if (sequence.empty()) fail(ErrorCode::InvalidArgument, std::string(what) + ": empty sequence");
  for (size_t i = 0; i < sequence.size(); ++i) {
    if (AminoAcidPropertyTable::row_index(sequence[i]) < 0) {
      fail(ErrorCode::InvalidArgument, std::string(what) + ": non-standard letter '" +
                                           std::string(1, sequence[i]) + "' at position " +
                                           std::to_string(i));
    }
  }
}

double basic_term(double ph, double pka) { return 1.0 / (1.0 + std::pow(10.0, ph - pka)); }
double acidic_term(double ph, double pka) { return 1.0 / (1.0 + std::pow(10.0, pka - ph)); }

}  // namespace

double avg_hydrophobicity(const std::string& sequence, const AminoAcidPropertyTable& table) {
  check_letters(sequence, "avg_hydrophobicity");
  const int col = AminoAcidPropertyTable::column_index("H_1");
  double sum = 0;
  for (char aa : sequence) sum += table.values(AminoAcidPropertyTable::row_index(aa), col);
  return sum / static_cast<double>(sequence.size());
}

double net_charge(const std::string& sequence, double ph, const PkaTable& pka) {
  check_letters(sequence, "net_charge");
  if (ph < 0 || ph > 14) {
    fail(ErrorCode::InvalidArgument, "net_charge: pH " + std::to_string(ph) + " outside [0, 14]");
  }
  double charge = basic_term(ph, pka.n_term) - acidic_term(ph, pka.c_term);
  for (char aa : sequence) {
    switch (aa) {
      case 'K': charge += basic_term(ph, pka.lys); break;
      case 'R': charge += basic_term(ph, pka.arg); break;
      case 'H': charge += basic_term(ph, pka.his); break;
      case 'D': charge -= acidic_term(ph, pka.asp); break;
      case 'E': charge -= acidic_term(ph, pka.glu); break;
      case 'C': charge -= acidic_term(ph, pka.cys); break;
      case 'Y': charge -= acidic_term(ph, pka.tyr); break;
      default: break;
    }
  }
  return charge;
}

double isoelectric_point(const std::string& sequence, const PkaTable& pka) {
  check_letters(sequence, "isoelectric_point");
  double lo = 0.0, hi = 14.0;
  // net_charge is strictly decreasing: positive at pH 0, negative at pH 14.
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (net_charge(sequence, mid, pka) > 0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::vector<int> cysteine_pair_intervals(const std::string& sequence) {
  std::vector<int> intervals;
  int prev = -1;
  for (size_t i = 0; i < sequence.size(); ++i) {
    if (sequence[i] != 'C') continue;
    if (prev >= 0) intervals.push_back(static_cast<int>(i) - prev);
    prev = static_cast<int>(i);
  }
  return intervals;
}

double shannon_entropy(const std::vector<std::string>& sequences) {
  if (sequences.empty()) fail(ErrorCode::InvalidArgument, "entropy needs a non-empty set");
  std::array<size_t, kAlphabetSize> counts{};
  size_t total = 0;
  for (const auto& sequence : sequences) {
    check_letters(sequence, "shannon_entropy");
    for (char aa : sequence) {
      ++counts[AminoAcidPropertyTable::row_index(aa)];
      ++total;
    }
  }
  double entropy = 0;
  for (size_t count : counts) {
    if (count == 0) continue;
    const double p = static_cast<double>(count) / static_cast<double>(total);
    entropy -= p * std::log2(p);
  }
  return entropy;
}

double sequence_identity(const std::string& a, const std::string& b) {
  if (a.empty() || b.empty()) {
    fail(ErrorCode::InvalidArgument, "sequence identity needs non-empty sequences");
  }
  // Rolling-row LCS: matches score 1, mismatches and gaps 0.
  std::vector<int> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (size_t i = 1; i <= a.size(); ++i) {
    for (size_t j = 1; j <= b.size(); ++j) {
      if (a[i - 1] == b[j - 1]) {
        cur[j] = prev[j - 1] + 1;
      } else {
        cur[j] = std::max(prev[j], cur[j - 1]);
      }
    }
    std::swap(prev, cur);
  }
  return static_cast<double>(prev[b.size()]) /
         static_cast<double>(std::max(a.size(), b.size()));
}

double novelty_ratio(const std::vector<std::string>& generated,
                     const std::vector<std::string>& reference, double identity_threshold,
                     int workers) {
  if (generated.empty()) fail(ErrorCode::InvalidArgument, "novelty needs generated sequences");
  if (reference.empty()) fail(ErrorCode::InvalidArgument, "novelty needs a reference set");
  if (workers < 1) fail(ErrorCode::InvalidArgument, "novelty worker count must be positive");
  auto count_novel = [&](size_t begin, size_t end) {
    size_t novel = 0;
    for (size_t i = begin; i < end; ++i) {
      double best = 0;
      for (const auto& ref : reference) {
        best = std::max(best, sequence_identity(generated[i], ref));
      }
      novel += (best < identity_threshold);
    }
    return novel;
  };
  size_t novel = 0;
  const size_t n = generated.size();
  const size_t chunks = std::min<size_t>(static_cast<size_t>(workers), n);
  if (chunks <= 1) {
    novel = count_novel(0, n);
  } else {
    std::vector<std::future<size_t>> futures;
    futures.reserve(chunks);
    for (size_t c = 0; c < chunks; ++c) {
      const size_t begin = n * c / chunks;
      const size_t end = n * (c + 1) / chunks;
      futures.push_back(std::async(std::launch::async, count_novel, begin, end));
    }
    for (auto& f : futures) novel += f.get();
  }
  return static_cast<double>(novel) / static_cast<double>(n);
}

double property_alignment_mse(const Eigen::VectorXd& target, const std::string& sequence,
                              const AminoAcidPropertyTable& table) {
  if (target.size() != table.values.cols()) {
    fail(ErrorCode::ShapeMismatch,
         "property target has dimension " + std::to_string(target.size()) + ", expected " +
             std::to_string(table.values.cols()));
  }
  check_letters(sequence, "property_alignment_mse");
  const Eigen::VectorXd realized =
      featurize(sequence, table, static_cast<int>(sequence.size()), /*normalized=*/true).global;
  return (target - realized).squaredNorm() / static_cast<double>(target.size());
}

double semantic_fidelity(const std::string& text, const std::string& sequence,
                         const AlignerModel& aligner, const AminoAcidPropertyTable& table) {
  check_letters(sequence, "semantic_fidelity");
  const Eigen::VectorXd realized =
      featurize(sequence, table, static_cast<int>(sequence.size()), /*normalized=*/true).global;
  const AlignedCondition t = aligner.text_to_condition(text);
  const AlignedCondition f = aligner.embed_features(realized);
  return t.v.dot(f.v);
}

}  // namespace cmadiff

// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "aa/property_table.hpp"
#include "align/aligner.hpp"

namespace cmadiff {

// Mean of the raw H_1 (hydrophobicity) column over residues.
double avg_hydrophobicity(const std::string& sequence, const AminoAcidPropertyTable& table);

// Ionizable-group pKa values. Defaults are the classic biochemistry-textbook
// reference set for free amino acids (as tabulated in Lehninger and used by
// EMBOSS-style pI calculators); override via config when a different
// electrostatics model is wanted.
struct PkaTable {
  double n_term = 9.69;
  double c_term = 2.34;
  double lys = 10.53;   // K
  double arg = 12.48;   // R
  double his = 6.00;    // H
  double asp = 3.65;    // D
  double glu = 4.25;    // E
  double cys = 8.18;    // C
  double tyr = 10.07;   // Y
};

inline constexpr PkaTable kDefaultPka{};

// Henderson–Hasselbalch sum: basic groups (N-terminus, K, R, H) each add
// 1/(1+10^(pH-pKa)); acidic groups (C-terminus, D, E, C, Y) each subtract
// 1/(1+10^(pKa-pH)). Strictly decreasing in pH.
double net_charge(const std::string& sequence, double ph, const PkaTable& pka = kDefaultPka);

// Unique root of net_charge in pH, found by bisection over [0, 14]. Runs to a
// 1e-10 bracket so the returned charge is zero well inside 1e-6.
double isoelectric_point(const std::string& sequence, const PkaTable& pka = kDefaultPka);

// Position differences between consecutive cysteines; empty when the sequence
// has fewer than two.
std::vector<int> cysteine_pair_intervals(const std::string& sequence);

// Shannon entropy in bits of the 20-letter residue distribution pooled over
// all sequences.
double shannon_entropy(const std::vector<std::string>& sequences);

// Gap- and mismatch-free global alignment score (the longest common
// subsequence) divided by max(len a, len b).
double sequence_identity(const std::string& a, const std::string& b);

// Fraction of generated sequences whose best identity against the reference
// set stays below the threshold. `workers` caps the threads used for the
// pairwise scan; 1 runs sequentially.
double novelty_ratio(const std::vector<std::string>& generated,
                     const std::vector<std::string>& reference,
                     double identity_threshold = 0.20, int workers = 1);

// Mean squared error between a normalized k-dim target and the sequence's
// normalized global features.
double property_alignment_mse(const Eigen::VectorXd& target, const std::string& sequence,
                              const AminoAcidPropertyTable& table);

// Cosine between the text condition and the sequence's feature embedding.
double semantic_fidelity(const std::string& text, const std::string& sequence,
                         const AlignerModel& aligner, const AminoAcidPropertyTable& table);

}  // namespace cmadiff

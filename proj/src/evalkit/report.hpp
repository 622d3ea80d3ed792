// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <limits>
#include <map>
#include <string>
#include <vector>

#include "evalkit/metrics.hpp"

namespace cmadiff {

struct SequenceMetrics {
  int length = 0;
  double avg_hydro = 0;
  double pi = 0;
  double net_charge_ph7_4 = 0;
  std::vector<int> cys_intervals;
  Eigen::VectorXd global;  // normalized global features
};

struct MetricAggregate {
  double mean = 0;
  double median = 0;
  double stddev = 0;  // population
};

struct ReportOptions {
  double novelty_threshold = 0.20;
  // Optional external per-sequence quality scores for the generated set
  // (e.g. structure-confidence values); when present, sequences scoring below
  // min_score are dropped before statistics.
  std::vector<double> generated_scores;
  double min_score = 70.0;
  // Caps the threads used for the pairwise novelty scan.
  int workers = 1;
};

struct MetricsReport {
  std::vector<SequenceMetrics> generated_rows, natural_rows;
  // keyed: length, avg_hydrophobicity, isoelectric_point, net_charge_ph7_4
  std::map<std::string, MetricAggregate> generated_aggregates, natural_aggregates;
  std::vector<MetricAggregate> generated_feature_stats, natural_feature_stats;  // per column
  double generated_entropy = 0;
  double natural_entropy = 0;
  double novelty = 0;
  double novelty_threshold = 0.20;
  size_t filtered_out = 0;
  // Optional condition-faithfulness scores, attached by callers that hold the
  // request targets / aligner; NaN when not computed.
  double property_alignment = std::numeric_limits<double>::quiet_NaN();
  double semantic_fidelity_score = std::numeric_limits<double>::quiet_NaN();
};

SequenceMetrics sequence_metrics(const std::string& sequence,
                                 const AminoAcidPropertyTable& table);

// Per-sequence rows, per-metric and per-feature-column aggregates for both
// sets, pooled entropies, and the novelty ratio of generated against natural.
MetricsReport distribution_report(const std::vector<std::string>& generated,
                                  const std::vector<std::string>& natural,
                                  const AminoAcidPropertyTable& table,
                                  const ReportOptions& options = {});

// One row per sequence from both sets; a '#' preamble documents the novelty
// proxy and any score filtering, then a header row and the data.
void write_metrics_csv(const MetricsReport& report, const std::string& path);

// Aggregate half of the report as JSON.
void write_metrics_summary(const MetricsReport& report, const std::string& path);

}  // namespace cmadiff

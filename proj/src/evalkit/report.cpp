// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#include "evalkit/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "aa/featurizer.hpp"
#include "core/error.hpp"

namespace cmadiff {

using nlohmann::json;

namespace {

MetricAggregate aggregate(std::vector<double> values) {
  MetricAggregate a;
  const double n = static_cast<double>(values.size());
  double sum = 0;
  for (double v : values) sum += v;
  a.mean = sum / n;
  double sq = 0;
  for (double v : values) sq += (v - a.mean) * (v - a.mean);
  a.stddev = std::sqrt(sq / n);
  std::sort(values.begin(), values.end());
  const size_t mid = values.size() / 2;
  a.median = values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
  return a;
}

std::map<std::string, MetricAggregate> aggregate_rows(const std::vector<SequenceMetrics>& rows) {
  std::vector<double> length, hydro, pi, charge;
  for (const auto& row : rows) {
    length.push_back(row.length);
    hydro.push_back(row.avg_hydro);
    pi.push_back(row.pi);
    charge.push_back(row.net_charge_ph7_4);
  }
  return {{"length", aggregate(std::move(length))},
          {"avg_hydrophobicity", aggregate(std::move(hydro))},
          {"isoelectric_point", aggregate(std::move(pi))},
          {"net_charge_ph7_4", aggregate(std::move(charge))}};
}

std::vector<MetricAggregate> aggregate_features(const std::vector<SequenceMetrics>& rows) {
  std::vector<MetricAggregate> stats;
  const Eigen::Index cols = rows.front().global.size();
  stats.reserve(cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    std::vector<double> values;
    values.reserve(rows.size());
    for (const auto& row : rows) values.push_back(row.global(c));
    stats.push_back(aggregate(std::move(values)));
  }
  return stats;
}

void write_rows(std::ofstream& out, const char* set_name,
                const std::vector<SequenceMetrics>& rows) {
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    out << set_name << ',' << i << ',' << row.length << ',' << row.avg_hydro << ','
        << row.pi << ',' << row.net_charge_ph7_4 << ',';
    for (size_t j = 0; j < row.cys_intervals.size(); ++j) {
      if (j) out << ';';
      out << row.cys_intervals[j];
    }
    for (Eigen::Index c = 0; c < row.global.size(); ++c) out << ',' << row.global(c);
    out << '\n';
  }
}

json aggregates_to_json(const std::map<std::string, MetricAggregate>& aggregates) {
  json j;
  for (const auto& [name, a] : aggregates) {
    j[name] = {{"mean", a.mean}, {"median", a.median}, {"stddev", a.stddev}};
  }
  return j;
}

json feature_stats_to_json(const std::vector<MetricAggregate>& stats) {
  json j = json::array();
  for (size_t c = 0; c < stats.size(); ++c) {
    j.push_back({{"column", kPropertyNames[c]},
                 {"mean", stats[c].mean},
                 {"median", stats[c].median},
                 {"stddev", stats[c].stddev}});
  }
  return j;
}

}  // namespace

SequenceMetrics sequence_metrics(const std::string& sequence,
                                 const AminoAcidPropertyTable& table) {
  SequenceMetrics row;
  row.length = static_cast<int>(sequence.size());
  row.avg_hydro = avg_hydrophobicity(sequence, table);
  row.pi = isoelectric_point(sequence);
  row.net_charge_ph7_4 = net_charge(sequence, 7.4);
  row.cys_intervals = cysteine_pair_intervals(sequence);
  row.global =
      featurize(sequence, table, static_cast<int>(sequence.size()), /*normalized=*/true).global;
  return row;
}

MetricsReport distribution_report(const std::vector<std::string>& generated,
                                  const std::vector<std::string>& natural,
                                  const AminoAcidPropertyTable& table,
                                  const ReportOptions& options) {
  if (generated.empty()) fail(ErrorCode::InvalidArgument, "report needs generated sequences");
  if (natural.empty()) fail(ErrorCode::InvalidArgument, "report needs natural sequences");

  std::vector<std::string> kept = generated;
  MetricsReport report;
  if (!options.generated_scores.empty()) {
    if (options.generated_scores.size() != generated.size()) {
      fail(ErrorCode::InvalidArgument,
           "score file has " + std::to_string(options.generated_scores.size()) +
               " entries for " + std::to_string(generated.size()) + " generated sequences");
    }
    kept.clear();
    for (size_t i = 0; i < generated.size(); ++i) {
      if (options.generated_scores[i] >= options.min_score) kept.push_back(generated[i]);
    }
    report.filtered_out = generated.size() - kept.size();
    if (kept.empty()) {
      fail(ErrorCode::InvalidArgument, "score filter removed every generated sequence");
    }
  }

  for (const auto& sequence : kept) {
    report.generated_rows.push_back(sequence_metrics(sequence, table));
  }
  for (const auto& sequence : natural) {
    report.natural_rows.push_back(sequence_metrics(sequence, table));
  }
  report.generated_aggregates = aggregate_rows(report.generated_rows);
  report.natural_aggregates = aggregate_rows(report.natural_rows);
  report.generated_feature_stats = aggregate_features(report.generated_rows);
  report.natural_feature_stats = aggregate_features(report.natural_rows);
  report.generated_entropy = shannon_entropy(kept);
  report.natural_entropy = shannon_entropy(natural);
  report.novelty_threshold = options.novelty_threshold;
  report.novelty = novelty_ratio(kept, natural, options.novelty_threshold, options.workers);
  return report;
}

void write_metrics_csv(const MetricsReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot open metrics CSV for writing: " + path);
  out << "# novelty is a sequence-identity proxy (threshold "
      << report.novelty_threshold << ") against the supplied natural set\n";
  if (report.filtered_out > 0) {
    out << "# " << report.filtered_out
        << " generated sequences dropped by the external score filter\n";
  }
  out << "set,index,length,avg_hydrophobicity,isoelectric_point,net_charge_ph7_4,"
         "cysteine_intervals";
  for (int c = 0; c < kNumProperties; ++c) out << ',' << kPropertyNames[c];
  out << '\n';
  write_rows(out, "generated", report.generated_rows);
  write_rows(out, "natural", report.natural_rows);
  if (!out) fail(ErrorCode::Io, "write to metrics CSV failed: " + path);
}

void write_metrics_summary(const MetricsReport& report, const std::string& path) {
  json j;
  j["novelty"] = {{"ratio", report.novelty},
                  {"threshold", report.novelty_threshold},
                  {"method", "sequence identity vs natural set (desk-scale proxy)"}};
  j["counts"] = {{"generated", report.generated_rows.size()},
                 {"natural", report.natural_rows.size()},
                 {"filtered_out", report.filtered_out}};
  j["entropy_bits"] = {{"generated", report.generated_entropy},
                       {"natural", report.natural_entropy}};
  j["generated"] = aggregates_to_json(report.generated_aggregates);
  j["natural"] = aggregates_to_json(report.natural_aggregates);
  j["generated_features"] = feature_stats_to_json(report.generated_feature_stats);
  j["natural_features"] = feature_stats_to_json(report.natural_feature_stats);
  if (std::isfinite(report.property_alignment)) {
    j["property_alignment_mse"] = report.property_alignment;
  }
  if (std::isfinite(report.semantic_fidelity_score)) {
    j["semantic_fidelity"] = report.semantic_fidelity_score;
  }
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot open metrics summary for writing: " + path);
  out << j.dump(2) << '\n';
  if (!out) fail(ErrorCode::Io, "write to metrics summary failed: " + path);
}

}  // namespace cmadiff

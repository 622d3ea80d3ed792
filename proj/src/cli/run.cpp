// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#include "cli/run.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "aa/featurizer.hpp"
#include "align/aligner.hpp"
#include "config/run_config.hpp"
#include "core/digest.hpp"
#include "core/error.hpp"
#include "core/gzip_stream.hpp"
#include "core/version.hpp"
#include "cvae/cvae.hpp"
#include "diffusion/diffusion.hpp"
#include "evalkit/report.hpp"
#include "ingest/protsemantic.hpp"
#include "ingest/swissprot.hpp"
#include "pipeline/generation.hpp"

namespace cmadiff {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::Io: return "io";
    case ErrorCode::Parse: return "parse";
    case ErrorCode::Config: return "config";
    case ErrorCode::ShapeMismatch: return "shape-mismatch";
    case ErrorCode::Numeric: return "numeric";
    case ErrorCode::Internal: return "internal";
  }
  return "internal";
}

int error_exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return 2;
    case ErrorCode::Io: return 3;
    case ErrorCode::Parse: return 4;
    case ErrorCode::Config: return 5;
    case ErrorCode::ShapeMismatch: return 6;
    case ErrorCode::Numeric: return 7;
    case ErrorCode::Internal: return 8;
  }
  return 8;
}

void log_info(const RunConfig& config, const std::string& message) {
  if (!config.quiet()) std::cerr << "cmadiff: " << message << "\n";
}

void ensure_out_dir(const RunConfig& config) {
  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create output directory '" + config.out_dir + "': " + ec.message());
}

// Every subcommand drops a manifest describing exactly what ran: command,
// version, seed, full config snapshot, input digests, and produced files.
void write_run_manifest(const RunConfig& config, const std::string& command,
                        const std::map<std::string, std::string>& input_paths,
                        const std::vector<std::string>& outputs) {
  ensure_out_dir(config);
  json j;
  j["command"] = command;
  j["version"] = kVersion;
  j["seed"] = config.seed;
  j["config"] = json::parse(config.to_json_text());
  json inputs = json::object();
  for (const auto& [name, path] : input_paths) {
    inputs[name] = {{"path", path}, {"sha256", sha256_file_hex(path)}};
  }
  j["inputs"] = inputs;
  j["outputs"] = outputs;
  const std::string path = config.out_dir + "/" + command + ".manifest.json";
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write manifest: " + path);
  out << j.dump(2) << '\n';
}

AminoAcidPropertyTable load_table(const RunConfig& config) {
  if (!config.featurizer.table_csv.empty()) {
    return load_property_table_csv(config.featurizer.table_csv);
  }
  return load_property_table();
}

// Featurizes dataset records, skipping (and counting) any the model cannot
// hold; the caller decides whether a nonzero skip count is acceptable.
std::vector<FeatureBundle> featurize_records(const std::vector<ProteinRecord>& records,
                                             const AminoAcidPropertyTable& table, int l_max,
                                             size_t* skipped) {
  std::vector<FeatureBundle> bundles;
  bundles.reserve(records.size());
  size_t skip_count = 0;
  for (const auto& record : records) {
    if (static_cast<int>(record.sequence.size()) > l_max) {
      ++skip_count;
      continue;
    }
    bundles.push_back(featurize(record.sequence, table, l_max, /*normalized=*/true));
  }
  if (skipped) *skipped = skip_count;
  if (bundles.empty()) {
    fail(ErrorCode::InvalidArgument, "no dataset records fit within l_max = " + std::to_string(l_max));
  }
  return bundles;
}

// ---- subcommands ----

int cmd_build_dataset(const RunConfig& config, const std::string& input,
                      const std::string& output) {
  auto in = open_maybe_gzip(input);
  ParseCounters parse_counters;
  std::vector<ProteinRecord> records = parse_swissprot_dat(*in, &parse_counters);
  FilterCounts filter_counts;
  std::vector<ProteinRecord> kept =
      filter_records(records, config.ingest.min_length, config.ingest.max_length, &filter_counts);
  if (kept.empty()) {
    fail(ErrorCode::InvalidArgument, "no records survive the length/alphabet filters");
  }
  write_protsemantic(kept, output);
  const DatasetManifest manifest =
      build_manifest(kept, sha256_file_hex(input), config.ingest.min_length,
                     config.ingest.max_length, parse_counters, filter_counts);
  const std::string manifest_path = output + ".manifest.json";
  write_manifest(manifest, manifest_path);
  log_info(config, "parsed " + std::to_string(parse_counters.parsed) + " entries, kept " +
                       std::to_string(kept.size()) + " (" +
                       std::to_string(filter_counts.too_short) + " short, " +
                       std::to_string(filter_counts.too_long) + " long, " +
                       std::to_string(filter_counts.nonstandard) + " nonstandard)");
  write_run_manifest(config, "build-dataset", {{"input", input}}, {output, manifest_path});
  return 0;
}

int cmd_featurize(const RunConfig& config, const std::string& sequence,
                  const std::string& data_path, const std::string& output) {
  const AminoAcidPropertyTable table = load_table(config);
  std::vector<std::string> sequences;
  std::map<std::string, std::string> inputs;
  if (!sequence.empty()) {
    sequences.push_back(sequence);
  } else {
    for (const auto& record : read_protsemantic(data_path)) sequences.push_back(record.sequence);
    inputs["data"] = data_path;
  }
  std::ofstream out(output);
  if (!out) fail(ErrorCode::Io, "cannot open output file: " + output);
  for (const auto& seq : sequences) {
    const FeatureBundle bundle =
        featurize(seq, table,
                  std::max(config.featurizer.l_max, static_cast<int>(seq.size())),
                  /*normalized=*/true);
    json j;
    j["sequence"] = seq;
    j["length"] = bundle.length;
    j["global"] = std::vector<double>(bundle.global.data(),
                                      bundle.global.data() + bundle.global.size());
    out << j.dump() << '\n';
  }
  log_info(config, "featurized " + std::to_string(sequences.size()) + " sequences");
  write_run_manifest(config, "featurize", inputs, {output});
  return 0;
}

int cmd_train_cvae(RunConfig config, const std::string& data_path, const std::string& out_path) {
  const AminoAcidPropertyTable table = load_table(config);
  const auto records = read_protsemantic(data_path);
  size_t skipped = 0;
  const auto bundles = featurize_records(records, table, config.cvae.model.l_max, &skipped);
  if (skipped > 0) {
    log_info(config, std::to_string(skipped) + " records exceed cvae.l_max and were skipped");
  }
  config.cvae.model.seed = config.seed;
  CvaeModel model(config.cvae.model);
  TrainOptions opts = config.cvae.train;
  opts.verbose = config.verbose();
  log_info(config, "training CVAE on " + std::to_string(bundles.size()) + " sequences (" +
                       std::to_string(model.params().scalar_count()) + " parameters)");
  const auto history = train_cvae(model, bundles, opts, config.seed, out_path);
  save_checkpoint(model.to_checkpoint(), out_path);

  ensure_out_dir(config);
  const std::string history_path = config.out_dir + "/train-cvae.history.csv";
  std::ofstream hist(history_path);
  hist << "epoch,total,recon,kl,lr\n";
  for (const auto& row : history) {
    hist << row.epoch << ',' << row.total << ',' << row.recon << ',' << row.kl << ','
         << row.lr << '\n';
  }
  const double accuracy = reconstruction_accuracy(model, bundles);
  log_info(config, "final loss " + std::to_string(history.back().total) +
                       ", reconstruction accuracy " + std::to_string(accuracy));
  write_run_manifest(config, "train-cvae", {{"data", data_path}}, {out_path, history_path});
  return 0;
}

std::vector<AlignerPair> dataset_pairs(const std::vector<ProteinRecord>& records,
                                       const AminoAcidPropertyTable& table, int l_max) {
  std::vector<AlignerPair> pairs;
  pairs.reserve(records.size());
  for (const auto& record : records) {
    if (static_cast<int>(record.sequence.size()) > l_max || record.description.empty()) continue;
    pairs.push_back(AlignerPair{
        record.description,
        featurize(record.sequence, table, static_cast<int>(record.sequence.size()),
                  /*normalized=*/true)
            .global});
  }
  return pairs;
}

int cmd_train_aligner(RunConfig config, const std::string& data_path,
                      const std::string& out_path) {
  const AminoAcidPropertyTable table = load_table(config);
  const auto records = read_protsemantic(data_path);
  std::vector<AlignerPair> pairs = dataset_pairs(records, table, config.featurizer.l_max);
  if (pairs.size() < 2) {
    fail(ErrorCode::InvalidArgument, "aligner training needs at least 2 described records");
  }
  config.aligner.model.seed = config.seed;
  AlignerModel model(config.aligner.model);
  if (config.aligner.model.text_embedder == "lookup") {
    if (config.aligner.text_vectors.empty()) {
      fail(ErrorCode::Config,
           "config key 'aligner.text_vectors' is required with the lookup embedder");
    }
    model.load_text_vectors(config.aligner.text_vectors);
  }

  std::vector<AlignerPair> heldout;
  if (config.aligner.holdout > 0) {
    Rng split_rng(config.seed ^ 0x5f117000ULL);
    split_rng.shuffle(pairs);
    const size_t keep = pairs.size() -
                        static_cast<size_t>(config.aligner.holdout * pairs.size());
    if (keep < 2) fail(ErrorCode::Config, "aligner.holdout leaves fewer than 2 training pairs");
    heldout.assign(pairs.begin() + keep, pairs.end());
    pairs.resize(keep);
  }

  TrainOptions opts = config.aligner.train;
  opts.verbose = config.verbose();
  log_info(config, "training aligner on " + std::to_string(pairs.size()) + " pairs (" +
                       std::to_string(model.params().scalar_count()) + " parameters)");
  const auto history = train_aligner(model, pairs, opts, config.seed, out_path);
  save_checkpoint(model.to_checkpoint(), out_path);

  ensure_out_dir(config);
  const std::string history_path = config.out_dir + "/train-aligner.history.csv";
  std::ofstream hist(history_path);
  hist << "epoch,loss,surrogate,retrieval_top1,tau\n";
  for (const auto& row : history) {
    hist << row.epoch << ',' << row.loss << ',' << row.surrogate_loss << ','
         << row.retrieval_top1 << ',' << row.tau << '\n';
  }
  std::string message = "final retrieval " + std::to_string(history.back().retrieval_top1);
  if (!heldout.empty()) {
    message += ", held-out retrieval " + std::to_string(retrieval_top1(model, heldout));
  }
  log_info(config, message);
  write_run_manifest(config, "train-aligner", {{"data", data_path}}, {out_path, history_path});
  return 0;
}

int cmd_train_diffusion(RunConfig config, const std::string& cvae_path,
                        const std::string& aligner_path, const std::string& data_path,
                        const std::string& out_path) {
  const AminoAcidPropertyTable table = load_table(config);
  const CvaeModel cvae = CvaeModel::from_checkpoint(load_checkpoint(cvae_path, "cvae"));
  const AlignerModel aligner =
      AlignerModel::from_checkpoint(load_checkpoint(aligner_path, "aligner"));
  const auto records = read_protsemantic(data_path);
  size_t skipped = 0;
  const auto bundles = featurize_records(records, table, cvae.config().l_max, &skipped);

  // Latent and condition widths always follow the loaded checkpoints.
  config.diffusion.model.latent_dim = cvae.config().latent_dim;
  config.diffusion.model.cond_dim = aligner.config().shared_dim;
  config.diffusion.model.seed = config.seed;
  DiffusionModel model(config.diffusion.model);

  Rng example_rng(config.seed ^ 0xd1ffe8a3ULL);
  std::vector<DiffusionExample> examples;
  examples.reserve(bundles.size());
  for (const auto& bundle : bundles) {
    const EncoderOutput enc = cvae.encode(bundle);
    DiffusionExample example;
    example.z0 = config.diffusion.use_sampled_z
                     ? reparameterize(enc.mu, enc.log_var,
                                      example_rng.normal_vector(static_cast<int>(enc.mu.size())))
                     : enc.mu;
    if (example_rng.uniform() >= config.diffusion.cond_dropout) {
      example.condition = aligner.embed_features(bundle.global).v;
    }
    examples.push_back(std::move(example));
  }

  TrainOptions opts = config.diffusion.train;
  opts.verbose = config.verbose();
  log_info(config, "training diffusion on " + std::to_string(examples.size()) + " latents (" +
                       std::to_string(model.params().scalar_count()) + " parameters)");
  const auto history = train_diffusion(model, examples, opts, config.seed, out_path);
  save_checkpoint(model.to_checkpoint(), out_path);

  ensure_out_dir(config);
  const std::string history_path = config.out_dir + "/train-diffusion.history.csv";
  std::ofstream hist(history_path);
  hist << "epoch,loss,lr\n";
  for (const auto& row : history) {
    hist << row.epoch << ',' << row.loss << ',' << row.lr << '\n';
  }
  log_info(config, "final loss " + std::to_string(history.back().loss));
  write_run_manifest(config, "train-diffusion",
                     {{"cvae", cvae_path}, {"aligner", aligner_path}, {"data", data_path}},
                     {out_path, history_path});
  return 0;
}

std::vector<double> parse_csv_numbers(const std::string& text) {
  std::vector<double> values;
  std::stringstream stream(text);
  std::string field;
  while (std::getline(stream, field, ',')) {
    try {
      size_t used = 0;
      values.push_back(std::stod(field, &used));
      while (used < field.size() && std::isspace(static_cast<unsigned char>(field[used]))) ++used;
      if (used != field.size()) throw std::invalid_argument(field);
    } catch (const std::exception&) {
      fail(ErrorCode::InvalidArgument, "cannot parse '" + field + "' as a number");
    }
  }
  return values;
}

int cmd_generate(RunConfig config, const std::string& cvae_path, const std::string& aligner_path,
                 const std::string& diffusion_path, const std::string& text_file,
                 const std::string& out_path) {
  const AminoAcidPropertyTable table = load_table(config);
  const CvaeModel cvae = CvaeModel::from_checkpoint(load_checkpoint(cvae_path, "cvae"));
  AlignerModel aligner = AlignerModel::from_checkpoint(load_checkpoint(aligner_path, "aligner"));
  const DiffusionModel diffusion =
      DiffusionModel::from_checkpoint(load_checkpoint(diffusion_path, "diffusion"));
  if (aligner.config().text_embedder == "lookup" && !config.aligner.text_vectors.empty()) {
    aligner.load_text_vectors(config.aligner.text_vectors);
  }

  GenerationRequest request;
  request.mode = condition_mode_from_string(config.generation.mode);
  request.text = config.generation.text;
  if (!text_file.empty()) {
    std::ifstream in(text_file);
    if (!in) fail(ErrorCode::Io, "cannot open text file: " + text_file);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    request.text = buffer.str();
    // Trim the trailing newline editors add; inner whitespace is meaningful.
    while (!request.text.empty() &&
           (request.text.back() == '\n' || request.text.back() == '\r')) {
      request.text.pop_back();
    }
  }
  if (!config.generation.features.empty()) {
    request.target_features = Eigen::Map<const Eigen::VectorXd>(
        config.generation.features.data(), config.generation.features.size());
  }
  request.count = config.generation.count;
  request.min_length = config.generation.min_length;
  request.max_length = config.generation.max_length;
  request.seed = config.seed;

  const auto sequences = generate(request, cvae, aligner, diffusion, table);
  write_fasta(to_fasta_records(sequences), out_path);

  // Sidecar with the request targets and per-sequence realized features, so
  // downstream property-alignment scoring has everything it needs.
  const ConditionBundle bundle = build_condition(request, aligner, table);
  json sidecar;
  sidecar["mode"] = to_string(request.mode);
  sidecar["seed"] = request.seed;
  sidecar["count"] = request.count;
  if (bundle.raw_features.size() > 0) {
    sidecar["target_raw"] = std::vector<double>(
        bundle.raw_features.data(), bundle.raw_features.data() + bundle.raw_features.size());
  }
  sidecar["target_normalized"] = std::vector<double>(
      bundle.decoder_features.data(),
      bundle.decoder_features.data() + bundle.decoder_features.size());
  json rows = json::array();
  for (const auto& sequence : sequences) {
    rows.push_back(
        {{"sequence", sequence.sequence},
         {"latent", sequence.latent},
         {"realized", std::vector<double>(
                          sequence.realized_features.data(),
                          sequence.realized_features.data() + sequence.realized_features.size())}});
  }
  sidecar["sequences"] = rows;
  const std::string sidecar_path = out_path + ".json";
  std::ofstream side(sidecar_path);
  if (!side) fail(ErrorCode::Io, "cannot write sidecar: " + sidecar_path);
  side << sidecar.dump(2) << '\n';

  log_info(config, "generated " + std::to_string(sequences.size()) + " sequences -> " + out_path);
  std::map<std::string, std::string> inputs{
      {"cvae", cvae_path}, {"aligner", aligner_path}, {"diffusion", diffusion_path}};
  if (!text_file.empty()) inputs["text"] = text_file;
  write_run_manifest(config, "generate", inputs, {out_path, sidecar_path});
  return 0;
}

std::vector<double> read_scores(const std::string& path,
                                const std::vector<FastaRecord>& records) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open score file: " + path);
  std::map<std::string, double> by_id;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string id;
    double score;
    if (!(fields >> id >> score)) {
      fail(ErrorCode::Parse,
           path + ":" + std::to_string(line_no) + ": expected '<sequence-id> <score>'");
    }
    by_id[id] = score;
  }
  std::vector<double> scores;
  scores.reserve(records.size());
  for (const auto& record : records) {
    const auto it = by_id.find(record.header);
    if (it == by_id.end()) {
      fail(ErrorCode::InvalidArgument, "score file has no entry for sequence '" + record.header + "'");
    }
    scores.push_back(it->second);
  }
  return scores;
}

void write_histogram(const std::string& path, const std::vector<double>& gen_values,
                     const std::vector<double>& nat_values) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : gen_values) { lo = std::min(lo, v); hi = std::max(hi, v); }
  for (double v : nat_values) { lo = std::min(lo, v); hi = std::max(hi, v); }
  const int bins = 20;
  double width = (hi - lo) / bins;
  if (width <= 0) width = 1;
  std::vector<size_t> gen_counts(bins, 0), nat_counts(bins, 0);
  const auto bin_of = [&](double v) {
    return std::min<int>(bins - 1, static_cast<int>((v - lo) / width));
  };
  for (double v : gen_values) ++gen_counts[bin_of(v)];
  for (double v : nat_values) ++nat_counts[bin_of(v)];
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write histogram: " + path);
  out << "bin_lo,bin_hi,generated,natural\n";
  for (int b = 0; b < bins; ++b) {
    out << lo + b * width << ',' << lo + (b + 1) * width << ',' << gen_counts[b] << ','
        << nat_counts[b] << '\n';
  }
}

int cmd_evaluate(const RunConfig& config, const std::string& generated_path,
                 const std::string& natural_path, const std::string& aligner_path,
                 const std::string& scores_path, const std::string& text,
                 bool histograms, int workers) {
  const AminoAcidPropertyTable table = load_table(config);
  const auto generated_records = read_fasta(generated_path);
  const auto natural_records = read_fasta(natural_path);
  std::vector<std::string> generated, natural;
  for (const auto& record : generated_records) generated.push_back(record.sequence);
  for (const auto& record : natural_records) natural.push_back(record.sequence);

  ReportOptions options;
  options.novelty_threshold = config.evaluation.novelty_threshold;
  options.min_score = config.evaluation.min_score;
  options.workers = workers;
  if (!scores_path.empty()) options.generated_scores = read_scores(scores_path, generated_records);

  MetricsReport report = distribution_report(generated, natural, table, options);

  std::optional<AlignerModel> aligner;
  if (!aligner_path.empty()) {
    aligner = AlignerModel::from_checkpoint(load_checkpoint(aligner_path, "aligner"));
    if (aligner->config().text_embedder == "lookup" && !config.aligner.text_vectors.empty()) {
      aligner->load_text_vectors(config.aligner.text_vectors);
    }
  }
  if (!text.empty()) {
    if (!aligner) {
      fail(ErrorCode::InvalidArgument, "--text scoring requires --aligner <checkpoint>");
    }
    double sum = 0;
    for (const auto& sequence : generated) {
      sum += semantic_fidelity(text, sequence, *aligner, table);
    }
    report.semantic_fidelity_score = sum / static_cast<double>(generated.size());
  }

  ensure_out_dir(config);
  const std::string csv_path = config.out_dir + "/metrics.csv";
  const std::string summary_path = config.out_dir + "/summary.json";
  write_metrics_csv(report, csv_path);
  write_metrics_summary(report, summary_path);
  std::vector<std::string> outputs{csv_path, summary_path};

  if (histograms) {
    const auto collect = [](const std::vector<SequenceMetrics>& rows, auto getter) {
      std::vector<double> values;
      values.reserve(rows.size());
      for (const auto& row : rows) values.push_back(getter(row));
      return values;
    };
    const std::vector<std::pair<std::string, std::function<double(const SequenceMetrics&)>>>
        metrics{{"length", [](const SequenceMetrics& r) { return double(r.length); }},
                {"avg_hydrophobicity", [](const SequenceMetrics& r) { return r.avg_hydro; }},
                {"isoelectric_point", [](const SequenceMetrics& r) { return r.pi; }},
                {"net_charge_ph7_4", [](const SequenceMetrics& r) { return r.net_charge_ph7_4; }}};
    for (const auto& [name, getter] : metrics) {
      const std::string path = config.out_dir + "/hist_" + name + ".csv";
      write_histogram(path, collect(report.generated_rows, getter),
                      collect(report.natural_rows, getter));
      outputs.push_back(path);
    }
  }

  log_info(config, "novelty " + std::to_string(report.novelty) + ", generated entropy " +
                       std::to_string(report.generated_entropy) + " bits -> " + csv_path);
  std::map<std::string, std::string> inputs{{"generated", generated_path},
                                            {"natural", natural_path}};
  if (!aligner_path.empty()) inputs["aligner"] = aligner_path;
  if (!scores_path.empty()) inputs["scores"] = scores_path;
  write_run_manifest(config, "evaluate", inputs, outputs);
  return 0;
}

int cmd_selftest(const RunConfig& config) {
  const auto check = [](bool ok, const std::string& name) {
    if (!ok) fail(ErrorCode::Internal, "selftest failed: " + name);
    std::cerr << "selftest: ok " << name << "\n";
  };

  const AminoAcidPropertyTable table = load_property_table();
  check(table.values.rows() == kAlphabetSize && table.values.cols() == kNumProperties,
        "property table shape");
  const auto flags = validate_table(table);
  check(flags.size() == 2, "anomaly screen finds the two known outlier cells");

  Rng rng(7);
  bool featurizer_ok = true;
  for (int i = 0; i < 50; ++i) {
    const int length = 10 + static_cast<int>(rng.uniform_int(119));
    std::string sequence;
    for (int p = 0; p < length; ++p) {
      sequence.push_back(kAlphabet[rng.uniform_int(kAlphabetSize)]);
    }
    const FeatureBundle bundle = featurize(sequence, table, 128, true);
    const Eigen::VectorXd mean =
        bundle.local.topRows(bundle.length).colwise().mean().transpose();
    featurizer_ok = featurizer_ok && (bundle.global - mean).cwiseAbs().maxCoeff() < 1e-12 &&
                    (bundle.one_hot.rowwise().sum().array() == 1.0).all();
  }
  check(featurizer_ok, "global features equal the local mean; one-hot rows sum to 1");

  const NoiseSchedule schedule = make_schedule(100);
  bool monotone = true;
  for (int t = 2; t <= schedule.T; ++t) {
    monotone = monotone && schedule.alpha_bar_at(t) < schedule.alpha_bar_at(t - 1);
  }
  check(monotone && schedule.alpha_bar_at(0) == 1.0, "alpha_bar strictly decreasing from 1");

  Eigen::VectorXd z0 = rng.normal_vector(8);
  Eigen::VectorXd z = forward_marginal(z0, schedule.T, schedule, rng.normal_vector(8));
  for (int t = schedule.T; t >= 1; --t) {
    z = posterior_step(z, z0, t, schedule, Eigen::VectorXd::Zero(8));
  }
  check((z - z0).cwiseAbs().maxCoeff() < 1e-6, "oracle reverse pass recovers z0");

  check(std::abs(shannon_entropy({"AAAC"}) - 0.8112781244591328) < 1e-12 &&
            std::abs(shannon_entropy({std::string(kAlphabet)}) - std::log2(20.0)) < 1e-12,
        "entropy matches the closed form");
  check(std::abs(net_charge("GGG", isoelectric_point("GGG"))) < 1e-6,
        "net charge vanishes at the isoelectric point");

  log_info(config, "selftest passed");
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"cmadiff: controllable protein sequence generation"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "JSON config file")
      ->envname("CMADIFF_CONFIG")
      ->check(CLI::ExistingFile);
  app.add_option("--set", overrides, "Override a config key (section.key=value)");
  std::optional<uint64_t> seed_flag;
  std::optional<std::string> out_dir_flag, log_level_flag;
  app.add_option("--seed", seed_flag, "Global random seed");
  app.add_option("--out-dir", out_dir_flag, "Directory for reports and manifests");
  app.add_option("--log-level", log_level_flag, "quiet | info | debug");

  // build-dataset
  auto* build = app.add_subcommand("build-dataset", "Parse a Swiss-Prot flat file into JSONL");
  std::string bd_input, bd_output;
  std::optional<int> bd_min, bd_max;
  build->add_option("--input", bd_input, "Swiss-Prot .dat or .dat.gz")
      ->required()
      ->check(CLI::ExistingFile);
  build->add_option("--output", bd_output, "Output JSONL path")->required();
  build->add_option("--min-len", bd_min, "Minimum sequence length (inclusive)");
  build->add_option("--max-len", bd_max, "Maximum sequence length (inclusive)");

  // featurize
  auto* feat = app.add_subcommand("featurize", "Physicochemical features for sequences");
  std::string ft_seq, ft_data, ft_out;
  feat->add_option("--seq", ft_seq, "Single sequence");
  feat->add_option("--data", ft_data, "Dataset JSONL")->check(CLI::ExistingFile);
  feat->add_option("--out", ft_out, "Output JSONL path")->required();

  // train-cvae
  auto* tcv = app.add_subcommand("train-cvae", "Train the sequence CVAE");
  std::string tcv_data, tcv_out;
  tcv->add_option("--data", tcv_data, "Dataset JSONL")->required()->check(CLI::ExistingFile);
  tcv->add_option("--out", tcv_out, "Checkpoint path")->required();

  // train-aligner
  auto* tal = app.add_subcommand("train-aligner", "Train the text-property aligner");
  std::string tal_data, tal_out;
  tal->add_option("--data", tal_data, "Dataset JSONL")->required()->check(CLI::ExistingFile);
  tal->add_option("--out", tal_out, "Checkpoint path")->required();

  // train-diffusion
  auto* tdf = app.add_subcommand("train-diffusion", "Train the latent diffusion model");
  std::string tdf_cvae, tdf_aligner, tdf_data, tdf_out;
  tdf->add_option("--cvae", tdf_cvae, "Trained CVAE checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  tdf->add_option("--aligner", tdf_aligner, "Trained aligner checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  tdf->add_option("--data", tdf_data, "Dataset JSONL")->required()->check(CLI::ExistingFile);
  tdf->add_option("--out", tdf_out, "Checkpoint path")->required();

  // generate
  auto* gen = app.add_subcommand("generate", "Sample sequences from the trained pipeline");
  std::string gn_cvae, gn_aligner, gn_diffusion, gn_out, gn_text_file, gn_mode, gn_text,
      gn_features;
  std::optional<int> gn_count, gn_min, gn_max;
  gen->add_option("--cvae", gn_cvae, "Trained CVAE checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  gen->add_option("--aligner", gn_aligner, "Trained aligner checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  gen->add_option("--diffusion", gn_diffusion, "Trained diffusion checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  gen->add_option("--out", gn_out, "Output FASTA path")->required();
  gen->add_option("--mode", gn_mode, "text | raw-feature | random-feature");
  gen->add_option("--text", gn_text, "Condition description (text mode)");
  gen->add_option("--text-file", gn_text_file, "File holding the condition description")
      ->check(CLI::ExistingFile);
  gen->add_option("--features", gn_features, "Comma-separated raw feature targets");
  gen->add_option("--count", gn_count, "Number of sequences");
  gen->add_option("--min-len", gn_min, "Minimum emitted length");
  gen->add_option("--max-len", gn_max, "Maximum emitted length");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Sequence-level metrics and reports");
  std::string ev_generated, ev_natural, ev_aligner, ev_scores, ev_text, ev_out;
  int ev_workers = 1;
  bool ev_hist = false;
  ev->add_option("--generated", ev_generated, "Generated FASTA")
      ->required()
      ->check(CLI::ExistingFile);
  ev->add_option("--natural", ev_natural, "Natural-reference FASTA")
      ->required()
      ->check(CLI::ExistingFile);
  ev->add_option("--aligner", ev_aligner, "Aligner checkpoint (for --text scoring)")
      ->check(CLI::ExistingFile);
  ev->add_option("--scores", ev_scores, "External per-sequence score file")
      ->check(CLI::ExistingFile);
  ev->add_option("--text", ev_text, "Score semantic fidelity against this description");
  ev->add_option("--out", ev_out, "Report directory (defaults to --out-dir)");
  ev->add_option("--workers", ev_workers, "Threads for the pairwise novelty scan")
      ->check(CLI::PositiveNumber);
  ev->add_flag("--histograms", ev_hist, "Write per-metric histogram CSVs");

  // selftest
  app.add_subcommand("selftest", "Fast invariant checks of a built binary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    RunConfig config = load_config(config_path, overrides);
    if (seed_flag) config.seed = *seed_flag;
    if (out_dir_flag) config.out_dir = *out_dir_flag;
    if (log_level_flag) config.log_level = *log_level_flag;
    if (*build) {
      if (bd_min) config.ingest.min_length = *bd_min;
      if (bd_max) config.ingest.max_length = *bd_max;
    }
    if (*gen) {
      if (!gn_mode.empty()) config.generation.mode = gn_mode;
      if (!gn_text.empty()) config.generation.text = gn_text;
      if (!gn_features.empty()) config.generation.features = parse_csv_numbers(gn_features);
      if (gn_count) config.generation.count = *gn_count;
      if (gn_min) config.generation.min_length = *gn_min;
      if (gn_max) config.generation.max_length = *gn_max;
    }
    config.validate();

    if (*build) return cmd_build_dataset(config, bd_input, bd_output);
    if (*feat) {
      if (ft_seq.empty() == ft_data.empty()) {
        fail(ErrorCode::InvalidArgument, "featurize needs exactly one of --seq or --data");
      }
      return cmd_featurize(config, ft_seq, ft_data, ft_out);
    }
    if (*tcv) return cmd_train_cvae(config, tcv_data, tcv_out);
    if (*tal) return cmd_train_aligner(config, tal_data, tal_out);
    if (*tdf) return cmd_train_diffusion(config, tdf_cvae, tdf_aligner, tdf_data, tdf_out);
    if (*gen) return cmd_generate(config, gn_cvae, gn_aligner, gn_diffusion, gn_text_file, gn_out);
    if (*ev) {
      if (!ev_out.empty()) config.out_dir = ev_out;
      return cmd_evaluate(config, ev_generated, ev_natural, ev_aligner, ev_scores, ev_text,
                          ev_hist, ev_workers);
    }
    return cmd_selftest(config);
  } catch (const Error& e) {
    std::cerr << "cmadiff: error: [" << error_code_name(e.code()) << "] " << e.what() << "\n";
    return error_exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "cmadiff: error: [internal] " << e.what() << "\n";
    return error_exit_code(ErrorCode::Internal);
  }
}

}  // namespace cmadiff

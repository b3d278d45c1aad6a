#pragma once

#include <unistd.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "satjscc/checkpoint.hpp"
#include "satjscc/config.hpp"
#include "satjscc/environment.hpp"
#include "satjscc/train.hpp"

namespace satjscc::harness {

struct ResultRow {
  std::string environment;
  std::string state_trained;  // assumed state (baseline: training condition)
  std::string state_actual;   // realized channel state
  double elevation_deg = 0.0;
  double ratio = 0.0;
  std::string model_kind;
  std::uint64_t seed = 0;
  double psnr_db = 0.0;
  double mse = 0.0;
};

inline constexpr const char* kResultCsvHeader =
    "environment,state_trained,state_actual,elevation_deg,ratio,model_kind,seed,psnr_db,mse";

namespace detail {

// %.17g round-trips doubles exactly: rows re-read from disk must satisfy the
// same identities as freshly computed ones, and resumed sweeps must emit
// byte-identical CSVs.
inline std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  return std::stod(s);
}

// PSNR/MSE identity, re-checked whenever a row is serialized.
inline void check_row_identity(const ResultRow& row) {
  const double expected = psnr_from_mse(row.mse);
  const bool both_inf = std::isinf(expected) && std::isinf(row.psnr_db);
  if (!both_inf && std::abs(expected - row.psnr_db) > 1e-9)
    throw std::logic_error("result row violates the PSNR/MSE identity: psnr=" +
                           format_double(row.psnr_db) + " mse=" + format_double(row.mse));
}

inline std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace detail

inline std::string to_csv_line(const ResultRow& row) {
  detail::check_row_identity(row);
  std::ostringstream os;
  os << row.environment << ',' << row.state_trained << ',' << row.state_actual << ','
     << detail::format_double(row.elevation_deg) << ',' << detail::format_double(row.ratio) << ','
     << row.model_kind << ',' << row.seed << ',' << detail::format_double(row.psnr_db) << ','
     << detail::format_double(row.mse);
  return os.str();
}

inline void write_result_csv(const std::filesystem::path& path,
                             const std::vector<ResultRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << kResultCsvHeader << "\n";
  for (const auto& row : rows) out << to_csv_line(row) << "\n";
}

inline std::vector<ResultRow> read_result_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kResultCsvHeader)
    throw std::runtime_error(path.string() + ": unexpected CSV header");
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream is(line);
    std::string field;
    while (std::getline(is, field, ',')) fields.push_back(field);
    if (fields.size() != 9) throw std::runtime_error(path.string() + ": malformed row: " + line);
    ResultRow row;
    row.environment = fields[0];
    row.state_trained = fields[1];
    row.state_actual = fields[2];
    row.elevation_deg = detail::parse_double(fields[3]);
    row.ratio = detail::parse_double(fields[4]);
    row.model_kind = fields[5];
    row.seed = std::stoull(fields[6]);
    row.psnr_db = detail::parse_double(fields[7]);
    row.mse = detail::parse_double(fields[8]);
    detail::check_row_identity(row);
    rows.push_back(std::move(row));
  }
  return rows;
}

// Runs the experiment grid. Trained models and per-cell evaluation rows are
// persisted under the output directory (atomic replace), so an interrupted
// sweep resumes where it stopped as long as the config is unchanged.
class ExperimentRunner {
 public:
  ExperimentRunner(ExperimentConfig cfg, fading::EnvironmentSet envs,
                   std::filesystem::path out_dir)
      : cfg_(std::move(cfg)), envs_(std::move(envs)), out_dir_(std::move(out_dir)) {
    cfg_.validate();
    dataset_ = dataset_from_config(cfg_);
    std::filesystem::create_directories(out_dir_ / "models");
    std::filesystem::create_directories(out_dir_ / "cells");
  }

  const Dataset& dataset() const { return dataset_; }
  const ExperimentConfig& config() const { return cfg_; }

  ChannelGridPoint grid_point(const std::string& env, double elevation,
                              fading::ChannelState state) const {
    const auto& table = fading::require_environment(envs_, env);
    ChannelGridPoint point;
    point.state = state;
    point.elevation_deg = elevation;
    point.snr_db = linkbudget::snr(cfg_.link, elevation).snr_db;
    point.loo = table.lookup(elevation, state);
    return point;
  }

  // Adaptive models train across the full states x elevations grid of the
  // plan; baseline models pin one condition.
  TrainingChannel adaptive_channel(const std::string& env) const {
    TrainingChannel chan;
    chan.mode = cfg_.fading_mode;
    chan.signal_power = cfg_.arch.power;
    for (double elev : cfg_.elevations)
      for (auto state : cfg_.states) chan.grid.push_back(grid_point(env, elev, state));
    return chan;
  }

  TrainingChannel baseline_channel(const std::string& env, double elevation,
                                   fading::ChannelState state) const {
    TrainingChannel chan;
    chan.mode = cfg_.fading_mode;
    chan.signal_power = cfg_.arch.power;
    chan.grid.push_back(grid_point(env, elevation, state));
    return chan;
  }

  codec::ArchitectureConfig arch_for_ratio(double ratio) const {
    codec::ArchitectureConfig arch = cfg_.arch;
    arch.channel_filters_c = codec::channel_filters_for_ratio(cfg_.arch, ratio);
    arch.validate();
    return arch;
  }

  // Cached training: the checkpoint path encodes the training cell.
  codec::JsccModel<float> get_or_train(const std::string& kind, const std::string& env,
                                       double ratio, std::uint64_t seed,
                                       const std::string& baseline_state = "",
                                       double baseline_elevation = 0.0) {
    const std::string key = model_key(kind, env, ratio, seed, baseline_state, baseline_elevation);
    const auto path = out_dir_ / "models" / (key + ".ckpt");
    if (std::filesystem::exists(path)) return codec::load_model_file<float>(path.string());

    const auto arch = arch_for_ratio(ratio);
    codec::AttentionConfig att = cfg_.attention;
    att.enabled = kind == "adaptive";

    TrainOptions options = cfg_.train_options;
    options.seed = detail::fnv1a(key) ^ seed;

    const TrainingChannel chan =
        kind == "adaptive"
            ? adaptive_channel(env)
            : baseline_channel(env, baseline_elevation, fading::state_from_string(baseline_state));

    auto result = train(arch, att, options, dataset_, chan);
    const auto tmp = path.string() + tmp_suffix();
    codec::save_model_file(tmp, result.model);
    std::filesystem::rename(tmp, path);
    write_training_log(out_dir_ / "models" / (key + ".log.csv"), result);
    return std::move(result.model);
  }

  // One evaluation cell (persisted): `assumed` drives the context/model
  // choice, `actual` the realized channel.
  ResultRow eval_cell(const std::string& kind, const std::string& env, double elevation,
                      double ratio, std::uint64_t seed, fading::ChannelState assumed,
                      fading::ChannelState actual) {
    const std::string cell = cell_key(kind, env, elevation, ratio, seed, assumed, actual);
    const auto cell_path = out_dir_ / "cells" / (cell + ".csv");
    if (std::filesystem::exists(cell_path)) {
      const auto rows = read_result_csv(cell_path);
      if (rows.size() == 1) return rows[0];
    }

    auto model = kind == "adaptive"
                     ? get_or_train(kind, env, ratio, seed)
                     : get_or_train(kind, env, ratio, seed, fading::to_string(assumed), elevation);

    EvalCondition condition;
    condition.actual = grid_point(env, elevation, actual);
    condition.mode = cfg_.fading_mode;
    condition.signal_power = cfg_.arch.power;
    condition.realizations = cfg_.eval_realizations;
    // the seed must not depend on kind or the assumed state so that matched
    // and mismatched evaluations share channel realizations
    condition.seed = detail::fnv1a(eval_key(env, elevation, ratio, seed, actual));
    if (kind == "adaptive") {
      const auto assumed_point = grid_point(env, elevation, assumed);
      condition.assumed_context =
          codec::ChannelContext::make(assumed_point.snr_db, assumed_point.state);
    }

    const EvalResult eval = evaluate(model, dataset_, Split::kTest, condition);
    ResultRow row;
    row.environment = fading::canonical_environment_name(env);
    row.state_trained = fading::to_string(assumed);
    row.state_actual = fading::to_string(actual);
    row.elevation_deg = elevation;
    row.ratio = ratio;
    row.model_kind = kind;
    row.seed = seed;
    row.psnr_db = eval.psnr_db;
    row.mse = eval.mean_mse;

    const auto tmp = cell_path.string() + tmp_suffix();
    write_result_csv(tmp, {row});
    std::filesystem::rename(tmp, cell_path);
    return row;
  }

  // Matched-condition sweep over the full plan. Returns all rows and writes
  // sweep_results.csv plus, when both kinds ran, sweep_comparison.csv with
  // the per-cell adaptive-minus-baseline gap.
  std::vector<ResultRow> sweep() {
    std::vector<ResultRow> rows;
    for (const auto& kind : cfg_.kinds)
      for (const auto& env : cfg_.environments)
        for (double ratio : cfg_.ratios)
          for (std::uint64_t seed : cfg_.seeds)
            for (double elev : cfg_.elevations)
              for (auto state : cfg_.states)
                rows.push_back(eval_cell(kind, env, elev, ratio, seed, state, state));
    write_result_csv(out_dir_ / "sweep_results.csv", rows);
    write_comparison_csv(rows);
    return rows;
  }

  // Mismatch study: LOS assumed under a deep-shadow channel and the reverse,
  // plus the matched controls, for every env/elevation/ratio/seed cell.
  std::vector<ResultRow> mismatch() {
    using fading::ChannelState;
    const std::array<std::pair<ChannelState, ChannelState>, 4> pairs{
        std::pair{ChannelState::kLos, ChannelState::kLos},
        std::pair{ChannelState::kLos, ChannelState::kDeepShadow},
        std::pair{ChannelState::kDeepShadow, ChannelState::kLos},
        std::pair{ChannelState::kDeepShadow, ChannelState::kDeepShadow}};
    std::vector<ResultRow> rows;
    for (const auto& kind : cfg_.kinds)
      for (const auto& env : cfg_.environments)
        for (double ratio : cfg_.ratios)
          for (std::uint64_t seed : cfg_.seeds)
            for (double elev : cfg_.elevations)
              for (const auto& [assumed, actual] : pairs)
                rows.push_back(eval_cell(kind, env, elev, ratio, seed, assumed, actual));
    write_result_csv(out_dir_ / "mismatch_results.csv", rows);
    return rows;
  }

  const std::filesystem::path& out_dir() const { return out_dir_; }

 private:
  // Per-process temp names: concurrent runners sharing an output directory
  // never write the same staging file, and renames replace atomically with
  // identical (deterministic) content.
  static std::string tmp_suffix() {
    return ".tmp." + std::to_string(static_cast<long>(::getpid()));
  }

  static std::string sanitize(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    std::string s(buf);
    for (char& c : s)
      if (c == '.') c = 'p';
    return s;
  }

  std::string model_key(const std::string& kind, const std::string& env, double ratio,
                        std::uint64_t seed, const std::string& baseline_state,
                        double baseline_elevation) const {
    std::string key = kind + "_" + fading::canonical_environment_name(env) + "_r" +
                      sanitize(ratio) + "_s" + std::to_string(seed);
    if (kind == "baseline")
      key += "_" + baseline_state + "_e" + sanitize(baseline_elevation);
    return key;
  }

  std::string cell_key(const std::string& kind, const std::string& env, double elevation,
                       double ratio, std::uint64_t seed, fading::ChannelState assumed,
                       fading::ChannelState actual) const {
    return kind + "_" + fading::canonical_environment_name(env) + "_e" + sanitize(elevation) +
           "_r" + sanitize(ratio) + "_s" + std::to_string(seed) + "_" +
           fading::to_string(assumed) + "_on_" + fading::to_string(actual);
  }

  std::string eval_key(const std::string& env, double elevation, double ratio,
                       std::uint64_t seed, fading::ChannelState actual) const {
    return fading::canonical_environment_name(env) + "|" + sanitize(elevation) + "|" +
           sanitize(ratio) + "|" + std::to_string(seed) + "|" + fading::to_string(actual);
  }

  static void write_training_log(const std::filesystem::path& path, const TrainResult& result) {
    std::ofstream out(path);
    out << "epoch,learning_rate,train_mse,val_mse\n";
    for (const auto& e : result.log)
      out << e.epoch << ',' << detail::format_double(e.learning_rate) << ','
          << detail::format_double(e.train_mse) << ',' << detail::format_double(e.val_mse) << "\n";
  }

  void write_comparison_csv(const std::vector<ResultRow>& rows) const {
    const bool has_baseline =
        std::find(cfg_.kinds.begin(), cfg_.kinds.end(), "baseline") != cfg_.kinds.end();
    const bool has_adaptive =
        std::find(cfg_.kinds.begin(), cfg_.kinds.end(), "adaptive") != cfg_.kinds.end();
    if (!has_baseline || !has_adaptive) return;

    std::map<std::string, const ResultRow*> baseline, adaptive;
    for (const auto& row : rows) {
      const std::string key = row.environment + "|" + row.state_actual + "|" +
                              detail::format_double(row.elevation_deg) + "|" +
                              detail::format_double(row.ratio) + "|" + std::to_string(row.seed);
      (row.model_kind == "baseline" ? baseline : adaptive)[key] = &row;
    }
    std::ofstream out(out_dir_ / "sweep_comparison.csv");
    out << "environment,state,elevation_deg,ratio,seed,psnr_baseline_db,psnr_adaptive_db,"
           "gap_db\n";
    for (const auto& [key, base_row] : baseline) {
      const auto it = adaptive.find(key);
      if (it == adaptive.end()) continue;
      out << base_row->environment << ',' << base_row->state_actual << ','
          << detail::format_double(base_row->elevation_deg) << ','
          << detail::format_double(base_row->ratio) << ',' << base_row->seed << ','
          << detail::format_double(base_row->psnr_db) << ','
          << detail::format_double(it->second->psnr_db) << ','
          << detail::format_double(it->second->psnr_db - base_row->psnr_db) << "\n";
    }
  }

  ExperimentConfig cfg_;
  fading::EnvironmentSet envs_;
  std::filesystem::path out_dir_;
  Dataset dataset_;
};

// Figure-ready aggregation: rows grouped over seeds, MSE averaged (PSNR of
// the mean MSE keeps the identity intact).
inline void write_report(const std::vector<ResultRow>& rows, const std::filesystem::path& path) {
  struct Bucket {
    ResultRow proto;
    double mse_sum = 0.0;
    int count = 0;
  };
  std::map<std::string, Bucket> buckets;
  for (const auto& row : rows) {
    const std::string key = row.model_kind + "|" + row.environment + "|" + row.state_trained +
                            "|" + row.state_actual + "|" + detail::format_double(row.elevation_deg) +
                            "|" + detail::format_double(row.ratio);
    auto& bucket = buckets[key];
    bucket.proto = row;
    bucket.mse_sum += row.mse;
    ++bucket.count;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "environment,state_trained,state_actual,elevation_deg,ratio,model_kind,seeds,psnr_db,"
         "mse\n";
  for (const auto& [key, bucket] : buckets) {
    const double mean_mse = bucket.mse_sum / bucket.count;
    out << bucket.proto.environment << ',' << bucket.proto.state_trained << ','
        << bucket.proto.state_actual << ',' << detail::format_double(bucket.proto.elevation_deg)
        << ',' << detail::format_double(bucket.proto.ratio) << ',' << bucket.proto.model_kind
        << ',' << bucket.count << ',' << detail::format_double(psnr_from_mse(mean_mse)) << ','
        << detail::format_double(mean_mse) << "\n";
  }
}

}  // namespace satjscc::harness

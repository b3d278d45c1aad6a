// Command-line front end: link-budget reports, fading/channel simulation,
// dataset handling, codec train/eval and the experiment drivers. Exits
// non-zero whenever any invariant check fails.

#include <CLI11.hpp>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "satjscc/channel.hpp"
#include "satjscc/checkpoint.hpp"
#include "satjscc/config.hpp"
#include "satjscc/environment.hpp"
#include "satjscc/experiments.hpp"
#include "satjscc/linkbudget.hpp"
#include "satjscc/train.hpp"

namespace {

using namespace satjscc;

std::string default_table_path() {
  return std::string(SATJSCC_DATA_DIR) + "/environments.cfg";
}

std::string fmt(double v) { return harness::detail::format_double(v); }

fading::EnvironmentSet load_tables(const std::string& path) {
  return fading::load_environment_tables_file(path);
}

channel::SymbolVector read_symbols_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "re,im")
    throw std::runtime_error(path + ": expected 're,im' header");
  channel::SymbolVector z;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error(path + ": malformed row: " + line);
    z.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
  }
  if (z.empty()) throw std::runtime_error(path + ": no symbols");
  return z;
}

void write_symbols_csv(const std::string& path, const channel::SymbolVector& z) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "re,im\n";
  for (const auto& s : z) out << fmt(s.real()) << ',' << fmt(s.imag()) << "\n";
}

// "snr=12.5,state=DeepShadow" -> ChannelContext
codec::ChannelContext parse_context(const std::string& text) {
  double snr_db = 0.0;
  std::optional<fading::ChannelState> state;
  std::istringstream is(text);
  std::string item;
  while (std::getline(is, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("--ctx expects key=value pairs, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    if (key == "snr") snr_db = std::stod(value);
    else if (key == "state") state = fading::state_from_string(value);
    else throw std::runtime_error("--ctx: unknown key '" + key + "'");
  }
  if (!state) throw std::runtime_error("--ctx needs a state=... entry");
  return codec::ChannelContext::make(snr_db, *state);
}

struct LinkCli {
  linkbudget::LinkParams params;
  void attach(CLI::App* cmd) {
    cmd->add_option("--orbit-height-km", params.orbit_height_km, "Orbit height [km]");
    cmd->add_option("--carrier-hz", params.carrier_hz, "Carrier frequency [Hz]");
    cmd->add_option("--tx-power-w", params.tx_power_w, "Transmit power [W]");
    cmd->add_option("--tx-gain-dbi", params.tx_gain_dbi, "Satellite antenna gain [dBi]");
    cmd->add_option("--rx-gain-dbi", params.rx_gain_dbi, "Ground antenna gain [dBi]");
    cmd->add_option("--bandwidth-hz", params.bandwidth_hz, "Receive bandwidth [Hz]");
    cmd->add_option("--noise-figure-db", params.noise_figure_db, "Receiver noise figure [dB]");
    cmd->add_option("--antenna-temp-k", params.antenna_temp_k, "Antenna temperature [K]");
    cmd->add_option("--ref-temp-k", params.ref_temp_k, "Reference temperature [K]");
  }
};

int cmd_linkbudget(double elevation, const linkbudget::LinkParams& params) {
  const auto report = linkbudget::snr(params, elevation);
  std::printf("elevation        %10.3f deg\n", report.elevation_deg);
  std::printf("slant range      %10.3f km\n", report.slant_range_km);
  std::printf("path loss        %10.3f dB\n", report.path_loss_db);
  std::printf("noise power      %10.3f dBW\n", report.noise_power_dbw);
  std::printf("expected SNR     %10.3f dB\n", report.snr_db);
  std::printf("\nelevation_deg,slant_km,loss_db,noise_dbw,snr_db\n");
  std::printf("%s,%s,%s,%s,%s\n", fmt(report.elevation_deg).c_str(),
              fmt(report.slant_range_km).c_str(), fmt(report.path_loss_db).c_str(),
              fmt(report.noise_power_dbw).c_str(), fmt(report.snr_db).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive joint source-channel coding lab for LEO image downlink"};
  app.require_subcommand(1);

  std::string table_path = default_table_path();
  std::string config_path;
  std::string out_path = "out";
  std::uint64_t seed = 1;

  // ---- linkbudget ----
  auto* lb = app.add_subcommand("linkbudget", "Slant range, path loss, noise and expected SNR");
  double lb_elevation = 40.0;
  LinkCli lb_params;
  lb->add_option("--elevation", lb_elevation, "Elevation angle [deg]")->required();
  lb_params.attach(lb);

  // ---- fading ----
  auto* fading_cmd = app.add_subcommand("fading", "Loo fading and Markov state simulation");
  fading_cmd->require_subcommand(1);
  std::string fa_env = "suburban", fa_state = "LOS";
  double fa_elev = 40.0, fa_rmax = 0.0;
  int fa_count = 1000, fa_points = 512, fa_steps = 1000;
  bool fa_random_phase = false;
  double fa_alpha = 0.0, fa_psi = -1.0, fa_mp = 0.0;

  auto* fa_sample = fading_cmd->add_subcommand("sample", "CSV of complex channel gains");
  fa_sample->add_option("--env", fa_env, "Environment name");
  fa_sample->add_option("--elev", fa_elev, "Elevation [deg]");
  fa_sample->add_option("--state", fa_state, "Channel state");
  fa_sample->add_option("-n,--count", fa_count, "Number of gains");
  fa_sample->add_option("--seed", seed, "RNG seed");
  fa_sample->add_option("--table", table_path, "Environment table file");
  fa_sample->add_flag("--random-phase", fa_random_phase, "Uniform random direct-path phase");

  auto* fa_states = fading_cmd->add_subcommand("states", "CSV Markov state sequence");
  fa_states->add_option("--env", fa_env, "Environment name");
  fa_states->add_option("--elev", fa_elev, "Elevation [deg]");
  fa_states->add_option("--steps", fa_steps, "Sequence length");
  fa_states->add_option("--seed", seed, "RNG seed");
  fa_states->add_option("--table", table_path, "Environment table file");

  auto* fa_pdf = fading_cmd->add_subcommand("pdf", "CSV amplitude density curve");
  fa_pdf->add_option("--env", fa_env, "Environment name");
  fa_pdf->add_option("--elev", fa_elev, "Elevation [deg]");
  fa_pdf->add_option("--state", fa_state, "Channel state");
  fa_pdf->add_option("--alpha", fa_alpha, "Explicit alpha [dB] (with --psi/--mp)");
  fa_pdf->add_option("--psi", fa_psi, "Explicit psi [dB]");
  fa_pdf->add_option("--mp", fa_mp, "Explicit MP [dB]");
  fa_pdf->add_option("--r-max", fa_rmax, "Upper amplitude (0 = auto)");
  fa_pdf->add_option("--points", fa_points, "Curve resolution");
  fa_pdf->add_option("--table", table_path, "Environment table file");

  // ---- channel ----
  auto* chan_cmd = app.add_subcommand("channel", "Apply the fading + noise channel");
  chan_cmd->require_subcommand(1);
  auto* chan_pass = chan_cmd->add_subcommand("pass", "Impair a CSV of complex symbols");
  std::string ch_in, ch_out = "received.csv", ch_env = "suburban", ch_state = "LOS";
  std::string ch_snr_source = "linkbudget", ch_mode = "per-symbol";
  double ch_elev = 40.0, ch_snr = 10.0, ch_power = 1.0;
  LinkCli ch_params;
  chan_pass->add_option("--in", ch_in, "Input symbols CSV (re,im)")->required();
  chan_pass->add_option("--out", ch_out, "Output CSV");
  chan_pass->add_option("--env", ch_env, "Environment name");
  chan_pass->add_option("--elev", ch_elev, "Elevation [deg]");
  chan_pass->add_option("--state", ch_state, "Channel state");
  chan_pass->add_option("--snr-source", ch_snr_source, "linkbudget | explicit");
  chan_pass->add_option("--snr", ch_snr, "Explicit SNR [dB] (with --snr-source explicit)");
  chan_pass->add_option("--mode", ch_mode, "per-symbol | block");
  chan_pass->add_option("--signal-power", ch_power, "Normalized signal power");
  chan_pass->add_option("--seed", seed, "RNG seed");
  chan_pass->add_option("--table", table_path, "Environment table file");
  ch_params.attach(chan_pass);

  // ---- dataset ----
  auto* ds_cmd = app.add_subcommand("dataset", "Create or import datasets");
  ds_cmd->require_subcommand(1);
  int ds_count = 512, ds_bands = 3, ds_size = 16;
  std::string ds_manifest;
  auto* ds_synth = ds_cmd->add_subcommand("synth", "Generate a synthetic dataset");
  ds_synth->add_option("--count", ds_count, "Number of images");
  ds_synth->add_option("--bands", ds_bands, "Spectral bands");
  ds_synth->add_option("--size", ds_size, "Image side length");
  ds_synth->add_option("--seed", seed, "Generator seed");
  ds_synth->add_option("--out", out_path, "Output directory")->required();
  auto* ds_import = ds_cmd->add_subcommand("import", "Normalize an external raw-tensor dataset");
  ds_import->add_option("--manifest", ds_manifest, "Manifest file")->required();
  ds_import->add_option("--out", out_path, "Output directory")->required();

  // ---- jscc encode/decode ----
  auto* jscc_cmd = app.add_subcommand("jscc", "Run the trained codec");
  jscc_cmd->require_subcommand(1);
  std::string jc_model, jc_manifest, jc_ctx, jc_in, jc_outdir = "decoded";
  int jc_index = 0;
  std::string jc_out = "symbols.csv";
  auto* jc_encode = jscc_cmd->add_subcommand("encode", "Image -> power-normalized symbols CSV");
  jc_encode->add_option("--model", jc_model, "Checkpoint file")->required();
  jc_encode->add_option("--manifest", jc_manifest, "Dataset manifest")->required();
  jc_encode->add_option("--index", jc_index, "Sample index");
  jc_encode->add_option("--ctx", jc_ctx, "Channel context, e.g. snr=12,state=LOS");
  jc_encode->add_option("--out", jc_out, "Output symbols CSV");
  auto* jc_decode = jscc_cmd->add_subcommand("decode", "Symbols CSV -> raw-tensor image");
  jc_decode->add_option("--model", jc_model, "Checkpoint file")->required();
  jc_decode->add_option("--in", jc_in, "Input symbols CSV")->required();
  jc_decode->add_option("--ctx", jc_ctx, "Channel context, e.g. snr=12,state=LOS");
  jc_decode->add_option("--out-dir", jc_outdir, "Output dataset directory");

  // ---- train ----
  auto* train_cmd = app.add_subcommand("train", "Train one codec model");
  std::string tr_kind = "baseline", tr_env = "suburban", tr_state = "LOS";
  double tr_elev = 40.0, tr_ratio = 0.33;
  train_cmd->add_option("--config", config_path, "Experiment config file");
  train_cmd->add_option("--out", out_path, "Output directory");
  train_cmd->add_option("--kind", tr_kind, "baseline | adaptive");
  train_cmd->add_option("--env", tr_env, "Environment name");
  train_cmd->add_option("--elev", tr_elev, "Elevation [deg] (baseline)");
  train_cmd->add_option("--state", tr_state, "Channel state (baseline)");
  train_cmd->add_option("--ratio", tr_ratio, "Compression ratio k/n");
  train_cmd->add_option("--seed", seed, "Training seed");

  // ---- eval ----
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint under a channel condition");
  std::string ev_model, ev_env = "suburban", ev_state_actual = "LOS", ev_state_assumed;
  double ev_elev = 40.0;
  int ev_realizations = 10;
  eval_cmd->add_option("--model", ev_model, "Checkpoint file")->required();
  eval_cmd->add_option("--config", config_path, "Experiment config file");
  eval_cmd->add_option("--env", ev_env, "Environment name");
  eval_cmd->add_option("--elev", ev_elev, "Elevation [deg]");
  eval_cmd->add_option("--state-actual", ev_state_actual, "Realized channel state");
  eval_cmd->add_option("--state-assumed", ev_state_assumed,
                       "Assumed state (defaults to the actual one)");
  eval_cmd->add_option("--realizations", ev_realizations, "Channel draws per image");
  eval_cmd->add_option("--out", out_path, "Output directory");
  eval_cmd->add_option("--seed", seed, "Evaluation seed");
  eval_cmd->add_option("--table", table_path, "Environment table file");

  // ---- sweep / mismatch / report ----
  auto* sweep_cmd = app.add_subcommand("sweep", "Train+evaluate the full experiment grid");
  sweep_cmd->add_option("--config", config_path, "Experiment config file");
  sweep_cmd->add_option("--out", out_path, "Output directory");
  sweep_cmd->add_option("--table", table_path, "Environment table file");

  auto* mm_cmd = app.add_subcommand("mismatch", "Wrong-state evaluation study");
  mm_cmd->add_option("--config", config_path, "Experiment config file");
  mm_cmd->add_option("--out", out_path, "Output directory");
  mm_cmd->add_option("--table", table_path, "Environment table file");

  auto* report_cmd = app.add_subcommand("report", "Aggregate result CSVs over seeds");
  std::string rp_in;
  report_cmd->add_option("--in", rp_in, "Results CSV")->required();
  report_cmd->add_option("--out", out_path, "Output CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (lb->parsed()) return cmd_linkbudget(lb_elevation, lb_params.params);

    if (fa_sample->parsed()) {
      const auto envs = load_tables(table_path);
      const auto& table = fading::require_environment(envs, fa_env);
      const auto params = table.lookup(fa_elev, fading::state_from_string(fa_state));
      Rng rng(seed);
      const auto gains = fading::sample_loo(params, fa_count, rng, fa_random_phase);
      std::printf("re,im\n");
      for (const auto& h : gains) std::printf("%s,%s\n", fmt(h.real()).c_str(), fmt(h.imag()).c_str());
      return 0;
    }
    if (fa_states->parsed()) {
      const auto envs = load_tables(table_path);
      const auto& chain = fading::require_environment(envs, fa_env).lookup_chain(fa_elev);
      Rng rng(seed);
      const auto seq = fading::sample_state_sequence(chain, fa_steps, rng);
      std::printf("step,state\n");
      for (std::size_t i = 0; i < seq.size(); ++i)
        std::printf("%zu,%s\n", i, fading::to_string(seq[i]).c_str());
      return 0;
    }
    if (fa_pdf->parsed()) {
      fading::LooParams params;
      if (fa_psi >= 0.0) {
        params = {fa_alpha, fa_psi, fa_mp};
      } else {
        const auto envs = load_tables(table_path);
        params = fading::require_environment(envs, fa_env)
                     .lookup(fa_elev, fading::state_from_string(fa_state));
      }
      const double rmax = fa_rmax > 0.0 ? fa_rmax : fading::loo_amplitude_cap(params);
      std::printf("r,density\n");
      for (int i = 0; i <= fa_points; ++i) {
        const double r = rmax * i / fa_points;
        std::printf("%s,%s\n", fmt(r).c_str(), fmt(fading::loo_pdf(r, params)).c_str());
      }
      return 0;
    }

    if (chan_pass->parsed()) {
      const auto z = read_symbols_csv(ch_in);
      const auto envs = load_tables(table_path);
      const auto params = fading::require_environment(envs, ch_env)
                              .lookup(ch_elev, fading::state_from_string(ch_state));
      double snr_db = ch_snr;
      if (ch_snr_source == "linkbudget")
        snr_db = linkbudget::snr(ch_params.params, ch_elev).snr_db;
      else if (ch_snr_source != "explicit")
        throw std::runtime_error("--snr-source must be linkbudget or explicit");
      channel::FadingMode mode;
      if (ch_mode == "block") mode = channel::FadingMode::kBlock;
      else if (ch_mode == "per-symbol") mode = channel::FadingMode::kPerSymbol;
      else throw std::runtime_error("--mode must be per-symbol or block");
      Rng rng(seed);
      const auto result = channel::transmit(z, params, snr_db, mode, rng, ch_power);
      write_symbols_csv(ch_out, result.received);
      std::fprintf(stderr, "wrote %zu symbols to %s (snr %.2f dB, sigma %.6g)\n",
                   result.received.size(), ch_out.c_str(), snr_db,
                   result.realization.noise_sigma);
      return 0;
    }

    if (ds_synth->parsed()) {
      const auto ds = harness::generate_synthetic_dataset(ds_count, ds_bands, ds_size, seed);
      harness::save_dataset(ds, out_path);
      std::printf("wrote %zu samples (hash %s) to %s\n", ds.samples.size(),
                  ds.content_hash().c_str(), out_path.c_str());
      return 0;
    }
    if (ds_import->parsed()) {
      const auto ds = harness::load_raw_dataset(ds_manifest);
      harness::save_dataset(ds, out_path);
      std::printf("imported %zu samples (hash %s) to %s\n", ds.samples.size(),
                  ds.content_hash().c_str(), out_path.c_str());
      return 0;
    }

    if (jc_encode->parsed()) {
      auto model = codec::load_model_file<float>(jc_model);
      const auto ds = harness::load_raw_dataset(jc_manifest);
      if (jc_index < 0 || jc_index >= static_cast<int>(ds.samples.size()))
        throw std::runtime_error("--index out of range");
      nn::Tensor<float> x({1, ds.bands, ds.height, ds.width});
      x.values = ds.samples[jc_index].values;
      std::optional<codec::ChannelContext> ctx;
      if (!jc_ctx.empty()) ctx = parse_context(jc_ctx);
      auto z = codec::encode(model, x, ctx);
      write_symbols_csv(jc_out, codec::symbols_from_tensor(z, 0));
      std::fprintf(stderr, "encoded sample %d -> %lld symbols (%s)\n", jc_index,
                   static_cast<long long>(model.arch().symbol_count()), jc_out.c_str());
      return 0;
    }
    if (jc_decode->parsed()) {
      auto model = codec::load_model_file<float>(jc_model);
      const auto symbols = read_symbols_csv(jc_in);
      const auto& arch = model.arch();
      nn::Tensor<float> zhat({1, arch.channel_filters_c, arch.encoded_h(), arch.encoded_w()});
      codec::symbols_into_tensor(symbols, zhat, 0);
      std::optional<codec::ChannelContext> ctx;
      if (!jc_ctx.empty()) ctx = parse_context(jc_ctx);
      const auto xhat = codec::decode(model, zhat, ctx);
      harness::Dataset ds;
      ds.bands = arch.input_bands;
      ds.height = arch.input_h;
      ds.width = arch.input_w;
      nn::Tensor<float> img({arch.input_bands, arch.input_h, arch.input_w});
      img.values = xhat.values;
      ds.samples.push_back(std::move(img));
      ds.split.push_back(harness::Split::kTest);
      harness::save_dataset(ds, jc_outdir);
      std::fprintf(stderr, "decoded image written to %s\n", jc_outdir.c_str());
      return 0;
    }

    if (train_cmd->parsed()) {
      harness::ExperimentConfig cfg;
      if (!config_path.empty()) cfg = harness::load_config_file(config_path);
      if (!cfg.environment_table_path.empty()) table_path = cfg.environment_table_path;
      auto envs = load_tables(table_path);
      harness::ExperimentRunner runner(cfg, envs, out_path);
      auto model = tr_kind == "adaptive"
                       ? runner.get_or_train("adaptive", tr_env, tr_ratio, seed)
                       : runner.get_or_train("baseline", tr_env, tr_ratio, seed, tr_state, tr_elev);
      const auto report = model.parameter_report();
      std::printf("trained %s model: %lld parameters (%lld attention, %.4f%%)\n", tr_kind.c_str(),
                  static_cast<long long>(report.total), static_cast<long long>(report.attention),
                  100.0 * report.attention_fraction());
      std::printf("checkpoints and logs under %s/models\n", out_path.c_str());
      return 0;
    }

    if (eval_cmd->parsed()) {
      harness::ExperimentConfig cfg;
      if (!config_path.empty()) cfg = harness::load_config_file(config_path);
      if (!cfg.environment_table_path.empty()) table_path = cfg.environment_table_path;
      const auto envs = load_tables(table_path);
      auto model = codec::load_model_file<float>(ev_model);
      const auto dataset = harness::dataset_from_config(cfg);
      const auto& table = fading::require_environment(envs, ev_env);
      const auto actual_state = fading::state_from_string(ev_state_actual);
      const auto assumed_state =
          ev_state_assumed.empty() ? actual_state : fading::state_from_string(ev_state_assumed);

      harness::EvalCondition cond;
      cond.actual.state = actual_state;
      cond.actual.elevation_deg = ev_elev;
      cond.actual.snr_db = linkbudget::snr(cfg.link, ev_elev).snr_db;
      cond.actual.loo = table.lookup(ev_elev, actual_state);
      cond.realizations = ev_realizations;
      cond.seed = seed;
      cond.signal_power = model.arch().power;
      if (model.adaptive())
        cond.assumed_context = codec::ChannelContext::make(cond.actual.snr_db, assumed_state);

      const auto eval = harness::evaluate(model, dataset, harness::Split::kTest, cond);
      harness::ResultRow row;
      row.environment = fading::canonical_environment_name(ev_env);
      row.state_trained = fading::to_string(assumed_state);
      row.state_actual = fading::to_string(actual_state);
      row.elevation_deg = ev_elev;
      row.ratio = model.arch().compression_ratio();
      row.model_kind = model.adaptive() ? "adaptive" : "baseline";
      row.seed = seed;
      row.psnr_db = eval.psnr_db;
      row.mse = eval.mean_mse;

      std::filesystem::create_directories(out_path);
      const auto csv = std::filesystem::path(out_path) / "eval.csv";
      harness::write_result_csv(csv, {row});
      std::printf("%s\n%s\n", harness::kResultCsvHeader, harness::to_csv_line(row).c_str());
      std::printf("(%d realizations/image; written to %s)\n", eval.realizations_used,
                  csv.string().c_str());
      return 0;
    }

    if (sweep_cmd->parsed() || mm_cmd->parsed()) {
      harness::ExperimentConfig cfg;
      if (!config_path.empty()) cfg = harness::load_config_file(config_path);
      if (!cfg.environment_table_path.empty()) table_path = cfg.environment_table_path;
      auto envs = load_tables(table_path);
      harness::ExperimentRunner runner(cfg, envs, out_path);
      if (sweep_cmd->parsed()) {
        const auto rows = runner.sweep();
        harness::write_report(rows, std::filesystem::path(out_path) / "sweep_report.csv");
        std::printf("sweep complete: %zu rows under %s\n", rows.size(), out_path.c_str());
      } else {
        const auto rows = runner.mismatch();
        harness::write_report(rows, std::filesystem::path(out_path) / "mismatch_report.csv");
        std::printf("mismatch study complete: %zu rows under %s\n", rows.size(), out_path.c_str());
      }
      return 0;
    }

    if (report_cmd->parsed()) {
      const auto rows = harness::read_result_csv(rp_in);
      harness::write_report(rows, out_path);
      std::printf("aggregated %zu rows into %s\n", rows.size(), out_path.c_str());
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

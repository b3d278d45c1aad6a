#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "satjscc/channel.hpp"
#include "satjscc/keyval.hpp"
#include "satjscc/linkbudget.hpp"
#include "satjscc/markov.hpp"
#include "satjscc/model.hpp"
#include "satjscc/train.hpp"

namespace satjscc::harness {

// One config document drives every experiment subcommand. Sections:
// [link] [paths] [architecture] [attention] [plan] [dataset]; every key is
// optional and falls back to the desk-scale defaults below.
struct ExperimentConfig {
  linkbudget::LinkParams link;
  std::string environment_table_path;

  codec::ArchitectureConfig arch;     // channel_filters_c is re-derived per ratio
  codec::AttentionConfig attention;   // applies to adaptive runs

  std::vector<std::string> environments{"urban"};
  std::vector<fading::ChannelState> states{fading::ChannelState::kLos,
                                           fading::ChannelState::kShadow,
                                           fading::ChannelState::kDeepShadow};
  std::vector<double> elevations{40.0, 80.0};
  std::vector<double> ratios{0.04, 0.17, 0.33};
  std::vector<std::string> kinds{"baseline", "adaptive"};
  std::vector<std::uint64_t> seeds{1, 2, 3};

  TrainOptions train_options;
  int eval_realizations = 10;
  channel::FadingMode fading_mode = channel::FadingMode::kPerSymbol;

  int dataset_count = 512;
  int dataset_bands = 3;
  int dataset_size = 16;
  std::uint64_t dataset_seed = 7;
  double dataset_val_frac = 0.1;
  double dataset_test_frac = 0.1;
  std::string dataset_manifest;  // when set, an external raw-tensor dataset is loaded

  void validate() const {
    link.validate();
    arch.validate();
    if (environments.empty() || states.empty() || elevations.empty() || ratios.empty() ||
        kinds.empty() || seeds.empty())
      throw std::invalid_argument("plan: every axis needs at least one entry");
    for (double r : ratios)
      if (!(r > 0.0 && r < 1.0))
        throw std::invalid_argument("plan: compression ratios must be in (0,1)");
    for (const auto& kind : kinds)
      if (kind != "baseline" && kind != "adaptive")
        throw std::invalid_argument("plan: model kind must be baseline or adaptive");
    if (train_options.batch_size < 1) throw std::invalid_argument("plan: batch size must be >= 1");
    if (eval_realizations < 1)
      throw std::invalid_argument("plan: eval realizations must be >= 1");
  }
};

namespace detail {

inline void apply_link(const keyval::Section& s, linkbudget::LinkParams& p) {
  for (const auto& e : s.entries) {
    if (e.key == "orbit_height_km") p.orbit_height_km = keyval::to_double(e);
    else if (e.key == "carrier_hz") p.carrier_hz = keyval::to_double(e);
    else if (e.key == "tx_power_w") p.tx_power_w = keyval::to_double(e);
    else if (e.key == "tx_gain_dbi") p.tx_gain_dbi = keyval::to_double(e);
    else if (e.key == "rx_gain_dbi") p.rx_gain_dbi = keyval::to_double(e);
    else if (e.key == "bandwidth_hz") p.bandwidth_hz = keyval::to_double(e);
    else if (e.key == "noise_figure_db") p.noise_figure_db = keyval::to_double(e);
    else if (e.key == "antenna_temp_k") p.antenna_temp_k = keyval::to_double(e);
    else if (e.key == "ref_temp_k") p.ref_temp_k = keyval::to_double(e);
    else throw keyval::ParseError("unknown [link] key '" + e.key + "'", e.line);
  }
}

inline void apply_architecture(const keyval::Section& s, codec::ArchitectureConfig& a) {
  for (const auto& e : s.entries) {
    if (e.key == "num_blocks") a.num_blocks = static_cast<int>(keyval::to_int(e));
    else if (e.key == "filters") a.filters = static_cast<int>(keyval::to_int(e));
    else if (e.key == "kernel") a.kernel = static_cast<int>(keyval::to_int(e));
    else if (e.key == "strides") {
      a.strides.clear();
      for (double v : keyval::to_doubles(e)) a.strides.push_back(static_cast<int>(v));
    } else if (e.key == "channel_filters") a.channel_filters_c = static_cast<int>(keyval::to_int(e));
    else if (e.key == "bands") a.input_bands = static_cast<int>(keyval::to_int(e));
    else if (e.key == "height") a.input_h = static_cast<int>(keyval::to_int(e));
    else if (e.key == "width") a.input_w = static_cast<int>(keyval::to_int(e));
    else if (e.key == "power") a.power = keyval::to_double(e);
    else throw keyval::ParseError("unknown [architecture] key '" + e.key + "'", e.line);
  }
}

inline void apply_attention(const keyval::Section& s, codec::AttentionConfig& a) {
  for (const auto& e : s.entries) {
    if (e.key == "enabled") a.enabled = keyval::to_bool(e);
    else if (e.key == "hidden_dim") a.hidden_dim = static_cast<int>(keyval::to_int(e));
    else if (e.key == "snr_range") {
      const auto v = keyval::to_doubles(e);
      if (v.size() != 2) throw keyval::ParseError("snr_range needs two values", e.line);
      a.snr_range = {v[0], v[1]};
    } else if (e.key == "include_loo_params") a.include_loo_params = keyval::to_bool(e);
    else throw keyval::ParseError("unknown [attention] key '" + e.key + "'", e.line);
  }
}

inline void apply_plan(const keyval::Section& s, ExperimentConfig& c) {
  for (const auto& e : s.entries) {
    if (e.key == "environments") c.environments = keyval::to_strings(e);
    else if (e.key == "states") {
      c.states.clear();
      for (const auto& name : keyval::to_strings(e)) c.states.push_back(fading::state_from_string(name));
    } else if (e.key == "elevations") c.elevations = keyval::to_doubles(e);
    else if (e.key == "ratios") c.ratios = keyval::to_doubles(e);
    else if (e.key == "kinds") c.kinds = keyval::to_strings(e);
    else if (e.key == "seeds") {
      c.seeds.clear();
      for (double v : keyval::to_doubles(e)) c.seeds.push_back(static_cast<std::uint64_t>(v));
    } else if (e.key == "epochs") c.train_options.epochs = static_cast<int>(keyval::to_int(e));
    else if (e.key == "batch_size") c.train_options.batch_size = static_cast<int>(keyval::to_int(e));
    else if (e.key == "learning_rate") c.train_options.learning_rate = keyval::to_double(e);
    else if (e.key == "learning_rate_after_drop")
      c.train_options.learning_rate_after_drop = keyval::to_double(e);
    else if (e.key == "lr_drop_epoch") c.train_options.lr_drop_epoch = static_cast<int>(keyval::to_int(e));
    else if (e.key == "patience") c.train_options.patience = static_cast<int>(keyval::to_int(e));
    else if (e.key == "eval_realizations") c.eval_realizations = static_cast<int>(keyval::to_int(e));
    else if (e.key == "fading_mode") {
      const auto v = e.value;
      if (v == "per-symbol") c.fading_mode = channel::FadingMode::kPerSymbol;
      else if (v == "block") c.fading_mode = channel::FadingMode::kBlock;
      else throw keyval::ParseError("fading_mode must be per-symbol or block", e.line);
    } else throw keyval::ParseError("unknown [plan] key '" + e.key + "'", e.line);
  }
}

inline void apply_dataset(const keyval::Section& s, ExperimentConfig& c) {
  for (const auto& e : s.entries) {
    if (e.key == "count") c.dataset_count = static_cast<int>(keyval::to_int(e));
    else if (e.key == "bands") c.dataset_bands = static_cast<int>(keyval::to_int(e));
    else if (e.key == "size") c.dataset_size = static_cast<int>(keyval::to_int(e));
    else if (e.key == "seed") c.dataset_seed = static_cast<std::uint64_t>(keyval::to_int(e));
    else if (e.key == "val_frac") c.dataset_val_frac = keyval::to_double(e);
    else if (e.key == "test_frac") c.dataset_test_frac = keyval::to_double(e);
    else if (e.key == "manifest") c.dataset_manifest = e.value;
    else throw keyval::ParseError("unknown [dataset] key '" + e.key + "'", e.line);
  }
}

}  // namespace detail

inline ExperimentConfig config_from_document(const keyval::Document& doc) {
  ExperimentConfig cfg;
  for (const auto& section : doc.sections) {
    if (section.name == "link") detail::apply_link(section, cfg.link);
    else if (section.name == "paths") {
      for (const auto& e : section.entries) {
        if (e.key == "environment_table") cfg.environment_table_path = e.value;
        else throw keyval::ParseError("unknown [paths] key '" + e.key + "'", e.line);
      }
    } else if (section.name == "architecture") detail::apply_architecture(section, cfg.arch);
    else if (section.name == "attention") detail::apply_attention(section, cfg.attention);
    else if (section.name == "plan") detail::apply_plan(section, cfg);
    else if (section.name == "dataset") detail::apply_dataset(section, cfg);
    else throw keyval::ParseError("unknown section [" + section.name + "]", section.line);
  }
  cfg.validate();
  return cfg;
}

inline ExperimentConfig load_config_file(const std::string& path) {
  return config_from_document(keyval::parse_file(path));
}

// The dataset an experiment config describes: synthetic unless a manifest
// path is set.
inline Dataset dataset_from_config(const ExperimentConfig& cfg) {
  if (!cfg.dataset_manifest.empty()) return load_raw_dataset(cfg.dataset_manifest);
  return generate_synthetic_dataset(cfg.dataset_count, cfg.dataset_bands, cfg.dataset_size,
                                    cfg.dataset_seed, cfg.dataset_val_frac, cfg.dataset_test_frac);
}

}  // namespace satjscc::harness

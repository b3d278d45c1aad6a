#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "satjscc/model.hpp"

namespace satjscc::nn {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format stores little-endian float32 blocks");

// Checkpoint container: a text header (format tag, key-value metadata, one
// 'param <name> <count>' line per block in declaration order, 'end-header'),
// followed by the raw little-endian float32 parameter blocks in the same
// order. Models trained in float round-trip bit-exactly.
inline constexpr const char* kCheckpointMagic = "satjscc-checkpoint v1";

template <class T>
void save_params(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& meta,
                 std::vector<Param<T>>& params) {
  out << kCheckpointMagic << "\n";
  for (const auto& [k, v] : meta) out << k << " " << v << "\n";
  for (const auto& p : params) out << "param " << p.name << " " << p.tensor->values.size() << "\n";
  out << "end-header\n";
  for (const auto& p : params) {
    std::vector<float> block(p.tensor->values.begin(), p.tensor->values.end());
    out.write(reinterpret_cast<const char*>(block.data()),
              static_cast<std::streamsize>(block.size() * sizeof(float)));
  }
}

struct CheckpointHeader {
  std::map<std::string, std::string> meta;
  std::vector<std::pair<std::string, std::size_t>> blocks;
};

inline CheckpointHeader read_checkpoint_header(std::istream& in) {
  CheckpointHeader header;
  std::string line;
  if (!std::getline(in, line) || line != kCheckpointMagic)
    throw std::runtime_error("checkpoint: bad magic line");
  while (std::getline(in, line)) {
    if (line == "end-header") return header;
    const auto space = line.find(' ');
    if (space == std::string::npos) throw std::runtime_error("checkpoint: malformed header line");
    const std::string key = line.substr(0, space);
    const std::string rest = line.substr(space + 1);
    if (key == "param") {
      const auto sep = rest.rfind(' ');
      if (sep == std::string::npos) throw std::runtime_error("checkpoint: malformed param line");
      header.blocks.emplace_back(rest.substr(0, sep),
                                 static_cast<std::size_t>(std::stoull(rest.substr(sep + 1))));
    } else {
      header.meta[key] = rest;
    }
  }
  throw std::runtime_error("checkpoint: missing end-header");
}

template <class T>
void load_params(std::istream& in, const CheckpointHeader& header, std::vector<Param<T>>& params) {
  if (header.blocks.size() != params.size())
    throw std::runtime_error("checkpoint: parameter block count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& [name, count] = header.blocks[i];
    if (name != params[i].name || count != params[i].tensor->values.size())
      throw std::runtime_error("checkpoint: block '" + name + "' does not match model layout");
    std::vector<float> block(count);
    in.read(reinterpret_cast<char*>(block.data()),
            static_cast<std::streamsize>(count * sizeof(float)));
    if (!in) throw std::runtime_error("checkpoint: truncated parameter data");
    for (std::size_t j = 0; j < count; ++j)
      params[i].tensor->values[j] = static_cast<T>(block[j]);
  }
}

}  // namespace satjscc::nn

namespace satjscc::codec {

namespace detail {
inline std::string strides_string(const std::vector<int>& strides) {
  std::string s;
  for (std::size_t i = 0; i < strides.size(); ++i) s += (i ? " " : "") + std::to_string(strides[i]);
  return s;
}
}  // namespace detail

template <class T>
void save_model(std::ostream& out, JsccModel<T>& model) {
  const auto& arch = model.arch();
  const auto& att = model.attention();
  std::vector<std::pair<std::string, std::string>> meta;
  meta.emplace_back("num_blocks", std::to_string(arch.num_blocks));
  meta.emplace_back("filters", std::to_string(arch.filters));
  meta.emplace_back("kernel", std::to_string(arch.kernel));
  meta.emplace_back("strides", detail::strides_string(arch.strides));
  meta.emplace_back("channel_filters", std::to_string(arch.channel_filters_c));
  meta.emplace_back("input_bands", std::to_string(arch.input_bands));
  meta.emplace_back("input_h", std::to_string(arch.input_h));
  meta.emplace_back("input_w", std::to_string(arch.input_w));
  char power[32];
  std::snprintf(power, sizeof(power), "%.17g", arch.power);
  meta.emplace_back("power", power);
  meta.emplace_back("attention", att.enabled ? "1" : "0");
  meta.emplace_back("attention_hidden", std::to_string(att.resolved_hidden(arch.filters)));
  char snr_range[64];
  std::snprintf(snr_range, sizeof(snr_range), "%.17g %.17g", att.snr_range.lo, att.snr_range.hi);
  meta.emplace_back("snr_range", snr_range);
  meta.emplace_back("include_loo", att.include_loo_params ? "1" : "0");
  meta.emplace_back("init_seed", std::to_string(model.init_seed()));
  meta.emplace_back("epochs_trained", std::to_string(model.epochs_trained));
  meta.emplace_back("split_hash", model.split_hash.empty() ? "-" : model.split_hash);
  auto params = model.params();
  nn::save_params(out, meta, params);
}

template <class T>
void save_model_file(const std::string& path, JsccModel<T>& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  save_model(out, model);
}

template <class T>
JsccModel<T> load_model(std::istream& in) {
  const auto header = nn::read_checkpoint_header(in);
  const auto need = [&](const char* key) -> const std::string& {
    const auto it = header.meta.find(key);
    if (it == header.meta.end())
      throw std::runtime_error(std::string("checkpoint: missing header key ") + key);
    return it->second;
  };

  ArchitectureConfig arch;
  arch.num_blocks = std::stoi(need("num_blocks"));
  arch.filters = std::stoi(need("filters"));
  arch.kernel = std::stoi(need("kernel"));
  {
    std::istringstream is(need("strides"));
    arch.strides.clear();
    int s;
    while (is >> s) arch.strides.push_back(s);
  }
  arch.channel_filters_c = std::stoi(need("channel_filters"));
  arch.input_bands = std::stoi(need("input_bands"));
  arch.input_h = std::stoi(need("input_h"));
  arch.input_w = std::stoi(need("input_w"));
  arch.power = std::stod(need("power"));

  AttentionConfig att;
  att.enabled = need("attention") == "1";
  att.hidden_dim = std::stoi(need("attention_hidden"));
  {
    std::istringstream is(need("snr_range"));
    is >> att.snr_range.lo >> att.snr_range.hi;
  }
  att.include_loo_params = need("include_loo") == "1";

  JsccModel<T> model(arch, att, std::stoull(need("init_seed")));
  model.epochs_trained = std::stoi(need("epochs_trained"));
  const std::string& hash = need("split_hash");
  model.split_hash = hash == "-" ? "" : hash;

  auto params = model.params();
  nn::load_params(in, header, params);
  return model;
}

template <class T>
JsccModel<T> load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
  return load_model<T>(in);
}

}  // namespace satjscc::codec

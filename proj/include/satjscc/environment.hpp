#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "satjscc/keyval.hpp"
#include "satjscc/loo.hpp"
#include "satjscc/markov.hpp"

namespace satjscc::fading {

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Per-environment fading statistics: for each measured elevation, one Loo
// parameter set per channel state plus the shadowing chain. Lookups between
// measured elevations resolve to the nearest one; outside the table's span
// they are refused.
struct EnvironmentTable {
  std::string environment;
  std::map<double, std::array<LooParams, 3>> entries;  // elevation -> per-state params
  std::map<double, MarkovChain> chains;                // elevation -> chain

  double min_elevation() const { return entries.begin()->first; }
  double max_elevation() const { return entries.rbegin()->first; }

  double nearest_elevation(double elevation_deg) const {
    if (entries.empty()) throw ValidationError("environment table has no elevations");
    if (elevation_deg < min_elevation() - 1e-9 || elevation_deg > max_elevation() + 1e-9)
      throw std::out_of_range("elevation " + std::to_string(elevation_deg) +
                              " outside table span [" + std::to_string(min_elevation()) + ", " +
                              std::to_string(max_elevation()) + "] for environment '" +
                              environment + "'");
    double best = entries.begin()->first;
    double best_dist = std::abs(elevation_deg - best);
    for (const auto& [elev, _] : entries) {
      const double dist = std::abs(elevation_deg - elev);
      if (dist < best_dist - 1e-12) {  // ties keep the lower elevation
        best = elev;
        best_dist = dist;
      }
    }
    return best;
  }

  const LooParams& lookup(double elevation_deg, ChannelState state) const {
    const double elev = nearest_elevation(elevation_deg);
    return entries.at(elev)[static_cast<int>(state)];
  }

  const MarkovChain& lookup_chain(double elevation_deg) const {
    const double elev = nearest_elevation(elevation_deg);
    const auto it = chains.find(elev);
    if (it == chains.end())
      throw ValidationError("no Markov chain for elevation " + std::to_string(elev) +
                            " in environment '" + environment + "'");
    return it->second;
  }
};

using EnvironmentSet = std::map<std::string, EnvironmentTable>;

inline std::string canonical_environment_name(std::string name) {
  for (char& c : name) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (c == ' ' || c == '-') c = '_';
  }
  return name;
}

// Parses an environment-table document. Expected shape, per environment
// section: an 'elevation =' entry opens an elevation block; the block carries
// 'state_probs' (3 values), 'transition' (9 values, row-major) and, for each
// of the three states, a 'state =' record followed by alpha_db / psi_db /
// mp_db. Missing cells are all reported at once.
inline EnvironmentSet load_environment_tables(std::string_view text) {
  const keyval::Document doc = keyval::parse(text);
  if (doc.sections.empty()) throw keyval::ParseError("no environment sections found", 1);

  EnvironmentSet set;
  std::vector<std::string> missing;

  for (const auto& section : doc.sections) {
    if (section.name.empty())
      throw keyval::ParseError("entries before the first [environment] section", section.line);
    EnvironmentTable table;
    table.environment = canonical_environment_name(section.name);

    std::optional<double> elevation;
    std::optional<int> state_index;
    std::array<std::array<std::optional<double>, 3>, 3> loo_cells;  // [state][alpha,psi,mp]
    std::optional<std::array<double, 3>> probs;
    std::optional<std::array<std::array<double, 3>, 3>> trans;

    const auto flush_elevation = [&]() {
      if (!elevation) return;
      if (*elevation < 40.0 - 1e-9 || *elevation > 80.0 + 1e-9)
        throw ValidationError("environment '" + table.environment + "': elevation " +
                              std::to_string(*elevation) + " outside the measured range [40, 80]");
      std::array<LooParams, 3> per_state{};
      for (int s = 0; s < 3; ++s) {
        const auto& cell = loo_cells[s];
        if (!cell[0] || !cell[1] || !cell[2]) {
          missing.push_back(table.environment + " @ " + std::to_string(*elevation) + " deg: " +
                            to_string(static_cast<ChannelState>(s)));
          continue;
        }
        per_state[s] = LooParams{*cell[0], *cell[1], *cell[2]};
        per_state[s].validate();
      }
      MarkovChain chain;
      if (!probs || !trans) {
        missing.push_back(table.environment + " @ " + std::to_string(*elevation) +
                          " deg: state_probs/transition");
      } else {
        chain.state_probs = *probs;
        chain.transition = *trans;
        chain.validate();
      }
      table.entries[*elevation] = per_state;
      table.chains[*elevation] = chain;
      elevation.reset();
      state_index.reset();
      loo_cells = {};
      probs.reset();
      trans.reset();
    };

    for (const auto& entry : section.entries) {
      if (entry.key == "elevation") {
        flush_elevation();
        elevation = keyval::to_double(entry);
      } else if (!elevation) {
        throw keyval::ParseError("'" + entry.key + "' before any 'elevation ='", entry.line);
      } else if (entry.key == "state") {
        state_index = static_cast<int>(state_from_string(entry.value));
      } else if (entry.key == "state_probs") {
        const auto v = keyval::to_doubles(entry);
        if (v.size() != 3) throw keyval::ParseError("state_probs needs 3 values", entry.line);
        probs = std::array<double, 3>{v[0], v[1], v[2]};
      } else if (entry.key == "transition") {
        const auto v = keyval::to_doubles(entry);
        if (v.size() != 9) throw keyval::ParseError("transition needs 9 values (row-major)", entry.line);
        trans = std::array<std::array<double, 3>, 3>{
            {{v[0], v[1], v[2]}, {v[3], v[4], v[5]}, {v[6], v[7], v[8]}}};
      } else if (entry.key == "alpha_db" || entry.key == "psi_db" || entry.key == "mp_db") {
        if (!state_index)
          throw keyval::ParseError("'" + entry.key + "' before any 'state ='", entry.line);
        const int slot = entry.key == "alpha_db" ? 0 : entry.key == "psi_db" ? 1 : 2;
        loo_cells[*state_index][slot] = keyval::to_double(entry);
      } else {
        throw keyval::ParseError("unknown key '" + entry.key + "'", entry.line);
      }
    }
    flush_elevation();

    if (table.entries.empty())
      missing.push_back(table.environment + ": no elevation blocks");
    set[table.environment] = std::move(table);
  }

  if (!missing.empty()) {
    std::string msg = "environment table incomplete:";
    for (const auto& cell : missing) msg += "\n  missing " + cell;
    throw ValidationError(msg);
  }
  return set;
}

inline EnvironmentSet load_environment_tables_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open environment table: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_environment_tables(buf.str());
}

inline const EnvironmentTable& require_environment(const EnvironmentSet& set,
                                                   const std::string& name) {
  const auto it = set.find(canonical_environment_name(name));
  if (it == set.end()) throw std::invalid_argument("unknown environment: " + name);
  return it->second;
}

}  // namespace satjscc::fading

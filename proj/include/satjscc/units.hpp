#pragma once

#include <cmath>

namespace satjscc {

inline constexpr double kSpeedOfLightMps = 299792458.0;
inline constexpr double kBoltzmannJPerK = 1.380649e-23;
inline constexpr double kEarthRadiusKm = 6378.0;
inline constexpr double kPi = 3.14159265358979323846;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

inline double watts_to_dbw(double w) { return 10.0 * std::log10(w); }

inline double dbw_to_watts(double dbw) { return std::pow(10.0, dbw / 10.0); }

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }

}  // namespace satjscc

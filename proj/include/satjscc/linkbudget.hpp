#pragma once

#include <cmath>
#include <stdexcept>

#include "satjscc/units.hpp"

namespace satjscc::linkbudget {

// Orbit and RF front-end parameters. Defaults are the reference S-band
// downlink configuration used throughout the experiments.
struct LinkParams {
  double orbit_height_km = 150.0;
  double carrier_hz = 2150e6;
  double tx_power_w = 1.0;
  double tx_gain_dbi = 6.0;
  double rx_gain_dbi = 35.0;
  double bandwidth_hz = 750e3;
  double noise_figure_db = 2.0;
  double antenna_temp_k = 290.0;
  double ref_temp_k = 290.0;

  void validate() const {
    if (orbit_height_km <= 0.0 || carrier_hz <= 0.0 || tx_power_w <= 0.0 ||
        bandwidth_hz <= 0.0 || antenna_temp_k <= 0.0 || ref_temp_k <= 0.0)
      throw std::invalid_argument("link parameters must be strictly positive");
    if (noise_figure_db < 0.0)
      throw std::invalid_argument("noise figure must be >= 0 dB");
  }
};

struct SnrReport {
  double elevation_deg = 0.0;
  double slant_range_km = 0.0;
  double path_loss_db = 0.0;
  double noise_power_dbw = 0.0;
  double snr_db = 0.0;
};

struct ThermalNoise {
  double receiver_temp_k = 0.0;  // T_e
  double system_temp_k = 0.0;    // T_a + T_e
  double power_w = 0.0;
  double power_dbw = 0.0;
};

// Line-of-sight distance between satellite and ground station for a given
// elevation angle, spherical-Earth geometry with R_E = 6378 km.
inline double slant_range_km(double elevation_deg, double orbit_height_km) {
  if (elevation_deg <= 0.0 || elevation_deg > 90.0)
    throw std::domain_error("elevation angle must be in (0, 90] degrees");
  if (orbit_height_km <= 0.0)
    throw std::domain_error("orbit height must be positive");
  const double e = deg_to_rad(elevation_deg);
  const double ratio = (orbit_height_km + kEarthRadiusKm) / kEarthRadiusKm;
  const double c = std::cos(e);
  return kEarthRadiusKm * (std::sqrt(ratio * ratio - c * c) - std::sin(e));
}

// N = k * T * B with T = T_a + T_0 * (F - 1); the noise figure arrives in dB
// and is converted to the linear noise factor first.
inline ThermalNoise thermal_noise(const LinkParams& p) {
  p.validate();
  ThermalNoise out;
  const double noise_factor = db_to_linear(p.noise_figure_db);
  out.receiver_temp_k = p.ref_temp_k * (noise_factor - 1.0);
  out.system_temp_k = p.antenna_temp_k + out.receiver_temp_k;
  out.power_w = kBoltzmannJPerK * out.system_temp_k * p.bandwidth_hz;
  out.power_dbw = watts_to_dbw(out.power_w);
  return out;
}

// Free-space path loss, 20 log10(4 pi d f / c), d in meters.
inline double path_loss_friis_db(double distance_km, double carrier_hz) {
  if (distance_km <= 0.0 || carrier_hz <= 0.0)
    throw std::domain_error("distance and carrier frequency must be positive");
  const double d_m = distance_km * 1000.0;
  return 20.0 * std::log10(4.0 * kPi * d_m * carrier_hz / kSpeedOfLightMps);
}

// dB-domain budget: SNR = P_t[dBW] + G_t + G_r - L - N[dBW].
inline SnrReport snr(const LinkParams& p, double elevation_deg) {
  p.validate();
  SnrReport r;
  r.elevation_deg = elevation_deg;
  r.slant_range_km = slant_range_km(elevation_deg, p.orbit_height_km);
  r.path_loss_db = path_loss_friis_db(r.slant_range_km, p.carrier_hz);
  r.noise_power_dbw = thermal_noise(p).power_dbw;
  const double tx_power_dbw = watts_to_dbw(p.tx_power_w);
  r.snr_db = tx_power_dbw + p.tx_gain_dbi + p.rx_gain_dbi - r.path_loss_db - r.noise_power_dbw;
  return r;
}

// Per-component Gaussian noise power: sigma^2 = P_sig / (2 * 10^(SNR/10)).
// The factor 2 splits the noise budget over the real and imaginary parts;
// total complex noise power is 2 sigma^2 = P_sig * 10^(-SNR/10).
inline double noise_sigma_squared(double snr_db, double signal_power) {
  if (signal_power <= 0.0)
    throw std::domain_error("signal power must be positive");
  return signal_power / (2.0 * db_to_linear(snr_db));
}

}  // namespace satjscc::linkbudget

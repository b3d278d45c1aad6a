#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "satjscc/bessel.hpp"
#include "satjscc/quadrature.hpp"
#include "satjscc/rng.hpp"
#include "satjscc/units.hpp"

namespace satjscc::fading {

// Loo fading statistics in dB: mean and standard deviation of the log-normal
// direct path, and average multipath power of the Rayleigh component.
struct LooParams {
  double alpha_db = 0.0;
  double psi_db = 0.0;
  double mp_db = 0.0;

  void validate() const {
    if (!(std::isfinite(alpha_db) && std::isfinite(psi_db) && std::isfinite(mp_db)))
      throw std::invalid_argument("Loo parameters must be finite");
    if (psi_db < 0.0) throw std::invalid_argument("psi_db must be >= 0");
  }
};

// Natural-log-domain form used by the density and the sampler:
//   alpha = 20 log10(e^mu)        ->  mu = alpha ln10 / 20
//   psi   = 20 log10(e^sqrt(d0))  ->  sqrt(d0) = psi ln10 / 20
//   MP    = 10 log10(2 b0)        ->  b0 = 10^(MP/10) / 2
struct LooInternal {
  double mu = 0.0;
  double d0 = 0.0;
  double b0 = 0.5;
};

inline LooInternal loo_to_internal(const LooParams& p) {
  p.validate();
  constexpr double ln10 = 2.302585092994045684;
  LooInternal i;
  i.mu = p.alpha_db * ln10 / 20.0;
  const double sd = p.psi_db * ln10 / 20.0;
  i.d0 = sd * sd;
  i.b0 = std::pow(10.0, p.mp_db / 10.0) / 2.0;
  return i;
}

inline LooParams internal_to_loo(const LooInternal& i) {
  if (i.d0 < 0.0 || i.b0 <= 0.0)
    throw std::invalid_argument("LooInternal requires d0 >= 0 and b0 > 0");
  constexpr double ln10 = 2.302585092994045684;
  LooParams p;
  p.alpha_db = 20.0 * i.mu / ln10;
  p.psi_db = 20.0 * std::sqrt(i.d0) / ln10;
  p.mp_db = 10.0 * std::log10(2.0 * i.b0);
  return p;
}

// Amplitude beyond which the density is numerically zero; used as the upper
// integration limit when normalizing or tabulating the CDF.
inline double loo_amplitude_cap(const LooParams& p) {
  const LooInternal i = loo_to_internal(p);
  return std::exp(i.mu + 8.0 * std::sqrt(i.d0)) + 12.0 * std::sqrt(i.b0);
}

// Amplitude density of the Loo model: log-normal direct path (mu, d0) plus
// Rayleigh multipath with per-component power b0,
//
//   p(r) = r / (b0 sqrt(2 pi d0)) *
//          int_0^inf 1/s exp(-(ln s - mu)^2 / 2 d0 - (r^2+s^2) / 2 b0)
//                    I0(r s / b0) ds.
//
// The integrand is evaluated as exp(sum of log terms); the I0 argument grows
// like r*s/b0, but combined with -(r^2+s^2)/(2 b0) the exponent is bounded by
// -(r-s)^2/(2 b0), so nothing overflows. Integration runs over the +-8 sigma
// span of the log-normal factor; outside it the integrand is below e^-32 of
// its peak. Throws QuadratureError when the internal error estimate exceeds
// 1e-6 of the result.
inline double loo_pdf(double amplitude, const LooParams& p) {
  if (amplitude < 0.0) throw std::domain_error("amplitude must be >= 0");
  if (amplitude == 0.0) return 0.0;
  const LooInternal in = loo_to_internal(p);
  const double r = amplitude;

  // Degenerate log-normal (psi ~ 0): direct path is deterministic at e^mu and
  // the density reduces to the Rice form.
  if (in.d0 < 1e-14) {
    const double nu = std::exp(in.mu);
    const double log_density = std::log(r / in.b0) - (r * r + nu * nu) / (2.0 * in.b0) +
                               numerics::bessel_i0_log(r * nu / in.b0);
    return std::exp(log_density);
  }

  const double sd = std::sqrt(in.d0);
  const double lo = std::exp(in.mu - 8.0 * sd);
  const double hi = std::exp(in.mu + 8.0 * sd);
  const auto integrand = [&](double s) {
    const double dev = std::log(s) - in.mu;
    const double log_term = -std::log(s) - dev * dev / (2.0 * in.d0) -
                            (r * r + s * s) / (2.0 * in.b0) +
                            numerics::bessel_i0_log(r * s / in.b0);
    return std::exp(log_term);
  };
  const auto q = numerics::integrate_adaptive(integrand, lo, hi, 1e-10, 1e-300);
  const double prefactor = r / (in.b0 * std::sqrt(2.0 * kPi * in.d0));
  const double value = prefactor * q.value;
  if (q.error_estimate * prefactor > 1e-6 * std::max(1.0, std::abs(value)))
    throw numerics::QuadratureError("loo_pdf: quadrature error estimate above 1e-6");
  return value;
}

// Complex fading gains h_t = a_t e^{j phi} + m_t:
//  - direct path: x_t ~ Normal(alpha, psi^2) in dB, a_t = 10^(x_t/20);
//    phi = 0 unless random_direct_phase is set (uniform phase otherwise);
//  - multipath: m_t = sqrt(b0) (g1 + j g2), g1,g2 standard normal, so that
//    E|m_t|^2 = 2 b0.
// Samples are i.i.d. in time; per-sample draw order is x_t, [phi,] g1, g2.
inline std::vector<std::complex<double>> sample_loo(const LooParams& p, std::size_t count,
                                                    Rng& rng, bool random_direct_phase = false) {
  if (count == 0) throw std::invalid_argument("count must be > 0");
  const LooInternal in = loo_to_internal(p);
  const double sigma_m = std::sqrt(in.b0);
  std::vector<std::complex<double>> out;
  out.reserve(count);
  for (std::size_t t = 0; t < count; ++t) {
    const double x_db = rng.normal(p.alpha_db, p.psi_db);
    const double a = std::pow(10.0, x_db / 20.0);
    std::complex<double> direct(a, 0.0);
    if (random_direct_phase) {
      const double phi = 2.0 * kPi * rng.uniform();
      direct = std::polar(a, phi);
    }
    const double g1 = rng.normal();
    const double g2 = rng.normal();
    out.emplace_back(direct + std::complex<double>(sigma_m * g1, sigma_m * g2));
  }
  return out;
}

}  // namespace satjscc::fading

#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "oectmc/config.hpp"
#include "oectmc/constants.hpp"

namespace oectmc {

class QuadratureError : public std::runtime_error {
public:
  QuadratureError(const std::string& what, double achieved)
      : std::runtime_error(what + " (achieved error estimate " + std::to_string(achieved) + ")"),
        achieved_(achieved) {}
  double achieved_error() const noexcept { return achieved_; }

private:
  double achieved_;
};

/// Tolerances for transport integrals, in molar units.
struct QuadratureTolerance {
  double absolute = 1e-18;
  double relative = 1e-9;
  unsigned max_depth = 20;
};

/// Restricted-diffusion Green's function with first-order clearance:
/// number density (1/m^3) at distance r, time t after a unit point release.
/// Exactly zero for t <= 0.
inline double greens_value(double r, double t, const Medium& medium, double D_eff) {
  if (!(t > 0.0)) return 0.0;
  using constants::pi;
  const double log_norm = -1.5 * std::log(4.0 * pi * D_eff * t);
  const double exponent = log_norm - r * r / (4.0 * D_eff * t) - medium.k_clear * t;
  return std::exp(exponent) / medium.alpha;
}

namespace transport_detail {

/// Integrates g(r, u) du over [a, b] and returns the result in molar units
/// per molecule.
inline double integrate_greens_molar(double r, double a, double b, const Medium& medium, double D_eff,
                                     const QuadratureTolerance& tol) {
  if (!(b > a)) return 0.0;
  a = std::max(a, 0.0);
  if (!(b > a)) return 0.0;
  using boost::math::quadrature::gauss_kronrod;
  auto f = [&](double u) { return greens_value(r, u, medium, D_eff) * constants::molar_per_number_density; };
  double error = 0.0;
  const double value = gauss_kronrod<double, 15>::integrate(f, a, b, tol.max_depth, tol.relative, &error);
  if (error > std::max(tol.absolute, tol.relative * std::abs(value)) * 1e3 && error > tol.absolute)
    throw QuadratureError("Green's function quadrature did not converge", error);
  return value;
}

} // namespace transport_detail

/// Molar concentration at distance r and time t from a rectangular burst of
/// N_emit molecules released uniformly over [0, T_rel):
///   (N_emit/T_rel) * int_0^{min(t,T_rel)} g(r, t - tau) dtau / (1000 N_A).
inline double burst_concentration(double r, double t, double N_emit, double T_rel, const Medium& medium,
                                  double D_eff, const QuadratureTolerance& tol = {}) {
  if (!(t > 0.0) || N_emit == 0.0) return 0.0;
  if (!(T_rel > 0.0)) throw std::invalid_argument("burst_concentration: T_rel must be > 0");
  // Substituting u = t - tau maps the release interval onto [t - T_rel, t].
  const double lo = std::max(0.0, t - T_rel);
  return (N_emit / T_rel) * transport_detail::integrate_greens_molar(r, lo, t, medium, D_eff, tol);
}

/// Window coefficient h_k: mean molar concentration per molecule inside the
/// decision window [T_s - W, T_s) of the symbol sent k periods earlier.
inline double window_coefficient(double r, double T_s, double W, int k, const Medium& medium, double D_eff,
                                 const QuadratureTolerance& tol = {}) {
  if (!(W > 0.0) || W > T_s * (1.0 + 1e-12) || k < 0)
    throw std::invalid_argument("window_coefficient: requires 0 < W <= T_s and k >= 0");
  const double end = (k + 1) * T_s;
  return transport_detail::integrate_greens_molar(r, end - W, end, medium, D_eff, tol) / W;
}

struct WindowCoefficients {
  double r = 0.0;
  double T_s = 0.0;
  double W = 0.0;
  std::vector<double> values; // h_0 .. h_{K-1}
  int K = 0;
};

namespace transport_detail {

/// Upper bound on sum_{k >= m} h_k, valid once the window start of term m lies
/// past the no-clearance peak r^2/(6 D_eff), where g is decreasing:
///   h_k <= g(a_k)/(1000 N_A),  sum_{k>=m} g(a_k) <= g(a_m) + (1/T_s) int_{a_m}^inf g.
/// Returns +inf when the monotone regime has not been reached.
inline double coefficient_tail_bound(double r, double T_s, double W, int m, const Medium& medium, double D_eff) {
  const double a = (m + 1) * T_s - W;
  if (a < r * r / (6.0 * D_eff)) return INFINITY;
  using constants::pi;
  const double integral = std::exp(-medium.k_clear * a) * 2.0 /
                          (medium.alpha * std::pow(4.0 * pi * D_eff, 1.5) * std::sqrt(a));
  return (greens_value(r, a, medium, D_eff) + integral / T_s) * constants::molar_per_number_density;
}

} // namespace transport_detail

/// Smallest K >= 2 with sum_{k>=K} h_k <= epsilon h_0, capped at K_max.
///
/// Terms are summed explicitly until the analytic tail bound beyond the last
/// computed term is below 1e-3 of the tolerance, then the bound is added.
inline int isi_memory_depth(double r, double T_s, double W, const Medium& medium, double D_eff, int K_max = 60,
                            double epsilon = 1e-3, std::vector<double>* coefficients_out = nullptr) {
  constexpr int kHorizonLimit = 8192;
  std::vector<double> h;
  h.reserve(static_cast<std::size_t>(K_max) + 2);
  for (int k = 0; k <= K_max; ++k) h.push_back(window_coefficient(r, T_s, W, k, medium, D_eff));
  if (!(h[0] > 0.0)) throw std::invalid_argument("isi_memory_depth: h_0 must be > 0");

  const double budget = epsilon * h[0];
  double bound = transport_detail::coefficient_tail_bound(r, T_s, W, static_cast<int>(h.size()), medium, D_eff);
  while (bound > 1e-3 * budget && static_cast<int>(h.size()) < kHorizonLimit) {
    const int next = static_cast<int>(h.size());
    const int target = std::min(kHorizonLimit, 2 * next);
    for (int k = next; k < target; ++k) h.push_back(window_coefficient(r, T_s, W, k, medium, D_eff));
    bound = transport_detail::coefficient_tail_bound(r, T_s, W, static_cast<int>(h.size()), medium, D_eff);
  }

  // suffix[k] = sum_{j >= k} h_j over the explicit horizon.
  std::vector<double> suffix(h.size() + 1, 0.0);
  for (std::size_t k = h.size(); k-- > 0;) suffix[k] = suffix[k + 1] + h[k];

  int K = K_max;
  for (int cand = 2; cand <= K_max; ++cand) {
    if (suffix[static_cast<std::size_t>(cand)] + bound <= budget) {
      K = cand;
      break;
    }
  }
  if (coefficients_out) {
    coefficients_out->assign(h.begin(), h.begin() + K);
  }
  return K;
}

inline WindowCoefficients compute_window_coefficients(double r, double T_s, double W, const Medium& medium,
                                                      double D_eff, int K_max = 60, double epsilon = 1e-3) {
  WindowCoefficients wc;
  wc.r = r;
  wc.T_s = T_s;
  wc.W = W;
  wc.K = isi_memory_depth(r, T_s, W, medium, D_eff, K_max, epsilon, &wc.values);
  return wc;
}

/// Window-averaged concentration sum_k count[k] h_k, history newest first.
/// Missing history counts as zero.
inline double windowed_concentration(std::span<const double> history_newest_first, const WindowCoefficients& wc) {
  const std::size_t n = std::min(history_newest_first.size(), wc.values.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) acc += history_newest_first[k] * wc.values[k];
  return acc;
}

/// Per-molecule burst concentration sampled at step midpoints (n + 1/2) dt,
/// n = 0 .. n_steps - 1, with the release starting at t = 0.
inline std::vector<double> unit_concentration_profile(double r, double dt, std::size_t n_steps, double T_rel,
                                                      const Medium& medium, double D_eff) {
  std::vector<double> c(n_steps);
  for (std::size_t n = 0; n < n_steps; ++n)
    c[n] = burst_concentration(r, (static_cast<double>(n) + 0.5) * dt, 1.0, T_rel, medium, D_eff);
  return c;
}

} // namespace oectmc

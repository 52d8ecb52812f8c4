#pragma once

// Amplitude of an acceleration wave propagating into a constant equilibrium:
//
//   dPi/dt + a Pi^2 + b Pi = 0,   Pi(0) = pi0,
//
// with b >= 0 (possibly an infinite sentinel in the singular limit).

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "accelwave/extended_real.hpp"

namespace accelwave {

struct AmplitudeOutcome {
  bool global_existence = true;
  std::optional<double> t_c;  // present iff the amplitude blows up
  ExtendedReal pi_cr;         // b/|a|; 0 when b = 0 (any amplitude of the wrong sign blows up)
};

namespace detail {

inline void check_b(const ExtendedReal& b) {
  if (b.sign() < 0) throw std::invalid_argument("dissipation coefficient b must be >= 0");
}

// (1 - e^(-b t)) / b, continuous at b = 0.
inline double relaxation_factor(double b, double t) {
  if (b == 0.0) return t;
  return -std::expm1(-b * t) / b;
}

}  // namespace detail

/// Global existence vs finite-time blow-up. For a < 0 blow-up needs
/// pi0 > pi_cr; the a > 0 case is its mirror image under Pi -> -Pi.
inline AmplitudeOutcome classify(double a, const ExtendedReal& b, double pi0) {
  if (a == 0.0) throw std::invalid_argument("classify requires a genuinely nonlinear field (a != 0)");
  detail::check_b(b);

  AmplitudeOutcome out;
  if (b.is_infinite()) {
    out.pi_cr = ExtendedReal::positive_infinity();
    return out;
  }
  const double bv = b.value();
  out.pi_cr = bv / std::abs(a);

  // Growth requires the quadratic term to oppose the amplitude: a pi0 < 0.
  const bool growing_sign = a * pi0 < 0.0;
  const double mag = std::abs(pi0);
  if (!growing_sign) return out;

  if (bv == 0.0) {
    out.global_existence = false;
    out.t_c = -1.0 / (a * pi0);
    return out;
  }
  const double pi_cr = out.pi_cr.value();
  if (mag > pi_cr) {
    out.global_existence = false;
    out.t_c = -std::log1p(-pi_cr / mag) / bv;
  }
  return out;
}

/// Pi(t) = pi0 e^(-bt) / (1 + (a/b) pi0 (1 - e^(-bt))), with the b -> 0 limit
/// pi0 / (1 + a pi0 t). Throws std::domain_error at or beyond the blow-up time.
inline double closed_form(double a, const ExtendedReal& b, double pi0, double t) {
  detail::check_b(b);
  if (t < 0.0) throw std::invalid_argument("closed_form: t must be >= 0");
  if (b.is_infinite()) return t == 0.0 ? pi0 : 0.0;
  const double bv = b.value();
  const double denom = 1.0 + a * pi0 * detail::relaxation_factor(bv, t);
  if (!(denom > 0.0)) throw std::domain_error("closed_form: evaluation at or after blow-up");
  return pi0 * std::exp(-bv * t) / denom;
}

struct AmplitudeTrajectory {
  std::vector<double> t;
  std::vector<double> pi;
  bool blew_up = false;
  std::optional<double> blowup_time;
};

/// Classic RK4 on dPi/dt = -a Pi^2 - b Pi, sampled on the grid k*dt up to
/// t_end. Internal steps are limited to 0.005 / (|a Pi| + b) and halved whenever
/// |Pi| grows tenfold in a single step; blow-up is declared once
/// |Pi| > 1e12 max(1, |pi0|).
inline AmplitudeTrajectory integrate(double a, const ExtendedReal& b, double pi0, double t_end,
                                     double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate: dt must be positive");
  if (!(t_end >= 0.0)) throw std::invalid_argument("integrate: t_end must be >= 0");
  detail::check_b(b);

  AmplitudeTrajectory traj;
  const auto n_out = static_cast<std::size_t>(std::floor(t_end / dt + 1e-9));
  traj.t.reserve(n_out + 1);
  traj.pi.reserve(n_out + 1);
  traj.t.push_back(0.0);
  traj.pi.push_back(pi0);

  if (b.is_infinite()) {
    for (std::size_t k = 1; k <= n_out; ++k) {
      traj.t.push_back(static_cast<double>(k) * dt);
      traj.pi.push_back(0.0);
    }
    return traj;
  }

  const double bv = b.value();
  const double threshold = 1e12 * std::max(1.0, std::abs(pi0));
  auto rhs = [&](double p) { return -a * p * p - bv * p; };
  auto rk4 = [&](double p, double h) {
    const double k1 = rhs(p);
    const double k2 = rhs(p + 0.5 * h * k1);
    const double k3 = rhs(p + 0.5 * h * k2);
    const double k4 = rhs(p + h * k3);
    return p + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  };

  double t = 0.0;
  double p = pi0;
  for (std::size_t k = 1; k <= n_out; ++k) {
    const double t_next = static_cast<double>(k) * dt;
    while (t < t_next) {
      double h = std::min(t_next - t, 0.005 / (std::abs(a * p) + bv + 1e-300));
      double p_new = rk4(p, h);
      while (!std::isfinite(p_new) || std::abs(p_new) > 10.0 * std::abs(p) + 1e-300) {
        h *= 0.5;
        if (h < 1e-300) break;
        p_new = rk4(p, h);
      }
      // Hitting t_next exactly avoids drift of the output grid.
      t = (t + h >= t_next) ? t_next : t + h;
      p = p_new;
      if (!std::isfinite(p) || std::abs(p) > threshold) {
        traj.blew_up = true;
        traj.blowup_time = t;
        return traj;
      }
    }
    traj.t.push_back(t_next);
    traj.pi.push_back(p);
  }
  return traj;
}

struct SingularLimitRow {
  double eps = 0.0;
  double b = 0.0;
  double pi_cr = 0.0;
  double decay_time = 0.0;
  bool globally_bounded = true;  // for the supplied pi0
};

/// b(eps) = b0 / eps^n, pi_cr = b / |a|, decay time 1/b, one row per eps in
/// the order given. Throws std::logic_error if the rows, sorted by eps, fail
/// the expected monotonicity (pi_cr decreasing, decay time increasing).
inline std::vector<SingularLimitRow> singular_limit_scan(double b0, double n,
                                                         std::span<const double> eps_list, double a,
                                                         double pi0) {
  if (!(b0 > 0.0)) throw std::invalid_argument("singular_limit_scan: b0 must be positive");
  if (!(n > 0.0)) throw std::invalid_argument("singular_limit_scan: n must be positive");
  if (a == 0.0) throw std::invalid_argument("singular_limit_scan: a must be nonzero");
  std::vector<SingularLimitRow> rows;
  rows.reserve(eps_list.size());
  for (double eps : eps_list) {
    if (!(eps > 0.0)) throw std::invalid_argument("singular_limit_scan: eps entries must be positive");
    SingularLimitRow r;
    r.eps = eps;
    r.b = b0 / std::pow(eps, n);
    r.pi_cr = r.b / std::abs(a);
    r.decay_time = 1.0 / r.b;
    r.globally_bounded = classify(a, r.b, pi0).global_existence;
    rows.push_back(r);
  }

  std::vector<SingularLimitRow> sorted = rows;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& x, const auto& y) { return x.eps < y.eps; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].eps == sorted[i - 1].eps) continue;
    if (!(sorted[i].pi_cr < sorted[i - 1].pi_cr) ||
        !(sorted[i].decay_time > sorted[i - 1].decay_time)) {
      throw std::logic_error("singular_limit_scan: monotonicity in eps violated");
    }
  }
  return rows;
}

}  // namespace accelwave

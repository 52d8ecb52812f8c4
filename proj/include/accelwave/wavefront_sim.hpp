#pragma once

// Finite-volume solver for the full balance system in Lagrangian variables,
//
//   (rho* v)_t - (T(F) + sigma)_X = 0,  F_t - v_X = 0,  (omega sigma)_t - v_X = P,
//
// used as an independent check of the acceleration-wave amplitude law. A
// derivative jump pi0 * d is launched along the +lambda characteristic into
// the equilibrium (0, 1, 0) and the slope jump at the front is measured as the
// wave propagates.
//
// Scheme: MUSCL-Hancock (minmod-limited primitive slopes, half-step
// predictor) with a Rusanov flux for the homogeneous part, Strang splitting
// for the source, zero-gradient boundaries.

#include <algorithm>
#include <array>
#include <utility>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "accelwave/amplitude.hpp"
#include "accelwave/characteristics.hpp"
#include "accelwave/constitutive.hpp"
#include "accelwave/errors.hpp"

namespace accelwave {

struct Grid {
  double x_min = 0.0;
  double x_max = 1.0;
  std::size_t n_cells = 100;
  double cfl = 0.8;

  double dx() const { return (x_max - x_min) / static_cast<double>(n_cells); }
  double center(std::size_t i) const { return x_min + (static_cast<double>(i) + 0.5) * dx(); }

  void validate() const {
    if (!(x_max > x_min)) throw std::invalid_argument("grid: x_max must exceed x_min");
    if (n_cells < 16) throw std::invalid_argument("grid: n_cells must be >= 16");
    if (!(cfl > 0.0 && cfl < 1.0)) throw std::invalid_argument("grid: cfl must lie in (0, 1)");
  }
};

/// Piecewise-linear initial data: equilibrium ahead of x_front, u - u_E =
/// pi0 d (X - x_front) over ramp_width behind it, then back to equilibrium
/// linearly over another ramp_width so the disturbance has compact support.
struct KinkIC {
  double x_front = 0.0;
  double pi0 = 0.0;
  double ramp_width = 0.0;
};

struct SimOptions {
  double output_every = 0.0;  // <= 0: only the final time
  /// Replace T(F) by its tangent at F = 1 (a = 0 surrogate).
  bool linearize_elastic = false;
  /// Drop the production term (b = 0 surrogate).
  bool disable_production = false;
  bool keep_snapshots = false;
  /// Front stencil; when unset, adaptive_front_stencil() picks it per sample.
  std::optional<std::size_t> stencil_half_width;
  std::optional<std::size_t> stencil_gap;
  /// Degree of the fit behind the front (1 = line, 2 = quadratic).
  int behind_degree = 2;
};

struct Snapshot {
  double t = 0.0;
  std::vector<double> x;
  std::vector<double> v;
  std::vector<double> F;
  std::vector<double> sigma;
};

struct FrontSample {
  double t = 0.0;
  double measured_pi = 0.0;
  double predicted_pi = 0.0;  // NaN past the predicted blow-up time
  double front_x = 0.0;       // measured
  double predicted_front_x = 0.0;
  double energy = 0.0;
};

struct FrontTrace {
  std::vector<FrontSample> samples;
  std::optional<double> steepening_time;
};

/// Discrete energy bookkeeping. Energy is the relative supplementary energy
/// rho* v^2/2 + [W(F) - W(1) - T(1)(F - 1)] + omega sigma^2/2 summed over cells.
struct EnergyAudit {
  double initial_energy = 0.0;
  double boundary_work = 0.0;  // energy supplied through the boundaries
  /// max over steps of (E_{n+1} - E_n - boundary work) / E_0
  double max_relative_step_increase = -std::numeric_limits<double>::infinity();
  std::size_t dissipation_violations = 0;  // cells with sigma P > 0 at output times
  std::size_t steps = 0;
};

struct SimulationResult {
  FrontTrace trace;
  Snapshot final_snapshot;
  std::vector<Snapshot> snapshots;
  EnergyAudit audit;
  double lambda0 = 0.0;
};

namespace detail {

inline double minmod(double a, double b) {
  if (a * b <= 0.0) return 0.0;
  return std::abs(a) < std::abs(b) ? a : b;
}

/// Constitutive closure seen by the solver, with the surrogate switches.
class BalanceLaw {
 public:
  BalanceLaw(const MaterialModel& model, const SimOptions& options)
      : model_(model),
        rho_(reference_density(model)),
        omega_(viscous_omega(model)),
        linear_(options.linearize_elastic),
        no_source_(options.disable_production),
        tangent_ref_(elastic_derivs(model, 1.0).W2),
        stress_ref_(elastic_stress(model, 1.0)) {}

  double rho() const { return rho_; }
  double omega() const { return omega_; }
  const MaterialModel& model() const { return model_; }

  double stress(double F) const {
    if (linear_) return tangent_ref_ * (F - 1.0);
    return elastic_stress(model_, F);
  }

  double speed(double F) const {
    const double W2 = linear_ ? tangent_ref_ : elastic_derivs(model_, F).W2;
    const double q = omega_ * W2 + 1.0;
    if (!(q > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return std::sqrt(q / (rho_ * omega_));
  }

  /// W(F) - W(1) - T(1)(F - 1), the convex part of the elastic energy.
  double potential(double F) const {
    const double e = F - 1.0;
    if (linear_) return 0.5 * tangent_ref_ * e * e;
    return elastic_derivs(model_, F).W - stress_ref_ * e;
  }

  double reference_stress() const { return linear_ ? 0.0 : stress_ref_; }

  double production(double F, double sigma) const {
    if (no_source_) return 0.0;
    return accelwave::production(model_, F, sigma);
  }

  /// Advance omega sigma_t = P(F, sigma) by h at frozen F.
  double relax(double F, double sigma, double h) const {
    if (no_source_ || sigma == 0.0) return sigma;
    return std::visit(
        Overloaded{[&](const SolidParams& s) {
                     return sigma * std::exp(-h * std::pow(F, 1.0 + 2.0 * s.nu_bar()) / s.tau0);
                   },
                   [&](const FluidParams& f) {
                     return std::visit(
                         Overloaded{[&](const Newtonian&) { return power_law(F, sigma, h, f.mu0, 1.0); },
                                    [&](const PowerLaw& p) {
                                      return power_law(F, sigma, h, p.k_cons, p.m);
                                    },
                                    [&](const RegularizedPowerLaw&) { return implicit(F, sigma, h); }},
                         f.production);
                   }},
        model_);
  }

 private:
  // omega sigma_t = -F c sign(sigma) |sigma|^(1/m), solved exactly.
  double power_law(double F, double sigma, double h, double k, double m) const {
    if (m == 1.0) return sigma * std::exp(-h * F / (k * omega_));
    const double rate = F * power_law_coefficient(k, m) / omega_;
    const double p = 1.0 / m;
    const double y = std::pow(std::abs(sigma), 1.0 - p) - (1.0 - p) * rate * h;
    if (!(y > 0.0)) return 0.0;  // finite-time extinction (m > 1)
    return std::copysign(std::pow(y, 1.0 / (1.0 - p)), sigma);
  }

  // Backward Euler omega (s - sigma) = h P(F, s), bracketed Newton on the
  // interval between 0 and sigma, where the root must lie.
  double implicit(double F, double sigma, double h) const {
    auto g = [&](double s) { return omega_ * (s - sigma) - h * accelwave::production(model_, F, s); };
    auto dg = [&](double s) {
      const auto j = production_jacobian(model_, F, s);
      return omega_ - h * j.P_sigma.value();
    };
    double lo = std::min(0.0, sigma);
    double hi = std::max(0.0, sigma);
    const double eps = std::get<RegularizedPowerLaw>(std::get<FluidParams>(model_).production).eps;
    auto safe = [&](double s) {
      return s == -eps ? std::nextafter(s, 0.0) : s;
    };
    double g_lo = g(safe(lo));
    double s = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
      s = safe(s);
      const double gs = g(s);
      if (gs == 0.0) return s;
      if ((gs < 0.0) == (g_lo < 0.0)) {
        lo = s;
        g_lo = gs;
      } else {
        hi = s;
      }
      const double slope = dg(s);
      double next = s - gs / slope;
      if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
      if (std::abs(next - s) <= 1e-15 * std::max(std::abs(s), 1e-300) || hi - lo <= 1e-15 * std::abs(hi)) {
        return safe(next);
      }
      s = next;
    }
    return safe(s);
  }

  MaterialModel model_;
  double rho_;
  double omega_;
  bool linear_;
  bool no_source_;
  double tangent_ref_;
  double stress_ref_;
};

/// Exact cell average of the compact tent profile s(X) (see KinkIC).
inline double tent_average(double a, double b, const KinkIC& ic) {
  const double x0 = ic.x_front;
  const double w = ic.ramp_width;
  auto shape = [&](double x) {
    if (x >= x0) return 0.0;
    if (x >= x0 - w) return x - x0;
    if (x >= x0 - 2.0 * w) return x0 - 2.0 * w - x;
    return 0.0;
  };
  // Split at the kinks; the midpoint rule is exact on each linear piece.
  double pts[5] = {a, x0 - 2.0 * w, x0 - w, x0, b};
  std::sort(pts + 1, pts + 4);
  double sum = 0.0;
  double prev = a;
  for (int k = 1; k < 5; ++k) {
    const double q = std::clamp(pts[k], a, b);
    if (q > prev) {
      sum += (q - prev) * shape(0.5 * (prev + q));
      prev = q;
    }
  }
  return sum / (b - a);
}

}  // namespace detail

struct FrontFit {
  double slope_behind = 0.0;  // dv/dX of the behind fit at front_x
  double slope_ahead = 0.0;
  double front_x = 0.0;  // where the two fits meet
};

namespace detail {

// Least-squares polynomial of degree <= 2 through (x_i - x_ref, y_i);
// coefficients c0 + c1 s + c2 s^2.
inline std::array<double, 3> polyfit(const std::vector<double>& x, const std::vector<double>& y,
                                     std::size_t first, std::size_t count, double x_ref,
                                     int degree) {
  const int m = degree + 1;
  double A[3][4] = {};
  for (std::size_t i = first; i < first + count; ++i) {
    const double s = x[i] - x_ref;
    const double pw[3] = {1.0, s, s * s};
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < m; ++c) A[r][c] += pw[r] * pw[c];
      A[r][m] += pw[r] * y[i];
    }
  }
  // Gaussian elimination with partial pivoting on the m x m normal equations.
  for (int k = 0; k < m; ++k) {
    int piv = k;
    for (int r = k + 1; r < m; ++r) {
      if (std::abs(A[r][k]) > std::abs(A[piv][k])) piv = r;
    }
    for (int c = 0; c <= m; ++c) std::swap(A[k][c], A[piv][c]);
    for (int r = k + 1; r < m; ++r) {
      const double f = A[r][k] / A[k][k];
      for (int c = k; c <= m; ++c) A[r][c] -= f * A[k][c];
    }
  }
  std::array<double, 3> coef{};
  for (int k = m - 1; k >= 0; --k) {
    double sum = A[k][m];
    for (int c = k + 1; c < m; ++c) sum -= A[k][c] * coef[c];
    coef[k] = sum / A[k][k];
  }
  return coef;
}

}  // namespace detail

/// Fits v on each side of the cell containing front_x over `half_width`
/// cells, skipping `gap` cells next to it: a line ahead, a polynomial of
/// degree `behind_degree` (1 or 2) behind. The front is placed where the two
/// fits meet and the behind slope is evaluated there.
inline FrontFit fit_front(const Snapshot& snap, double front_x, std::size_t half_width,
                          std::size_t gap = 0, int behind_degree = 1) {
  const std::size_t n = snap.x.size();
  if (behind_degree < 1 || behind_degree > 2) throw std::invalid_argument("fit_front: degree must be 1 or 2");
  if (n < 2 || half_width < static_cast<std::size_t>(behind_degree) + 1) {
    throw std::invalid_argument("fit_front: stencil too small for the fit degree");
  }
  const double dx = snap.x[1] - snap.x[0];
  const double x_lo = snap.x[0] - 0.5 * dx;
  const double pos = std::floor((front_x - x_lo) / dx);
  const double reach = static_cast<double>(half_width + gap);
  if (!(pos - reach >= 0.0) || !(pos + reach < static_cast<double>(n))) {
    throw std::out_of_range("fit_front: front too close to the boundary");
  }
  const auto j = static_cast<std::size_t>(pos);
  const double xr = snap.x[j];

  const auto behind = detail::polyfit(snap.x, snap.v, j - gap - half_width, half_width, xr, behind_degree);
  const auto ahead = detail::polyfit(snap.x, snap.v, j + gap + 1, half_width, xr, 1);

  // Solve behind(s) = ahead(s) for the root nearest the cell centre.
  const double qa = behind[2];
  const double qb = behind[1] - ahead[1];
  const double qc = behind[0] - ahead[0];
  double s = std::numeric_limits<double>::quiet_NaN();
  if (qa == 0.0) {
    if (qb != 0.0) s = -qc / qb;
  } else {
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc >= 0.0) {
      const double root = std::sqrt(disc);
      // numerically stable pair of roots
      const double q = -0.5 * (qb + std::copysign(root, qb));
      const double r1 = q / qa;
      const double r2 = q != 0.0 ? qc / q : r1;
      s = std::abs(r1) < std::abs(r2) ? r1 : r2;
    }
  }
  if (!std::isfinite(s) || std::abs(s) > reach * dx) s = front_x - xr;

  FrontFit out;
  out.front_x = xr + s;
  out.slope_behind = behind[1] + 2.0 * behind[2] * s;
  out.slope_ahead = ahead[1];
  return out;
}

/// Acceleration jump pi = -lambda0 (slope_behind - slope_ahead) of v at the
/// front, from one-sided linear fits.
inline double measure_front_slope(const Snapshot& snap, double front_x, std::size_t half_width,
                                  double lambda0, std::size_t gap = 0) {
  const FrontFit f = fit_front(snap, front_x, half_width, gap, 1);
  return -lambda0 * (f.slope_behind - f.slope_ahead);
}

/// Stencil (gap, half width) in cells that clears the numerical smearing of a
/// kink after it has travelled lambda0 * t: the smeared zone of the limited
/// second-order scheme grows like (dx^2 lambda0 t)^(1/3).
inline std::pair<std::size_t, std::size_t> adaptive_front_stencil(double dx, double lambda0,
                                                                  double t) {
  const double smear = 2.0 * std::cbrt(dx * dx * lambda0 * t);
  const auto gap = static_cast<std::size_t>(std::ceil(smear / dx)) + 2;
  return {gap, std::max<std::size_t>(6, gap)};
}

struct EnergyReport {
  double total = 0.0;
  bool dissipative = true;       // sigma P <= 0 in every cell
  double max_sigma_P = -std::numeric_limits<double>::infinity();
};

/// Total relative energy of a snapshot and the cellwise sign of sigma P.
inline EnergyReport entropy_monitor(const MaterialModel& model, const Snapshot& snap,
                                    const SimOptions& options = {}) {
  const detail::BalanceLaw law(model, options);
  EnergyReport r;
  const double dx = snap.x.size() > 1 ? snap.x[1] - snap.x[0] : 1.0;
  double total = 0.0;
  for (std::size_t i = 0; i < snap.x.size(); ++i) {
    total += 0.5 * law.rho() * snap.v[i] * snap.v[i] + law.potential(snap.F[i]) +
             0.5 * law.omega() * snap.sigma[i] * snap.sigma[i];
    const double sp = snap.sigma[i] * law.production(snap.F[i], snap.sigma[i]);
    r.max_sigma_P = std::max(r.max_sigma_P, sp);
    if (sp > 0.0) r.dissipative = false;
  }
  r.total = total * dx;
  return r;
}

namespace detail {

class FiniteVolumeSolver {
 public:
  static constexpr std::size_t kGhost = 2;

  FiniteVolumeSolver(const MaterialModel& model, const Grid& grid, const SimOptions& options)
      : law_(model, options), grid_(grid), n_(grid.n_cells), dx_(grid.dx()) {
    const std::size_t total = n_ + 2 * kGhost;
    v_.assign(total, 0.0);
    F_.assign(total, 1.0);
    s_.assign(total, 0.0);
    for (auto* w : {&wl_, &wr_}) w->assign(total, State{});
    flux_.assign(total, Flux{});
  }

  void initialize(const KinkIC& ic, const Vector3& d) {
    for (std::size_t i = 0; i < n_; ++i) {
      const double a = grid_.x_min + static_cast<double>(i) * dx_;
      const double shape = tent_average(a, a + dx_, ic);
      v_[i + kGhost] = ic.pi0 * d[0] * shape;
      F_[i + kGhost] = 1.0 + ic.pi0 * d[1] * shape;
      s_[i + kGhost] = ic.pi0 * d[2] * shape;
    }
  }

  double max_speed() const {
    double m = 0.0;
    for (std::size_t i = kGhost; i < n_ + kGhost; ++i) {
      const double c = law_.speed(F_[i]);
      if (!std::isfinite(c)) throw SimulationError("hyperbolicity lost", t_, i - kGhost);
      m = std::max(m, c);
    }
    return m;
  }

  double stable_dt() const { return grid_.cfl * dx_ / max_speed(); }

  /// Strang-split step of size dt. Returns the boundary energy supply.
  double step(double dt) {
    relax_all(0.5 * dt);
    const double work = hyperbolic(dt);
    relax_all(0.5 * dt);
    t_ += dt;
    check_finite();
    return work;
  }

  double energy() const {
    double e = 0.0;
    for (std::size_t i = kGhost; i < n_ + kGhost; ++i) {
      e += 0.5 * law_.rho() * v_[i] * v_[i] + law_.potential(F_[i]) +
           0.5 * law_.omega() * s_[i] * s_[i];
    }
    return e * dx_;
  }

  double max_velocity_gradient() const {
    double m = 0.0;
    for (std::size_t i = kGhost; i + 1 < n_ + kGhost; ++i) {
      m = std::max(m, std::abs(v_[i + 1] - v_[i]) / dx_);
    }
    return m;
  }

  std::size_t dissipation_violations() const {
    std::size_t count = 0;
    for (std::size_t i = kGhost; i < n_ + kGhost; ++i) {
      if (s_[i] * law_.production(F_[i], s_[i]) > 0.0) ++count;
    }
    return count;
  }

  Snapshot snapshot() const {
    Snapshot s;
    s.t = t_;
    s.x.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) s.x[i] = grid_.center(i);
    s.v.assign(v_.begin() + kGhost, v_.begin() + kGhost + n_);
    s.F.assign(F_.begin() + kGhost, F_.begin() + kGhost + n_);
    s.sigma.assign(s_.begin() + kGhost, s_.begin() + kGhost + n_);
    return s;
  }

  double time() const { return t_; }
  /// Pins the clock to an output time after a step that was sized to reach it.
  void snap_time(double t) { t_ = t; }

 private:
  struct State {
    double v = 0.0, F = 1.0, s = 0.0;
  };
  struct Flux {
    double m = 0.0, F = 0.0, z = 0.0;
  };

  // Flux G(u) = (-(T(F) + sigma), -v, -v) of the conserved (rho* v, F, omega sigma).
  Flux physical_flux(const State& w) const {
    return {-(law_.stress(w.F) + w.s), -w.v, -w.v};
  }

  void fill_ghosts() {
    for (std::size_t g = 0; g < kGhost; ++g) {
      v_[g] = v_[kGhost];
      F_[g] = F_[kGhost];
      s_[g] = s_[kGhost];
      const std::size_t r = n_ + kGhost + g;
      v_[r] = v_[n_ + kGhost - 1];
      F_[r] = F_[n_ + kGhost - 1];
      s_[r] = s_[n_ + kGhost - 1];
    }
  }

  void relax_all(double h) {
    for (std::size_t i = kGhost; i < n_ + kGhost; ++i) s_[i] = law_.relax(F_[i], s_[i], h);
  }

  double hyperbolic(double dt) {
    fill_ghosts();
    const double half = 0.5 * dt / dx_;
    const double rho = law_.rho();
    const double omega = law_.omega();

    // Limited reconstruction and half-step predictor on cells 1 .. N+2.
    for (std::size_t i = 1; i + 1 < n_ + 2 * kGhost; ++i) {
      const double dv = minmod(v_[i] - v_[i - 1], v_[i + 1] - v_[i]);
      const double dF = minmod(F_[i] - F_[i - 1], F_[i + 1] - F_[i]);
      const double ds = minmod(s_[i] - s_[i - 1], s_[i + 1] - s_[i]);
      State L{v_[i] - 0.5 * dv, F_[i] - 0.5 * dF, s_[i] - 0.5 * ds};
      State R{v_[i] + 0.5 * dv, F_[i] + 0.5 * dF, s_[i] + 0.5 * ds};
      if (!(L.F > 0.0) || !(R.F > 0.0)) {
        throw SimulationError("non-positive F in reconstruction", t_, i - std::min(i, kGhost));
      }
      const Flux gL = physical_flux(L);
      const Flux gR = physical_flux(R);
      const double dm = half * (gL.m - gR.m);
      const double dFF = half * (gL.F - gR.F);
      const double dz = half * (gL.z - gR.z);
      for (State* w : {&L, &R}) {
        w->v += dm / rho;
        w->F += dFF;
        w->s += dz / omega;
      }
      wl_[i] = L;
      wr_[i] = R;
    }

    // Rusanov fluxes at faces i+1/2 for i = 1 .. N+1.
    const double ratio = dt / dx_;
    for (std::size_t i = 1; i + 2 < n_ + 2 * kGhost; ++i) {
      const State& a = wr_[i];
      const State& b = wl_[i + 1];
      const double ca = law_.speed(a.F);
      const double cb = law_.speed(b.F);
      if (!std::isfinite(ca) || !std::isfinite(cb)) {
        throw SimulationError("hyperbolicity lost at interface", t_, i - std::min(i, kGhost));
      }
      const double c = std::max(ca, cb);
      if (c * ratio > 1.0) throw SimulationError("CFL violation", t_, i - std::min(i, kGhost));
      const Flux ga = physical_flux(a);
      const Flux gb = physical_flux(b);
      flux_[i] = {0.5 * (ga.m + gb.m) - 0.5 * c * rho * (b.v - a.v),
                  0.5 * (ga.F + gb.F) - 0.5 * c * (b.F - a.F),
                  0.5 * (ga.z + gb.z) - 0.5 * c * omega * (b.s - a.s)};
    }

    // Energy entering through the boundaries over the step, d/dt E =
    // [(T - T(1) + sigma) v]_left^right, with the traction and velocity taken
    // from the numerical fluxes at the two boundary faces.
    auto face_power = [&](const Flux& f) { return (-f.m - law_.reference_stress()) * (-f.F); };
    const double work = dt * (face_power(flux_[n_ + kGhost - 1]) - face_power(flux_[kGhost - 1]));
    for (std::size_t i = kGhost; i < n_ + kGhost; ++i) {
      const Flux& fl = flux_[i - 1];
      const Flux& fr = flux_[i];
      v_[i] -= ratio * (fr.m - fl.m) / rho;
      F_[i] -= ratio * (fr.F - fl.F);
      s_[i] -= ratio * (fr.z - fl.z) / omega;
    }
    return work;
  }

  void check_finite() const {
    for (std::size_t i = kGhost; i < n_ + kGhost; ++i) {
      if (!std::isfinite(v_[i]) || !std::isfinite(F_[i]) || !std::isfinite(s_[i])) {
        throw SimulationError("non-finite state", t_, i - kGhost);
      }
      if (!(F_[i] > 0.0)) throw SimulationError("non-positive F", t_, i - kGhost);
    }
  }

  BalanceLaw law_;
  Grid grid_;
  std::size_t n_;
  double dx_;
  double t_ = 0.0;
  std::vector<double> v_, F_, s_;
  std::vector<State> wl_, wr_;
  std::vector<Flux> flux_;
};

}  // namespace detail

/// Runs the front experiment up to t_end. The amplitude reference uses the
/// coefficients of the (possibly surrogate) model: a = 0 when the elastic part
/// is linearized, b = 0 when production is disabled.
inline SimulationResult simulate(const MaterialModel& model, const Grid& grid, const KinkIC& ic,
                                 double t_end, const SimOptions& options = {}) {
  validate(model);
  grid.validate();
  if (!(t_end >= 0.0)) throw std::invalid_argument("simulate: t_end must be >= 0");
  if (!(ic.ramp_width > 0.0)) throw std::invalid_argument("simulate: ramp_width must be positive");

  const auto eq = eigensystem(model, kEquilibrium);
  const double lambda0 = eq.lambda;
  const WaveCoefficients coeff = coefficients_ab(model);
  const double a_ref = options.linearize_elastic ? 0.0 : coeff.a;
  const ExtendedReal b_ref = options.disable_production ? ExtendedReal(0.0) : coeff.b;

  detail::FiniteVolumeSolver solver(model, grid, options);
  solver.initialize(ic, eq.d_plus);

  SimulationResult result;
  result.lambda0 = lambda0;
  EnergyAudit& audit = result.audit;
  audit.initial_energy = solver.energy();
  const double energy_scale = audit.initial_energy > 0.0 ? audit.initial_energy : 1.0;
  const double initial_gradient = solver.max_velocity_gradient();

  auto predicted = [&](double t) {
    if (a_ref == 0.0) {
      if (b_ref.is_infinite()) return t == 0.0 ? ic.pi0 : 0.0;
      return ic.pi0 * std::exp(-b_ref.value() * t);
    }
    try {
      return closed_form(a_ref, b_ref, ic.pi0, t);
    } catch (const std::domain_error&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };

  auto record = [&](double energy) {
    Snapshot snap = solver.snapshot();
    FrontSample s;
    s.t = snap.t;
    s.predicted_pi = predicted(snap.t);
    s.predicted_front_x = ic.x_front + lambda0 * snap.t;
    s.energy = energy;
    s.front_x = s.predicted_front_x;
    s.measured_pi = std::numeric_limits<double>::quiet_NaN();
    const auto [auto_gap, auto_width] = adaptive_front_stencil(grid.dx(), lambda0, snap.t);
    const std::size_t gap = options.stencil_gap.value_or(auto_gap);
    const std::size_t width = options.stencil_half_width.value_or(auto_width);
    try {
      FrontFit fit = fit_front(snap, s.predicted_front_x, width, gap, options.behind_degree);
      fit = fit_front(snap, fit.front_x, width, gap, options.behind_degree);
      s.front_x = fit.front_x;
      s.measured_pi = -lambda0 * (fit.slope_behind - fit.slope_ahead);
    } catch (const std::out_of_range&) {
      // front left the domain; keep NaN
    }
    result.trace.samples.push_back(s);
    audit.dissipation_violations += solver.dissipation_violations();
    if (options.keep_snapshots) result.snapshots.push_back(std::move(snap));
  };

  double energy = audit.initial_energy;
  record(energy);
  const double every = options.output_every > 0.0 ? options.output_every : t_end;
  std::size_t output_index = 1;
  while (solver.time() < t_end) {
    const double t_out = std::min(t_end, static_cast<double>(output_index) * every);
    double dt = solver.stable_dt();
    bool hits_output = false;
    if (solver.time() + dt >= t_out) {
      dt = t_out - solver.time();
      hits_output = true;
    }
    if (!(dt > 0.0)) {  // round-off at an output time
      ++output_index;
      continue;
    }
    const double work = solver.step(dt);
    audit.boundary_work += work;
    ++audit.steps;
    const double next_energy = solver.energy();
    audit.max_relative_step_increase =
        std::max(audit.max_relative_step_increase, (next_energy - energy - work) / energy_scale);
    energy = next_energy;

    if (!result.trace.steepening_time && initial_gradient > 0.0 &&
        solver.max_velocity_gradient() > 10.0 * initial_gradient) {
      result.trace.steepening_time = solver.time();
    }
    if (hits_output) {
      solver.snap_time(t_out);
      record(energy);
      ++output_index;
    }
  }
  result.final_snapshot = solver.snapshot();
  return result;
}

}  // namespace accelwave

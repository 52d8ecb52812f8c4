#pragma once

// Characteristic structure of the quasilinear form u_t + A(u) u_X = f(u),
// u = (v, F, sigma), f = (0, 0, P / omega), and the coefficients of the
// amplitude equation dPi/dt + a Pi^2 + b Pi = 0 at the equilibrium
// (v, F, sigma) = (0, 1, 0).

#include <array>
#include <cmath>
#include <optional>
#include <variant>

#include "accelwave/constitutive.hpp"
#include "accelwave/errors.hpp"
#include "accelwave/extended_real.hpp"

namespace accelwave {

using Vector3 = std::array<double, 3>;
using Matrix3 = std::array<Vector3, 3>;

struct StateVector {
  double v = 0.0;
  double F = 1.0;
  double sigma = 0.0;
};

inline constexpr StateVector kEquilibrium{0.0, 1.0, 0.0};

inline double dot(const Vector3& x, const Vector3& y) {
  return x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
}

inline Vector3 multiply(const Matrix3& A, const Vector3& x) {
  return {dot(A[0], x), dot(A[1], x), dot(A[2], x)};
}

/// Row vector times matrix, l^T A.
inline Vector3 multiply(const Vector3& l, const Matrix3& A) {
  Vector3 r{};
  for (int j = 0; j < 3; ++j) r[j] = l[0] * A[0][j] + l[1] * A[1][j] + l[2] * A[2][j];
  return r;
}

inline double norm(const Vector3& x) { return std::sqrt(dot(x, x)); }

inline double determinant(const Matrix3& A) {
  return A[0][0] * (A[1][1] * A[2][2] - A[1][2] * A[2][1]) -
         A[0][1] * (A[1][0] * A[2][2] - A[1][2] * A[2][0]) +
         A[0][2] * (A[1][0] * A[2][1] - A[1][1] * A[2][0]);
}

inline Matrix3 quasilinear_matrix(const MaterialModel& model, const StateVector& state) {
  const double rho = reference_density(model);
  const double W2 = elastic_derivs(model, state.F).W2;
  const double omega = viscous_omega(model, state.sigma);
  return Matrix3{Vector3{0.0, -W2 / rho, -1.0 / rho}, Vector3{-1.0, 0.0, 0.0},
                 Vector3{-1.0 / omega, 0.0, 0.0}};
}

/// lambda = sqrt((omega W'' + 1) / (rho* omega)); throws NumericalError when
/// hyperbolicity is lost.
inline double characteristic_speed(const MaterialModel& model, double F, double sigma = 0.0) {
  const double omega = viscous_omega(model, sigma);
  const double W2 = elastic_derivs(model, F).W2;
  const double q = omega * W2 + 1.0;
  if (!(q > 0.0)) throw NumericalError("hyperbolicity lost: omega W'' + 1 <= 0");
  return std::sqrt(q / (reference_density(model) * omega));
}

/// Right/left eigenpair of one characteristic family, normalized l.d = 1.
struct Eigenpair {
  double speed = 0.0;
  Vector3 d{};
  Vector3 l{};
};

struct Eigensystem {
  double lambda = 0.0;
  Vector3 d_plus{};
  Vector3 l_plus{};
  std::array<double, 3> speeds{};  // {-lambda, 0, +lambda}
};

namespace detail {

// d(mu) = (1/mu)(-1, 1/mu, 1/(mu omega)), l(mu) = 1/2 (-mu, W''/rho*, 1/rho*)
// for mu = +-lambda.
inline Eigenpair acoustic_pair(double mu, double W2, double rho, double omega) {
  return {mu, Vector3{-1.0 / mu, 1.0 / (mu * mu), 1.0 / (mu * mu * omega)},
          Vector3{-0.5 * mu, 0.5 * W2 / rho, 0.5 / rho}};
}

}  // namespace detail

inline Eigensystem eigensystem(const MaterialModel& model, const StateVector& state) {
  const double lambda = characteristic_speed(model, state.F, state.sigma);
  const double rho = reference_density(model);
  const double W2 = elastic_derivs(model, state.F).W2;
  const double omega = viscous_omega(model, state.sigma);
  const Eigenpair plus = detail::acoustic_pair(lambda, W2, rho, omega);
  return {lambda, plus.d, plus.l, {-lambda, 0.0, lambda}};
}

/// Eigenpairs of the families ordered (-lambda, 0, +lambda). The contact
/// family uses d = (0, 1, -W''), l = (0, 1/omega, -1) / (W'' + 1/omega).
inline std::array<Eigenpair, 3> eigenpairs(const MaterialModel& model, const StateVector& state) {
  const double lambda = characteristic_speed(model, state.F, state.sigma);
  const double rho = reference_density(model);
  const double W2 = elastic_derivs(model, state.F).W2;
  const double omega = viscous_omega(model, state.sigma);
  const double norm0 = W2 + 1.0 / omega;
  Eigenpair contact{0.0, Vector3{0.0, 1.0, -W2}, Vector3{0.0, 1.0 / (omega * norm0), -1.0 / norm0}};
  return {detail::acoustic_pair(-lambda, W2, rho, omega), contact,
          detail::acoustic_pair(lambda, W2, rho, omega)};
}

/// Gradient of lambda with respect to (v, F, sigma):
/// (1/(2 lambda rho*)) (0, W''', -omega'/omega^2).
inline Vector3 grad_lambda(const MaterialModel& model, const StateVector& state) {
  const double lambda = characteristic_speed(model, state.F, state.sigma);
  const double rho = reference_density(model);
  const double W3 = elastic_derivs(model, state.F).W3;
  const double omega = viscous_omega(model, state.sigma);
  const double omega_p = viscous_omega_prime(model, state.sigma);
  const double s = 1.0 / (2.0 * lambda * rho);
  return {0.0, s * W3, -s * omega_p / (omega * omega)};
}

/// Nonzero row of grad f, f = (0, 0, P/omega):
/// (0, P_F/omega, (P_sigma omega - P omega') / omega^2). The sigma entry keeps
/// the infinity tag of P_sigma.
struct ProductionGradientRow {
  double dF = 0.0;
  ExtendedReal dsigma;
};

inline ProductionGradientRow production_gradient_row(const MaterialModel& model,
                                                     const StateVector& state) {
  const auto jac = production_jacobian(model, state.F, state.sigma);
  const double omega = viscous_omega(model, state.sigma);
  const double omega_p = viscous_omega_prime(model, state.sigma);
  ProductionGradientRow row;
  row.dF = jac.P_F / omega;
  if (jac.P_sigma.is_finite()) {
    const double P = production(model, state.F, state.sigma);
    row.dsigma = (jac.P_sigma.value() * omega - P * omega_p) / (omega * omega);
  } else {
    row.dsigma = scale(jac.P_sigma, 1.0 / omega);
  }
  return row;
}

// ---------------------------------------------------------------------------
// Amplitude coefficients
// ---------------------------------------------------------------------------

struct DissipativeFinite {};
struct Degenerate {};
/// b(eps) = b0 / eps^n.
struct SingularLimit {
  double n = 0.0;
  double b0 = 0.0;
};
using CaseTag = std::variant<DissipativeFinite, Degenerate, SingularLimit>;

inline const char* case_name(const CaseTag& tag) {
  return std::visit(Overloaded{[](const DissipativeFinite&) { return "dissipative_finite"; },
                               [](const Degenerate&) { return "degenerate"; },
                               [](const SingularLimit&) { return "singular_limit"; }},
                    tag);
}

struct WaveCoefficients {
  double lambda0 = 0.0;  // [m/s]
  double a = 0.0;        // [s/m]
  ExtendedReal b;        // [1/s]
  ExtendedReal pi_cr;    // [m/s^2]
  CaseTag case_tag;
};

namespace detail {

inline std::optional<SingularLimit> singular_limit_params(const MaterialModel& model, double lambda0,
                                                          double omega) {
  const auto* f = std::get_if<FluidParams>(&model);
  if (f == nullptr) return std::nullopt;
  double k = 0.0;
  double m = 0.0;
  if (const auto* p = std::get_if<PowerLaw>(&f->production)) {
    k = p->k_cons;
    m = p->m;
  } else if (const auto* r = std::get_if<RegularizedPowerLaw>(&f->production)) {
    k = r->k_cons;
    m = r->m;
  } else {
    return std::nullopt;
  }
  if (!(m > 1.0)) return std::nullopt;
  const double n = (m - 1.0) / m;
  // P_sigma(1, 0) = -1 / (2^n k^(1/m) eps^n)
  const double b0 =
      1.0 / (std::pow(2.0, n) * std::pow(k, 1.0 / m) * 2.0 * f->rho_star * lambda0 * lambda0 *
             omega * omega);
  return SingularLimit{n, b0};
}

}  // namespace detail

/// Coefficients of the +lambda family at equilibrium:
/// a = (omega^3 W'''(1) - omega') / (2 lambda0^3 rho* omega^3),
/// b = -P_sigma(1,0) / (2 rho* lambda0^2 omega^2), pi_cr = b / |a|.
inline WaveCoefficients coefficients_ab(const MaterialModel& model) {
  const StateVector eq = kEquilibrium;
  const double rho = reference_density(model);
  const double lambda0 = characteristic_speed(model, eq.F, eq.sigma);
  const double W3 = elastic_derivs(model, eq.F).W3;
  const double omega = viscous_omega(model, eq.sigma);
  const double omega_p = viscous_omega_prime(model, eq.sigma);
  const double omega3 = omega * omega * omega;

  WaveCoefficients c;
  c.lambda0 = lambda0;
  c.a = (omega3 * W3 - omega_p) / (2.0 * lambda0 * lambda0 * lambda0 * rho * omega3);
  if (c.a == 0.0) throw NumericalError("fastest characteristic field is linearly degenerate (a = 0)");

  const ExtendedReal P_sigma = production_jacobian(model, eq.F, eq.sigma).P_sigma;
  c.b = scale(P_sigma, -1.0 / (2.0 * rho * lambda0 * lambda0 * omega * omega));
  if (c.b.is_zero()) c.b = 0.0;  // no -0 in reports
  c.pi_cr = c.b.is_finite() ? ExtendedReal(c.b.value() / std::abs(c.a))
                            : ExtendedReal::positive_infinity();

  if (auto singular = detail::singular_limit_params(model, lambda0, omega)) {
    c.case_tag = *singular;
  } else if (P_sigma.is_zero()) {
    c.case_tag = Degenerate{};
  } else {
    c.case_tag = DissipativeFinite{};
  }
  return c;
}

/// a = (grad lambda . d)_E and b = -(l . grad f . d)_E assembled from the
/// eigenvectors, grad lambda and the production Jacobian. Independent of the
/// closed forms in coefficients_ab.
struct AssembledCoefficients {
  double a = 0.0;
  ExtendedReal b;
};

inline AssembledCoefficients assemble_coefficients(const MaterialModel& model) {
  const StateVector eq = kEquilibrium;
  const Eigensystem es = eigensystem(model, eq);
  const Vector3 gl = grad_lambda(model, eq);
  const ProductionGradientRow row = production_gradient_row(model, eq);

  AssembledCoefficients out;
  out.a = dot(gl, es.d_plus);
  // (grad f . d) has only a third component.
  const double l2 = es.l_plus[2];
  const double partial = row.dF * es.d_plus[1];
  if (row.dsigma.is_finite()) {
    const double gfd = partial + row.dsigma.value() * es.d_plus[2];
    out.b = -l2 * gfd;
  } else {
    out.b = scale(row.dsigma, -l2 * es.d_plus[2]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// K-condition
// ---------------------------------------------------------------------------

struct FamilyVerdict {
  double speed = 0.0;
  bool genuinely_nonlinear = false;
  bool grad_f_dot_d_nonzero = false;
};

struct KConditionReport {
  std::array<FamilyVerdict, 3> families{};  // (-lambda, 0, +lambda)
  bool full_K = false;
  bool weak_K = false;
};

inline KConditionReport k_condition(const MaterialModel& model) {
  const StateVector eq = kEquilibrium;
  const auto pairs = eigenpairs(model, eq);
  const Vector3 gl = grad_lambda(model, eq);
  const ProductionGradientRow row = production_gradient_row(model, eq);

  KConditionReport report;
  report.full_K = true;
  report.weak_K = true;
  for (std::size_t i = 0; i < 3; ++i) {
    const Eigenpair& p = pairs[i];
    FamilyVerdict& v = report.families[i];
    v.speed = p.speed;
    // The eigenvalue of family i is -lambda, 0 or +lambda; the contact
    // eigenvalue is identically zero.
    const double sgn = p.speed > 0.0 ? 1.0 : (p.speed < 0.0 ? -1.0 : 0.0);
    v.genuinely_nonlinear = sgn != 0.0 && sgn * dot(gl, p.d) != 0.0;

    const double partial = row.dF * p.d[1];
    if (row.dsigma.is_finite()) {
      v.grad_f_dot_d_nonzero = partial + row.dsigma.value() * p.d[2] != 0.0;
    } else {
      v.grad_f_dot_d_nonzero = p.d[2] != 0.0;
    }
    report.full_K = report.full_K && v.grad_f_dot_d_nonzero;
    if (v.genuinely_nonlinear) report.weak_K = report.weak_K && v.grad_f_dot_d_nonzero;
  }
  return report;
}

}  // namespace accelwave

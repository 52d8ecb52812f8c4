#pragma once

// Constitutive functions of the isothermal relaxation model
//
//   rho* v_t - (T(F) + sigma)_X = 0
//   F_t - v_X = 0
//   Z(sigma)_t - v_X = P(F, sigma)
//
// for viscoelastic solids (quadratic/cubic or Mooney-Rivlin elastic part)
// and isothermal fluids (Newtonian, power-law, regularized power-law
// production). The viscous energy is quadratic throughout, so
// omega = rho* e_V'(sigma) / sigma is a constant and Z(sigma) = omega sigma.
// All quantities are SI.

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "accelwave/extended_real.hpp"
#include "accelwave/jet.hpp"

namespace accelwave {

// ---------------------------------------------------------------------------
// Material parameters
// ---------------------------------------------------------------------------

/// W(F) = E1/2 (F-1)^2 - E1 R/3 (F-1)^3.
struct QuadraticCubic {
  double R = 0.0;
  /// Poisson ratio entering mu(F) = mu0 / F^(1 + 2 nu_bar).
  double nu_bar = 0.5;
};

/// Compressible Mooney-Rivlin energy C1 (I1b - 3) + C2 (I2b - 3) + k/2 (J-1)^2
/// restricted to the uniaxial path F = diag(F, Fp, Fp), Fp = F^(-nu_bar).
struct MooneyRivlin {
  double C1 = 0.0;
  double C2 = 0.0;
  double k_bulk = 0.0;
  double nu_bar = 0.5;
};

using ElasticKind = std::variant<QuadraticCubic, MooneyRivlin>;

struct SolidParams {
  double rho_star = 0.0;  // [kg/m^3]
  double E1 = 0.0;        // long-term modulus [Pa]
  double E2 = 0.0;        // short-term modulus [Pa]
  double tau0 = 0.0;      // relaxation time [s]
  ElasticKind elastic = QuadraticCubic{};

  double mu0() const { return E2 * tau0; }
  double nu_bar() const {
    return std::visit([](const auto& e) { return e.nu_bar; }, elastic);
  }
};

struct Newtonian {};

struct PowerLaw {
  double k_cons = 0.0;  // consistency [Pa s^m]
  double m = 1.0;       // flow index
};

struct RegularizedPowerLaw {
  double k_cons = 0.0;
  double m = 2.0;
  double eps = 0.0;  // regularization [Pa]
};

using ProductionKind = std::variant<Newtonian, PowerLaw, RegularizedPowerLaw>;

struct FluidParams {
  double rho_star = 0.0;  // [kg/m^3]
  double R_gas = 0.0;     // isothermal gas constant [m^2/s^2]
  double tau0 = 0.0;      // [s]
  double mu0 = 0.0;       // [Pa s]
  ProductionKind production = Newtonian{};

  /// 1 + mu0 / (R rho* tau0).
  double mu_tilde0() const { return 1.0 + mu0 / (R_gas * rho_star * tau0); }
};

using MaterialModel = std::variant<SolidParams, FluidParams>;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

namespace detail {

inline void require_positive(double x, const char* name) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw std::invalid_argument(std::string(name) + " must be a positive finite number");
  }
}

inline void require_positive_F(double F) {
  if (!(F > 0.0) || !std::isfinite(F)) {
    throw std::invalid_argument("deformation gradient F must be positive");
  }
}

}  // namespace detail

/// Throws std::invalid_argument when a parameter invariant is violated.
inline void validate(const MaterialModel& model) {
  using detail::require_positive;
  std::visit(
      Overloaded{
          [](const SolidParams& s) {
            require_positive(s.rho_star, "rho_star");
            require_positive(s.E1, "E1");
            require_positive(s.E2, "E2");
            require_positive(s.tau0, "tau0");
            std::visit(Overloaded{
                           [](const QuadraticCubic& q) {
                             if (!(q.R >= 0.0) || !std::isfinite(q.R))
                               throw std::invalid_argument("R must be >= 0");
                             if (!(q.nu_bar > 0.0 && q.nu_bar <= 0.5))
                               throw std::invalid_argument("nu_bar must lie in (0, 0.5]");
                           },
                           [](const MooneyRivlin& mr) {
                             if (!(mr.C1 >= 0.0) || !(mr.C2 >= 0.0))
                               throw std::invalid_argument("C1, C2 must be >= 0");
                             require_positive(mr.C1 + mr.C2, "C1 + C2");
                             require_positive(mr.k_bulk, "k_bulk");
                             if (!(mr.nu_bar > 0.0 && mr.nu_bar <= 0.5))
                               throw std::invalid_argument("nu_bar must lie in (0, 0.5]");
                           }},
                       s.elastic);
          },
          [](const FluidParams& f) {
            require_positive(f.rho_star, "rho_star");
            require_positive(f.R_gas, "R_gas");
            require_positive(f.tau0, "tau0");
            require_positive(f.mu0, "mu0");
            std::visit(Overloaded{
                           [](const Newtonian&) {},
                           [](const PowerLaw& p) {
                             require_positive(p.k_cons, "k_cons");
                             require_positive(p.m, "m");
                           },
                           [](const RegularizedPowerLaw& p) {
                             require_positive(p.k_cons, "k_cons");
                             require_positive(p.eps, "eps");
                             if (!(p.m > 1.0) || !std::isfinite(p.m))
                               throw std::invalid_argument("regularized power law requires m > 1");
                           }},
                       f.production);
          }},
      model);
}

inline double reference_density(const MaterialModel& model) {
  return std::visit([](const auto& p) { return p.rho_star; }, model);
}

inline bool is_solid(const MaterialModel& model) {
  return std::holds_alternative<SolidParams>(model);
}

// ---------------------------------------------------------------------------
// Elastic potential
// ---------------------------------------------------------------------------

/// W and its first three derivatives along the uniaxial path.
struct PotentialDerivs {
  double W = 0.0;
  double W1 = 0.0;
  double W2 = 0.0;
  double W3 = 0.0;
};

/// Uniaxial first Piola-Kirchhoff stress of the Mooney-Rivlin energy,
/// T(F) = dW/dF at fixed F_perp, evaluated on F_perp = F^(-nu_bar).
/// Scalar may be double or a Jet for exact derivatives.
template <class Scalar>
Scalar mooney_rivlin_uniaxial_stress(const MooneyRivlin& mr, const Scalar& F) {
  using std::pow;
  const Scalar Fp = pow(F, -mr.nu_bar);
  const Scalar Fp2 = Fp * Fp;
  const Scalar J = F * Fp2;
  const Scalar I1 = F * F + 2.0 * Fp2;
  const Scalar I2 = 2.0 * F * F * Fp2 + Fp2 * Fp2;
  const Scalar dev1 = -(2.0 / 3.0) * pow(J, -5.0 / 3.0) * Fp2 * I1 + 2.0 * F * pow(J, -2.0 / 3.0);
  const Scalar dev2 =
      -(4.0 / 3.0) * pow(J, -7.0 / 3.0) * Fp2 * I2 + 4.0 * F * Fp2 * pow(J, -4.0 / 3.0);
  return mr.C1 * dev1 + mr.C2 * dev2 + mr.k_bulk * (J - 1.0) * Fp2;
}

inline double mooney_rivlin_uniaxial_stress(const SolidParams& params, double F) {
  detail::require_positive_F(F);
  const auto* mr = std::get_if<MooneyRivlin>(&params.elastic);
  if (mr == nullptr) throw std::invalid_argument("solid elastic part is not Mooney-Rivlin");
  return mooney_rivlin_uniaxial_stress(*mr, F);
}

namespace detail {

inline PotentialDerivs mooney_rivlin_derivs(const MooneyRivlin& mr, double F) {
  const auto T = mooney_rivlin_uniaxial_stress(mr, Jet<2>::variable(F));
  PotentialDerivs d;
  d.W1 = T.value();
  d.W2 = T.derivative(1);
  d.W3 = T.derivative(2);
  if (F != 1.0) {
    using Quad = boost::math::quadrature::gauss<double, 30>;
    d.W = Quad::integrate([&](double x) { return mooney_rivlin_uniaxial_stress(mr, x); }, 1.0, F);
  }
  return d;
}

}  // namespace detail

/// W(F) and derivatives to third order. Solids follow the configured elastic
/// part; fluids use W'(F) = -R rho* / F (isothermal ideal gas), W(1) = 0.
inline PotentialDerivs elastic_derivs(const MaterialModel& model, double F) {
  detail::require_positive_F(F);
  return std::visit(
      Overloaded{[F](const SolidParams& s) {
                   return std::visit(
                       Overloaded{[&](const QuadraticCubic& q) {
                                    const double e = F - 1.0;
                                    PotentialDerivs d;
                                    d.W = 0.5 * s.E1 * e * e - s.E1 * q.R * e * e * e / 3.0;
                                    d.W1 = s.E1 * e - s.E1 * q.R * e * e;
                                    d.W2 = s.E1 - 2.0 * s.E1 * q.R * e;
                                    d.W3 = -2.0 * s.E1 * q.R;
                                    return d;
                                  },
                                  [&](const MooneyRivlin& mr) {
                                    return detail::mooney_rivlin_derivs(mr, F);
                                  }},
                       s.elastic);
                 },
                 [F](const FluidParams& f) {
                   const double c = f.R_gas * f.rho_star;
                   PotentialDerivs d;
                   d.W = -c * std::log(F);
                   d.W1 = -c / F;
                   d.W2 = c / (F * F);
                   d.W3 = -2.0 * c / (F * F * F);
                   return d;
                 }},
      model);
}

/// Elastic stress T(F) = W'(F).
inline double elastic_stress(const MaterialModel& model, double F) {
  if (const auto* s = std::get_if<SolidParams>(&model)) {
    if (const auto* mr = std::get_if<MooneyRivlin>(&s->elastic)) {
      detail::require_positive_F(F);
      return mooney_rivlin_uniaxial_stress(*mr, F);
    }
  }
  return elastic_derivs(model, F).W1;
}

// ---------------------------------------------------------------------------
// Viscous energy
// ---------------------------------------------------------------------------

/// omega = rho* e_V'(sigma) / sigma; 1/E2 for solids, tau0/mu0 for fluids.
/// Constant because the viscous energy is quadratic.
inline double viscous_omega(const MaterialModel& model, double /*sigma*/ = 0.0) {
  return std::visit(Overloaded{[](const SolidParams& s) { return 1.0 / s.E2; },
                               [](const FluidParams& f) { return f.tau0 / f.mu0; }},
                    model);
}

inline double viscous_omega_prime(const MaterialModel& /*model*/, double /*sigma*/ = 0.0) {
  return 0.0;
}

/// rho* e_V(sigma) = omega sigma^2 / 2.
inline double viscous_energy_density(const MaterialModel& model, double sigma) {
  return 0.5 * viscous_omega(model) * sigma * sigma;
}

// ---------------------------------------------------------------------------
// Production term
// ---------------------------------------------------------------------------

struct ProductionJacobian {
  double P_F = 0.0;
  ExtendedReal P_sigma;
};

namespace detail {

/// 2^(1/m - 1) k^(-1/m).
inline double power_law_coefficient(double k, double m) {
  return std::pow(2.0, 1.0 / m - 1.0) * std::pow(k, -1.0 / m);
}

// P = -F 2^(1/m-1) k^(-1/m) |s|^((1-m)/m) sigma, s = sigma + shift.
// m == 1 takes the Newtonian form -F sigma / k so both variants agree bitwise.
inline double power_law_production(double F, double sigma, double k, double m, double shift) {
  if (m == 1.0) return -F * sigma / k;
  if (sigma == 0.0) return 0.0;
  const double s = std::abs(sigma + shift);
  if (s == 0.0) throw std::domain_error("regularized production is singular at sigma = -eps");
  return -F * power_law_coefficient(k, m) * std::pow(s, (1.0 - m) / m) * sigma;
}

inline ProductionJacobian power_law_jacobian(double F, double sigma, double k, double m,
                                             double shift) {
  if (m == 1.0) return {-sigma / k, ExtendedReal(-F / k)};
  const double c = power_law_coefficient(k, m);
  const double q = (1.0 - m) / m;
  const double s = sigma + shift;
  if (s == 0.0) {
    if (shift != 0.0) throw std::domain_error("regularized production is singular at sigma = -eps");
    // un-regularized power law at sigma = 0
    if (m < 1.0) return {0.0, ExtendedReal(0.0)};
    return {0.0, ExtendedReal::negative_infinity()};
  }
  const double abs_s = std::abs(s);
  const double sq = std::pow(abs_s, q);
  const double P_F = -c * sq * sigma;
  // d/dsigma [ |s|^q sigma ] = |s|^q + q |s|^(q-1) sign(s) sigma
  const double inner = sq + q * (sq / abs_s) * (s > 0.0 ? 1.0 : -1.0) * sigma;
  return {P_F, ExtendedReal(-F * c * inner)};
}

}  // namespace detail

/// Production P(F, sigma) of the viscous-stress balance law; satisfies
/// sigma P <= 0 and P(F, 0) = 0.
inline double production(const MaterialModel& model, double F, double sigma) {
  detail::require_positive_F(F);
  return std::visit(
      Overloaded{[&](const SolidParams& s) {
                   return -sigma * std::pow(F, 1.0 + 2.0 * s.nu_bar()) / s.mu0();
                 },
                 [&](const FluidParams& f) {
                   return std::visit(
                       Overloaded{[&](const Newtonian&) {
                                    return detail::power_law_production(F, sigma, f.mu0, 1.0, 0.0);
                                  },
                                  [&](const PowerLaw& p) {
                                    return detail::power_law_production(F, sigma, p.k_cons, p.m,
                                                                        0.0);
                                  },
                                  [&](const RegularizedPowerLaw& p) {
                                    return detail::power_law_production(F, sigma, p.k_cons, p.m,
                                                                        p.eps);
                                  }},
                       f.production);
                 }},
      model);
}

/// (dP/dF, dP/dsigma). dP/dsigma of the un-regularized power law with m > 1 at
/// sigma = 0 is returned as a negative-infinity sentinel.
inline ProductionJacobian production_jacobian(const MaterialModel& model, double F, double sigma) {
  detail::require_positive_F(F);
  return std::visit(
      Overloaded{[&](const SolidParams& s) {
                   const double e = 1.0 + 2.0 * s.nu_bar();
                   const double mu0 = s.mu0();
                   return ProductionJacobian{-sigma * e * std::pow(F, e - 1.0) / mu0,
                                             ExtendedReal(-std::pow(F, e) / mu0)};
                 },
                 [&](const FluidParams& f) {
                   return std::visit(
                       Overloaded{[&](const Newtonian&) {
                                    return detail::power_law_jacobian(F, sigma, f.mu0, 1.0, 0.0);
                                  },
                                  [&](const PowerLaw& p) {
                                    return detail::power_law_jacobian(F, sigma, p.k_cons, p.m, 0.0);
                                  },
                                  [&](const RegularizedPowerLaw& p) {
                                    return detail::power_law_jacobian(F, sigma, p.k_cons, p.m,
                                                                      p.eps);
                                  }},
                       f.production);
                 }},
      model);
}

// ---------------------------------------------------------------------------
// Zener reduction
// ---------------------------------------------------------------------------

/// Total stress S = E1 eps + sigma of the linear (Zener) reduction,
/// sigma_t = E2 eps_t - sigma / tau0, driven by a uniformly sampled strain
/// history. The history is piecewise linear between samples; the material is
/// unstrained before the first sample, so S(0) = (E1 + E2) eps(0).
/// Integrated with classic RK4.
inline std::vector<double> zener_relaxation_response(const SolidParams& params,
                                                     std::span<const double> strain, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  std::vector<double> stress;
  if (strain.empty()) return stress;
  stress.reserve(strain.size());

  const double E1 = params.E1;
  const double E2 = params.E2;
  const double tau0 = params.tau0;
  double sigma = E2 * strain[0];
  stress.push_back(E1 * strain[0] + sigma);

  for (std::size_t i = 1; i < strain.size(); ++i) {
    const double rate = (strain[i] - strain[i - 1]) / dt;
    auto rhs = [&](double s) { return E2 * rate - s / tau0; };
    const double k1 = rhs(sigma);
    const double k2 = rhs(sigma + 0.5 * dt * k1);
    const double k3 = rhs(sigma + 0.5 * dt * k2);
    const double k4 = rhs(sigma + dt * k3);
    sigma += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    stress.push_back(E1 * strain[i] + sigma);
  }
  return stress;
}

}  // namespace accelwave

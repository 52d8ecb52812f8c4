#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "accelwave/amplitude.hpp"
#include "accelwave/characteristics.hpp"
#include "test_support.hpp"

namespace accelwave {
namespace {

using testing::rel_err;

const SolidParams kRubber{929.0, 2.12e6, 3.0e6, 0.1, QuadraticCubic{1.63}};

TEST(Classify, RubberSupercritical) {
  const auto c = coefficients_ab(kRubber);
  const auto out = classify(c.a, c.b, 2.0 * c.pi_cr.value());
  ASSERT_FALSE(out.global_existence);
  ASSERT_TRUE(out.t_c.has_value());
  EXPECT_LT(rel_err(*out.t_c, std::log(2.0) / c.b.value()), 1e-14);
  EXPECT_NEAR(*out.t_c, 0.2366, 5e-4);
}

TEST(Classify, ZeroDissipation) {
  const auto out = classify(-0.01, 0.0, 100.0);
  ASSERT_TRUE(out.t_c.has_value());
  EXPECT_DOUBLE_EQ(*out.t_c, 1.0);
  EXPECT_TRUE(out.pi_cr.is_zero());
}

TEST(Classify, NegativeAmplitudeDecays) {
  const auto out = classify(-0.009, 2.93, -50.0);
  EXPECT_TRUE(out.global_existence);
  EXPECT_FALSE(out.t_c.has_value());
}

TEST(Classify, SubcriticalAndInfiniteDissipation) {
  EXPECT_TRUE(classify(-1.0, 1.0, 0.99).global_existence);
  EXPECT_FALSE(classify(-1.0, 1.0, 1.01).global_existence);
  const auto inf = classify(-1.0, ExtendedReal::positive_infinity(), 1e300);
  EXPECT_TRUE(inf.global_existence);
  EXPECT_TRUE(inf.pi_cr.is_infinite());
}

TEST(Classify, MirrorCase) {
  const auto pos = classify(-2.0, 1.0, 3.0);
  const auto neg = classify(2.0, 1.0, -3.0);
  EXPECT_EQ(pos.global_existence, neg.global_existence);
  EXPECT_EQ(*pos.t_c, *neg.t_c);
}

TEST(Classify, Errors) {
  EXPECT_THROW(classify(0.0, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(classify(-1.0, -1.0, 1.0), std::invalid_argument);
}

TEST(ClosedForm, Examples) {
  for (double t : {0.0, 0.5, 10.0}) EXPECT_EQ(closed_form(-3.0, 2.0, 0.0, t), 0.0);
  EXPECT_LT(rel_err(closed_form(-5.0, 1.0, 1e-9, 0.7), 1e-9 * std::exp(-0.7)), 1e-8);
  const double expected = 0.5 * std::exp(-2.0) / (1.0 - 0.5 * (1.0 - std::exp(-2.0)));
  EXPECT_LT(rel_err(closed_form(-1.0, 1.0, 0.5, 2.0), expected), 1e-15);
  EXPECT_NEAR(expected, 0.11920, 1e-5);
}

TEST(ClosedForm, ThrowsAtOrAfterBlowUp) {
  EXPECT_THROW(closed_form(-1.0, 0.0, 1.0, 1.0), std::domain_error);
  EXPECT_THROW(closed_form(-1.0, 0.0, 1.0, 2.0), std::domain_error);
  EXPECT_NO_THROW(closed_form(-1.0, 0.0, 1.0, 0.999));
}

TEST(ClosedFormProperty, ScalingSymmetry) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 500; ++i) {
    const double a = -testing::log_uniform(rng, 1e-3, 10.0);
    const double b = testing::log_uniform(rng, 1e-2, 10.0);
    const double pi0 = testing::uniform(rng, -3.0, 0.9) * b / std::abs(a);
    const double s = testing::log_uniform(rng, 1e-3, 1e3);
    const double t = testing::uniform(rng, 0.0, 5.0 / b);
    EXPECT_LT(rel_err(closed_form(a / s, b, s * pi0, t), s * closed_form(a, b, pi0, t)), 1e-12);
  }
}

TEST(ClosedFormProperty, ZeroDissipationContinuity) {
  std::mt19937_64 rng(37);
  for (int i = 0; i < 200; ++i) {
    const double a = -testing::log_uniform(rng, 1e-2, 10.0);
    const double pi0 = testing::log_uniform(rng, 1e-2, 10.0);
    const double t_c = -1.0 / (a * pi0);
    for (int k = 0; k <= 9; ++k) {
      const double t = 0.1 * k * t_c;
      EXPECT_LE(std::abs(closed_form(a, 1e-12, pi0, t) - closed_form(a, 0.0, pi0, t)), 1e-8);
    }
  }
}

TEST(ClosedFormProperty, SubcriticalDecayBound) {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 200; ++i) {
    const double a = -testing::log_uniform(rng, 1e-3, 10.0);
    const double b = testing::log_uniform(rng, 1e-2, 10.0);
    const double pi_cr = b / std::abs(a);
    const double pi0 = testing::uniform(rng, 0.01, 0.99) * pi_cr;
    double prev = pi0;
    for (int k = 1; k <= 50; ++k) {
      const double t = 0.2 * k / b;
      const double p = closed_form(a, b, pi0, t);
      EXPECT_LT(p, prev);
      EXPECT_GT(p, 0.0);
      EXPECT_LE(p, pi0 * std::exp(-b * t) / (1.0 - pi0 / pi_cr) * (1.0 + 1e-14));
      prev = p;
    }
  }
}

TEST(Integrate, LinearDecay) {
  const auto tr = integrate(0.0, 1.0, 3.0, 5.0, 0.01);
  ASSERT_FALSE(tr.blew_up);
  for (std::size_t i = 0; i < tr.t.size(); ++i) EXPECT_LT(rel_err(tr.pi[i], 3.0 * std::exp(-tr.t[i])), 1e-10);
}

TEST(Integrate, ZeroDissipationBlowUp) {
  const auto tr = integrate(-1.0, 0.0, 1.0, 2.0, 1e-3);
  ASSERT_TRUE(tr.blew_up);
  EXPECT_LT(rel_err(*tr.blowup_time, 1.0), 1e-2);
}

TEST(Integrate, MatchesClosedForm) {
  const auto tr = integrate(-1.0, 1.0, 0.5, 2.0, 2e-5);
  ASSERT_FALSE(tr.blew_up);
  EXPECT_LT(rel_err(tr.pi.back(), closed_form(-1.0, 1.0, 0.5, 2.0)), 1e-8);
  EXPECT_DOUBLE_EQ(tr.t.back(), 2.0);
}

TEST(Integrate, InfiniteDissipation) {
  const auto tr = integrate(-1.0, ExtendedReal::positive_infinity(), 5.0, 1.0, 0.5);
  EXPECT_EQ(tr.pi, (std::vector<double>{5.0, 0.0, 0.0}));
}

TEST(Integrate, RejectsBadStep) { EXPECT_THROW(integrate(-1.0, 1.0, 1.0, 1.0, 0.0), std::invalid_argument); }

TEST(IntegrateProperty, AgreesWithClosedFormAwayFromBlowUp) {
  std::mt19937_64 rng(43);
  for (int i = 0; i < 100; ++i) {
    const double a = -testing::log_uniform(rng, 1e-3, 10.0);
    const double b = testing::log_uniform(rng, 1e-2, 10.0);
    const double pi0 = testing::uniform(rng, -5.0, 3.0) * b / std::abs(a);
    const auto out = classify(a, b, pi0);
    const double t_end = out.t_c ? 0.9 * *out.t_c : 5.0 / b;
    const auto tr = integrate(a, b, pi0, t_end, t_end / 100.0);
    ASSERT_FALSE(tr.blew_up);
    for (std::size_t k = 0; k < tr.t.size(); ++k) {
      EXPECT_LT(rel_err(tr.pi[k], closed_form(a, b, pi0, tr.t[k])), 1e-8) << "case " << i << " t=" << tr.t[k];
    }
  }
}

TEST(IntegrateProperty, BlowUpTimeWithinOnePercent) {
  std::mt19937_64 rng(47);
  for (int i = 0; i < 100; ++i) {
    const double a = -testing::log_uniform(rng, 1e-3, 10.0);
    const double b = (i % 10 == 0) ? 0.0 : testing::log_uniform(rng, 1e-2, 10.0);
    const double pi0 = b > 0.0 ? testing::uniform(rng, 1.05, 20.0) * b / std::abs(a)
                               : testing::log_uniform(rng, 0.1, 10.0);
    const auto out = classify(a, b, pi0);
    ASSERT_TRUE(out.t_c.has_value());
    const auto tr = integrate(a, b, pi0, 2.0 * *out.t_c, *out.t_c / 50.0);
    ASSERT_TRUE(tr.blew_up) << "case " << i;
    EXPECT_LT(rel_err(*tr.blowup_time, *out.t_c), 1e-2) << "case " << i;
  }
}

TEST(SingularLimitScan, Examples) {
  const std::vector<double> eps{0.1, 0.05};
  const auto rows = singular_limit_scan(1.0, 1.0, eps, -1.0, 1.0);
  EXPECT_DOUBLE_EQ(rows[0].pi_cr, 10.0);
  EXPECT_DOUBLE_EQ(rows[0].decay_time, 0.1);
  EXPECT_DOUBLE_EQ(rows[1].pi_cr, 2.0 * rows[0].pi_cr);
}

TEST(SingularLimitScan, EndToEndThroughCharacteristics) {
  const MaterialModel reg = FluidParams{1.0, 1.0, 1.0, 1.0, RegularizedPowerLaw{1.0, 2.0, 0.01}};
  const auto c = coefficients_ab(reg);
  const auto sl = std::get<SingularLimit>(c.case_tag);
  const std::vector<double> eps{0.01};
  const auto rows = singular_limit_scan(sl.b0, sl.n, eps, c.a, 1.0);
  // three factors by hand: P_sigma = -1/(sqrt2 * 0.1), 2 rho lambda0^2 omega^2 = 4, |a| = 1/sqrt8
  const double b = (1.0 / (std::sqrt(2.0) * 0.1)) / 4.0;
  EXPECT_LT(rel_err(rows[0].b, b), 1e-14);
  EXPECT_LT(rel_err(rows[0].pi_cr, b * std::sqrt(8.0)), 1e-14);
  EXPECT_LT(rel_err(rows[0].pi_cr, c.pi_cr.value()), 1e-14);
}

TEST(SingularLimitScan, MonotoneForFractionalExponent) {
  std::vector<double> eps;
  for (int k = 1; k <= 8; ++k) eps.push_back(std::pow(10.0, -0.5 * k));
  const auto rows = singular_limit_scan(0.3, 0.5, eps, -0.35, 2.0);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_GT(rows[i].pi_cr, rows[i - 1].pi_cr);
    EXPECT_LT(rows[i].decay_time, rows[i - 1].decay_time);
  }
  // pi0 = 2 exceeds pi_cr only at the largest eps
  EXPECT_FALSE(rows.front().globally_bounded);
  EXPECT_TRUE(rows.back().globally_bounded);
}

TEST(SingularLimitScan, Errors) {
  const std::vector<double> bad{0.1, -0.1};
  EXPECT_THROW(singular_limit_scan(1.0, 1.0, bad, -1.0, 1.0), std::invalid_argument);
  const std::vector<double> ok{0.1};
  EXPECT_THROW(singular_limit_scan(0.0, 1.0, ok, -1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(singular_limit_scan(1.0, 0.0, ok, -1.0, 1.0), std::invalid_argument);
}

}  // namespace
}  // namespace accelwave

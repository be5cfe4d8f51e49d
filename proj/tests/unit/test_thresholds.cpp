#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fracture/equilibrium.hpp"
#include "fracture/errors.hpp"
#include "fracture/thresholds.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace fracture;

namespace {

const double kE = std::exp(1.0);
constexpr double kPi = std::numbers::pi;

// Ring with u = 0 on rho = R, delta on rho = r: bulk = pi delta^2 / ln(R/r), shortest separating
// curve 2 pi r, |grad u| = delta / (rho ln(R/r)).
double ring_exact_threshold(double r, double R, double G) { return 2.0 * G * r * std::log(R / r); }
double ring_m(double r, double R, double G) { return 2.0 * G * r * std::log(R / r); }
double ring_M(double r, double R, double G) { return 2.0 * G * R * std::log(R / r); }

std::vector<char> strip(const Mesh& m, double x0, double x1) {
  std::vector<char> in(m.num_triangles(), 0);
  for (int t = 0; t < m.num_triangles(); ++t) {
    const double x = centroid(m, t).x();
    in[t] = x >= x0 && x < x1;
  }
  return in;
}

}  // namespace

TEST_CASE("ring thresholds") {
  for (double R : {kE, 2.0}) {
    const Mesh m = build_annulus(1.0, R, 16, 128);
    const ThresholdReport th = critical_thresholds(m, 0.5);
    REQUIRE(th.exact_threshold);
    CHECK(*th.exact_threshold == doctest::Approx(ring_exact_threshold(1.0, R, 0.5)).epsilon(0.03));
    CHECK(th.m == doctest::Approx(ring_m(1.0, R, 0.5)).epsilon(0.1));
    CHECK(th.M == doctest::Approx(ring_M(1.0, R, 0.5)).epsilon(0.1));
    CHECK(th.m <= th.M);
    CHECK_FALSE(th.degenerate);
  }
}

TEST_CASE("rectangle thresholds coincide") {
  const Mesh m = build_rectangle(1.0, 2.0, 8, 16);
  const ThresholdReport th = critical_thresholds(m, 0.5);
  // |grad u| = 1 / L everywhere, geodesic length a, bulk a / (2 L).
  CHECK(th.c == doctest::Approx(0.5));
  CHECK(th.C == doctest::Approx(0.5));
  CHECK(th.m == doctest::Approx(2.0));
  CHECK(th.M == doctest::Approx(2.0));
  CHECK(*th.exact_threshold == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(th.geodesic_length == doctest::Approx(1.0));
  CHECK_THROWS_AS(critical_thresholds(m, 0.0), ParameterError);
  CHECK_THROWS_AS(critical_thresholds(m, -1.0), ParameterError);
}

TEST_CASE("thresholds scale linearly with G") {
  const Mesh m = build_annulus(1.0, kE, 8, 64);
  const ThresholdReport a = critical_thresholds(m, 0.5);
  const ThresholdReport b = critical_thresholds(m, 1.5);
  CHECK(b.m == doctest::Approx(3.0 * a.m));
  CHECK(b.M == doctest::Approx(3.0 * a.M));
  CHECK(*b.exact_threshold == doctest::Approx(3.0 * *a.exact_threshold));
}

TEST_CASE("uncut equilibrium stress certifies its own energy") {
  for (const Mesh& m : {build_annulus(1.0, kE, 16, 64), build_rectangle(1.0, 2.0, 8, 16)}) {
    const DirichletData d{0.0, 1.3};
    const ScalarField u = solve_equilibrium(m, d);
    const double dual = dual_bound(m, d, stress_field(m, u));
    const GapReport gap = certify_gap(EnergyReport::make(bulk_energy(m, u), 0.0), dual);
    CHECK(gap.certified);
    CHECK(std::abs(gap.relative_gap) < 1e-9);
  }
}

TEST_CASE("cut sectors lower the bound by their share of the ring") {
  const Mesh m = build_annulus(1.0, kE, 8, 64);
  const DirichletData d{0.0, 1.0};
  const ScalarField u = solve_equilibrium(m, d);
  const double bulk = bulk_energy(m, u);
  const double step = 2.0 * kPi / 64;
  for (int k : {1, 8, 20, 63}) {
    const StressField s = cut_stress_field(m, u, angular_sector(m, 0.0, k * step));
    const double dual = dual_bound(m, d, s);
    CHECK(dual == doctest::Approx(bulk * (64 - k) / 64.0).epsilon(1e-9));
    CHECK(dual <= bulk);
  }
}

TEST_CASE("weak duality over random aligned cuts") {
  std::mt19937_64 rng(17);
  const Mesh ring = build_annulus(1.0, kE, 8, 64);
  const Mesh rect = build_rectangle(1.0, 2.0, 16, 16);
  for (int trial = 0; trial < 30; ++trial) {
    const bool use_ring = trial % 2 == 0;
    const Mesh& m = use_ring ? ring : rect;
    const double delta = std::uniform_real_distribution<double>(0.2, 3.0)(rng);
    const DirichletData d{0.0, delta};
    const ScalarField u = solve_equilibrium(m, d);
    std::vector<char> cut;
    if (use_ring) {
      std::uniform_int_distribution<int> k(0, 63);
      int a = k(rng), b = k(rng);
      if (a > b) std::swap(a, b);
      cut = angular_sector(m, a * 2.0 * kPi / 64, (b + 1) * 2.0 * kPi / 64);
    } else {
      std::uniform_int_distribution<int> k(0, 15);
      int a = k(rng), b = k(rng);
      if (a > b) std::swap(a, b);
      cut = strip(m, a / 16.0, (b + 1) / 16.0);
    }
    const double dual = dual_bound(m, d, cut_stress_field(m, u, cut));
    CHECK(dual <= bulk_energy(m, u) * (1.0 + 1e-12));
  }
}

TEST_CASE("cuts across the congruence are rejected") {
  const Mesh m = build_annulus(1.0, kE, 8, 64);
  const ScalarField u = solve_equilibrium(m, {0.0, 1.0});
  std::vector<char> band(m.num_triangles(), 0);
  for (int t = 0; t < m.num_triangles(); ++t) band[t] = centroid(m, t).norm() < 1.5;
  CHECK_THROWS_AS(cut_stress_field(m, u, band), AdmissibilityError);
  try {
    cut_stress_field(m, u, band);
  } catch (const AdmissibilityError& e) {
    CHECK(e.edge_a() >= 0);
    CHECK(e.traction() > 0.05);
  }
  // A field that is not divergence free fails on the interior balance.
  StressField s = stress_field(m, u);
  s.sigma[10] *= 2.0;
  CHECK_THROWS_AS(check_admissible(m, s), AdmissibilityError);
}

TEST_CASE("slit along the stress lines keeps the field admissible") {
  const Mesh base = build_rectangle(1.0, 2.0, 8, 16);
  const Mesh m = insert_slit(base, straight_path({0.5, 0.5}, {0.5, 1.5}));
  const DirichletData d{0.0, 1.0};
  const ScalarField u = solve_equilibrium(m, d);
  const double dual = dual_bound(m, d, cut_stress_field(m, u, strip(m, 0.0, 0.25)));
  CHECK(dual == doctest::Approx(0.75 * bulk_energy(m, u)).epsilon(1e-9));
}

TEST_CASE("gap certification") {
  const EnergyReport primal = EnergyReport::make(1.0, 0.0);
  CHECK(certify_gap(primal, 0.995).certified);
  CHECK_FALSE(certify_gap(primal, 0.9).certified);
  CHECK_NOTHROW(certify_gap(primal, 1.01));
  CHECK_THROWS_AS(certify_gap(primal, 1.05), ConsistencyError);
}

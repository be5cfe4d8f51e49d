#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fracture/ambrosio_tortorelli.hpp"
#include "fracture/crack_extraction.hpp"
#include "fracture/errors.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace fracture;

namespace {

const double kE = std::exp(1.0);

CrackPath horizontal_line(double a, double y) { return straight_path({0.0, y}, {a, y}); }

// Integral over the real line of eps z'^2 + (1 - z)^2 / (4 eps) for z = 1 - exp(-|d| / (2 eps)),
// by the midpoint rule.
double profile_integral(double eps) {
  const int n = 200000;
  const double h = 40.0 * eps / n;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = -20.0 * eps + (i + 0.5) * h;
    const double e = std::exp(-std::abs(d) / (2.0 * eps));
    const double dz = e / (2.0 * eps);
    sum += (eps * dz * dz + e * e / (4.0 * eps)) * h;
  }
  return sum;
}

}  // namespace

TEST_CASE("intact phase field carries only stiffened bulk energy") {
  const Mesh m = build_annulus(1.0, kE, 8, 32);
  ATState s;
  s.u = solve_equilibrium(m, {0.0, 1.0});
  s.z = ScalarField::Ones(m.num_vertices());
  s.epsilon = 0.1;
  s.eta = 1e-6;
  s.G = 0.5;
  const EnergyReport e = at_energy(m, s);
  CHECK(e.surface == doctest::Approx(0.0));
  CHECK(e.bulk == doctest::Approx((1.0 + 1e-6) * bulk_energy(m, s.u)).epsilon(1e-12));
  CHECK(e.total == doctest::Approx(e.bulk + e.surface));
}

TEST_CASE("straight band costs G times its length") {
  const double eps = 0.03;
  CHECK(profile_integral(eps) == doctest::Approx(1.0).epsilon(1e-4));
  const Mesh m = build_rectangle(1.0, 2.0, 16, 256);
  ATState s;
  s.u = ScalarField::Zero(m.num_vertices());
  s.z = band_start(m, horizontal_line(1.0, 1.0), eps);
  s.epsilon = eps;
  s.G = 0.5;
  const double length_estimate = at_energy(m, s).surface / s.G;
  CHECK(std::abs(length_estimate - profile_integral(eps) * 1.0) < 0.15);
}

TEST_CASE("band start profile") {
  const Mesh m = build_rectangle(1.0, 2.0, 4, 64);
  const ScalarField z = band_start(m, horizontal_line(1.0, 1.0), 0.05);
  for (int v = 0; v < m.num_vertices(); ++v) {
    const double d = std::abs(m.vertices[v].y() - 1.0);
    CHECK(z[v] == doctest::Approx(1.0 - std::exp(-d / 0.1)).epsilon(1e-9));
  }
  CHECK_THROWS_AS(band_start(m, horizontal_line(1.0, 1.0), 0.0), ParameterError);
}

TEST_CASE("perturbed start is reproducible and stays in the box") {
  const Mesh m = build_annulus(1.0, 2.0, 4, 16);
  const ScalarField a = perturbed_start(m, 0.05, 7);
  const ScalarField b = perturbed_start(m, 0.05, 7);
  const ScalarField c = perturbed_start(m, 0.05, 8);
  CHECK((a - b).norm() == 0.0);
  CHECK((a - c).norm() > 0.0);
  CHECK(a.minCoeff() >= 0.95);
  CHECK(a.maxCoeff() <= 1.0);
  CHECK_THROWS_AS(perturbed_start(m, 1.5, 0), ParameterError);
}

TEST_CASE("z step solves the box-constrained quadratic") {
  const Mesh m = build_rectangle(1.0, 1.0, 8, 8);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    ATState s;
    s.u = ScalarField::Zero(m.num_vertices());
    for (int v = 0; v < m.num_vertices(); ++v) s.u[v] = 3.0 * unit(rng);
    s.z = ScalarField::Ones(m.num_vertices());
    s.epsilon = 0.2;
    s.G = 0.5;
    s.z = minimize_z_step(m, s);
    CHECK(s.z.minCoeff() >= 0.0);
    CHECK(s.z.maxCoeff() <= 1.0);
    const double best = at_energy(m, s).total;
    for (int k = 0; k < 20; ++k) {
      ATState t = s;
      for (int v = 0; v < m.num_vertices(); ++v) t.z[v] = std::clamp(s.z[v] + 1e-3 * unit(rng), 0.0, 1.0);
      CHECK(at_energy(m, t).total >= best - 1e-12);
    }
  }
}

TEST_CASE("u step minimizes over free vertices") {
  const Mesh m = build_annulus(1.0, 2.0, 6, 24);
  ATState s;
  s.z = perturbed_start(m, 0.8, 11);
  s.epsilon = 0.1;
  s.G = 0.5;
  s.u = ScalarField::Zero(m.num_vertices());
  s.u = minimize_u_step(m, s, {0.0, 1.0});
  const double best = at_energy(m, s).total;
  const auto fixed = dirichlet_values(m, {0.0, 1.0});
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    ATState t = s;
    for (int v = 0; v < m.num_vertices(); ++v)
      if (!fixed[v]) t.u[v] += 1e-3 * unit(rng);
    CHECK(at_energy(m, t).total >= best - 1e-12);
  }
}

TEST_CASE("alternating minimization decreases the energy and respects the box") {
  const Mesh m = build_annulus(1.0, kE, 8, 32, RadialSpacing::Uniform, 2.0);
  ATParameters p;
  p.G = 0.5;
  p.epsilon = 0.08;
  for (double delta : {0.5, 1.0, 1.5}) {
    for (std::uint64_t seed : {1u, 2u}) {
      const ATResult r = alternate_minimize(m, {0.0, delta}, p, perturbed_start(m, 0.3, seed));
      for (std::size_t k = 1; k < r.trace.size(); ++k)
        CHECK(r.trace[k].total <= r.trace[k - 1].total + 1e-12 * std::abs(r.trace[k - 1].total));
      CHECK(r.state.z.minCoeff() >= 0.0);
      CHECK(r.state.z.maxCoeff() <= 1.0);
      CHECK(r.energy.total == doctest::Approx(r.energy.bulk + r.energy.surface));
    }
  }
}

TEST_CASE("phase-field energy scales with the load below cracking") {
  const Mesh m = build_annulus(1.0, kE, 8, 32);
  ATState s;
  s.z = ScalarField::Ones(m.num_vertices());
  s.epsilon = 0.1;
  s.G = 0.5;
  s.u = ScalarField::Zero(m.num_vertices());
  s.u = minimize_u_step(m, s, {0.0, 1.0});
  const double e1 = at_energy(m, s).bulk;
  s.u = minimize_u_step(m, s, {0.0, 3.0});
  CHECK(at_energy(m, s).bulk == doctest::Approx(9.0 * e1).epsilon(1e-10));
}

TEST_CASE("rectangle above threshold cracks along a horizontal line") {
  const Mesh m = build_rectangle(1.0, 2.0, 16, 256);
  ATParameters p;
  p.G = 0.5;
  p.epsilon = 0.03;
  const ATResult r = alternate_minimize(m, {0.0, 1.6}, p, band_start(m, horizontal_line(1.0, 1.0), p.epsilon));
  CHECK(r.converged);
  CHECK(r.state.z.minCoeff() < 0.05);
  const double intact = 1.6 * 1.6 / 4.0;
  CHECK(r.energy.total < intact);
  CHECK(r.energy.surface / p.G == doctest::Approx(1.0).epsilon(0.15));
  const CrackPath c = extract_crack(r.state.z, m);
  REQUIRE(c.num_chains() == 1);
  CHECK_FALSE(c.closed[0]);
  CHECK(c.length() == doctest::Approx(1.0).epsilon(0.1));
  for (const Vec2& p2 : c.chains[0]) CHECK(std::abs(p2.y() - 1.0) < 3.0 * 2.0 / 256);
}

TEST_CASE("extraction of a closed ring band") {
  const Mesh m = build_annulus(1.0, kE, 16, 64);
  const CrackPath ring = circle_path({0.0, 0.0}, 1.8, 64);
  const ScalarField z = band_start(m, ring, 0.05);
  const CrackPath c = extract_crack(z, m);
  REQUIRE(c.num_chains() == 1);
  CHECK(c.closed[0]);
  CHECK(c.length() == doctest::Approx(2.0 * std::numbers::pi * 1.8).epsilon(0.1));
  CHECK(extract_crack(ScalarField::Ones(m.num_vertices()), m).empty());
}

TEST_CASE("bisection brackets and validates its bracket") {
  const Mesh m = build_annulus(1.0, kE, 16, 64, RadialSpacing::Uniform, 2.0);
  ATParameters p;
  p.G = 0.5;
  p.epsilon = 0.05;
  const std::vector<ScalarField> starts{ScalarField::Ones(m.num_vertices()),
                                        band_start(m, circle_path({0.0, 0.0}, 1.0, 64), p.epsilon)};
  const BisectionResult b = critical_load_bisection(m, p, starts, 0.5, 2.0, 4);
  CHECK(b.delta_lo < b.delta_hi);
  CHECK(b.delta_hi - b.delta_lo <= 1.5 / 16 + 1e-12);
  CHECK(b.probes.size() == 6);
  CHECK_THROWS_AS(critical_load_bisection(m, p, starts, 2.0, 3.0, 1), ParameterError);
  CHECK_THROWS_AS(critical_load_bisection(m, p, starts, 0.1, 0.2, 1), ParameterError);
}

TEST_CASE("parameter errors") {
  const Mesh m = build_annulus(1.0, 2.0, 2, 8);
  ATParameters p;
  p.G = -1.0;
  CHECK_THROWS_AS(alternate_minimize(m, {0.0, 1.0}, p), ParameterError);
  p.G = 0.5;
  p.eta = 0.0;
  CHECK_THROWS_AS(alternate_minimize(m, {0.0, 1.0}, p), ParameterError);
  p.eta = 1e-6;
  ScalarField bad = ScalarField::Constant(m.num_vertices(), 1.5);
  CHECK_THROWS_AS(alternate_minimize(m, {0.0, 1.0}, p, bad), ParameterError);
  CHECK(default_epsilon(m) == doctest::Approx(4.0 * mean_edge_length(m)));
}

TEST_CASE("ring load bracket contains the energy-balance load") {
  const Mesh m = build_annulus(1.0, kE, 32, 128, RadialSpacing::Uniform, 2.0);
  ATParameters p;
  p.G = 0.5;
  p.epsilon = 0.03;
  const std::vector<ScalarField> starts{ScalarField::Ones(m.num_vertices()),
                                        band_start(m, circle_path({0.0, 0.0}, 1.0, 128), p.epsilon)};
  const double lo = 0.95, hi = 1.1;
  // Delta^2 pi / ln(R/r) = G 2 pi r.
  const double balance = std::sqrt(2.0 * p.G * 1.0 * std::log(kE));
  REQUIRE(hi / lo <= 1.2);
  REQUIRE((balance >= lo && balance <= hi));
  CHECK(minimize_multistart(m, {0.0, lo}, p, starts).state.z.minCoeff() >= 0.9);
  CHECK(minimize_multistart(m, {0.0, hi}, p, starts).state.z.minCoeff() <= 0.1);
}

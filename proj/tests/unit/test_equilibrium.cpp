#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fracture/equilibrium.hpp"
#include "fracture/errors.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace fracture;

namespace {

const double kE = std::exp(1.0);

// Harmonic field of the ring with u = 0 at rho = R and u = delta at rho = r.
double ring_field(const Vec2& p, double r, double R, double delta) {
  return delta * std::log(R / p.norm()) / std::log(R / r);
}

double max_ring_error(int n_radial) {
  const Mesh m = build_annulus(1.0, kE, n_radial, 4 * n_radial);
  const ScalarField u = solve_equilibrium(m, {0.0, 1.0});
  double err = 0.0;
  for (int v = 0; v < m.num_vertices(); ++v) err = std::max(err, std::abs(u[v] - ring_field(m.vertices[v], 1.0, kE, 1.0)));
  return err;
}

}  // namespace

TEST_CASE("ring field against the closed form, with refinement order") {
  const double e16 = max_ring_error(16);
  const double e32 = max_ring_error(32);
  const double e64 = max_ring_error(64);
  CHECK(e16 <= 0.02);
  CHECK(std::log2(e16 / e32) >= 1.8);
  CHECK(std::log2(e32 / e64) >= 1.8);
}

TEST_CASE("ring bulk energy") {
  const Mesh m = build_annulus(1.0, kE, 16, 64);
  const ScalarField u = solve_equilibrium(m, {0.0, 1.0});
  // 1/2 int |grad u|^2 = pi delta^2 / ln(R/r).
  CHECK(std::abs(bulk_energy(m, u) - std::numbers::pi) < 0.02 * std::numbers::pi);
  const StressField s = stress_field(m, u);
  for (int t = 0; t < m.num_triangles(); ++t) {
    const double rho = centroid(m, t).norm();
    CHECK(std::abs(s.sigma[t].norm() - 1.0 / rho) < 0.03 / rho);
  }
}

TEST_CASE("rectangle linear field is exact") {
  const Mesh m = build_rectangle(1.0, 2.0, 8, 16);
  const ScalarField u = solve_equilibrium(m, {0.0, 1.0});
  for (int v = 0; v < m.num_vertices(); ++v) CHECK(u[v] == doctest::Approx(m.vertices[v].y() / 2.0).epsilon(1e-10));
  CHECK(bulk_energy(m, u) == doctest::Approx(0.25).epsilon(1e-10));
  const StressField s = stress_field(m, u);
  for (const auto& g : s.sigma) {
    CHECK(std::abs(g.x()) < 1e-10);
    CHECK(g.y() == doctest::Approx(0.5).epsilon(1e-10));
  }
  const auto tr = traction_residual(m, u);
  CHECK(!tr.no_free_edges);
  CHECK(tr.value < 1e-10);
  CHECK(s.max_divergence() < 1e-12);
}

TEST_CASE("constant field has no energy and no stress") {
  const Mesh m = build_rectangle(1.0, 1.0, 4, 4);
  const ScalarField u = ScalarField::Constant(m.num_vertices(), 3.0);
  CHECK(bulk_energy(m, u) == 0.0);
  const StressField s = stress_field(m, u);
  CHECK(s.l2_norm(m) == 0.0);
  CHECK(s.max_divergence() == 0.0);
}

TEST_CASE("inner circle decohesion releases the ring") {
  const Mesh m = build_annulus(1.0, kE, 8, 32);
  const CrackPath circle = circle_path({0.0, 0.0}, 1.0, 32);
  const Mesh s = insert_slit(m, circle);
  const ScalarField u = solve_equilibrium(s, {0.0, 1.0});
  CHECK(bulk_energy(s, u) <= 1e-10);
  const auto on_u2 = vertices_with_label(s, BoundaryLabel::GammaU2);
  for (int v = 0; v < s.num_vertices(); ++v) CHECK(u[v] == (on_u2[v] ? 1.0 : 0.0));
  CHECK(traction_residual(s, u).value <= 1e-8);
  // Surface term: G times the polygon perimeter, pi within 1 %.
  const EnergyReport e = total_energy(s, u, circle, 0.5);
  CHECK(std::abs(e.total - std::numbers::pi) < 0.01 * std::numbers::pi);
  CHECK(e.total == e.bulk + e.surface);
}

TEST_CASE("total energy of a separated rectangle") {
  const Mesh m = build_rectangle(1.0, 2.0, 8, 16);
  const CrackPath line = straight_path({0.0, 1.0}, {1.0, 1.0});
  const Mesh s = insert_slit(m, line);
  const ScalarField u = solve_equilibrium(s, {0.0, std::sqrt(2.0)});
  const EnergyReport e = total_energy(s, u, line, 0.5);
  CHECK(e.bulk < 1e-20);
  CHECK(e.total == doctest::Approx(0.5));
  CHECK(total_energy(m, ScalarField::Zero(m.num_vertices()), {}, 0.5).total == 0.0);
  CHECK_THROWS_AS(total_energy(m, ScalarField::Zero(m.num_vertices()), line, -1.0), ParameterError);
  // Crack running along GammaF costs nothing.
  CHECK(total_energy(m, ScalarField::Zero(m.num_vertices()), straight_path({0.0, 0.0}, {0.0, 2.0}), 0.5).surface == 0.0);
}

TEST_CASE("traction residual on a half slit decreases under refinement") {
  double prev = 0.0;
  for (int n : {8, 16, 32}) {
    const Mesh m = build_rectangle(1.0, 2.0, n, 2 * n);
    const Mesh s = insert_slit(m, straight_path({0.0, 1.0}, {0.5, 1.0}));
    const ScalarField u = solve_equilibrium(s, {0.0, 1.0});
    const double r = traction_residual(s, u).value;
    MESSAGE("n=" << n << " residual=" << r);
    if (prev > 0.0) CHECK(prev / r >= 1.5);
    prev = r;
  }
}

TEST_CASE("dirichlet principle, scaling and crack monotonicity") {
  const Mesh m = build_annulus(1.0, 2.0, 6, 24);
  const ScalarField u = solve_equilibrium(m, {0.0, 1.0});
  const double e0 = bulk_energy(m, u);
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> pick(0, m.num_vertices() - 1);
  std::normal_distribution<double> bump(0.0, 0.05);
  const auto fixed = dirichlet_values(m, {0.0, 1.0});
  int tried = 0;
  while (tried < 30) {
    const int v = pick(rng);
    if (fixed[v]) continue;
    ScalarField w = u;
    w[v] += bump(rng);
    CHECK(bulk_energy(m, w) > e0);
    ++tried;
  }
  const ScalarField u3 = solve_equilibrium(m, {0.0, 3.0});
  CHECK((u3 - 3.0 * u).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(bulk_energy(m, u3) == doctest::Approx(9.0 * e0).epsilon(1e-10));
  const Mesh s = insert_slit(m, straight_path({1.0, 0.0}, {2.0, 0.0}));
  CHECK(bulk_energy(s, solve_equilibrium(s, {0.0, 1.0})) <= e0 + 1e-12);
  const StressField st = stress_field(m, u);
  CHECK(st.max_divergence() <= 1e-9 * st.l2_norm(m));
}

TEST_CASE("floating component takes the twin average") {
  const Mesh m = build_rectangle(1.0, 1.0, 8, 8);
  CrackPath square;
  square.add_chain({{0.25, 0.25}, {0.75, 0.25}, {0.75, 0.75}, {0.25, 0.75}}, true);
  const Mesh s = insert_slit(m, square);
  const ScalarField u = solve_equilibrium(s, {0.0, 1.0});
  const auto comp = triangle_components(s);
  REQUIRE(comp.count == 2);
  int inner = -1;
  for (int t = 0; t < s.num_triangles(); ++t)
    if ((centroid(s, t) - Vec2(0.5, 0.5)).norm() < 0.1) inner = comp.of_triangle[t];
  double lo = 1e9, hi = -1e9;
  for (int t = 0; t < s.num_triangles(); ++t)
    if (comp.of_triangle[t] == inner)
      for (int v : s.triangles[t]) {
        lo = std::min(lo, u[v]);
        hi = std::max(hi, u[v]);
      }
  CHECK(hi - lo < 1e-14);
  CHECK(lo == doctest::Approx(0.5).epsilon(0.05));
}

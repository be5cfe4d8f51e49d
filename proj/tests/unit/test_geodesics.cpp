#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fracture/equilibrium.hpp"
#include "fracture/errors.hpp"
#include "fracture/geodesics.hpp"

#include <cmath>
#include <numbers>

using namespace fracture;

namespace {

const double kE = std::exp(1.0);
constexpr double kPi = std::numbers::pi;

// Perimeter of the regular n-gon inscribed in a circle of radius rho.
double inscribed_perimeter(double rho, int n) { return 2.0 * n * rho * std::sin(kPi / n); }

double path_length(const Mesh& m, const std::vector<int>& vs) {
  double len = 0.0;
  for (std::size_t k = 1; k < vs.size(); ++k) len += (m.vertices[vs[k]] - m.vertices[vs[k - 1]]).norm();
  return len;
}

}  // namespace

TEST_CASE("rectangle congruence is x / L") {
  const Mesh m = build_rectangle(1.0, 2.0, 8, 16);
  const ScalarField u = solve_equilibrium(m, {0.0, 3.0});
  const Congruence c = conjugate_field(m, u, 3.0);
  CHECK(c.periods.empty());
  for (int v = 0; v < c.cut_mesh.num_vertices(); ++v)
    CHECK(c.ubar[v] == doctest::Approx(c.cut_mesh.vertices[v].x() / 2.0).epsilon(1e-9));
  CHECK(c.residual_max < 1e-9);
  CHECK(variation_over(c, straight_path({0.0, 1.0}, {1.0, 1.0})) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(variation_over(c, straight_path({0.5, 0.0}, {0.5, 2.0})) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(project_onto(c, straight_path({0.0, 0.5}, {1.0, 1.5})) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK_THROWS_AS(variation_over(c, straight_path({0.5, 1.0}, {1.5, 1.0})), GeometryError);
}

TEST_CASE("ring congruence is the normalized angle") {
  const Mesh m = build_annulus(1.0, kE, 16, 64);
  const ScalarField u = solve_equilibrium(m, {0.0, 1.0});
  const Congruence c = conjugate_field(m, u, 1.0);
  // grad ubar = theta_hat / (rho ln(R/r)), so the period is 2 pi / ln(R/r).
  REQUIRE(c.periods.size() == 1);
  CHECK(c.periods[0] == doctest::Approx(2.0 * kPi).epsilon(0.01));
  CHECK(c.residual_rms < 0.05);
  const CrackPath inner = circle_path({0.0, 0.0}, 1.0, 64);
  CHECK(variation_over(c, inner) == doctest::Approx(2.0 * kPi).epsilon(0.01));
  CHECK(project_onto(c, inner) == doctest::Approx(c.periods[0]).epsilon(0.01));
  CHECK(project_onto(c, arc_path({0.0, 0.0}, 1.5, 0.0, kPi, 32)) == doctest::Approx(kPi).epsilon(0.02));
  CHECK(variation_over(c, straight_path({1.0, 0.0}, {kE, 0.0})) < 0.01);
}

TEST_CASE("ring geodesic is the inner circle") {
  const Mesh m = build_annulus(1.0, kE, 16, 64);
  const SeparatingGeodesic g = separating_geodesic(m);
  REQUIRE(g.path.num_chains() == 1);
  CHECK(g.path.closed[0]);
  CHECK(g.cut_length == doctest::Approx(inscribed_perimeter(1.0, 64)).epsilon(1e-9));
  CHECK(g.polyline_length == doctest::Approx(g.cut_length).epsilon(1e-9));
  for (const Vec2& p : g.path.chains[0]) CHECK(p.norm() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("rectangle geodesic is a horizontal segment across the width") {
  const Mesh m = build_rectangle(1.0, 2.0, 8, 16);
  const SeparatingGeodesic g = separating_geodesic(m);
  REQUIRE(g.path.num_chains() == 1);
  CHECK_FALSE(g.path.closed[0]);
  CHECK(g.cut_length == doctest::Approx(1.0).epsilon(1e-9));
  for (const Vec2& p : g.path.chains[0]) CHECK(p.y() == doctest::Approx(0.0));
  const auto& chain = g.path.chains[0];
  CHECK(std::min(chain.front().x(), chain.back().x()) == doctest::Approx(0.0));
  CHECK(std::max(chain.front().x(), chain.back().x()) == doctest::Approx(1.0));
  CHECK(g.endpoint_labels.size() == 1);
}

TEST_CASE("geodesic needs both loaded boundaries") {
  Mesh m = build_rectangle(1.0, 1.0, 2, 2);
  for (auto& e : m.boundary_edges)
    if (e.label == BoundaryLabel::GammaU2) e.label = BoundaryLabel::GammaF;
  CHECK_THROWS_AS(separating_geodesic(m), ParameterError);
}

TEST_CASE("shortest vertex path") {
  const Mesh m = build_rectangle(1.0, 2.0, 4, 8);
  std::vector<char> src(m.num_vertices(), 0), dst(m.num_vertices(), 0);
  for (int v = 0; v < m.num_vertices(); ++v) {
    src[v] = m.vertices[v].y() == 0.0;
    dst[v] = m.vertices[v].y() == 2.0;
  }
  const auto path = shortest_vertex_path(m, src, dst);
  REQUIRE(path.size() >= 2);
  CHECK(src[path.front()]);
  CHECK(dst[path.back()]);
  CHECK(path_length(m, path) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("congruence load must be positive") {
  const Mesh m = build_rectangle(1.0, 1.0, 2, 2);
  CHECK_THROWS_AS(conjugate_field(m, solve_equilibrium(m, {0.0, 1.0}), 0.0), ParameterError);
}

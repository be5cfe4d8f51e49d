#include "fracture/damage.hpp"

#include "fracture/errors.hpp"
#include "fracture/locator.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace fracture {

std::string to_string(DamageMode mode) { return mode == DamageMode::Sharp ? "sharp" : "relaxed"; }

DamageMode damage_mode_from_string(const std::string& text) {
  if (text == "sharp") return DamageMode::Sharp;
  if (text == "relaxed") return DamageMode::Relaxed;
  throw ParameterError(fmt::format("unknown damage mode '{}'", text));
}

DamageState DamageState::intact(const Mesh& mesh, double gamma, double G, DamageMode mode) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ParameterError("damage: gamma must be >= 0");
  if (!(G >= 0.0) || !std::isfinite(G)) throw ParameterError("damage: G must be >= 0");
  DamageState s;
  s.sound.assign(mesh.num_triangles(), 1);
  s.theta.assign(mesh.num_triangles(), 1.0);
  s.u = ScalarField::Zero(mesh.num_vertices());
  s.gamma = gamma;
  s.G = G;
  s.mode = mode;
  return s;
}

namespace {

void check_state(const Mesh& mesh, const DamageState& s) {
  if (static_cast<int>(s.sound.size()) != mesh.num_triangles() ||
      static_cast<int>(s.theta.size()) != mesh.num_triangles())
    throw ParameterError("damage: state does not match the mesh");
  for (double t : s.theta)
    if (!(t >= 0.0 && t <= 1.0)) throw ParameterError("damage: theta outside [0, 1]");
  check_field(mesh, s.u, "damage");
}

std::vector<double> stiffness_of(const DamageState& s) {
  if (s.mode == DamageMode::Relaxed) return s.theta;
  std::vector<double> c(s.sound.size());
  for (std::size_t t = 0; t < c.size(); ++t) c[t] = s.sound[t] ? 1.0 : 0.0;
  return c;
}

void sync_indicators(DamageState& s) {
  if (s.mode == DamageMode::Relaxed) {
    for (std::size_t t = 0; t < s.theta.size(); ++t) s.sound[t] = s.theta[t] > 0.0;
  } else {
    for (std::size_t t = 0; t < s.theta.size(); ++t) s.theta[t] = s.sound[t] ? 1.0 : 0.0;
  }
}

}  // namespace

std::vector<double> energy_density(const Mesh& mesh, const ScalarField& u) {
  const auto g = gradients(mesh, u);
  std::vector<double> w(g.size());
  for (std::size_t t = 0; t < g.size(); ++t) w[t] = 0.5 * g[t].squaredNorm();
  return w;
}

double interface_length(const Mesh& mesh, const std::vector<char>& sound) {
  const EdgeTopology topo(mesh);
  double len = 0.0;
  for (const auto& e : topo.edges())
    if (e.interior() && sound[e.t0] != sound[e.t1]) len += (mesh.vertices[e.a] - mesh.vertices[e.b]).norm();
  return len;
}

double crack_length_in_sound(const Mesh& mesh, const CrackPath& crack, const std::vector<char>& sound) {
  if (crack.empty()) return 0.0;
  if (std::all_of(sound.begin(), sound.end(), [](char c) { return c != 0; }))
    return crack_length_off_free_surface(mesh, crack);
  const TriangleLocator locator(mesh);
  const double diam = diameter(mesh);
  const double tol = 1e-8 * diam;
  const double piece = 0.25 * min_edge_length(mesh);
  double len = 0.0;
  for (std::size_t c = 0; c < crack.num_chains(); ++c)
    for (std::size_t k = 0; k < crack.num_segments(c); ++k) {
      const auto [p, q] = crack.segment(c, k);
      const double seg = (q - p).norm();
      if (seg <= 0.0) continue;
      const Vec2 dir = (q - p) / seg;
      const Vec2 normal(-dir.y(), dir.x());
      const int n = std::max(1, static_cast<int>(std::ceil(seg / piece)));
      for (int i = 0; i < n; ++i) {
        const Vec2 a = p + (q - p) * (double(i) / n);
        const Vec2 b = p + (q - p) * (double(i + 1) / n);
        const Vec2 mid = 0.5 * (a + b);
        bool touches_sound = false;
        for (double side : {1.0, -1.0}) {
          const int t = locator.locate(mid + side * 1e-6 * diam * normal, 1e-9);
          if (t >= 0 && sound[t]) touches_sound = true;
        }
        if (!touches_sound) continue;
        double on_free = 0.0;
        for (const auto& e : mesh.boundary_edges)
          if (e.label == BoundaryLabel::GammaF)
            on_free += collinear_overlap(a, b, mesh.vertices[e.a], mesh.vertices[e.b], tol);
        len += std::max(0.0, (b - a).norm() - on_free);
      }
    }
  return len;
}

EnergyReport sharp_energy(const DamageState& state, const Mesh& mesh) {
  check_state(mesh, state);
  const auto w = energy_density(mesh, state.u);
  double bulk = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t)
    if (state.sound[t]) bulk += (w[t] - state.gamma) * signed_area(mesh, t);
  const double surface =
      state.G * (crack_length_in_sound(mesh, state.crack, state.sound) + interface_length(mesh, state.sound));
  return EnergyReport::make(bulk, surface);
}

EnergyReport relaxed_energy(const DamageState& state, const Mesh& mesh) {
  check_state(mesh, state);
  const auto w = energy_density(mesh, state.u);
  double bulk = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) bulk += state.theta[t] * (w[t] - state.gamma) * signed_area(mesh, t);
  const double len = state.crack.empty() ? 0.0 : crack_length_off_free_surface(mesh, state.crack);
  return EnergyReport::make(bulk, state.G * len);
}

EnergyReport damage_energy(const DamageState& state, const Mesh& mesh) {
  return state.mode == DamageMode::Sharp ? sharp_energy(state, mesh) : relaxed_energy(state, mesh);
}

ScalarField balance_step(const Mesh& mesh, const DamageState& state, const DirichletData& data) {
  check_state(mesh, state);
  return solve_weighted(mesh, stiffness_of(state), data);
}

namespace {

/// Energy change of removing `remove` from the sound set at fixed u.
double removal_change(const Mesh& mesh, const DamageState& s, const std::vector<double>& w,
                      const std::vector<char>& remove) {
  double bulk = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t)
    if (remove[t]) bulk -= (w[t] - s.gamma) * signed_area(mesh, t);
  if (s.mode == DamageMode::Relaxed || s.G == 0.0) return bulk;
  std::vector<char> after = s.sound;
  for (int t = 0; t < mesh.num_triangles(); ++t)
    if (remove[t]) after[t] = 0;
  const double before_surface = crack_length_in_sound(mesh, s.crack, s.sound) + interface_length(mesh, s.sound);
  const double after_surface = crack_length_in_sound(mesh, s.crack, after) + interface_length(mesh, after);
  return bulk + s.G * (after_surface - before_surface);
}

DamageState apply_removal(DamageState s, const std::vector<char>& remove) {
  for (std::size_t t = 0; t < remove.size(); ++t)
    if (remove[t]) {
      s.sound[t] = 0;
      s.theta[t] = 0.0;
    }
  return s;
}

bool any(const std::vector<char>& v) {
  return std::any_of(v.begin(), v.end(), [](char c) { return c != 0; });
}

}  // namespace

DamageState cut_step(const Mesh& mesh, const DamageState& state, double ball_radius) {
  check_state(mesh, state);
  if (!(ball_radius > 0.0)) throw ParameterError("cut step: ball radius must be positive");
  const auto w = energy_density(mesh, state.u);
  const int nt = mesh.num_triangles();
  std::vector<Vec2> centers(nt);
  for (int t = 0; t < nt; ++t) centers[t] = centroid(mesh, t);
  const TriangleLocator locator(mesh);

  std::vector<char> ball_set(nt, 0), pointwise(nt, 0);
  for (int t = 0; t < nt; ++t) {
    if (!state.sound[t]) continue;
    pointwise[t] = w[t] > state.gamma;
    double num = 0.0, den = 0.0;
    for (int s : locator.near(centers[t], ball_radius)) {
      if (!state.sound[s] || (centers[s] - centers[t]).norm() > ball_radius) continue;
      const double weight = state.theta[s] * signed_area(mesh, s);
      num += weight * w[s];
      den += weight;
    }
    ball_set[t] = den > 0.0 && num / den > state.gamma;
  }

  const double scale = std::max(1.0, std::abs(damage_energy(state, mesh).total));
  const double slack = 1e-14 * scale;
  if (any(ball_set) && removal_change(mesh, state, w, ball_set) <= slack) return apply_removal(state, ball_set);
  if (!any(pointwise)) return state;
  if (removal_change(mesh, state, w, pointwise) <= slack) return apply_removal(state, pointwise);

  // Edge-connected components of the pointwise set, each kept only if it pays for itself.
  const EdgeTopology topo(mesh);
  std::vector<int> parent(nt);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& e : topo.edges())
    if (e.interior() && pointwise[e.t0] && pointwise[e.t1]) parent[find(e.t0)] = find(e.t1);
  std::vector<char> accepted(nt, 0);
  std::vector<char> done(nt, 0);
  for (int t = 0; t < nt; ++t) {
    if (!pointwise[t] || done[find(t)]) continue;
    const int root = find(t);
    done[root] = 1;
    std::vector<char> comp(nt, 0);
    for (int s = 0; s < nt; ++s) comp[s] = pointwise[s] && find(s) == root;
    if (removal_change(mesh, state, w, comp) <= slack)
      for (int s = 0; s < nt; ++s)
        if (comp[s]) accepted[s] = 1;
  }
  return any(accepted) ? apply_removal(state, accepted) : state;
}

DamageState relaxed_update(const Mesh& mesh, const DamageState& state) {
  check_state(mesh, state);
  const auto w = energy_density(mesh, state.u);
  DamageState out = state;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    if (state.theta[t] <= 0.0) continue;
    if (w[t] > state.gamma) out.theta[t] = 0.0;
    else if (w[t] < state.gamma) out.theta[t] = 1.0;
  }
  sync_indicators(out);
  return out;
}

DamageResult minimize_damage(const Mesh& mesh, const DirichletData& data, const DamageParameters& params,
                             const CrackPath& crack, const DamageState* initial) {
  if (params.max_iters < 1) throw ParameterError("damage: max_iters must be >= 1");
  if (!(params.tol > 0.0)) throw ParameterError("damage: tol must be positive");
  DamageState state = initial ? *initial : DamageState::intact(mesh, params.gamma, params.G, params.mode);
  if (!initial) state.crack = crack;
  state.gamma = params.gamma;
  state.G = params.G;
  state.mode = params.mode;
  if (!(state.gamma >= 0.0) || !(state.G >= 0.0)) throw ParameterError("damage: gamma and G must be >= 0");
  sync_indicators(state);
  const double radius = params.ball_radius > 0.0 ? params.ball_radius : 2.0 * mean_edge_length(mesh);

  DamageResult result;
  state.u = balance_step(mesh, state, data);
  double energy = damage_energy(state, mesh).total;
  result.trace.push_back({0, "balance", energy});
  for (int it = 1; it <= params.max_iters; ++it) {
    result.iterations = it;
    DamageState next = params.mode == DamageMode::Sharp ? cut_step(mesh, state, radius) : relaxed_update(mesh, state);
    const bool changed = next.theta != state.theta;
    const double after_cut = damage_energy(next, mesh).total;
    result.trace.push_back({it, "cut", after_cut});
    next.u = balance_step(mesh, next, data);
    const double after_balance = damage_energy(next, mesh).total;
    result.trace.push_back({it, "balance", after_balance});
    const double drop = energy - after_balance;
    state = std::move(next);
    energy = after_balance;
    if (!changed || drop <= params.tol * std::max(1.0, std::abs(energy))) {
      result.converged = true;
      break;
    }
  }
  result.energy = damage_energy(state, mesh);
  result.state = std::move(state);
  return result;
}

CurvatureReport curvature_check(const CrackPath& crack, double gamma, double G, double allowance) {
  if (!(G > 0.0)) throw ParameterError("curvature check: G must be positive");
  if (!(gamma >= 0.0)) throw ParameterError("curvature check: gamma must be >= 0");
  CurvatureReport rep;
  rep.bound = 2.0 * gamma / G;
  rep.admissibility_constant = gamma / G;
  rep.allowance = allowance;
  for (std::size_t c = 0; c < crack.num_chains(); ++c) {
    const auto& pts = crack.chains[c];
    const bool closed = crack.closed[c];
    const std::size_t n = pts.size();
    std::vector<double> turning(n, 0.0);
    if (n < 3) {
      rep.too_short = true;
      rep.turning_angles.push_back(turning);
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!closed && (i == 0 || i + 1 == n)) continue;
      const Vec2& prev = pts[(i + n - 1) % n];
      const Vec2& next = pts[(i + 1) % n];
      const Vec2 d0 = pts[i] - prev;
      const Vec2 d1 = next - pts[i];
      const double l0 = d0.norm(), l1 = d1.norm();
      if (l0 <= 0.0 || l1 <= 0.0) continue;
      const double angle = std::atan2(d0.x() * d1.y() - d0.y() * d1.x(), d0.dot(d1));
      turning[i] = angle;
      rep.max_discrete_curvature = std::max(rep.max_discrete_curvature, std::abs(angle) / (0.5 * (l0 + l1)));
    }
    rep.turning_angles.push_back(std::move(turning));
  }
  rep.exceeds_bound = rep.max_discrete_curvature > rep.bound;
  rep.violation = rep.max_discrete_curvature > rep.bound * (1.0 + allowance);
  return rep;
}

CurvatureBalance curvature_balance_residual(const Mesh& mesh, const DamageState& state) {
  check_state(mesh, state);
  const auto w = energy_density(mesh, state.u);
  const TriangleLocator locator(mesh);
  const double tol = 1e-9 * diameter(mesh);
  const double h = mean_edge_length(mesh);

  // Sample points: chain vertices with their turning-angle curvature, plus points about one
  // edge apart inside every segment (curvature 0).
  struct Sample {
    Vec2 p;
    Vec2 tangent;
    double H;
  };
  std::vector<Sample> samples;
  for (std::size_t c = 0; c < state.crack.num_chains(); ++c) {
    const auto& pts = state.crack.chains[c];
    const bool closed = state.crack.closed[c];
    const std::size_t n = pts.size();
    if (n < 2) continue;
    const std::size_t segs = closed ? n : n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      if (!closed && (i == 0 || i + 1 == n)) continue;
      const Vec2 d0 = pts[i] - pts[(i + n - 1) % n];
      const Vec2 d1 = pts[(i + 1) % n] - pts[i];
      const double l0 = d0.norm(), l1 = d1.norm();
      if (l0 <= 0.0 || l1 <= 0.0) continue;
      const Vec2 t = d0 / l0 + d1 / l1;
      if (t.norm() <= 0.0) continue;
      const double angle = std::atan2(d0.x() * d1.y() - d0.y() * d1.x(), d0.dot(d1));
      samples.push_back({pts[i], t.normalized(), angle / (0.5 * (l0 + l1))});
    }
    for (std::size_t i = 0; i < segs; ++i) {
      const Vec2& a = pts[i];
      const Vec2& b = pts[(i + 1) % n];
      const double len = (b - a).norm();
      if (len <= 0.0) continue;
      const int pieces = std::max(1, static_cast<int>(std::lround(len / h)));
      for (int k = 1; k < pieces; ++k) samples.push_back({a + (b - a) * (double(k) / pieces), (b - a) / len, 0.0});
    }
  }

  std::vector<char> on_crack(mesh.num_vertices(), 0);
  for (int v = 0; v < mesh.num_vertices(); ++v) on_crack[v] = distance_to_path(state.crack, mesh.vertices[v]) <= tol;

  CurvatureBalance out;
  for (const auto& s : samples) {
    const Vec2 left(-s.tangent.y(), s.tangent.x());
    double wl = 0.0, al = 0.0, wr = 0.0, ar = 0.0;
    for (int t : locator.near(s.p, h)) {
      if (!state.sound[t]) continue;
      const auto& tri = mesh.triangles[t];
      if (!std::any_of(tri.begin(), tri.end(), [&](int v) { return on_crack[v] != 0; })) continue;
      const Vec2 c = centroid(mesh, t);
      if ((c - s.p).norm() > h) continue;
      const double weight = state.theta[t] * signed_area(mesh, t);
      if ((c - s.p).dot(left) > 0.0) {
        wl += weight * w[t];
        al += weight;
      } else {
        wr += weight * w[t];
        ar += weight;
      }
    }
    const double jump = (ar > 0.0 ? wr / ar : 0.0) - (al > 0.0 ? wl / al : 0.0);
    out.points.push_back(s.p);
    out.jump.push_back(jump);
    out.curvature.push_back(s.H);
    out.residual.push_back(std::abs(jump - state.G * s.H));
  }
  return out;
}

}  // namespace fracture

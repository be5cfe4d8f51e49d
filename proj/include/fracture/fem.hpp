#pragma once

#include "fracture/mesh.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <optional>
#include <vector>

namespace fracture {

/// One value per mesh vertex.
using ScalarField = Eigen::VectorXd;

/// Imposed displacement: constant on each GammaU component.
struct DirichletData {
  double value_on_gamma_u1 = 0.0;
  double value_on_gamma_u2 = 0.0;

  double delta() const noexcept;
  DirichletData scaled(double factor) const noexcept {
    return {value_on_gamma_u1 * factor, value_on_gamma_u2 * factor};
  }
};

/// Gradients of the three P1 basis functions of triangle t (row k belongs to corner k).
Eigen::Matrix<double, 3, 2> basis_gradients(const Mesh& mesh, int t);

Vec2 gradient(const Mesh& mesh, const ScalarField& u, int t);
std::vector<Vec2> gradients(const Mesh& mesh, const ScalarField& u);

/// Stiffness matrix of sum_T coef_T * area_T * grad(phi_i).grad(phi_j).
Eigen::SparseMatrix<double> assemble_stiffness(const Mesh& mesh, const std::vector<double>& coef);

/// Lumped mass: one third of the incident triangle areas per vertex.
Eigen::VectorXd lumped_mass(const Mesh& mesh);

/// Imposed value per vertex, or nullopt for free vertices. Throws ParameterError for a vertex
/// on both GammaU components.
std::vector<std::optional<double>> dirichlet_values(const Mesh& mesh, const DirichletData& data);

/// Vertices used by at least one triangle.
std::vector<char> attached_vertices(const Mesh& mesh);

/// Minimizer of 1/2 sum_T coef_T |grad v|^2 area_T with the Dirichlet data. Triangles with
/// coef_T = 0 carry no stiffness. Components of stiff triangles without any Dirichlet vertex
/// are constant: the average of slit-twin values in constrained components, else 0.
/// Vertices not touched by any stiff triangle keep their imposed value or 0.
ScalarField solve_weighted(const Mesh& mesh, const std::vector<double>& coef, const DirichletData& data);

/// Relative residual accepted after a direct solve.
inline constexpr double kSolverTolerance = 1e-10;

/// Throws ParameterError unless u has one finite value per vertex.
void check_field(const Mesh& mesh, const ScalarField& u, const char* what);

}  // namespace fracture

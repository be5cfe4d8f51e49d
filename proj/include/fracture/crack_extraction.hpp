#pragma once

#include "fracture/crack_path.hpp"
#include "fracture/fem.hpp"
#include "fracture/mesh.hpp"

namespace fracture {

/// Polyline chains along the ridge (lowest z) of the sublevel set {z < threshold}.
/// The set is thinned by removing topologically simple vertices from the highest z down;
/// only open ends on the mesh boundary are kept as anchors, so interior tips recede to the
/// band minimum. Spurs shorter than prune_length (<= 0: 3 x mean edge length) are removed.
CrackPath extract_crack(const ScalarField& z, const Mesh& mesh, double threshold = 0.5, double prune_length = 0.0);

}  // namespace fracture

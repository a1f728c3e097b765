#pragma once

#include <vector>

#include "proxgen/spatial.hpp"

namespace proxgen {

inline constexpr double kContactSigma = 0.2;  // meters

// Scalar penalty over a vertex set plus, optionally, its gradient per vertex.
// d_verts is parallel to the vertex list handed in (all zeros where a vertex
// does not contribute) and empty when gradients were not requested.
struct PenaltyResult {
  double value = 0.0;
  std::vector<Vec3> d_verts;
};

// Mean penetration depth: (1/V) * sum over vertices of |min(sdf(v), 0)|.
// Grid fields are evaluated at the query clamped into the grid box, with the
// clamped axes dropped from the gradient.
PenaltyResult collision_penalty(const std::vector<Vec3>& verts, const SdfField& sdf,
                                bool with_grad);

// Saturating attraction of selected vertices to the scene surface: the sum
// over `subset` of geman_mcclure(distance to nearest scene point, sigma).
PenaltyResult contact_penalty(const std::vector<Vec3>& verts, const std::vector<int>& subset,
                              const PointIndex& scene, double sigma, bool with_grad);

}  // namespace proxgen

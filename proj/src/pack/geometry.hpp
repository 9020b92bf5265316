#pragma once

#include <Eigen/Dense>
#include <vector>

#include "pack/errors.hpp"

namespace pack {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

// Convex polygon in both vertex and face-hyperplane form. Vertices are CCW
// with the centroid at the origin; edge i runs from vertex i to vertex i+1
// and carries a unit outward normal a_i with offset b_i, so a_i·x + b_i = 0
// on the edge and a_i·x + b_i <= 0 for points inside.
struct ConvexPolygon {
    Eigen::Matrix<double, Eigen::Dynamic, 2> vertices;  // one CCW vertex per row
    Eigen::Matrix<double, Eigen::Dynamic, 2> normals;   // one unit outward normal per row
    Eigen::VectorXd offsets;                            // b_i per edge
    double circumdiameter = 0.0;                        // 2 * max vertex norm

    int vertex_count() const { return static_cast<int>(vertices.rows()); }
};

// Builds a polygon from an unordered point set: centers the centroid at the
// origin, orders vertices CCW, and derives the face form. Throws Degenerate
// for collinear input and NonConvex when a point lies strictly inside the
// hull of the others.
ConvexPolygon polygon_from_vertices(const std::vector<Vec2>& points);

// Regular polygon with the given circumradius, first vertex on the +x axis.
ConvexPolygon regular_polygon(int sides, double circumradius = 1.0);

double polygon_area(const ConvexPolygon& p);

// |det [b1 b2]|. Throws SingularLattice when the determinant magnitude
// is below 1e-12.
double cell_area(const Vec2& b1, const Vec2& b2);

// One placed copy of the base polygon: x -> rot * x + center.
struct Placement {
    Mat2 rot;
    Vec2 center;
};

// Signed separation between two placed copies of the same polygon, from the
// face-hyperplane form: for each ordered pair, transform the other copy's
// vertices into this copy's frame and take max over faces of the min signed
// vertex distance; the result is the larger of the two ordered values.
// Positive = separated by at least that margin along some face normal,
// negative = overlapping with that penetration depth, zero = touching.
double pair_distance(const ConvexPolygon& poly, const Placement& p1, const Placement& p2);

// Precomputed separation evaluator for one pair of placements under many
// lattice translations of the second copy. Shifting copy 2 by l adds a
// per-face constant to the transformed-vertex scores, so the min over
// vertices is computed once and each shift costs O(#faces).
class PairSeparation {
  public:
    PairSeparation(const ConvexPolygon& poly, const Placement& p1, const Placement& p2);

    // Separation of (copy1, copy2 + shift).
    double at(const Vec2& shift) const;

  private:
    Eigen::VectorXd base12_, base21_;  // min-over-vertex scores per face
    Eigen::Matrix<double, Eigen::Dynamic, 2> dir12_, dir21_;  // normals in world frame
};

}  // namespace pack

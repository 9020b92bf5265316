// Decoding a design vector into a placed configuration and evaluating it:
// packing violation over the lattice neighborhood, density, extra
// constraints, and SVG rendering.
#pragma once

#include "pack/plane_groups.hpp"

#include <string>
#include <vector>

namespace pack {

struct Configuration {
    const PlaneGroupDef* group = nullptr;
    const ConvexPolygon* polygon = nullptr;
    Vec2 b1 = Vec2::Zero();
    Vec2 b2 = Vec2::Zero();
    std::vector<Placement> placements;  // one per symmetry op
    Eigen::VectorXd design;
};

// Build lattice and all symmetry copies from a design vector. Throws
// OutOfBounds when x leaves the group's design box.
Configuration decode_configuration(const PlaneGroupDef& group, const ConvexPolygon& polygon,
                                   const Eigen::VectorXd& x,
                                   LatticeBound bound_rule = LatticeBound::twice_diameter);

// Minimum signed separation over all copy pairs whose lattice offset allows
// contact (centers within one circumdiameter; self pairs exclude the zero
// offset). >= 0 means a packing.
double packing_violation(const Configuration& cfg);

// op_count * polygon area / cell area; may exceed 1 when overlapping.
double packing_density(const Configuration& cfg);

// Values of the group's extra inequality constraints at (c1, c2) = (x0, x1);
// satisfied when <= 0. Empty for groups without extra constraints.
Eigen::VectorXd extra_constraint_values(const PlaneGroupDef& group, const Eigen::VectorXd& x);

// Deterministic SVG with cells_per_axis^2 translated copies of the cell
// contents, one fill color per op index, plus the primitive-cell outline.
std::string render_svg(const Configuration& cfg, int cells_per_axis);

}  // namespace pack

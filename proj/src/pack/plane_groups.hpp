// Registry of the ten supported plane groups: symmetry operations modulo
// lattice translations (in fractional coordinates), crystal-system lattice
// pinning, asymmetric-unit boxes, and the resulting design-vector layout.
#pragma once

#include "pack/geometry.hpp"

#include <string>
#include <vector>

namespace pack {

enum class CrystalSystem { oblique, rectangular, square, hexagonal };

const char* to_string(CrystalSystem s);

// One symmetry operation modulo lattice translations, acting on fractional
// coordinates as c -> M*c + t. M is integral in the lattice basis; the
// Cartesian rotation/reflection is B*M*B^-1 for a compatible basis B.
struct FracOp {
    Eigen::Matrix2i M;
    Vec2 t;
};

FracOp compose(const FracOp& a, const FracOp& b);
bool same_op(const FracOp& a, const FracOp& b, double tol = 1e-12);

// Extra inequality g(c1, c2) <= 0 restricting the centroid inside the
// asymmetric unit beyond the plain box (p3 and p6mm need these).
struct ExtraConstraint {
    const char* expr;  // printable form
    double (*eval)(double c1, double c2);
};

struct PlaneGroupDef {
    std::string name;
    CrystalSystem system;
    std::vector<FracOp> ops;
    bool b2_equals_b1;       // |b2| pinned to |b1|
    bool omega_c_free;       // cell angle is a design variable
    double omega_c_pinned;   // value used when the angle is not free
    double omega_c_max;      // upper bound when the angle is free
    double c1_max, c2_max;   // asymmetric-unit box (0, c_max]
    std::vector<ExtraConstraint> extra;

    int op_count() const { return static_cast<int>(ops.size()); }
    // free design variables: c1, c2, omega_p, |b1| [, |b2|] [, omega_c]
    int variable_count() const { return 4 + (b2_equals_b1 ? 0 : 1) + (omega_c_free ? 1 : 0); }
};

const PlaneGroupDef& plane_group(const std::string& name);  // throws UnknownGroup
const std::vector<std::string>& plane_group_names();

// Column basis [b1 b2] with b1 along +x and b2 at angle omega_c from b1.
Mat2 lattice_basis(double b1_len, double b2_len, double omega_c);

// Upper bound rule for the lattice length variables.
enum class LatticeBound { twice_diameter, ops_times_diameter };

struct VarSpec {
    const char* name;
    double lo, hi;
    bool periodic;
};

// Ordered free variables with bounds for packing a polygon of the given
// circumdiameter under the group's crystal system.
std::vector<VarSpec> design_layout(const PlaneGroupDef& g, double circumdiameter,
                                   LatticeBound bound_rule = LatticeBound::twice_diameter);

}  // namespace pack

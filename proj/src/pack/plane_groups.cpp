#include "pack/plane_groups.hpp"

#include <cmath>

namespace pack {

namespace {

Eigen::Matrix2i mat(int a, int b, int c, int d) {
    Eigen::Matrix2i m;
    m << a, b, c, d;
    return m;
}

constexpr double kHalf = 0.5;
constexpr double kPi = M_PI;

std::vector<FracOp> point_ops(std::initializer_list<Eigen::Matrix2i> ms) {
    std::vector<FracOp> ops;
    for (const auto& m : ms) ops.push_back({m, Vec2::Zero()});
    return ops;
}

// p6mm = <C6, m>: all twelve products C6^k and C6^k * m.
std::vector<FracOp> hexagonal_full_ops() {
    const Eigen::Matrix2i c6 = mat(1, -1, 1, 0);
    const Eigen::Matrix2i mirror = mat(1, -1, 0, -1);
    std::vector<FracOp> ops;
    Eigen::Matrix2i r = Eigen::Matrix2i::Identity();
    for (int k = 0; k < 6; ++k) {
        ops.push_back({r, Vec2::Zero()});
        ops.push_back({r * mirror, Vec2::Zero()});
        r = r * c6;
    }
    return ops;
}

double p3_reach(double c1, double c2) {
    return c2 - std::min(1.0 - c1, 0.5 * c1 + 0.5);
}
double p3_diag(double c1, double c2) { return c1 - 0.5 * c2 - 0.5; }
double p6mm_first(double c1, double c2) { return 2.0 * c1 - c2 - 1.0; }
double p6mm_second(double c1, double c2) { return -0.5 * c1 + c2; }

std::vector<PlaneGroupDef> build_registry() {
    const Eigen::Matrix2i I = Eigen::Matrix2i::Identity();
    const Eigen::Matrix2i nI = -I;
    const Eigen::Matrix2i mx = mat(1, 0, 0, -1);   // mirror across the x axis
    const Eigen::Matrix2i my = mat(-1, 0, 0, 1);   // mirror across the y axis
    const Eigen::Matrix2i swap = mat(0, 1, 1, 0);  // swaps the basis vectors
    const Eigen::Matrix2i c4 = mat(0, -1, 1, 0);
    const Eigen::Matrix2i c3 = mat(0, -1, 1, -1);

    std::vector<PlaneGroupDef> reg;

    reg.push_back({"p1", CrystalSystem::oblique, point_ops({I}),
                   false, true, 0.0, kPi / 2.0, 1.0, 1.0, {}});
    reg.push_back({"p2", CrystalSystem::oblique, point_ops({I, nI}),
                   false, true, 0.0, kPi / 2.0, 1.0, 0.5, {}});
    reg.push_back({"pg", CrystalSystem::rectangular,
                   {{I, Vec2::Zero()}, {mx, Vec2(kHalf, 0.0)}},
                   false, false, kPi / 2.0, 0.0, 1.0, 0.5, {}});
    // cm in its primitive rhombic setting: equal-length generators with a free
    // angle, and a mirror that exchanges them.
    reg.push_back({"cm", CrystalSystem::rectangular,
                   {{I, Vec2::Zero()}, {swap, Vec2::Zero()}},
                   true, true, 0.0, kPi / 2.0, 1.0, 1.0, {}});
    reg.push_back({"p2mm", CrystalSystem::rectangular, point_ops({I, nI, my, mx}),
                   false, false, kPi / 2.0, 0.0, 0.5, 0.5, {}});
    reg.push_back({"p2mg", CrystalSystem::rectangular,
                   {{I, Vec2::Zero()},
                    {nI, Vec2::Zero()},
                    {mx, Vec2(kHalf, 0.0)},
                    {my, Vec2(kHalf, 0.0)}},
                   false, false, kPi / 2.0, 0.0, 0.25, 1.0, {}});
    reg.push_back({"p2gg", CrystalSystem::rectangular,
                   {{I, Vec2::Zero()},
                    {nI, Vec2::Zero()},
                    {mx, Vec2(kHalf, kHalf)},
                    {my, Vec2(kHalf, kHalf)}},
                   false, false, kPi / 2.0, 0.0, 0.5, 0.5, {}});
    reg.push_back({"p4", CrystalSystem::square, point_ops({I, c4, nI, c4 * c4 * c4}),
                   true, false, kPi / 2.0, 0.0, 0.5, 0.5, {}});
    reg.push_back({"p3", CrystalSystem::hexagonal, point_ops({I, c3, c3 * c3}),
                   true, false, 2.0 * kPi / 3.0, 0.0, 2.0 / 3.0, 2.0 / 3.0,
                   {{"c2 - min(1 - c1, c1/2 + 1/2)", p3_reach},
                    {"c1 - c2/2 - 1/2", p3_diag}}});
    reg.push_back({"p6mm", CrystalSystem::hexagonal, hexagonal_full_ops(),
                   true, false, 2.0 * kPi / 3.0, 0.0, 2.0 / 3.0, 1.0 / 3.0,
                   {{"2 c1 - c2 - 1", p6mm_first}, {"-c1/2 + c2", p6mm_second}}});
    return reg;
}

const std::vector<PlaneGroupDef>& registry() {
    static const std::vector<PlaneGroupDef> reg = build_registry();
    return reg;
}

}  // namespace

const char* to_string(CrystalSystem s) {
    switch (s) {
        case CrystalSystem::oblique: return "oblique";
        case CrystalSystem::rectangular: return "rectangular";
        case CrystalSystem::square: return "square";
        case CrystalSystem::hexagonal: return "hexagonal";
    }
    return "?";
}

FracOp compose(const FracOp& a, const FracOp& b) {
    return {a.M * b.M, a.M.cast<double>() * b.t + a.t};
}

bool same_op(const FracOp& a, const FracOp& b, double tol) {
    if (a.M != b.M) return false;
    for (int i = 0; i < 2; ++i) {
        const double d = a.t(i) - b.t(i);
        if (std::abs(d - std::round(d)) > tol) return false;  // equal modulo 1
    }
    return true;
}

const PlaneGroupDef& plane_group(const std::string& name) {
    for (const PlaneGroupDef& g : registry()) {
        if (g.name == name) return g;
    }
    std::string known;
    for (const PlaneGroupDef& g : registry()) {
        known += known.empty() ? g.name : ", " + g.name;
    }
    throw UnknownGroup("unknown plane group '" + name + "' (known: " + known + ")");
}

const std::vector<std::string>& plane_group_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const PlaneGroupDef& g : registry()) out.push_back(g.name);
        return out;
    }();
    return names;
}

Mat2 lattice_basis(double b1_len, double b2_len, double omega_c) {
    Mat2 basis;
    basis.col(0) = Vec2(b1_len, 0.0);
    basis.col(1) = b2_len * Vec2(std::cos(omega_c), std::sin(omega_c));
    return basis;
}

std::vector<VarSpec> design_layout(const PlaneGroupDef& g, double circumdiameter,
                                   LatticeBound bound_rule) {
    const double len_hi = bound_rule == LatticeBound::twice_diameter
                              ? 2.0 * circumdiameter
                              : g.op_count() * circumdiameter;
    std::vector<VarSpec> layout;
    layout.push_back({"c1", 0.0, g.c1_max, true});
    layout.push_back({"c2", 0.0, g.c2_max, true});
    layout.push_back({"omega_p", 0.0, 2.0 * kPi, true});
    layout.push_back({"b1", 0.0, len_hi, false});
    if (!g.b2_equals_b1) layout.push_back({"b2", 0.0, len_hi, false});
    if (g.omega_c_free) layout.push_back({"omega_c", 0.0, g.omega_c_max, true});
    return layout;
}

}  // namespace pack

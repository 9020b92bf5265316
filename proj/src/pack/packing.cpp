#include "pack/packing.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace pack {

namespace {

double wrap_unit(double v) {
    const double w = v - std::floor(v);
    return w == 1.0 ? 0.0 : w;  // floor(-1e-17) artifacts
}

// Fill colors by symmetry-op index; 12 covers the largest group (p6mm).
const char* const kPalette[12] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                  "#bcbd22", "#17becf", "#aec7e8", "#ffbb78"};

void append_num(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    out += buf;
}

}  // namespace

Configuration decode_configuration(const PlaneGroupDef& group, const ConvexPolygon& polygon,
                                   const Eigen::VectorXd& x, LatticeBound bound_rule) {
    const std::vector<VarSpec> layout = design_layout(group, polygon.circumdiameter, bound_rule);
    if (x.size() != static_cast<Eigen::Index>(layout.size())) {
        throw OutOfBounds("design vector has " + std::to_string(x.size()) + " entries, " +
                          group.name + " needs " + std::to_string(layout.size()));
    }
    for (std::size_t i = 0; i < layout.size(); ++i) {
        if (x(i) < layout[i].lo - 1e-9 || x(i) > layout[i].hi + 1e-9) {
            throw OutOfBounds(std::string(layout[i].name) + " = " + std::to_string(x(i)) +
                              " outside [" + std::to_string(layout[i].lo) + ", " +
                              std::to_string(layout[i].hi) + "]");
        }
    }

    const double c1 = x(0), c2 = x(1), omega_p = x(2), len1 = x(3);
    int idx = 4;
    const double len2 = group.b2_equals_b1 ? len1 : x(idx++);
    const double omega_c = group.omega_c_free ? x(idx++) : group.omega_c_pinned;

    const Mat2 basis = lattice_basis(len1, len2, omega_c);
    const double det = basis.determinant();
    if (std::abs(det) < 1e-12) throw SingularLattice("degenerate lattice in decode");
    Mat2 inv;
    inv << basis(1, 1), -basis(0, 1), -basis(1, 0), basis(0, 0);
    inv /= det;

    const Mat2 spin = Eigen::Rotation2Dd(omega_p).toRotationMatrix();
    const Vec2 frac_centroid(c1, c2);

    Configuration cfg;
    cfg.group = &group;
    cfg.polygon = &polygon;
    cfg.b1 = basis.col(0);
    cfg.b2 = basis.col(1);
    cfg.design = x;
    cfg.placements.reserve(group.ops.size());
    for (const FracOp& op : group.ops) {
        Vec2 f = op.M.cast<double>() * frac_centroid + op.t;
        f = Vec2(wrap_unit(f.x()), wrap_unit(f.y()));
        const Mat2 cart = basis * op.M.cast<double>() * inv;
        cfg.placements.push_back({cart * spin, basis * f});
    }
    return cfg;
}

double packing_violation(const Configuration& cfg) {
    const int n = static_cast<int>(cfg.placements.size());
    const double diameter = cfg.polygon->circumdiameter;

    // Work in a Lagrange-reduced basis of the same lattice: the reduced
    // vectors are the shortest basis, so nearby translates always carry small
    // coefficients and the index windows below are tight.
    Vec2 r1 = cfg.b1;
    Vec2 r2 = cfg.b2;
    for (int pass = 0; pass < 64; ++pass) {
        if (r2.squaredNorm() < r1.squaredNorm()) r1.swap(r2);
        const double mu = std::round(r2.dot(r1) / r1.squaredNorm());
        if (mu == 0.0) break;
        r2 -= mu * r1;
    }

    // Two copies can touch only when their center offset is at most the
    // circumdiameter, so for the pair (i, j) every relevant lattice shift
    // a1*r1 + a2*r2 lies within that radius of p_i - p_j. The index bounds
    // follow from the dual basis: a1 = <shift, d1> with ||d1|| = |r2|/|det|.
    Mat2 basis;
    basis << r1, r2;
    const double det = basis.determinant();
    Mat2 inv;
    inv << basis(1, 1), -basis(0, 1), -basis(1, 0), basis(0, 0);
    inv /= det;
    const double reach1 = diameter * r2.norm() / std::abs(det);
    const double reach2 = diameter * r1.norm() / std::abs(det);

    // Thin cells make the index ranges huge while every copy already overlaps
    // its nearest translates (the reduced basis puts those at small indices),
    // so a window this wide around the rounded center always contains the
    // contact-capable shifts that decide feasibility.
    constexpr long kMaxShell = 12;

    double worst = std::numeric_limits<double>::infinity();
    auto scan = [&](const PairSeparation& cached, const Vec2& center, bool half) {
        const double t1 = inv.row(0).dot(center);
        const double t2 = inv.row(1).dot(center);
        const long c1 = std::lround(t1);
        const long c2 = std::lround(t2);
        // Besides everything within reach, always scan the 3x3 core around the
        // rounded center: in the reduced basis those are the nearest translates,
        // so sparse configurations still report their nearest-neighbor margin.
        const long lo1 = std::max(c1 - kMaxShell, static_cast<long>(std::ceil(t1 - reach1)));
        const long hi1 = std::min(c1 + kMaxShell, static_cast<long>(std::floor(t1 + reach1)));
        const long lo2 = std::max(c2 - kMaxShell, static_cast<long>(std::ceil(t2 - reach2)));
        const long hi2 = std::min(c2 + kMaxShell, static_cast<long>(std::floor(t2 + reach2)));
        for (long a1 = std::min(lo1, c1 - 1); a1 <= std::max(hi1, c1 + 1); ++a1) {
            for (long a2 = std::min(lo2, c2 - 1); a2 <= std::max(hi2, c2 + 1); ++a2) {
                // Self pairs: alpha and -alpha describe the same copy pair,
                // keep the lexicographically positive half.
                if (half && (a1 < 0 || (a1 == 0 && a2 <= 0))) continue;
                worst = std::min(worst, cached.at(static_cast<double>(a1) * r1 +
                                                  static_cast<double>(a2) * r2));
            }
        }
    };

    // (i, j, alpha) and (j, i, -alpha) describe the same geometric pair, so
    // i < j suffices for distinct copies.
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const PairSeparation cached(*cfg.polygon, cfg.placements[i], cfg.placements[j]);
            scan(cached, cfg.placements[i].center - cfg.placements[j].center, false);
        }
    }
    for (int i = 0; i < n; ++i) {
        const PairSeparation cached(*cfg.polygon, cfg.placements[i], cfg.placements[i]);
        scan(cached, Vec2::Zero(), true);
    }
    return worst;
}

double packing_density(const Configuration& cfg) {
    return cfg.placements.size() * polygon_area(*cfg.polygon) / cell_area(cfg.b1, cfg.b2);
}

Eigen::VectorXd extra_constraint_values(const PlaneGroupDef& group, const Eigen::VectorXd& x) {
    Eigen::VectorXd g(group.extra.size());
    for (std::size_t k = 0; k < group.extra.size(); ++k) {
        g(k) = group.extra[k].eval(x(0), x(1));
    }
    return g;
}

std::string render_svg(const Configuration& cfg, int cells_per_axis) {
    const ConvexPolygon& poly = *cfg.polygon;
    const int m = poly.vertex_count();

    double min_x = 0.0, max_x = 0.0, min_y = 0.0, max_y = 0.0;
    auto grow = [&](const Vec2& p) {
        min_x = std::min(min_x, p.x());
        max_x = std::max(max_x, p.x());
        min_y = std::min(min_y, -p.y());  // y points down in SVG
        max_y = std::max(max_y, -p.y());
    };

    std::string body;
    for (int t1 = 0; t1 < cells_per_axis; ++t1) {
        for (int t2 = 0; t2 < cells_per_axis; ++t2) {
            const Vec2 shift = t1 * cfg.b1 + t2 * cfg.b2;
            for (std::size_t k = 0; k < cfg.placements.size(); ++k) {
                const Placement& pl = cfg.placements[k];
                body += "<polygon points=\"";
                for (int i = 0; i < m; ++i) {
                    const Vec2 p = pl.rot * poly.vertices.row(i).transpose() + pl.center + shift;
                    grow(p);
                    if (i) body += ' ';
                    append_num(body, p.x());
                    body += ',';
                    append_num(body, -p.y());
                }
                body += "\" fill=\"";
                body += kPalette[k % 12];
                body += "\" fill-opacity=\"0.85\"/>\n";
            }
        }
    }

    const Vec2 corners[4] = {Vec2::Zero(), cfg.b1, cfg.b1 + cfg.b2, cfg.b2};
    std::string outline = "<path d=\"";
    for (int i = 0; i < 4; ++i) {
        grow(corners[i]);
        outline += i == 0 ? "M " : "L ";
        append_num(outline, corners[i].x());
        outline += ' ';
        append_num(outline, -corners[i].y());
        outline += ' ';
    }
    outline += "Z\" fill=\"none\" stroke=\"#000000\" stroke-width=\"";
    const double extent = std::max(max_x - min_x, max_y - min_y);
    append_num(outline, 0.004 * extent);
    outline += "\"/>\n";

    const double pad = 0.02 * extent;
    std::string svg = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"";
    append_num(svg, min_x - pad);
    svg += ' ';
    append_num(svg, min_y - pad);
    svg += ' ';
    append_num(svg, max_x - min_x + 2.0 * pad);
    svg += ' ';
    append_num(svg, max_y - min_y + 2.0 * pad);
    svg += "\">\n";
    svg += body;
    svg += outline;
    svg += "</svg>\n";
    return svg;
}

}  // namespace pack

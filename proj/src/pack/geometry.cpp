#include "pack/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace pack {

namespace {

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

// Andrew monotone chain with strict turns; returns CCW hull vertices.
std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
    std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    const int n = static_cast<int>(pts.size());
    std::vector<Vec2> hull(2 * n);
    int k = 0;
    for (int i = 0; i < n; ++i) {  // lower chain
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    for (int i = n - 2, lower = k + 1; i >= 0; --i) {  // upper chain
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

// Area centroid of a CCW simple polygon.
Vec2 area_centroid(const std::vector<Vec2>& v, double* area_out) {
    double a2 = 0.0;
    Vec2 c = Vec2::Zero();
    const int n = static_cast<int>(v.size());
    for (int i = 0; i < n; ++i) {
        const Vec2& p = v[i];
        const Vec2& q = v[(i + 1) % n];
        const double w = p.x() * q.y() - q.x() * p.y();
        a2 += w;
        c += (p + q) * w;
    }
    if (area_out) *area_out = 0.5 * a2;
    return c / (3.0 * a2);
}

bool strictly_inside_hull(const Vec2& p, const std::vector<Vec2>& hull) {
    const int n = static_cast<int>(hull.size());
    for (int i = 0; i < n; ++i) {
        if (cross(hull[i], hull[(i + 1) % n], p) <= 0.0) return false;
    }
    return true;
}

}  // namespace

ConvexPolygon polygon_from_vertices(const std::vector<Vec2>& points) {
    if (points.size() < 3) throw Degenerate("polygon needs at least 3 vertices");
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            if ((points[i] - points[j]).norm() < 1e-9) {
                throw Degenerate("duplicate vertices within 1e-9");
            }
        }
    }

    std::vector<Vec2> hull = convex_hull(points);
    if (hull.size() < 3) throw Degenerate("vertices are collinear");
    if (hull.size() < points.size()) {
        // Dropped points are either strictly interior (not convex) or sit on a
        // hull edge (a collinear, degenerate vertex).
        for (const Vec2& p : points) {
            bool on_hull = false;
            for (const Vec2& h : hull) {
                if ((p - h).norm() < 1e-12) on_hull = true;
            }
            if (on_hull) continue;
            if (strictly_inside_hull(p, hull)) {
                throw NonConvex("a vertex lies strictly inside the hull of the others");
            }
            throw Degenerate("a vertex lies on an edge of the hull (collinear)");
        }
    }

    const Vec2 centroid = area_centroid(hull, nullptr);
    const int m = static_cast<int>(hull.size());

    ConvexPolygon poly;
    poly.vertices.resize(m, 2);
    poly.normals.resize(m, 2);
    poly.offsets.resize(m);
    double max_norm = 0.0;
    for (int i = 0; i < m; ++i) {
        const Vec2 v = hull[i] - centroid;
        poly.vertices.row(i) = v.transpose();
        max_norm = std::max(max_norm, v.norm());
    }
    for (int i = 0; i < m; ++i) {
        const Vec2 v = poly.vertices.row(i).transpose();
        const Vec2 w = poly.vertices.row((i + 1) % m).transpose();
        const Vec2 e = w - v;
        Vec2 a(e.y(), -e.x());  // outward for CCW order
        a.normalize();
        poly.normals.row(i) = a.transpose();
        poly.offsets(i) = -a.dot(v);
    }
    poly.circumdiameter = 2.0 * max_norm;
    return poly;
}

ConvexPolygon regular_polygon(int sides, double circumradius) {
    std::vector<Vec2> pts;
    pts.reserve(sides);
    for (int k = 0; k < sides; ++k) {
        const double ang = 2.0 * M_PI * k / sides;
        pts.emplace_back(circumradius * std::cos(ang), circumradius * std::sin(ang));
    }
    return polygon_from_vertices(pts);
}

double polygon_area(const ConvexPolygon& p) {
    const int m = p.vertex_count();
    double a2 = 0.0;
    for (int i = 0; i < m; ++i) {
        const auto v = p.vertices.row(i);
        const auto w = p.vertices.row((i + 1) % m);
        a2 += v.x() * w.y() - w.x() * v.y();
    }
    return 0.5 * a2;
}

double cell_area(const Vec2& b1, const Vec2& b2) {
    const double det = b1.x() * b2.y() - b1.y() * b2.x();
    if (std::abs(det) < 1e-12) throw SingularLattice("lattice generators are (near) parallel");
    return std::abs(det);
}

PairSeparation::PairSeparation(const ConvexPolygon& poly, const Placement& p1,
                               const Placement& p2) {
    const auto& V = poly.vertices;
    const auto& A = poly.normals;
    const Vec2 dc = p2.center - p1.center;

    // Copy-2 vertices in copy-1's frame (before any lattice shift).
    Eigen::Matrix<double, Eigen::Dynamic, 2> w21 =
        ((V * p2.rot.transpose()).rowwise() + dc.transpose()) * p1.rot;
    base21_ = (A * w21.transpose()).rowwise().minCoeff() + poly.offsets;
    dir21_ = A * p1.rot.transpose();  // row i = a_i^T R1^T, applied to the shift

    // Copy-1 vertices in copy-2's frame; the shift enters with opposite sign.
    Eigen::Matrix<double, Eigen::Dynamic, 2> w12 =
        ((V * p1.rot.transpose()).rowwise() - dc.transpose()) * p2.rot;
    base12_ = (A * w12.transpose()).rowwise().minCoeff() + poly.offsets;
    dir12_ = -(A * p2.rot.transpose());
}

double PairSeparation::at(const Vec2& shift) const {
    const double d21 = (base21_ + dir21_ * shift).maxCoeff();
    const double d12 = (base12_ + dir12_ * shift).maxCoeff();
    return std::max(d21, d12);
}

double pair_distance(const ConvexPolygon& poly, const Placement& p1, const Placement& p2) {
    return PairSeparation(poly, p1, p2).at(Vec2::Zero());
}

}  // namespace pack

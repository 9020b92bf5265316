// Pins the reference layer in tests/oracles.hpp against closed-form values
// before anything in src/pack/ is tested with it.
#include "doctest.h"
#include "oracles.hpp"

#include <cmath>
#include <random>

using oracle::Vec2;

namespace {

std::vector<Vec2> regular_ngon(int m, double r, double phase = 0.0, Vec2 c = Vec2::Zero()) {
    std::vector<Vec2> v;
    for (int k = 0; k < m; ++k) {
        const double a = phase + 2.0 * M_PI * k / m;
        v.emplace_back(c.x() + r * std::cos(a), c.y() + r * std::sin(a));
    }
    return v;
}

std::vector<Vec2> square(Vec2 c, double side = 1.0) {
    const double h = side / 2.0;
    return {{c.x() - h, c.y() - h}, {c.x() + h, c.y() - h}, {c.x() + h, c.y() + h},
            {c.x() - h, c.y() + h}};
}

}  // namespace

TEST_CASE("shoelace area matches closed forms") {
    CHECK(oracle::shoelace_area(square({0, 0})) == doctest::Approx(1.0).epsilon(1e-14));
    // regular octagon, circumradius 1: 2*sqrt(2)
    CHECK(oracle::shoelace_area(regular_ngon(8, 1.0)) ==
          doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-13));
    // regular hexagon, side 1 (= circumradius 1): 3*sqrt(3)/2
    CHECK(oracle::shoelace_area(regular_ngon(6, 1.0)) ==
          doctest::Approx(1.5 * std::sqrt(3.0)).epsilon(1e-13));
    // regular pentagon, circumradius 1: (5/2) sin(2*pi/5)
    CHECK(oracle::shoelace_area(regular_ngon(5, 1.0)) ==
          doctest::Approx(2.5 * std::sin(2.0 * M_PI / 5.0)).epsilon(1e-13));
    // orientation carries the sign
    auto cw = square({0, 0});
    std::reverse(cw.begin(), cw.end());
    CHECK(oracle::shoelace_area(cw) == doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("polygon centroid of an offset square") {
    const Vec2 c = oracle::polygon_centroid(square({1.25, -0.5}));
    CHECK(c.x() == doctest::Approx(1.25).epsilon(1e-14));
    CHECK(c.y() == doctest::Approx(-0.5).epsilon(1e-14));
}

TEST_CASE("strict overlap oracle on constructed square pairs") {
    // far apart
    CHECK_FALSE(oracle::convex_strictly_overlap(square({0, 0}), square({3, 0})));
    // clearly interpenetrating
    CHECK(oracle::convex_strictly_overlap(square({0, 0}), square({0.5, 0})));
    // one contains the other
    CHECK(oracle::convex_strictly_overlap(square({0, 0}, 3.0), square({0, 0}, 1.0)));
    // edge-touching squares share no interior point
    CHECK_FALSE(oracle::convex_strictly_overlap(square({0, 0}), square({1, 0})));
    // crossing without any vertex containment (plus shape)
    std::vector<Vec2> tall = {{-0.1, -1}, {0.1, -1}, {0.1, 1}, {-0.1, 1}};
    std::vector<Vec2> wide = {{-1, -0.1}, {1, -0.1}, {1, 0.1}, {-1, 0.1}};
    CHECK(oracle::convex_strictly_overlap(tall, wide));
}

TEST_CASE("separation oracle distances and feature classification") {
    // face-to-face squares: gap 2, vertex projects inside the facing edge
    auto s = oracle::polygon_separation(square({0, 0}), square({3, 0}));
    CHECK(s.distance == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(s.vertex_edge_optimal);

    // corner-to-corner squares: gap sqrt(2), optimal direction is no face normal
    s = oracle::polygon_separation(square({0, 0}), square({2, 2}));
    CHECK(s.distance == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK_FALSE(s.vertex_edge_optimal);

    // point to segment: clamping at an endpoint
    double t = -1.0;
    const double d = oracle::point_segment_distance({2, 1}, {0, 0}, {1, 0}, &t);
    CHECK(d == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(t == doctest::Approx(1.0));
}

TEST_CASE("periodic quadrature is spectrally accurate") {
    CHECK(oracle::circle_quad([](double t) { return std::cos(t) * std::cos(t); }) ==
          doctest::Approx(M_PI).epsilon(1e-12));
    CHECK(oracle::torus2_quad([](double a, double b) { return std::sin(a + b) + 2.0; }, 128) ==
          doctest::Approx(2.0 * 4.0 * M_PI * M_PI).epsilon(1e-12));
}

TEST_CASE("Bessel quadrature matches tabulated values") {
    // Abramowitz & Stegun 9.8: I0(2) = 2.2795853..., I1(2) = 1.5906368...
    CHECK(oracle::bessel_i(0, 2.0) == doctest::Approx(2.2795853023360673).epsilon(1e-12));
    CHECK(oracle::bessel_i(1, 2.0) == doctest::Approx(1.5906368546373291).epsilon(1e-12));
    CHECK(oracle::bessel_ratio(2.0) == doctest::Approx(0.6977746579640078).epsilon(1e-12));
    CHECK(oracle::bessel_i(0, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("chi-squared survival function against low-dof identities") {
    // k=2: exp(-x/2); k=4: exp(-x/2)(1+x/2); k=1: erfc(sqrt(x/2))
    for (double x : {0.3, 1.7, 5.0, 12.0}) {
        CHECK(oracle::chi2_sf(x, 2.0) == doctest::Approx(std::exp(-0.5 * x)).epsilon(1e-12));
        CHECK(oracle::chi2_sf(x, 4.0) ==
              doctest::Approx(std::exp(-0.5 * x) * (1.0 + 0.5 * x)).epsilon(1e-12));
        CHECK(oracle::chi2_sf(x, 1.0) ==
              doctest::Approx(std::erfc(std::sqrt(0.5 * x))).epsilon(1e-12));
    }
    CHECK(oracle::chi2_sf(0.0, 5.0) == doctest::Approx(1.0));
}

TEST_CASE("KS statistic behaves on uniform and shifted samples") {
    auto uniform_cdf = [](double x) { return std::clamp(x, 0.0, 1.0); };
    std::vector<double> grid;
    const int n = 10000;
    for (int i = 0; i < n; ++i) grid.push_back((i + 0.5) / n);
    CHECK(oracle::ks_statistic(grid, uniform_cdf) <= 0.5 / n + 1e-12);
    CHECK(oracle::ks_critical_01(n) == doctest::Approx(1.62762 / 100.0));

    std::vector<double> shifted;
    for (int i = 0; i < n; ++i) shifted.push_back(std::min(1.0, 0.1 + (i + 0.5) / n));
    CHECK(oracle::ks_statistic(shifted, uniform_cdf) > oracle::ks_critical_01(n));
}

TEST_CASE("circular cdf table integrates a von Mises density") {
    const double kappa = 2.0, nu = 1.0;
    auto density = [&](double t) { return std::exp(kappa * std::cos(t - nu)); };
    auto cdf = oracle::circular_cdf(density);
    CHECK(cdf(0.0) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(cdf(2.0 * M_PI - 1e-12) == doctest::Approx(1.0).epsilon(1e-6));
    // monotone on a coarse probe
    double prev = -1.0;
    for (int i = 0; i <= 100; ++i) {
        const double v = cdf(2.0 * M_PI * i / 100.5);
        CHECK(v >= prev - 1e-15);
        prev = v;
    }
    // the cdf evaluated halfway around the mean is 1/2 by symmetry
    CHECK(cdf(nu + M_PI) - cdf(nu) == doctest::Approx(0.5).epsilon(1e-9));
}

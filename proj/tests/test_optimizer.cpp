#include "doctest.h"
#include "oracles.hpp"
#include "pack/optimizer.hpp"

#include <cmath>
#include <vector>

using pack::Hyperparams;
using pack::LogRow;
using pack::Problem;
using pack::ResolvedHyperparams;
using pack::RunRecord;
using pack::Solution;
using pack::Vec2;

namespace {

constexpr double kPi = 3.14159265358979323846;

pack::ConvexPolygon unit_square() {
    return pack::polygon_from_vertices({Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)});
}

Problem square_p1_problem() {
    return pack::make_problem(pack::plane_group("p1"), unit_square());
}

bool same_rows(const std::vector<LogRow>& a, const std::vector<LogRow>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const LogRow& x = a[i];
        const LogRow& y = b[i];
        if (x.iter != y.iter || x.mean_density != y.mean_density ||
            x.max_density != y.max_density || x.best_density != y.best_density ||
            x.q != y.q || x.feasible_frac != y.feasible_frac || x.lambda_min != y.lambda_min ||
            x.step_norm_mu != y.step_norm_mu || x.step_norm_kappa != y.step_norm_kappa ||
            x.step_norm_D != y.step_norm_D) {
            return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("boundary map: periodic affine, aperiodic triangle wave") {
    CHECK(pack::boundary_map_scalar(kPi, 0.0, 10.0, true) == doctest::Approx(5.0));
    CHECK(pack::boundary_map_scalar(kPi - 1e-12, 2.0, 7.0, false) ==
          doctest::Approx(7.0).epsilon(1e-11));
    CHECK(pack::boundary_map_scalar(1.5 * kPi, 0.0, 10.0, false) == doctest::Approx(5.0));
    CHECK(pack::boundary_map_scalar(0.0, -3.0, 4.0, true) == -3.0);
    CHECK(pack::boundary_map_scalar(0.0, -3.0, 4.0, false) == -3.0);

    pack::Rng rng = pack::Rng::stream(11, 0, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const double x = rng.uniform(0.0, 2.0 * kPi);
        const double lo = rng.uniform(-5.0, 0.0);
        const double hi = lo + rng.uniform(0.1, 9.0);
        const double periodic = pack::boundary_map_scalar(x, lo, hi, true);
        CHECK(periodic >= lo);
        CHECK(periodic < hi);
        const double folded = pack::boundary_map_scalar(x, lo, hi, false);
        CHECK(folded >= lo - 1e-12);
        CHECK(folded <= hi + 1e-12);
        if (x > 0.0) {
            const double mirrored = pack::boundary_map_scalar(2.0 * kPi - x, lo, hi, false);
            CHECK(folded == doctest::Approx(mirrored).epsilon(1e-10));
        }
    }

    Eigen::VectorXd point(2), lo(2), hi(2);
    point << kPi, 1.5 * kPi;
    lo << 0.0, 0.0;
    hi << 10.0, 10.0;
    const Eigen::VectorXd mapped = pack::boundary_map(point, lo, hi, {true, false});
    CHECK(mapped(0) == doctest::Approx(5.0));
    CHECK(mapped(1) == doctest::Approx(5.0));
    CHECK_THROWS_AS(pack::boundary_map(point, lo, hi, {true}), pack::InputError);
}

TEST_CASE("penalty fitness: feasible objectives pass through, violations stack normalized") {
    Eigen::VectorXd f(3);
    f << 1.0, 2.0, 4.0;

    Eigen::MatrixXd g_ok(3, 1);
    g_ok << -0.5, 0.0, -2.0;
    const Eigen::VectorXd all_ok = pack::penalty_fitness(f, g_ok);
    CHECK((all_ok - f).cwiseAbs().maxCoeff() == 0.0);

    Eigen::MatrixXd g(3, 1);
    g << -0.1, 0.0, 0.5;
    const Eigen::VectorXd mixed = pack::penalty_fitness(f, g);
    CHECK(mixed(0) == 1.0);
    CHECK(mixed(1) == 2.0);
    CHECK(mixed(2) == doctest::Approx(3.0));

    // Two violated constraints add two normalized shares on top of f_max.
    Eigen::VectorXd f2(3);
    f2 << 1.0, 5.0, 9.0;
    Eigen::MatrixXd g2(3, 2);
    g2 << -1.0, -1.0, 0.2, 4.0, 0.4, -0.5;
    const Eigen::VectorXd two = pack::penalty_fitness(f2, g2);
    CHECK(two(0) == 1.0);
    CHECK(two(1) == doctest::Approx(1.0 + 0.2 / 0.4 + 4.0 / 4.0));
    CHECK(two(2) == doctest::Approx(1.0 + 0.4 / 0.4));

    // No feasible point: f_max falls back to 0 and the violation order rules.
    Eigen::VectorXd f3(2);
    f3 << 7.0, 9.0;
    Eigen::MatrixXd g3(2, 1);
    g3 << 1.0, 0.5;
    const Eigen::VectorXd none = pack::penalty_fitness(f3, g3);
    CHECK(none(0) == doctest::Approx(1.0));
    CHECK(none(1) == doctest::Approx(0.5));
    CHECK(none(1) < none(0));

    // Every feasible point beats every infeasible point.
    pack::Rng rng = pack::Rng::stream(12, 0, 0);
    for (int trial = 0; trial < 20; ++trial) {
        const int count = 120;
        Eigen::VectorXd obj(count);
        Eigen::MatrixXd viol(count, 2);
        for (int i = 0; i < count; ++i) {
            obj(i) = rng.uniform(0.5, 6.0);
            viol(i, 0) = rng.uniform(-1.0, 1.0);
            viol(i, 1) = rng.uniform(-1.0, 1.0);
        }
        const Eigen::VectorXd fit = pack::penalty_fitness(obj, viol);
        double worst_feasible = -1e300;
        double best_infeasible = 1e300;
        for (int i = 0; i < count; ++i) {
            if ((viol.row(i).array() <= 0.0).all()) {
                worst_feasible = std::max(worst_feasible, fit(i));
            } else {
                best_infeasible = std::min(best_infeasible, fit(i));
            }
        }
        CHECK(worst_feasible < best_infeasible);
    }
}

TEST_CASE("quantile selection: count, stable ties, threshold, rank invariance") {
    Eigen::VectorXd f(6);
    f << 5.0, 1.0, 3.0, 2.0, 1.0, 4.0;

    const pack::Selection single = pack::select_quantile(f, 6.0);
    REQUIRE(single.indices.size() == 1);
    CHECK(single.indices[0] == 1);  // stable: first of the tied minima
    CHECK(single.threshold == 1.0);

    const pack::Selection half = pack::select_quantile(f, 2.0);
    REQUIRE(half.indices.size() == 3);
    CHECK(half.indices[0] == 1);
    CHECK(half.indices[1] == 4);
    CHECK(half.indices[2] == 3);
    CHECK(half.threshold == 2.0);

    // ceil(10 / 3) = 4
    Eigen::VectorXd ten = Eigen::VectorXd::LinSpaced(10, 0.0, 9.0);
    CHECK(pack::select_quantile(ten, 3.0).indices.size() == 4);

    // N / q exact: 600 samples at q = 6 keep 100.
    Eigen::VectorXd many = Eigen::VectorXd::Zero(600);
    const pack::Selection equal = pack::select_quantile(many, 6.0);
    REQUIRE(equal.indices.size() == 100);
    for (int i = 0; i < 100; ++i) CHECK(equal.indices[i] == i);

    // Rank selection ignores shifting and positive scaling.
    pack::Rng rng = pack::Rng::stream(13, 0, 0);
    Eigen::VectorXd random(40);
    for (int i = 0; i < 40; ++i) random(i) = rng.uniform(-4.0, 4.0);
    const pack::Selection base = pack::select_quantile(random, 3.0);
    const pack::Selection shifted = pack::select_quantile(
        (random.array() + 7.25).matrix(), 3.0);
    const pack::Selection scaled = pack::select_quantile((2.5 * random.array()).matrix(), 3.0);
    CHECK(base.indices == shifted.indices);
    CHECK(base.indices == scaled.indices);
}

TEST_CASE("Fisher estimate: constant batch vanishes, uniform torus matches analytic moments") {
    Eigen::MatrixXd constant(5, 4);
    for (int i = 0; i < 5; ++i) constant.row(i) << 1.0, -2.0, 0.5, 3.0;
    CHECK(pack::estimate_fisher(constant).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(pack::estimate_fisher(constant.topRows(1)), pack::InputError);

    const int n = 3;
    const int count = 20000;
    pack::CanonicalParams uniform;
    uniform.eta = Eigen::VectorXd::Zero(2 * n);
    uniform.E = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    const Eigen::MatrixXd thetas = pack::gibbs_sample(uniform, count, 2, 99, 1);
    const pack::StatLayout layout(n);
    Eigen::MatrixXd stats(count, layout.dim());
    for (int i = 0; i < count; ++i) {
        stats.row(i) = pack::sufficient_statistic(thetas.row(i).transpose()).transpose();
    }

    // Gradient sanity at the uniform start: every statistic has mean zero.
    const double tol = 5.0 / std::sqrt(static_cast<double>(count));
    CHECK(stats.colwise().mean().cwiseAbs().maxCoeff() < tol);

    const Eigen::MatrixXd fisher = pack::estimate_fisher(stats);
    CHECK((fisher - fisher.transpose()).cwiseAbs().maxCoeff() == 0.0);
    for (int i = 0; i < layout.dim(); ++i) {
        const double expected = i < 2 * n ? 0.5 : 0.25;
        CHECK(std::abs(fisher(i, i) - expected) < tol);
    }
    for (int i = 0; i < layout.dim(); ++i) {
        for (int j = i + 1; j < layout.dim(); ++j) {
            CHECK(std::abs(fisher(i, j)) < tol);
        }
    }
}

TEST_CASE("gradient estimate: selected mean minus batch mean") {
    Eigen::MatrixXd stats(2, 3);
    stats << 1.0, 2.0, 3.0, 5.0, -2.0, 1.0;
    std::vector<int> all = {0, 1};
    CHECK(pack::estimate_gradient(stats, all).cwiseAbs().maxCoeff() < 1e-15);

    std::vector<int> best = {0};
    const Eigen::VectorXd grad = pack::estimate_gradient(stats, best);
    const Eigen::VectorXd expected = (stats.row(0) - stats.row(1)).transpose() / 2.0;
    CHECK((grad - expected).cwiseAbs().maxCoeff() < 1e-15);

    CHECK_THROWS_AS(pack::estimate_gradient(stats, {}), pack::InputError);
}

TEST_CASE("natural step: unit metric, scale invariance, spectral norm identity") {
    const int dim = 5;
    Eigen::VectorXd grad(dim);
    grad << 1.0, -2.0, 0.5, 0.0, 3.0;

    const pack::NaturalStepResult unit =
        pack::natural_step(Eigen::MatrixXd::Identity(dim, dim), grad);
    CHECK((unit.step - grad / grad.norm()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(unit.lambda_min == doctest::Approx(1.0).epsilon(1e-9));

    // Isotropic scaling leaves the step unchanged.
    for (double c : {1e-4, 25.0}) {
        const pack::NaturalStepResult scaled =
            pack::natural_step(c * Eigen::MatrixXd::Identity(dim, dim), grad);
        CHECK((scaled.step - unit.step).cwiseAbs().maxCoeff() < 1e-12);
    }

    // step' * fisher * step equals the smallest eigenvalue of the solved matrix.
    pack::Rng rng = pack::Rng::stream(14, 0, 0);
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::MatrixXd m(dim, dim);
        Eigen::VectorXd g(dim);
        for (int i = 0; i < dim; ++i) {
            g(i) = rng.uniform(-1.0, 1.0);
            for (int j = 0; j < dim; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
        }
        const Eigen::MatrixXd fisher =
            m.transpose() * m + 0.1 * Eigen::MatrixXd::Identity(dim, dim);
        const pack::NaturalStepResult step = pack::natural_step(fisher, g);
        CHECK(std::abs(step.step.dot(step.jittered * step.step) - step.lambda_min) < 1e-8);
        CHECK(std::abs(step.step.dot(fisher * step.step) - step.lambda_min) < 1e-6);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(fisher, Eigen::EigenvaluesOnly);
        CHECK(step.lambda_min ==
              doctest::Approx(eig.eigenvalues().minCoeff()).epsilon(1e-6));
    }

    // Zero gradient yields a zero step but still reports the spectrum.
    const pack::NaturalStepResult idle =
        pack::natural_step(2.0 * Eigen::MatrixXd::Identity(dim, dim),
                           Eigen::VectorXd::Zero(dim));
    CHECK(idle.step.cwiseAbs().maxCoeff() == 0.0);
    CHECK(idle.lambda_min == doctest::Approx(2.0));

    // Hopeless matrices exhaust the ridge schedule.
    CHECK_THROWS_AS(pack::natural_step(Eigen::MatrixXd::Zero(dim, dim), grad),
                    pack::SingularFisher);
    CHECK_THROWS_AS(pack::natural_step(-Eigen::MatrixXd::Identity(dim, dim), grad),
                    pack::SingularFisher);
}

TEST_CASE("quantile update: exp schedule capped by the batch and floored at 1") {
    const double beta = std::log(100.0) / 2000.0;
    CHECK(pack::update_q(6.0, 0.0, beta, 600.0) == 6.0);
    CHECK(pack::update_q(6.0, 1.0, beta, 600.0) ==
          doctest::Approx(6.0 * std::pow(100.0, 1.0 / 2000.0)));
    CHECK(pack::update_q(600.0, 1.0, beta, 600.0) == 600.0);
    CHECK(pack::update_q(1.0, -1.0, 5.0, 600.0) == 1.0);
}

TEST_CASE("adaptive rates: growth capped, shrink on sign flips, zeros count as agreement") {
    Eigen::ArrayXd rates(4), now(4), prev(4);
    rates << 0.140625, 0.1, 0.05, 0.05;
    now << 0.2, -0.3, 0.4, 0.0;
    prev << 0.1, 0.3, 0.4, -2.0;
    pack::adapt_rates(rates, now, prev, 1.1, 0.9, 0.140625);
    CHECK(rates(0) == 0.140625);                      // capped at gamma0
    CHECK(rates(1) == doctest::Approx(0.09));         // sign flip
    CHECK(rates(2) == doctest::Approx(0.055));        // agreement grows
    CHECK(rates(3) == doctest::Approx(0.055));        // zero counts as agreement

    Eigen::ArrayXXd mrates(2, 2), mnow(2, 2), mprev(2, 2);
    mrates << 0.05, 0.1, 0.2, 1.0;
    mnow << 1.0, -1.0, 0.0, 1.0;
    mprev << 1.0, 1.0, 0.0, 1.0;
    pack::adapt_rates(mrates, mnow, mprev, 1.1, 0.9, 1.0);
    CHECK(mrates(0, 0) == doctest::Approx(0.055));
    CHECK(mrates(0, 1) == doctest::Approx(0.09));
    CHECK(mrates(1, 0) == doctest::Approx(0.22));
    CHECK(mrates(1, 1) == 1.0);
}

TEST_CASE("Fisher angle: metric-weighted cosine with degenerate guards") {
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(2, 2);
    Eigen::VectorXd ex(2), ey(2);
    ex << 1.0, 0.0;
    ey << 0.0, 1.0;
    CHECK(pack::fisher_cos_angle(identity, ex, ey) == 0.0);
    CHECK(pack::fisher_cos_angle(identity, ex, ex) == doctest::Approx(1.0));
    CHECK(pack::fisher_cos_angle(identity, ex, (-ex).eval()) == doctest::Approx(-1.0));
    CHECK(pack::fisher_cos_angle(identity, ex, Eigen::VectorXd::Zero(2)) == 0.0);

    Eigen::MatrixXd metric = Eigen::MatrixXd::Zero(2, 2);
    metric(0, 0) = 1.0;
    metric(1, 1) = 100.0;
    Eigen::VectorXd diag(2);
    diag << 1.0, 1.0;
    CHECK(pack::fisher_cos_angle(metric, ex, diag) ==
          doctest::Approx(1.0 / std::sqrt(101.0)));
}

TEST_CASE("problem construction and hyperparameter resolution") {
    const pack::ConvexPolygon octagon = pack::regular_polygon(8);
    const Problem p2 = pack::make_problem(pack::plane_group("p2"), octagon);
    CHECK(p2.dimension() == 6);
    CHECK(p2.lower.minCoeff() == 0.0);
    CHECK(p2.upper(0) == 1.0);
    CHECK(p2.upper(1) == 0.5);
    CHECK(p2.upper(3) == doctest::Approx(2.0 * octagon.circumdiameter));
    CHECK(p2.periodic[0]);
    CHECK_FALSE(p2.periodic[3]);

    Hyperparams h;
    const ResolvedHyperparams r6 = pack::resolve(h, 6);
    CHECK(r6.batch_size == 600);
    CHECK(r6.q0 == doctest::Approx(6.0));
    CHECK(r6.beta == doctest::Approx(std::log(100.0) / 2000.0));
    CHECK(pack::resolve(h, 5).batch_size == 424);
    CHECK(pack::resolve(h, 4).batch_size == 272);

    Hyperparams fixed = h;
    fixed.batch_size = 100;
    CHECK(pack::resolve(fixed, 6).batch_size == 100);
    CHECK(pack::resolve(fixed, 6).q0 == 1.0);
    fixed.batch_size = 50;
    CHECK_THROWS_AS(pack::resolve(fixed, 6), pack::InputError);

    Hyperparams bad = h;
    bad.c_down = 1.5;
    CHECK_THROWS_AS(pack::resolve(bad, 6), pack::InputError);
}

TEST_CASE("batch evaluation: designs, objectives, violations, degenerate rows") {
    const Problem problem = square_p1_problem();
    const int dim = problem.dimension();
    REQUIRE(dim == 6);

    Eigen::MatrixXd points(2, dim);
    // A loose square lattice: b1 = b2 = 1.2*sqrt(2), cell angle pi/4.
    points.row(0) << kPi, kPi, 0.0, 0.6 * kPi, 0.6 * kPi, kPi;
    // b1 maps to the lower bound 0: degenerate lattice.
    points.row(1) << kPi, kPi, 0.0, 0.0, 0.6 * kPi, kPi;

    const pack::BatchEvaluation ev = pack::evaluate_batch(problem, points);
    REQUIRE(ev.designs.rows() == 2);
    REQUIRE(ev.violations.cols() == 1);

    const Eigen::VectorXd x0 = pack::boundary_map(points.row(0).transpose(), problem.lower,
                                                  problem.upper, problem.periodic);
    CHECK((ev.designs.row(0).transpose() - x0).cwiseAbs().maxCoeff() == 0.0);
    const double b = 1.2 * std::sqrt(2.0);
    CHECK(x0(3) == doctest::Approx(b));
    CHECK(x0(5) == doctest::Approx(kPi / 4.0));
    CHECK(ev.objective(0) == doctest::Approx(b * b * std::sin(kPi / 4.0)).epsilon(1e-12));
    CHECK(ev.feasible[0]);
    CHECK(ev.violations(0, 0) < 0.0);
    CHECK(ev.density(0) ==
          doctest::Approx(1.0 / (b * b * std::sin(kPi / 4.0))).epsilon(1e-12));

    CHECK_FALSE(ev.feasible[1]);
    CHECK(ev.objective(1) == 0.0);
    CHECK(ev.violations(1, 0) == doctest::Approx(std::sqrt(2.0)));
    CHECK(ev.density(1) == 0.0);
    CHECK(ev.feasible_count == 1);

    // Groups with extra constraints append their values as columns.
    const pack::ConvexPolygon hexagon = pack::regular_polygon(6);
    const Problem p3 = pack::make_problem(pack::plane_group("p3"), hexagon);
    Eigen::MatrixXd hex_points(1, p3.dimension());
    hex_points.row(0).setConstant(1.0);
    const pack::BatchEvaluation hex_ev = pack::evaluate_batch(p3, hex_points);
    REQUIRE(hex_ev.violations.cols() == 3);
    const Eigen::VectorXd hx = pack::boundary_map(hex_points.row(0).transpose(), p3.lower,
                                                  p3.upper, p3.periodic);
    const Eigen::VectorXd extra = pack::extra_constraint_values(*p3.group, hx);
    CHECK(hex_ev.violations(0, 1) == doctest::Approx(extra(0)));
    CHECK(hex_ev.violations(0, 2) == doctest::Approx(extra(1)));
}

TEST_CASE("iterate: state invariants hold across the canonical and natural phases") {
    const Problem problem = square_p1_problem();
    Hyperparams h;
    h.batch_size = 96;
    h.iterations = 25;
    const ResolvedHyperparams rp = pack::resolve(h, problem.dimension());
    pack::OptimizerState state = pack::init_state(problem.dimension(), rp);

    std::vector<LogRow> rows;
    for (int t = 0; t < h.iterations; ++t) {
        rows.push_back(pack::iterate(state, problem, rp, 7));
        CHECK(state.nat.kappa.minCoeff() >= pack::kKappaFloor);
        CHECK(pack::submodel_mask_holds(state.nat.D, 0.0));
        CHECK((state.nat.D - state.nat.D.transpose()).cwiseAbs().maxCoeff() == 0.0);
        CHECK(state.q >= rp.q0 - 1e-12);
        CHECK(state.q <= rp.batch_size + 1e-12);
        CHECK((state.rate_mu <= rp.h.gamma0_mu + 1e-15).all());
        CHECK((state.rate_kappa <= rp.h.gamma0_kappa + 1e-15).all());
        CHECK((state.rate_D <= rp.h.gamma0_D + 1e-15).all());
        CHECK((state.rate_mu > 0.0).all());
    }

    CHECK(rows.front().iter == 1);
    CHECK(rows.front().step_norm_kappa == 0.0);  // canonical bootstrap row
    CHECK(rows.back().iter == h.iterations);
    for (const LogRow& row : rows) {
        CHECK(row.q >= rp.q0 - 1e-12);
        CHECK(row.feasible_frac >= 0.0);
        CHECK(row.feasible_frac <= 1.0);
        CHECK(row.lambda_min > 0.0);
        CHECK(std::isfinite(row.mean_density));
        CHECK(std::isfinite(row.step_norm_mu));
    }
    // The running best is the prefix maximum of the per-iteration best.
    double running = 0.0;
    for (const LogRow& row : rows) {
        running = std::max(running, row.max_density);
        CHECK(row.best_density == running);
    }
}

TEST_CASE("optimize: p1 square smoke run finds a dense packing quickly") {
    const Problem problem = square_p1_problem();
    Hyperparams h;
    h.batch_size = 128;
    h.iterations = 50;
    const RunRecord record = pack::optimize(problem, h, 1);
    REQUIRE(record.rows.size() == 50);
    CHECK(record.best.found);
    CHECK(record.best.density >= 0.8);
    CHECK(record.best.violation >= 0.0);
    CHECK(record.batch_size == 128);

    // The recorded best reproduces when the design is decoded directly.
    const pack::Configuration cfg = pack::decode_configuration(
        *problem.group, problem.polygon, record.best.design, problem.bound_rule);
    CHECK(pack::packing_density(cfg) == doctest::Approx(record.best.density).epsilon(1e-12));
    CHECK(pack::packing_violation(cfg) >= 0.0);
}

TEST_CASE("optimize: p1 square approaches the tiling with default hyperparameters") {
    const Problem problem = square_p1_problem();
    Hyperparams h;
    h.iterations = 2000;
    const RunRecord record = pack::optimize(problem, h, 1);
    CHECK(record.best.density >= 0.95);
    CHECK(record.rows.size() == 2000);
}

TEST_CASE("optimize: fixed seed is bit-deterministic for any worker count") {
    const Problem problem = square_p1_problem();
    Hyperparams h;
    h.batch_size = 96;
    h.iterations = 8;

    const RunRecord serial = pack::optimize(problem, h, 3);
    pack::WorkerPool one(1);
    const RunRecord pooled_one = pack::optimize(problem, h, 3, &one);
    pack::WorkerPool three(3);
    const RunRecord pooled_three = pack::optimize(problem, h, 3, &three);

    CHECK(same_rows(serial.rows, pooled_one.rows));
    CHECK(same_rows(serial.rows, pooled_three.rows));
    CHECK(serial.best.density == pooled_three.best.density);
    CHECK(serial.best.found == pooled_three.best.found);
    if (serial.best.found) {
        CHECK((serial.best.design - pooled_three.best.design).cwiseAbs().maxCoeff() == 0.0);
    }

    const RunRecord other = pack::optimize(problem, h, 4);
    CHECK_FALSE(same_rows(serial.rows, other.rows));
}

TEST_CASE("refinement: boxes shrink around the carried best inside the original bounds") {
    Eigen::VectorXd best(1), lo0(1), hi0(1), lo(1), hi(1);
    best << 5.0;
    lo0 << 0.0;
    hi0 << 10.0;
    pack::refine_box(best, lo0, hi0, 1.2, 1, lo, hi);
    CHECK(lo(0) == 0.0);  // 5 - 10/1.2 clips at the original lower bound
    CHECK(hi(0) == 10.0);
    pack::refine_box(best, lo0, hi0, 1.2, 5, lo, hi);
    const double eps5 = 10.0 / std::pow(1.2, 5);
    CHECK(lo(0) == doctest::Approx(5.0 - eps5));
    CHECK(hi(0) == doctest::Approx(5.0 + eps5));
    CHECK(lo(0) > 0.0);
    CHECK(hi(0) < 10.0);

    const Problem problem = square_p1_problem();
    Hyperparams h;
    h.batch_size = 96;
    h.iterations = 50;
    const RunRecord initial = pack::optimize(problem, h, 5);
    REQUIRE(initial.best.found);

    Hyperparams hr = h;
    hr.iterations = 40;
    const pack::RefineRecord refined = pack::refine(problem, hr, initial.best, 3, 5);
    REQUIRE(refined.runs.size() == 3);
    REQUIRE(refined.best_after_run.size() == 3);
    CHECK(refined.best_after_run[0] >= initial.best.density);
    CHECK(refined.best_after_run[1] >= refined.best_after_run[0]);
    CHECK(refined.best_after_run[2] >= refined.best_after_run[1]);
    CHECK(refined.best.density == refined.best_after_run[2]);
    for (const RunRecord& run : refined.runs) CHECK(run.rows.size() == 40);

    Solution missing;
    CHECK_THROWS_AS(pack::refine(problem, hr, missing, 2, 5), pack::InputError);
    Solution outside = initial.best;
    outside.design(0) = 3.0;  // c1 leaves (0, 1]
    CHECK_THROWS_AS(pack::refine(problem, hr, outside, 2, 5), pack::OutOfBounds);
}

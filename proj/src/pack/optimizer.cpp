#include "pack/optimizer.hpp"

#include "pack/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <utility>

namespace pack {
namespace {

// Lower clamp for concentrations during optimization. Near kappa = 0 the
// circular mean is unidentifiable and the chart change dmu = |d eta| / kappa
// blows up; the explicit-Euler update of the interaction blocks then rotates
// them by that huge angle per step, which inflates ||D|| by sqrt(1 + dmu^2)
// every iteration until sampling fails. Clamping at 0.05 caps the per-step
// rotation while still admitting near-uniform marginals (density modulation
// e^(2 kappa) - 1 of about 10%): across 20-seed scans, clamps in [0.01, 0.1]
// all eliminate the blow-ups where 1e-6 lost a third of the runs.
constexpr double kKappaClamp = 0.05;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_two_pi(double x) {
    double w = std::fmod(x, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    return w >= kTwoPi ? 0.0 : w;
}

}  // namespace

Problem make_problem(const PlaneGroupDef& group, const ConvexPolygon& polygon,
                     LatticeBound bound_rule) {
    Problem problem;
    problem.group = &group;
    problem.polygon = polygon;
    problem.bound_rule = bound_rule;
    const std::vector<VarSpec> layout = design_layout(group, polygon.circumdiameter, bound_rule);
    const int n = static_cast<int>(layout.size());
    problem.lower.resize(n);
    problem.upper.resize(n);
    problem.periodic.resize(n);
    for (int i = 0; i < n; ++i) {
        problem.lower(i) = layout[i].lo;
        problem.upper(i) = layout[i].hi;
        problem.periodic[i] = layout[i].periodic;
    }
    return problem;
}

ResolvedHyperparams resolve(const Hyperparams& h, int n_variables) {
    if (!(h.c_up > 1.0)) throw InputError("c_up must exceed 1");
    if (!(h.c_down > 0.0 && h.c_down < 1.0)) throw InputError("c_down must lie in (0, 1)");
    if (!(h.fisher_ratio > 0.0 && h.fisher_ratio < 1.0)) {
        throw InputError("fisher_ratio must lie in (0, 1)");
    }
    if (!(h.c_epsilon > 1.0)) throw InputError("c_epsilon must exceed 1");
    if (h.iterations < 0) throw InputError("iterations must be non-negative");
    if (h.gibbs_sweeps < 0) throw InputError("gibbs_sweeps must be non-negative");
    if (!(h.q0_divisor > 0.0)) throw InputError("q0_divisor must be positive");
    if (h.quantile_batches < 1) throw InputError("quantile_batches must be at least 1");

    const int stat_dim = 2 * n_variables * n_variables;
    ResolvedHyperparams rp;
    rp.h = h;
    if (h.batch_size > 0) {
        if (h.batch_size < stat_dim) {
            throw InputError("batch_size " + std::to_string(h.batch_size) +
                             " is below the sufficient-statistic dimension " +
                             std::to_string(stat_dim));
        }
        rp.batch_size = h.batch_size;
    } else {
        const int quantum = std::max(h.batch_quantum, 1);
        int derived = static_cast<int>(std::ceil(stat_dim / h.fisher_ratio));
        derived = (derived + quantum - 1) / quantum * quantum;
        rp.batch_size = derived;
    }
    rp.q0 = std::max(rp.batch_size / h.q0_divisor, 1.0);
    rp.beta = h.beta != 0.0 ? h.beta : std::log(rp.batch_size / rp.q0) / 2000.0;
    return rp;
}

double boundary_map_scalar(double x, double lo, double hi, bool periodic) {
    if (periodic) return lo + x / kTwoPi * (hi - lo);
    constexpr double pi = std::numbers::pi;
    if (x < pi) return lo + x / pi * (hi - lo);
    return 2.0 * hi - lo - x / pi * (hi - lo);
}

Eigen::VectorXd boundary_map(const Eigen::VectorXd& point, const Eigen::VectorXd& lower,
                             const Eigen::VectorXd& upper, const std::vector<bool>& periodic) {
    const Eigen::Index n = point.size();
    if (lower.size() != n || upper.size() != n ||
        static_cast<Eigen::Index>(periodic.size()) != n) {
        throw InputError("boundary_map arguments disagree on the variable count");
    }
    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        x(i) = boundary_map_scalar(point(i), lower(i), upper(i), periodic[i]);
    }
    return x;
}

Eigen::VectorXd penalty_fitness(const Eigen::VectorXd& objectives,
                                const Eigen::MatrixXd& violations) {
    const Eigen::Index count = objectives.size();
    if (count == 0) throw InputError("penalty_fitness needs at least one point");
    if (violations.rows() != count) {
        throw InputError("penalty_fitness objective and violation counts disagree");
    }
    const Eigen::Index j_count = violations.cols();

    double f_max = 0.0;
    bool any_feasible = false;
    for (Eigen::Index i = 0; i < count; ++i) {
        if ((violations.row(i).array() <= 0.0).all()) {
            f_max = any_feasible ? std::max(f_max, objectives(i)) : objectives(i);
            any_feasible = true;
        }
    }
    Eigen::VectorXd g_max = Eigen::VectorXd::Zero(j_count);
    for (Eigen::Index j = 0; j < j_count; ++j) {
        for (Eigen::Index i = 0; i < count; ++i) {
            if (violations(i, j) > 0.0) g_max(j) = std::max(g_max(j), violations(i, j));
        }
    }

    Eigen::VectorXd fitness(count);
    for (Eigen::Index i = 0; i < count; ++i) {
        if ((violations.row(i).array() <= 0.0).all()) {
            fitness(i) = objectives(i);
            continue;
        }
        double value = f_max;
        for (Eigen::Index j = 0; j < j_count; ++j) {
            if (violations(i, j) > 0.0) value += violations(i, j) / g_max(j);
        }
        fitness(i) = value;
    }
    return fitness;
}

Selection select_quantile(const Eigen::VectorXd& fitness, double q) {
    const int count = static_cast<int>(fitness.size());
    if (count == 0) throw InputError("select_quantile needs at least one point");
    q = std::clamp(q, 1.0, static_cast<double>(count));
    const int take = std::clamp(static_cast<int>(std::ceil(count / q)), 1, count);

    std::vector<int> order(count);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&fitness](int a, int b) { return fitness(a) < fitness(b); });

    Selection sel;
    sel.indices.assign(order.begin(), order.begin() + take);
    sel.threshold = fitness(sel.indices.back());
    return sel;
}

Eigen::MatrixXd estimate_fisher(const Eigen::MatrixXd& stats) {
    const Eigen::Index count = stats.rows();
    if (count < 2) throw InputError("estimate_fisher needs at least two samples");
    const Eigen::RowVectorXd mean = stats.colwise().mean();
    const Eigen::MatrixXd centered = stats.rowwise() - mean;
    const Eigen::MatrixXd cov =
        centered.transpose() * centered / static_cast<double>(count - 1);
    return ((cov + cov.transpose()) / 2.0).eval();
}

Eigen::VectorXd estimate_gradient(const Eigen::MatrixXd& stats,
                                  const std::vector<int>& selected) {
    if (selected.empty()) throw InputError("estimate_gradient needs a nonempty selection");
    Eigen::RowVectorXd selected_mean = Eigen::RowVectorXd::Zero(stats.cols());
    for (int idx : selected) selected_mean += stats.row(idx);
    selected_mean /= static_cast<double>(selected.size());
    return (selected_mean - stats.colwise().mean()).transpose();
}

NaturalStepResult natural_step(const Eigen::MatrixXd& fisher, const Eigen::VectorXd& grad) {
    const Eigen::Index dim = fisher.rows();
    if (fisher.cols() != dim || grad.size() != dim) {
        throw InputError("natural_step dimensions disagree");
    }
    const double scale = fisher.trace() / static_cast<double>(dim);

    for (double eps = 1e-10; eps <= 1.5e-6; eps *= 10.0) {
        Eigen::MatrixXd jittered =
            fisher + (eps * scale) * Eigen::MatrixXd::Identity(dim, dim);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jittered, Eigen::EigenvaluesOnly);
        if (eig.info() != Eigen::Success) continue;
        const double lambda_min = eig.eigenvalues().minCoeff();
        if (!std::isfinite(lambda_min) || !(lambda_min > 0.0)) continue;

        NaturalStepResult out;
        out.lambda_min = lambda_min;
        if (grad.isZero(0.0)) {
            out.step = Eigen::VectorXd::Zero(dim);
            out.jittered = std::move(jittered);
            return out;
        }

        Eigen::LDLT<Eigen::MatrixXd> solver(jittered);
        if (solver.info() != Eigen::Success) continue;
        Eigen::VectorXd y = solver.solve(grad);
        if (!y.allFinite()) continue;
        const double metric_norm2 = y.dot(jittered * y);
        if (!std::isfinite(metric_norm2) || !(metric_norm2 > 0.0)) continue;

        out.step = std::sqrt(lambda_min / metric_norm2) * y;
        out.jittered = std::move(jittered);
        return out;
    }
    throw SingularFisher("Fisher estimate stayed indefinite through the ridge schedule");
}

double fisher_cos_angle(const Eigen::MatrixXd& metric, const Eigen::VectorXd& a,
                        const Eigen::VectorXd& b) {
    const double aa = a.dot(metric * a);
    const double bb = b.dot(metric * b);
    const double ab = a.dot(metric * b);
    if (!(aa > 0.0) || !(bb > 0.0) || !std::isfinite(ab)) return 0.0;
    return std::clamp(ab / std::sqrt(aa * bb), -1.0, 1.0);
}

double update_q(double q, double cos_alpha, double beta, double n_samples) {
    return std::clamp(q * std::exp(beta * cos_alpha), 1.0, n_samples);
}

BatchEvaluation evaluate_batch(const Problem& problem, const Eigen::MatrixXd& points,
                               WorkerPool* pool) {
    const int count = static_cast<int>(points.rows());
    const int dim = problem.dimension();
    const int extra = static_cast<int>(problem.group->extra.size());

    BatchEvaluation ev;
    ev.designs.resize(count, dim);
    ev.objective.resize(count);
    ev.violations.resize(count, 1 + extra);
    ev.density = Eigen::VectorXd::Zero(count);
    const double piece_area = problem.group->op_count() * polygon_area(problem.polygon);

    const auto eval_rows = [&](int begin, int end) {
        for (int i = begin; i < end; ++i) {
            const Eigen::VectorXd x = boundary_map(points.row(i).transpose(), problem.lower,
                                                   problem.upper, problem.periodic);
            ev.designs.row(i) = x.transpose();
            Eigen::VectorXd g(1 + extra);
            double f = 0.0;
            try {
                const Configuration cfg = decode_configuration(*problem.group, problem.polygon,
                                                               x, problem.bound_rule);
                f = cell_area(cfg.b1, cfg.b2);
                g(0) = -packing_violation(cfg);
            } catch (const SingularLattice&) {
                f = 0.0;
                g(0) = problem.polygon.circumdiameter;
            }
            if (extra > 0) g.tail(extra) = extra_constraint_values(*problem.group, x);
            ev.objective(i) = f;
            ev.violations.row(i) = g.transpose();
            if ((g.array() <= 0.0).all()) ev.density(i) = piece_area / f;
        }
    };
    if (pool != nullptr) {
        pool->run(count, eval_rows);
    } else {
        eval_rows(0, count);
    }

    ev.feasible.resize(count);
    for (int i = 0; i < count; ++i) {
        ev.feasible[i] = (ev.violations.row(i).array() <= 0.0).all();
        if (ev.feasible[i]) ++ev.feasible_count;
    }
    return ev;
}

OptimizerState init_state(int n_variables, const ResolvedHyperparams& rp) {
    const int n = n_variables;
    OptimizerState state;
    state.canon.eta = Eigen::VectorXd::Zero(2 * n);
    state.canon.E = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    state.q = rp.q0;
    state.rate_mu = Eigen::ArrayXd::Constant(n, rp.h.gamma0_mu);
    state.rate_kappa = Eigen::ArrayXd::Constant(n, rp.h.gamma0_kappa);
    state.rate_D = Eigen::ArrayXXd::Constant(2 * n, 2 * n, rp.h.gamma0_D);
    state.mom_mu = Eigen::ArrayXd::Zero(n);
    state.mom_kappa = Eigen::ArrayXd::Zero(n);
    state.mom_D = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    return state;
}

LogRow iterate(OptimizerState& state, const Problem& problem, const ResolvedHyperparams& rp,
               std::uint64_t run_seed, WorkerPool* pool) {
    const int n = problem.dimension();
    const StatLayout layout(n);
    const int count = rp.batch_size;
    const int t = state.iteration + 1;
    const double q_used = state.q;

    const Eigen::MatrixXd points = gibbs_sample(state.canon, count, rp.h.gibbs_sweeps, run_seed,
                                                static_cast<std::uint64_t>(t), pool);
    const BatchEvaluation ev = evaluate_batch(problem, points, pool);

    Eigen::MatrixXd stats(count, layout.dim());
    for (int i = 0; i < count; ++i) {
        stats.row(i) = sufficient_statistic(points.row(i).transpose()).transpose();
    }

    const Eigen::VectorXd fitness = penalty_fitness(ev.objective, ev.violations);
    const Selection sel = select_quantile(fitness, q_used);
    state.threshold = sel.threshold;
    if (rp.h.quantile_batches > 1) {
        // Optional repeated-batch threshold: max of per-chunk estimates.
        const int batches = std::min(rp.h.quantile_batches, count);
        double worst = sel.threshold;
        for (int b = 0; b < batches; ++b) {
            const int begin = static_cast<int>(static_cast<long>(count) * b / batches);
            const int end = static_cast<int>(static_cast<long>(count) * (b + 1) / batches);
            if (end <= begin) continue;
            const Selection chunk = select_quantile(fitness.segment(begin, end - begin), q_used);
            worst = std::max(worst, chunk.threshold);
        }
        state.threshold = worst;
    }

    const Eigen::MatrixXd fisher = estimate_fisher(stats);
    const Eigen::VectorXd grad = estimate_gradient(stats, sel.indices);
    const NaturalStepResult step = natural_step(fisher, grad);

    double norm_mu = 0.0, norm_kappa = 0.0, norm_D = 0.0;
    if (!state.has_natural) {
        // First update runs directly on the canonical coordinates of the
        // uniform start; resultants below the concentration floor are lifted
        // onto it so the circular-parameter chart is defined.
        CanonicalParams cp = unpack_canonical(step.step, n);
        for (int i = 0; i < n; ++i) {
            const double resultant = std::hypot(cp.eta(i), cp.eta(n + i));
            if (resultant < kKappaClamp) {
                if (resultant > 0.0) {
                    cp.eta(i) *= kKappaClamp / resultant;
                    cp.eta(n + i) *= kKappaClamp / resultant;
                } else {
                    cp.eta(i) = kKappaClamp;
                    cp.eta(n + i) = 0.0;
                }
            }
        }
        norm_mu = cp.eta.norm();
        norm_D = cp.E.norm();
        state.nat = natural_from_canonical(cp);
        state.canon = canonical_from_natural(state.nat);
        state.has_natural = true;
        state.lambda_prev = pack_canonical(state.canon);
    } else {
        const CanonicalParams dc = unpack_canonical(step.step, n);
        const TangentStep g = tangent_transform(dc.eta, dc.E, state.nat);

        if (state.dmu_prev2.size() > 0) {
            adapt_rates(state.rate_mu, state.dmu_prev1, state.dmu_prev2, rp.h.c_up, rp.h.c_down,
                        rp.h.gamma0_mu);
            adapt_rates(state.rate_kappa, state.dkappa_prev1, state.dkappa_prev2, rp.h.c_up,
                        rp.h.c_down, rp.h.gamma0_kappa);
            adapt_rates(state.rate_D, state.dD_prev1, state.dD_prev2, rp.h.c_up, rp.h.c_down,
                        rp.h.gamma0_D);
        }

        state.mom_mu = g.d_mu.array() + rp.h.alpha_mu * state.mom_mu;
        state.mom_kappa = g.d_kappa.array() + rp.h.alpha_kappa * state.mom_kappa;
        state.mom_D = g.d_D + rp.h.alpha_D * state.mom_D;

        const Eigen::ArrayXd inc_mu = state.rate_mu * state.mom_mu;
        const Eigen::ArrayXd kappa_new =
            (state.nat.kappa.array() + state.rate_kappa * state.mom_kappa).max(kKappaClamp);
        const Eigen::ArrayXd inc_kappa = kappa_new - state.nat.kappa.array();
        Eigen::MatrixXd inc_D = (state.rate_D * state.mom_D.array()).matrix();
        apply_submodel_mask(inc_D);

        for (int i = 0; i < n; ++i) state.nat.mu(i) = wrap_two_pi(state.nat.mu(i) + inc_mu(i));
        state.nat.kappa = kappa_new.matrix();
        state.nat.D += inc_D;
        state.canon = canonical_from_natural(state.nat);

        norm_mu = inc_mu.matrix().norm();
        norm_kappa = inc_kappa.matrix().norm();
        norm_D = inc_D.norm();

        state.dmu_prev2 = state.dmu_prev1;
        state.dmu_prev1 = inc_mu;
        state.dkappa_prev2 = state.dkappa_prev1;
        state.dkappa_prev1 = inc_kappa;
        state.dD_prev2 = state.dD_prev1;
        state.dD_prev1 = inc_D.array();

        Eigen::VectorXd lambda_now = pack_canonical(state.canon);
        Eigen::VectorXd dlambda = lambda_now - state.lambda_prev;
        if (state.dlambda_prev.size() > 0) {
            const double cos_alpha = fisher_cos_angle(step.jittered, dlambda, state.dlambda_prev);
            state.q = std::max(update_q(state.q, cos_alpha, rp.beta,
                                        static_cast<double>(count)),
                               rp.q0);
        }
        state.dlambda_prev = std::move(dlambda);
        state.lambda_prev = std::move(lambda_now);
    }

    int best_row = -1;
    double batch_max = 0.0;
    for (int i = 0; i < count; ++i) {
        if (ev.feasible[i] && ev.density(i) > batch_max) {
            batch_max = ev.density(i);
            best_row = i;
        }
    }
    if (best_row >= 0 && (!state.best.found || batch_max > state.best.density)) {
        state.best.design = ev.designs.row(best_row).transpose();
        state.best.density = batch_max;
        state.best.violation = -ev.violations(best_row, 0);
        state.best.found = true;
    }

    const double piece_area = problem.group->op_count() * polygon_area(problem.polygon);
    LogRow row;
    row.iter = t;
    row.mean_density = (piece_area / fitness.array()).mean();
    row.max_density = batch_max;
    row.best_density = state.best.density;
    row.q = q_used;
    row.feasible_frac = static_cast<double>(ev.feasible_count) / count;
    row.lambda_min = step.lambda_min;
    row.step_norm_mu = norm_mu;
    row.step_norm_kappa = norm_kappa;
    row.step_norm_D = norm_D;

    state.iteration = t;
    return row;
}

RunRecord optimize(const Problem& problem, const Hyperparams& h, std::uint64_t seed,
                   WorkerPool* pool) {
    const auto start = std::chrono::steady_clock::now();
    const ResolvedHyperparams rp = resolve(h, problem.dimension());
    OptimizerState state = init_state(problem.dimension(), rp);

    RunRecord record;
    record.seed = seed;
    record.batch_size = rp.batch_size;
    record.rows.reserve(static_cast<std::size_t>(h.iterations));
    for (int t = 0; t < h.iterations; ++t) {
        record.rows.push_back(iterate(state, problem, rp, seed, pool));
    }
    record.best = state.best;
    record.final_q = state.q;
    record.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return record;
}

void refine_box(const Eigen::VectorXd& best, const Eigen::VectorXd& lower0,
                const Eigen::VectorXd& upper0, double c_epsilon, int run_index,
                Eigen::VectorXd& lower, Eigen::VectorXd& upper) {
    const double shrink = std::pow(1.0 / c_epsilon, run_index);
    const Eigen::VectorXd eps = shrink * (upper0 - lower0);
    lower = (best - eps).cwiseMax(lower0);
    upper = (best + eps).cwiseMin(upper0);
}

RefineRecord refine(const Problem& problem, const Hyperparams& h, const Solution& start,
                    int runs, std::uint64_t seed, WorkerPool* pool) {
    if (!start.found || start.design.size() != problem.dimension()) {
        throw InputError("refinement needs a feasible starting design of matching dimension");
    }
    for (int i = 0; i < problem.dimension(); ++i) {
        if (start.design(i) < problem.lower(i) - 1e-9 ||
            start.design(i) > problem.upper(i) + 1e-9) {
            throw OutOfBounds("refinement start leaves the design box at variable " +
                              std::to_string(i));
        }
    }

    RefineRecord record;
    record.best = start;
    Problem shrunk = problem;
    shrunk.periodic.assign(problem.dimension(), false);
    for (int r = 1; r <= runs; ++r) {
        refine_box(record.best.design, problem.lower, problem.upper, h.c_epsilon, r,
                   shrunk.lower, shrunk.upper);
        RunRecord run = optimize(
            shrunk, h, mix64(seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(r)),
            pool);
        if (run.best.found && run.best.density > record.best.density) record.best = run.best;
        record.best_after_run.push_back(record.best.density);
        record.runs.push_back(std::move(run));
    }
    return record;
}

}  // namespace pack

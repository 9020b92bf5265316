// Entropic trust-region search over torus distributions: penalty fitness,
// quantile selection, Monte-Carlo Fisher/gradient estimates with spectral
// scaling, coordinate-changed updates with per-scalar adaptive rates and
// momentum, boundary mapping, and the shrinking-box refinement controller.
#pragma once

#include "pack/packing.hpp"
#include "pack/parallel.hpp"
#include "pack/torus_dist.hpp"

#include <cstdint>
#include <vector>

namespace pack {

// A packing search instance: the group, the polygon, and the design box.
// Periodic variables wrap across their bounds under the boundary map;
// aperiodic ones fold back (triangle wave). Refinement rewrites the box.
struct Problem {
    const PlaneGroupDef* group = nullptr;
    ConvexPolygon polygon;
    LatticeBound bound_rule = LatticeBound::twice_diameter;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    std::vector<bool> periodic;

    int dimension() const { return static_cast<int>(lower.size()); }
};

Problem make_problem(const PlaneGroupDef& group, const ConvexPolygon& polygon,
                     LatticeBound bound_rule = LatticeBound::twice_diameter);

// Tuning constants. Zeros in beta/batch_size mean "derive the default":
// batch_size = ceil(stat_dim / fisher_ratio) rounded up to batch_quantum so
// the sample count never depends on the worker count, and
// beta = ln(batch_size / q0) / 2000.
struct Hyperparams {
    double gamma0_mu = 0.140625;
    double gamma0_kappa = 0.171875;
    double gamma0_D = 0.21875;
    double c_up = 1.1;
    double c_down = 0.9;
    double alpha_mu = 0.7109375;
    double alpha_kappa = 0.1953125;
    double alpha_D = 0.578125;
    double q0_divisor = 100.0;  // q0 = batch_size / q0_divisor, at least 1
    double fisher_ratio = 0.12;  // stat dimension / batch size
    double beta = 0.0;
    double c_epsilon = 1.2;  // refinement box shrink factor per run
    int iterations = 8000;
    int gibbs_sweeps = 100;
    int batch_size = 0;
    int batch_quantum = 8;
    int quantile_batches = 1;  // sub-batches for the threshold diagnostic
};

// Hyperparameters with the derived quantities filled in for one problem.
struct ResolvedHyperparams {
    Hyperparams h;
    int batch_size = 0;
    double q0 = 1.0;
    double beta = 0.0;
};

// Throws InputError when an explicit batch_size is below the sufficient
// statistic dimension 2n^2 (the Fisher estimate would be rank-deficient).
ResolvedHyperparams resolve(const Hyperparams& h, int n_variables);

// One CSV row of a run log. step_norm_* are the realized parameter deltas;
// the first iteration updates canonical coordinates, so its row carries
// |d eta| / 0 / |d E|_F instead.
struct LogRow {
    int iter = 0;
    double mean_density = 0.0;
    double max_density = 0.0;   // best density in this iteration's batch
    double best_density = 0.0;  // running maximum over iterations
    double q = 0.0;             // quantile used for this iteration's selection
    double feasible_frac = 0.0;
    double lambda_min = 0.0;
    double step_norm_mu = 0.0;
    double step_norm_kappa = 0.0;
    double step_norm_D = 0.0;
};

struct Solution {
    Eigen::VectorXd design;
    double density = 0.0;
    double violation = 0.0;  // separation margin of the stored design, >= 0
    bool found = false;
};

struct RunRecord {
    std::vector<LogRow> rows;
    Solution best;
    double wall_seconds = 0.0;
    std::uint64_t seed = 0;
    int batch_size = 0;
    double final_q = 0.0;
};

struct RefineRecord {
    std::vector<RunRecord> runs;
    std::vector<double> best_after_run;  // carried-forward best density
    Solution best;
};

// Affine (periodic) or triangle-wave (aperiodic) map from [0, 2pi) to the
// bound interval.
double boundary_map_scalar(double x, double lo, double hi, bool periodic);
Eigen::VectorXd boundary_map(const Eigen::VectorXd& point, const Eigen::VectorXd& lower,
                             const Eigen::VectorXd& upper, const std::vector<bool>& periodic);

// Feasible points keep their objective; infeasible ones get the worst
// feasible objective (0 when the batch has none) plus each positive
// violation normalized by the largest violation of that constraint.
// Lower is better.
Eigen::VectorXd penalty_fitness(const Eigen::VectorXd& objectives,
                                const Eigen::MatrixXd& violations);

struct Selection {
    std::vector<int> indices;  // best ceil(N/q) rows, ties kept in row order
    double threshold = 0.0;    // fitness of the worst selected row
};

Selection select_quantile(const Eigen::VectorXd& fitness, double q);

// Unbiased sample covariance of the sufficient statistics, symmetrized.
Eigen::MatrixXd estimate_fisher(const Eigen::MatrixXd& stats);

// Mean statistic over the selected rows minus the mean over all rows.
Eigen::VectorXd estimate_gradient(const Eigen::MatrixXd& stats,
                                  const std::vector<int>& selected);

struct NaturalStepResult {
    Eigen::VectorXd step;
    double lambda_min = 0.0;
    Eigen::MatrixXd jittered;  // the ridge-stabilized Fisher actually solved
};

// Solves fisher * y = grad with an escalating ridge and rescales y so that
// step' * fisher * step = lambda_min, the smallest eigenvalue of the jittered
// Fisher. A zero gradient yields a zero step. Throws SingularFisher when no
// ridge level in [1e-10, 1e-6] * trace/dim conditions the solve.
NaturalStepResult natural_step(const Eigen::MatrixXd& fisher, const Eigen::VectorXd& grad);

// Cosine of the angle between a and b under the metric; 0 when either norm
// vanishes or the quadratic forms misbehave.
double fisher_cos_angle(const Eigen::MatrixXd& metric, const Eigen::VectorXd& a,
                        const Eigen::VectorXd& b);

// q' = q * exp(beta * cos_alpha), clamped to [1, n_samples].
double update_q(double q, double cos_alpha, double beta, double n_samples);

// Per-scalar rate update: rates grow by c_up (capped at gamma0) where the two
// deltas do not disagree in sign (zero counts as agreement) and shrink by
// c_down where they do.
template <typename Rates, typename Deltas>
void adapt_rates(Rates& rates, const Deltas& delta_now, const Deltas& delta_prev, double c_up,
                 double c_down, double gamma0) {
    rates = ((delta_now.sign() * delta_prev.sign()) >= 0.0)
                .select((c_up * rates).min(gamma0), c_down * rates);
}

// Everything evaluated about one sampled batch, one row per sample.
struct BatchEvaluation {
    Eigen::MatrixXd designs;     // boundary-mapped design vectors
    Eigen::VectorXd objective;   // primitive cell area; 0 for degenerate rows
    Eigen::MatrixXd violations;  // col 0: -separation, then extra constraints
    Eigen::VectorXd density;     // op_count * area / cell area, feasible rows only
    std::vector<bool> feasible;
    int feasible_count = 0;
};

BatchEvaluation evaluate_batch(const Problem& problem, const Eigen::MatrixXd& points,
                               WorkerPool* pool = nullptr);

struct OptimizerState {
    CanonicalParams canon;  // sampling distribution (cache of nat once set)
    NaturalParams nat;
    bool has_natural = false;
    double q = 1.0;
    Eigen::ArrayXd rate_mu, rate_kappa;
    Eigen::ArrayXXd rate_D;
    Eigen::ArrayXd mom_mu, mom_kappa;
    Eigen::MatrixXd mom_D;
    // Realized deltas of the two previous iterations, per parameter group;
    // size 0 until recorded. They drive adapt_rates.
    Eigen::ArrayXd dmu_prev1, dmu_prev2;
    Eigen::ArrayXd dkappa_prev1, dkappa_prev2;
    Eigen::ArrayXXd dD_prev1, dD_prev2;
    // Packed canonical coordinates after the previous iteration and the
    // previous iteration's delta; they drive update_q.
    Eigen::VectorXd lambda_prev;
    Eigen::VectorXd dlambda_prev;
    Solution best;
    int iteration = 0;         // completed iterations
    double threshold = 0.0;    // last selection threshold (diagnostic)
};

OptimizerState init_state(int n_variables, const ResolvedHyperparams& rp);

// One full iteration: sample, map, evaluate, select, estimate, step, adapt,
// apply, and account. Returns the log row it appended conceptually.
LogRow iterate(OptimizerState& state, const Problem& problem, const ResolvedHyperparams& rp,
               std::uint64_t run_seed, WorkerPool* pool = nullptr);

RunRecord optimize(const Problem& problem, const Hyperparams& h, std::uint64_t seed,
                   WorkerPool* pool = nullptr);

// The box for refinement run r: best +- (1/c_epsilon)^r of the original
// widths, clipped to the original box.
void refine_box(const Eigen::VectorXd& best, const Eigen::VectorXd& lower0,
                const Eigen::VectorXd& upper0, double c_epsilon, int run_index,
                Eigen::VectorXd& lower, Eigen::VectorXd& upper);

// Restart controller: run r shrinks the box to best +- (1/c_epsilon)^r of the
// original widths (clipped to the original box), drops periodicity, re-runs
// optimize with a derived seed, and carries the best solution forward.
RefineRecord refine(const Problem& problem, const Hyperparams& h, const Solution& start,
                    int runs, std::uint64_t seed, WorkerPool* pool = nullptr);

}  // namespace pack

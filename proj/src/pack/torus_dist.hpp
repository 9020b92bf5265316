#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "pack/errors.hpp"
#include "pack/rng.hpp"

namespace pack {

class WorkerPool;

// Concentrations below this floor are treated as leaving the identifiable
// region: the tangent map back to mean-direction coordinates divides by
// kappa_i, so the chart degenerates at kappa = 0.
inline constexpr double kKappaFloor = 1e-6;

// Rejection samplers abort with DivergentRejection after this many trials.
inline constexpr long kMaxRejectionTrials = 1000000;

// Mean-direction parametrization of the torus distribution: circular means
// mu_i in [0, 2pi), concentrations kappa_i > 0, and a symmetric 2n x 2n
// interaction matrix D in block form
//
//     D = [ D_cc  D_cs ]
//         [ D_cs' D_ss ]
//
// acting on [cos(theta - mu); sin(theta - mu)]. The submodel keeps no
// same-angle interactions, so the diagonals of all three distinct blocks
// are zero (see apply_submodel_mask).
struct NaturalParams {
    Eigen::VectorXd mu;
    Eigen::VectorXd kappa;
    Eigen::MatrixXd D;

    int n() const { return static_cast<int>(mu.size()); }
};

// Exponential-family parametrization of the same distribution: the density
// is proportional to exp{ eta . w + w' E w } with w = [cos(theta); sin(theta)].
// eta = [kappa .* cos(mu); kappa .* sin(mu)] and E is symmetric with the same
// zero pattern as D.
struct CanonicalParams {
    Eigen::VectorXd eta;
    Eigen::MatrixXd E;

    int n() const { return static_cast<int>(eta.size()) / 2; }
};

// Zeroes the same-angle interaction entries of a 2n x 2n block matrix:
// for every coordinate i the entries (i,i), (n+i,n+i), (i,n+i), (n+i,i).
void apply_submodel_mask(Eigen::MatrixXd& m);

// Returns true when the matrix is symmetric within tol and every masked
// entry is exactly zero.
bool submodel_mask_holds(const Eigen::MatrixXd& m, double tol = 1e-12);

// (mu, kappa, D) -> (eta, E). Throws NonPositiveKappa if any kappa_i <= 0.
CanonicalParams canonical_from_natural(const NaturalParams& p);

// (eta, E) -> (mu, kappa, D); exact inverse of canonical_from_natural on its
// image. Throws ZeroConcentration if some (eta_i^c, eta_i^s) pair vanishes.
NaturalParams natural_from_canonical(const CanonicalParams& p);

// Index map of the 2n^2 free coordinates of the masked submodel. The order
// is the coordinate system of every statistic vector, Fisher matrix and
// packed parameter vector in the optimizer:
//
//   [ cos(theta_0..n-1) | sin(theta_0..n-1)
//     | cos_i*cos_j (i<j, row-major) | cos_i*sin_j (i!=j, row-major)
//     | sin_i*sin_j (i<j, row-major) ]
struct StatLayout {
    int n = 0;

    explicit StatLayout(int n_in) : n(n_in) {}

    int dim() const { return 2 * n * n; }
    int cos_index(int i) const { return i; }
    int sin_index(int i) const { return n + i; }

    // i < j, row-major upper triangle
    int cc_index(int i, int j) const { return 2 * n + pair_rank(i, j); }
    // i != j, row-major with the diagonal skipped
    int cs_index(int i, int j) const {
        return 2 * n + n * (n - 1) / 2 + i * (n - 1) + j - (j > i ? 1 : 0);
    }
    // i < j, row-major upper triangle
    int ss_index(int i, int j) const {
        return 2 * n + n * (n - 1) / 2 + n * (n - 1) + pair_rank(i, j);
    }

    // Human-readable description of every coordinate, serialized so tests can
    // pin the layout with a golden file.
    std::string descriptor_json() const;

  private:
    int pair_rank(int i, int j) const { return i * n - i * (i + 1) / 2 + j - i - 1; }
};

// t(theta): the sufficient statistic of the masked submodel in StatLayout
// order; every entry lies in [-1, 1].
Eigen::VectorXd sufficient_statistic(const Eigen::VectorXd& theta);

// Packs (eta, E) into the vector lambda conjugate to sufficient_statistic:
// <lambda, t(theta)> = eta . w + w' E w. Off-diagonal interaction entries
// carry a factor 2 because each masked pair appears once in t but twice in
// the symmetric E.
Eigen::VectorXd pack_canonical(const CanonicalParams& p);
CanonicalParams unpack_canonical(const Eigen::VectorXd& lambda, int n);

// Log density up to the (unknown) normalizing constant, in each chart.
double log_density_unnormalized(const NaturalParams& p, const Eigen::VectorXd& theta);
double log_density_canonical(const CanonicalParams& p, const Eigen::VectorXd& theta);

// Parameters of the order-2 generalized von Mises density
//   f(theta) ~ exp{ gamma1*cos(theta - nu1) + gamma2*cos(2*(theta - nu2)) }.
struct Gvm2Params {
    double gamma1 = 0.0;
    double nu1 = 0.0;
    double gamma2 = 0.0;
    double nu2 = 0.0;
};

// Full conditional of coordinate k given the other angles; the conditional
// of the exponential-family density is an order-2 generalized von Mises law.
// Under the submodel mask gamma2 is identically zero.
Gvm2Params conditional_gvm_params(int k, const Eigen::VectorXd& theta, const CanonicalParams& p);

// Exact von Mises draw via Best-Fisher acceptance/rejection; kappa = 0 is the
// uniform circle. Returns theta in [0, 2pi).
double sample_von_mises(double kappa, double mu, Rng& rng);

// Exact order-2 generalized von Mises draw: von Mises(gamma1, nu1) proposals
// thinned with probability exp{gamma2*(cos(2*(theta - nu2)) - 1)} <= 1.
// Throws DivergentRejection after kMaxRejectionTrials proposals.
double sample_gvm2(const Gvm2Params& g, Rng& rng);

// One independent Gibbs chain: coordinates 0..n-2 start from their
// marginal-proxy generalized von Mises laws, the last coordinate from its
// full conditional, followed by `sweeps` full single-site update passes.
// Returns the final state in [0, 2pi)^n.
Eigen::VectorXd gibbs_chain(const CanonicalParams& p, int sweeps, Rng& rng);

// `count` mutually independent chains, one per row. Chain c uses the RNG
// stream (run_seed, iteration, c), so the result is bit-identical for any
// worker count; pool == nullptr runs serially.
Eigen::MatrixXd gibbs_sample(const CanonicalParams& p, int count, int sweeps,
                             std::uint64_t run_seed, std::uint64_t iteration,
                             WorkerPool* pool = nullptr);

// A tangent vector at a point of the mean-direction chart.
struct TangentStep {
    Eigen::VectorXd d_mu;
    Eigen::VectorXd d_kappa;
    Eigen::MatrixXd d_D;
};

// Pushes a canonical-chart tangent vector (d_eta, d_E) through the chart
// change at `at`; d_D is symmetrized and re-masked. Throws KappaUnderflow
// when any kappa_i < kKappaFloor (the map divides by kappa_i).
TangentStep tangent_transform(const Eigen::VectorXd& d_eta, const Eigen::MatrixXd& d_E,
                              const NaturalParams& at);

}  // namespace pack

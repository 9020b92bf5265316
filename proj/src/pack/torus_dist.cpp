#include "pack/torus_dist.hpp"

#include <algorithm>
#include <cmath>

#include "pack/parallel.hpp"

namespace pack {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

// Concentrations this small are indistinguishable from the uniform circle
// and would make the Best-Fisher constants degenerate (rho ~ kappa / 2).
constexpr double kUniformConcentration = 1e-12;

double wrap_two_pi(double x) {
    double y = std::fmod(x, kTwoPi);
    if (y < 0.0) y += kTwoPi;
    if (y >= kTwoPi) y = 0.0;  // fmod can land exactly on the period
    return y;
}

}  // namespace

void apply_submodel_mask(Eigen::MatrixXd& m) {
    const int n = static_cast<int>(m.rows()) / 2;
    for (int i = 0; i < n; ++i) {
        m(i, i) = 0.0;
        m(n + i, n + i) = 0.0;
        m(i, n + i) = 0.0;
        m(n + i, i) = 0.0;
    }
}

bool submodel_mask_holds(const Eigen::MatrixXd& m, double tol) {
    if (m.rows() != m.cols() || m.rows() % 2 != 0) return false;
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol) return false;
    const int n = static_cast<int>(m.rows()) / 2;
    for (int i = 0; i < n; ++i) {
        if (m(i, i) != 0.0 || m(n + i, n + i) != 0.0) return false;
        if (m(i, n + i) != 0.0 || m(n + i, i) != 0.0) return false;
    }
    return true;
}

CanonicalParams canonical_from_natural(const NaturalParams& p) {
    const int n = p.n();
    for (int i = 0; i < n; ++i) {
        if (!(p.kappa(i) > 0.0)) {
            throw NonPositiveKappa("concentration " + std::to_string(i) + " is " +
                                   std::to_string(p.kappa(i)) + "; it must be > 0");
        }
    }
    const Eigen::VectorXd c = p.mu.array().cos().matrix();
    const Eigen::VectorXd s = p.mu.array().sin().matrix();
    const Eigen::MatrixXd CC = c * c.transpose();
    const Eigen::MatrixXd CS = c * s.transpose();
    const Eigen::MatrixXd SC = s * c.transpose();
    const Eigen::MatrixXd SS = s * s.transpose();

    const auto Dcc = p.D.topLeftCorner(n, n);
    const auto Dcs = p.D.topRightCorner(n, n);
    const auto Dss = p.D.bottomRightCorner(n, n);

    CanonicalParams q;
    q.eta.resize(2 * n);
    q.eta.head(n) = p.kappa.cwiseProduct(c);
    q.eta.tail(n) = p.kappa.cwiseProduct(s);

    const Eigen::MatrixXd Ecc =
        0.5 * (Dcc.cwiseProduct(CC) - Dcs.cwiseProduct(CS) + Dss.cwiseProduct(SS) -
               Dcs.transpose().cwiseProduct(SC));
    const Eigen::MatrixXd Ecs =
        0.5 * (Dcs.cwiseProduct(CC) + Dcc.cwiseProduct(CS) - Dss.cwiseProduct(SC) -
               Dcs.transpose().cwiseProduct(SS));
    const Eigen::MatrixXd Ess =
        0.5 * (Dss.cwiseProduct(CC) + Dcc.cwiseProduct(SS) + Dcs.cwiseProduct(SC) +
               Dcs.transpose().cwiseProduct(CS));

    q.E.resize(2 * n, 2 * n);
    q.E.topLeftCorner(n, n) = Ecc;
    q.E.topRightCorner(n, n) = Ecs;
    q.E.bottomLeftCorner(n, n) = Ecs.transpose();
    q.E.bottomRightCorner(n, n) = Ess;
    q.E = (0.5 * (q.E + q.E.transpose())).eval();
    apply_submodel_mask(q.E);
    return q;
}

NaturalParams natural_from_canonical(const CanonicalParams& p) {
    const int n = p.n();
    NaturalParams q;
    q.mu.resize(n);
    q.kappa.resize(n);
    for (int i = 0; i < n; ++i) {
        const double ec = p.eta(i);
        const double es = p.eta(n + i);
        const double k = std::hypot(ec, es);
        if (k == 0.0) {
            throw ZeroConcentration("canonical pair " + std::to_string(i) +
                                    " vanishes; the mean direction is undefined");
        }
        q.kappa(i) = k;
        // half-angle form of mu = atan2(es, ec), continuous across ec <= 0
        q.mu(i) = wrap_two_pi(2.0 * std::atan2(es, ec + k));
    }

    const Eigen::VectorXd c = q.mu.array().cos().matrix();
    const Eigen::VectorXd s = q.mu.array().sin().matrix();
    const Eigen::MatrixXd CC = c * c.transpose();
    const Eigen::MatrixXd CS = c * s.transpose();
    const Eigen::MatrixXd SC = s * c.transpose();
    const Eigen::MatrixXd SS = s * s.transpose();

    const auto Ecc = p.E.topLeftCorner(n, n);
    const auto Ecs = p.E.topRightCorner(n, n);
    const auto Ess = p.E.bottomRightCorner(n, n);

    const Eigen::MatrixXd Dcc =
        2.0 * (Ecc.cwiseProduct(CC) + Ecs.cwiseProduct(CS) + Ecs.transpose().cwiseProduct(SC) +
               Ess.cwiseProduct(SS));
    const Eigen::MatrixXd Dcs =
        2.0 * (Ecs.cwiseProduct(CC) - Ecc.cwiseProduct(CS) + Ess.cwiseProduct(SC) -
               Ecs.transpose().cwiseProduct(SS));
    const Eigen::MatrixXd Dss =
        2.0 * (Ess.cwiseProduct(CC) - Ecs.cwiseProduct(SC) - Ecs.transpose().cwiseProduct(CS) +
               Ecc.cwiseProduct(SS));

    q.D.resize(2 * n, 2 * n);
    q.D.topLeftCorner(n, n) = Dcc;
    q.D.topRightCorner(n, n) = Dcs;
    q.D.bottomLeftCorner(n, n) = Dcs.transpose();
    q.D.bottomRightCorner(n, n) = Dss;
    q.D = (0.5 * (q.D + q.D.transpose())).eval();
    apply_submodel_mask(q.D);
    return q;
}

std::string StatLayout::descriptor_json() const {
    std::string out = "{\"n\": " + std::to_string(n) + ", \"dim\": " + std::to_string(dim()) +
                      ", \"entries\": [";
    bool first = true;
    auto push = [&](const std::string& entry) {
        if (!first) out += ", ";
        out += '"';
        out += entry;
        out += '"';
        first = false;
    };
    auto angle = [](const char* fn, int i) {
        return std::string(fn) + "(theta_" + std::to_string(i) + ")";
    };
    for (int i = 0; i < n; ++i) push(angle("cos", i));
    for (int i = 0; i < n; ++i) push(angle("sin", i));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) push(angle("cos", i) + "*" + angle("cos", j));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (j != i) push(angle("cos", i) + "*" + angle("sin", j));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) push(angle("sin", i) + "*" + angle("sin", j));
    out += "]}";
    return out;
}

Eigen::VectorXd sufficient_statistic(const Eigen::VectorXd& theta) {
    const int n = static_cast<int>(theta.size());
    const StatLayout layout(n);
    Eigen::VectorXd t(layout.dim());
    const Eigen::VectorXd c = theta.array().cos().matrix();
    const Eigen::VectorXd s = theta.array().sin().matrix();
    t.head(n) = c;
    t.segment(n, n) = s;
    int idx = 2 * n;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) t(idx++) = c(i) * c(j);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (j != i) t(idx++) = c(i) * s(j);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) t(idx++) = s(i) * s(j);
    return t;
}

Eigen::VectorXd pack_canonical(const CanonicalParams& p) {
    const int n = p.n();
    const StatLayout layout(n);
    Eigen::VectorXd lambda(layout.dim());
    lambda.head(2 * n) = p.eta;
    int idx = 2 * n;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) lambda(idx++) = 2.0 * p.E(i, j);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (j != i) lambda(idx++) = 2.0 * p.E(i, n + j);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) lambda(idx++) = 2.0 * p.E(n + i, n + j);
    return lambda;
}

CanonicalParams unpack_canonical(const Eigen::VectorXd& lambda, int n) {
    CanonicalParams p;
    p.eta = lambda.head(2 * n);
    p.E = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    int idx = 2 * n;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double e = 0.5 * lambda(idx++);
            p.E(i, j) = e;
            p.E(j, i) = e;
        }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (j != i) {
                const double e = 0.5 * lambda(idx++);
                p.E(i, n + j) = e;
                p.E(n + j, i) = e;
            }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double e = 0.5 * lambda(idx++);
            p.E(n + i, n + j) = e;
            p.E(n + j, n + i) = e;
        }
    return p;
}

double log_density_unnormalized(const NaturalParams& p, const Eigen::VectorXd& theta) {
    const int n = p.n();
    const Eigen::VectorXd delta = theta - p.mu;
    Eigen::VectorXd w(2 * n);
    w.head(n) = delta.array().cos().matrix();
    w.tail(n) = delta.array().sin().matrix();
    return p.kappa.dot(w.head(n)) + 0.5 * w.dot(p.D * w);
}

double log_density_canonical(const CanonicalParams& p, const Eigen::VectorXd& theta) {
    const int n = p.n();
    Eigen::VectorXd w(2 * n);
    w.head(n) = theta.array().cos().matrix();
    w.tail(n) = theta.array().sin().matrix();
    return p.eta.dot(w) + w.dot(p.E * w);
}

namespace {

// Second-harmonic coefficients of coordinate k's conditional; they depend
// only on the same-angle entries of E and are zero under the submodel mask.
void second_harmonic(const Eigen::MatrixXd& E, int k, int n, double& gamma2, double& nu2) {
    const double dc = E(k, k) - E(n + k, n + k);
    const double ds = E(n + k, k) + E(k, n + k);
    gamma2 = std::sqrt(dc * dc + ds * ds);
    nu2 = gamma2 > 0.0 ? 0.5 * std::atan2(ds, dc) : 0.0;
}

// First-harmonic coefficients of coordinate k's conditional at the current
// state w = [cos(theta); sin(theta)]. Every same-row interaction enters the
// density twice (E is symmetric), hence the factor 2; the own-coordinate
// column entries are excluded by subtraction so w(k), w(n+k) may be stale.
Gvm2Params first_harmonic(const Eigen::VectorXd& eta, const Eigen::MatrixXd& E, int k, int n,
                          const Eigen::VectorXd& w, double gamma2, double nu2) {
    const double a =
        eta(k) + 2.0 * (E.col(k).dot(w) - E(k, k) * w(k) - E(n + k, k) * w(n + k));
    const double b = eta(n + k) +
                     2.0 * (E.col(n + k).dot(w) - E(k, n + k) * w(k) - E(n + k, n + k) * w(n + k));
    Gvm2Params g;
    g.gamma1 = std::sqrt(a * a + b * b);
    g.nu1 = std::atan2(b, a);
    g.gamma2 = gamma2;
    g.nu2 = nu2;
    return g;
}

}  // namespace

Gvm2Params conditional_gvm_params(int k, const Eigen::VectorXd& theta, const CanonicalParams& p) {
    const int n = p.n();
    Eigen::VectorXd w(2 * n);
    w.head(n) = theta.array().cos().matrix();
    w.tail(n) = theta.array().sin().matrix();
    double gamma2 = 0.0;
    double nu2 = 0.0;
    second_harmonic(p.E, k, n, gamma2, nu2);
    return first_harmonic(p.eta, p.E, k, n, w, gamma2, nu2);
}

double sample_von_mises(double kappa, double mu, Rng& rng) {
    if (kappa < kUniformConcentration) return rng.uniform() * kTwoPi;
    // Best-Fisher wrapped-Cauchy envelope
    const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
    const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
    const double r = (1.0 + rho * rho) / (2.0 * rho);
    for (long trial = 0; trial < kMaxRejectionTrials; ++trial) {
        const double z = std::cos(kPi * rng.uniform());
        const double f = (1.0 + r * z) / (r + z);
        const double c = kappa * (r - f);
        const double u2 = rng.uniform();
        if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0) {
            const double fc = std::clamp(f, -1.0, 1.0);
            const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
            return wrap_two_pi(mu + sign * std::acos(fc));
        }
    }
    throw DivergentRejection("von Mises rejection sampler exhausted " +
                             std::to_string(kMaxRejectionTrials) + " trials");
}

double sample_gvm2(const Gvm2Params& g, Rng& rng) {
    if (g.gamma2 <= 0.0) return sample_von_mises(g.gamma1, g.nu1, rng);
    for (long trial = 0; trial < kMaxRejectionTrials; ++trial) {
        const double theta = sample_von_mises(g.gamma1, g.nu1, rng);
        const double log_accept = g.gamma2 * (std::cos(2.0 * (theta - g.nu2)) - 1.0);
        if (std::log(rng.uniform()) < log_accept) return theta;
    }
    throw DivergentRejection("generalized von Mises thinning exhausted " +
                             std::to_string(kMaxRejectionTrials) + " trials");
}

namespace {

struct ChainPlan {
    // marginal-proxy law of each coordinate (first harmonic from eta alone)
    Eigen::VectorXd init_gamma1;
    Eigen::VectorXd init_nu1;
    // second-harmonic coefficients, state-independent
    Eigen::VectorXd gamma2;
    Eigen::VectorXd nu2;
};

ChainPlan make_chain_plan(const CanonicalParams& p) {
    const int n = p.n();
    ChainPlan plan;
    plan.init_gamma1.resize(n);
    plan.init_nu1.resize(n);
    plan.gamma2.resize(n);
    plan.nu2.resize(n);
    for (int k = 0; k < n; ++k) {
        const double ec = p.eta(k);
        const double es = p.eta(n + k);
        plan.init_gamma1(k) = std::sqrt(ec * ec + es * es);
        plan.init_nu1(k) = std::atan2(es, ec);
        second_harmonic(p.E, k, n, plan.gamma2(k), plan.nu2(k));
    }
    return plan;
}

Eigen::VectorXd run_chain(const CanonicalParams& p, const ChainPlan& plan, int sweeps, Rng& rng) {
    const int n = p.n();
    Eigen::VectorXd theta(n);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(2 * n);
    for (int k = 0; k + 1 < n; ++k) {
        const Gvm2Params g{plan.init_gamma1(k), plan.init_nu1(k), plan.gamma2(k), plan.nu2(k)};
        theta(k) = sample_gvm2(g, rng);
        w(k) = std::cos(theta(k));
        w(n + k) = std::sin(theta(k));
    }
    {
        const int k = n - 1;
        const Gvm2Params g = first_harmonic(p.eta, p.E, k, n, w, plan.gamma2(k), plan.nu2(k));
        theta(k) = sample_gvm2(g, rng);
        w(k) = std::cos(theta(k));
        w(n + k) = std::sin(theta(k));
    }
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        for (int k = 0; k < n; ++k) {
            const Gvm2Params g = first_harmonic(p.eta, p.E, k, n, w, plan.gamma2(k), plan.nu2(k));
            theta(k) = sample_gvm2(g, rng);
            w(k) = std::cos(theta(k));
            w(n + k) = std::sin(theta(k));
        }
    }
    return theta;
}

}  // namespace

Eigen::VectorXd gibbs_chain(const CanonicalParams& p, int sweeps, Rng& rng) {
    return run_chain(p, make_chain_plan(p), sweeps, rng);
}

Eigen::MatrixXd gibbs_sample(const CanonicalParams& p, int count, int sweeps,
                             std::uint64_t run_seed, std::uint64_t iteration, WorkerPool* pool) {
    const int n = p.n();
    const ChainPlan plan = make_chain_plan(p);
    Eigen::MatrixXd samples(count, n);
    auto job = [&](int begin, int end) {
        for (int chain = begin; chain < end; ++chain) {
            Rng rng = Rng::stream(run_seed, iteration, static_cast<std::uint64_t>(chain));
            samples.row(chain) = run_chain(p, plan, sweeps, rng).transpose();
        }
    };
    if (pool != nullptr) {
        pool->run(count, job);
    } else {
        job(0, count);
    }
    return samples;
}

TangentStep tangent_transform(const Eigen::VectorXd& d_eta, const Eigen::MatrixXd& d_E,
                              const NaturalParams& at) {
    const int n = at.n();
    for (int i = 0; i < n; ++i) {
        if (at.kappa(i) < kKappaFloor) {
            throw KappaUnderflow("concentration " + std::to_string(i) + " is " +
                                 std::to_string(at.kappa(i)) + ", below the floor " +
                                 std::to_string(kKappaFloor));
        }
    }
    const Eigen::VectorXd c = at.mu.array().cos().matrix();
    const Eigen::VectorXd s = at.mu.array().sin().matrix();
    const Eigen::VectorXd de_c = d_eta.head(n);
    const Eigen::VectorXd de_s = d_eta.tail(n);

    TangentStep out;
    out.d_mu = (c.cwiseProduct(de_s) - s.cwiseProduct(de_c)).cwiseQuotient(at.kappa);
    out.d_kappa = c.cwiseProduct(de_c) + s.cwiseProduct(de_s);

    const Eigen::MatrixXd CC = c * c.transpose();
    const Eigen::MatrixXd CS = c * s.transpose();
    const Eigen::MatrixXd SC = s * c.transpose();
    const Eigen::MatrixXd SS = s * s.transpose();
    const Eigen::MatrixXd Mi = out.d_mu * Eigen::RowVectorXd::Ones(n);  // (i,j) -> d_mu_i
    const Eigen::MatrixXd Mj = Mi.transpose();                          // (i,j) -> d_mu_j

    const auto Dcc = at.D.topLeftCorner(n, n);
    const auto Dcs = at.D.topRightCorner(n, n);
    const auto Dsc = at.D.bottomLeftCorner(n, n);
    const auto Dss = at.D.bottomRightCorner(n, n);
    const auto dEcc = d_E.topLeftCorner(n, n);
    const auto dEcs = d_E.topRightCorner(n, n);
    const auto dEsc = d_E.bottomLeftCorner(n, n);
    const auto dEss = d_E.bottomRightCorner(n, n);

    // The d_E factors carry a 2 because every off-diagonal pair of the
    // symmetric E holds one free coordinate spread over two entries, while
    // each D block formula reads a single (i, j) entry.
    const Eigen::MatrixXd dDcc = Dcs.cwiseProduct(Mj) + Dsc.cwiseProduct(Mi) +
                                 2.0 * (CC.cwiseProduct(dEcc) + CS.cwiseProduct(dEcs) +
                                        SC.cwiseProduct(dEsc) + SS.cwiseProduct(dEss));
    const Eigen::MatrixXd dDcs = Dss.cwiseProduct(Mi) - Dcc.cwiseProduct(Mj) +
                                 2.0 * (CC.cwiseProduct(dEcs) - CS.cwiseProduct(dEcc) +
                                        SC.cwiseProduct(dEss) - SS.cwiseProduct(dEsc));
    const Eigen::MatrixXd dDsc = Dss.cwiseProduct(Mj) - Dcc.cwiseProduct(Mi) +
                                 2.0 * (CC.cwiseProduct(dEsc) - SC.cwiseProduct(dEcc) +
                                        CS.cwiseProduct(dEss) - SS.cwiseProduct(dEcs));
    const Eigen::MatrixXd dDss = -Dsc.cwiseProduct(Mj) - Dcs.cwiseProduct(Mi) +
                                 2.0 * (CC.cwiseProduct(dEss) - SC.cwiseProduct(dEcs) -
                                        CS.cwiseProduct(dEsc) + SS.cwiseProduct(dEcc));

    out.d_D.resize(2 * n, 2 * n);
    out.d_D.topLeftCorner(n, n) = dDcc;
    out.d_D.topRightCorner(n, n) = dDcs;
    out.d_D.bottomLeftCorner(n, n) = dDsc;
    out.d_D.bottomRightCorner(n, n) = dDss;
    out.d_D = (0.5 * (out.d_D + out.d_D.transpose())).eval();
    apply_submodel_mask(out.d_D);
    return out;
}

}  // namespace pack

#include "naclab/critic.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

namespace naclab {

double StepSchedule::at(std::int64_t k) const {
    if (kind == Kind::Constant) return alpha;
    return alpha / std::pow(static_cast<double>(k) + h, eta);
}

void StepSchedule::validate() const {
    if (!(alpha > 0.0)) throw ConfigError("StepSchedule: alpha must be > 0");
    if (kind == Kind::Diminishing) {
        if (!(eta > 0.0 && eta <= 1.0))
            throw ConfigError("StepSchedule: eta must lie in (0,1]");
        if (!(h > 0.0)) throw ConfigError("StepSchedule: h must be > 0");
    }
}

StepSchedule StepSchedule::constant(double alpha) {
    StepSchedule s;
    s.kind = Kind::Constant;
    s.alpha = alpha;
    return s;
}

StepSchedule StepSchedule::diminishing(double alpha, double eta, double h) {
    StepSchedule s;
    s.kind = Kind::Diminishing;
    s.alpha = alpha;
    s.eta = eta;
    s.h = h;
    return s;
}

void CriticConfig::validate(int feature_dim) const {
    if (n < 1) throw ConfigError("CriticConfig: n must be >= 1");
    if (num_iters < 0) throw ConfigError("CriticConfig: K must be >= 0");
    if (!(gamma_c > 0.0 && gamma_c < 1.0))
        throw ConfigError("CriticConfig: gamma_c must lie in (0,1)");
    if (w0.size() != feature_dim)
        throw ConfigError("CriticConfig: w0 dimension mismatch");
    if (!(divergence_threshold > 0.0))
        throw ConfigError("CriticConfig: divergence threshold must be > 0");
    schedule.validate();
}

double f_factor(double x, int n) {
    if (x < 0.0) throw ConfigError("f_factor: x must be >= 0");
    if (n < 1) throw ConfigError("f_factor: n must be >= 1");
    if (std::abs(x - 1.0) < 1e-10) {
        // near the removable singularity, evaluate the sum directly
        double sum = 0.0, p = 1.0;
        for (int i = 0; i <= n; ++i) {
            sum += p;
            p *= x;
        }
        return sum;
    }
    return (1.0 - std::pow(x, n + 1)) / (1.0 - x);
}

int min_horizon(double gamma, double gamma_c, double kappa_min) {
    if (!(gamma > 0.0 && gamma < 1.0) || !(gamma_c > 0.0 && gamma_c < 1.0) ||
        !(kappa_min > 0.0 && kappa_min < 1.0 + 1e-15))
        throw ConfigError("min_horizon: all arguments must lie in (0,1)");
    double bound = (2.0 * std::log(gamma_c) + std::log(kappa_min)) / (2.0 * std::log(gamma));
    int n = std::max(1, static_cast<int>(std::ceil(bound - 1e-12)));
    double target = gamma_c * std::sqrt(kappa_min);
    while (std::pow(gamma, n) > target * (1.0 + 1e-12)) ++n;
    return n;
}

double importance_ratio(const Matrix& target, const BehaviorPolicy& behavior, int s, int a) {
    if (s < 0 || s >= target.rows() || a < 0 || a >= target.cols())
        throw InputError("importance_ratio: index out of range");
    return target(s, a) / behavior.prob(s, a);
}

Vector td_step(const Vector& w, std::span<const Step> win, const Mdp& mdp,
               const FeatureMap& features, const Matrix& target,
               const BehaviorPolicy& behavior, int n) {
    if (static_cast<int>(win.size()) < n + 1)
        throw InputError("td_step: window has fewer than n+1 pairs");
    const double gamma = mdp.discount();
    const Matrix& phi = features.matrix();

    double acc = 0.0;
    double rho_prefix = 1.0; // prod_{j=1}^{i} rho(x_j); empty product for i = 0
    double gamma_pow = 1.0;
    double v_i = phi.row(mdp.sa(win[0].state, win[0].action)).dot(w);
    for (int i = 0; i < n; ++i) {
        if (i >= 1)
            rho_prefix *= target(win[i].state, win[i].action) /
                          behavior.prob(win[i].state, win[i].action);
        const Step& nxt = win[i + 1];
        double rho_next = target(nxt.state, nxt.action) / behavior.prob(nxt.state, nxt.action);
        double v_next = phi.row(mdp.sa(nxt.state, nxt.action)).dot(w);
        double delta = mdp.rewards()(win[i].state, win[i].action) +
                       gamma * rho_next * v_next - v_i;
        acc += gamma_pow * rho_prefix * delta;
        gamma_pow *= gamma;
        v_i = v_next;
    }
    return phi.row(mdp.sa(win[0].state, win[0].action)).transpose() * acc;
}

CriticRun run_critic(const Mdp& mdp, const FeatureMap& features,
                     std::span<const Step> segment, const CriticConfig& config,
                     const Matrix& target, const BehaviorPolicy& behavior,
                     const Vector* oracle_w_pi) {
    config.validate(features.dim());
    const int n = config.n;
    const std::int64_t K = config.num_iters;
    if (static_cast<std::int64_t>(segment.size()) < K + n)
        throw InputError("run_critic: segment shorter than K + n pairs");

    CriticRun run;
    Vector w = config.w0;
    const std::int64_t thin =
        config.thin > 0 ? config.thin : std::max<std::int64_t>(1, K / 1000);
    auto record = [&](std::int64_t k) {
        run.ks.push_back(k);
        run.iterates.push_back(w);
        if (oracle_w_pi) run.mse.push_back((w - *oracle_w_pi).squaredNorm());
    };
    record(0);
    for (std::int64_t k = 0; k < K; ++k) {
        Vector dir = td_step(w, segment.subspan(static_cast<std::size_t>(k),
                                                static_cast<std::size_t>(n + 1)),
                             mdp, features, target, behavior, n);
        w += config.schedule.at(k) * dir;
        if (!w.allFinite() ||
            w.lpNorm<Eigen::Infinity>() > config.divergence_threshold) {
            run.diverged = true;
            run.divergence_step = k;
            record(k + 1);
            break;
        }
        if ((k + 1) % thin == 0 || k + 1 == K) record(k + 1);
    }
    run.final = run.iterates.back();
    return run;
}

namespace {

/// Shared exact-operator pieces: K = diag(kappa_b), P_pi, (gamma P_pi)^n,
/// and the discounted n-step reward accumulation sum_{i<n} (gamma P_pi)^i R.
struct OperatorParts {
    Vector kappa;
    Matrix gram;        // Phi^T K Phi
    Matrix pn;          // (gamma P_pi)^n
    Vector r_nstep;     // sum_{i=0}^{n-1} (gamma P_pi)^i R
};

OperatorParts make_operator_parts(const Mdp& mdp, const FeatureMap& features,
                                  const Matrix& target, const BehaviorPolicy& behavior,
                                  int n) {
    if (n < 1) throw ConfigError("n must be >= 1");
    if (features.num_rows() != mdp.num_pairs())
        throw ConfigError("feature rows do not match |S||A|");
    OperatorParts parts;
    parts.kappa = stationary_info(mdp, behavior).kappa_b;
    Matrix p = mdp.discount() * policy_transition_matrix(mdp, target);
    Vector r = mdp.reward_vector();
    Vector term = r;
    parts.r_nstep = r;
    Matrix pn = p;
    for (int i = 1; i < n; ++i) {
        term = p * term;
        parts.r_nstep += term;
        pn = p * pn;
    }
    parts.pn = std::move(pn);
    const Matrix& phi = features.matrix();
    parts.gram = phi.transpose() * parts.kappa.asDiagonal() * phi;
    return parts;
}

double weighted_operator_norm(const Matrix& m, const Vector& kappa) {
    // ||M||_kappa = spectral norm of D M D^{-1} with D = diag(sqrt kappa),
    // obtained from the largest eigenvalue of the transformed Gram form.
    Vector sqrt_k = kappa.array().sqrt();
    Matrix t = sqrt_k.asDiagonal() * m * sqrt_k.cwiseInverse().asDiagonal();
    Eigen::SelfAdjointEigenSolver<Matrix> es(t.transpose() * t);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

} // namespace

Vector expected_update(const Vector& w, const Mdp& mdp, const FeatureMap& features,
                       const Matrix& target, const BehaviorPolicy& behavior, int n) {
    OperatorParts parts = make_operator_parts(mdp, features, target, behavior, n);
    const Matrix& phi = features.matrix();
    Vector q = phi * w;
    Vector bellman_gap = parts.r_nstep + parts.pn * q - q;
    return phi.transpose() * (parts.kappa.asDiagonal() * bellman_gap);
}

ProjectedFixedPoint solve_projected_bellman(const Mdp& mdp, const FeatureMap& features,
                                            const Matrix& target,
                                            const BehaviorPolicy& behavior, int n) {
    OperatorParts parts = make_operator_parts(mdp, features, target, behavior, n);
    const Matrix& phi = features.matrix();
    Matrix weighted_phi_t = phi.transpose() * parts.kappa.asDiagonal(); // Phi^T K
    Matrix sys = parts.gram - weighted_phi_t * (parts.pn * phi);
    Vector rhs = weighted_phi_t * parts.r_nstep;

    Eigen::JacobiSVD<Matrix> svd(sys, Eigen::ComputeThinU | Eigen::ComputeThinV);
    double smax = svd.singularValues().maxCoeff();
    double smin = svd.singularValues().minCoeff();
    if (smax <= 0.0 || smin / smax < 1e-12)
        throw DegenerateSystem(
            "solve_projected_bellman: singular system; the projected n-step "
            "operator has no unique fixed point at n=" + std::to_string(n));

    ProjectedFixedPoint fp;
    fp.w_pi = svd.solve(rhs);
    Vector q = phi * fp.w_pi;
    fp.residual = (weighted_phi_t * (parts.r_nstep + parts.pn * q - q))
                      .lpNorm<Eigen::Infinity>();
    Eigen::SelfAdjointEigenSolver<Matrix> ges(parts.gram);
    fp.lambda_min = ges.eigenvalues().minCoeff();
    Matrix m = phi * parts.gram.ldlt().solve(weighted_phi_t * parts.pn);
    fp.contraction_estimate = weighted_operator_norm(m, parts.kappa);
    return fp;
}

double certify_contraction(const Mdp& mdp, const FeatureMap& features,
                           const Matrix& target, const BehaviorPolicy& behavior, int n) {
    OperatorParts parts = make_operator_parts(mdp, features, target, behavior, n);
    const Matrix& phi = features.matrix();
    Matrix m = phi * parts.gram.ldlt().solve(
                         Matrix(phi.transpose() * parts.kappa.asDiagonal() * parts.pn));
    return weighted_operator_norm(m, parts.kappa);
}

double w_pi_norm_bound(double gamma, double gamma_c, double lambda_min) {
    return 2.0 / ((1.0 - gamma) * std::sqrt(1.0 - gamma_c) * std::sqrt(lambda_min));
}

Theorem1Report theorem1_bound(const CriticConfig& config, const Mdp& mdp,
                              const FeatureMap& features, const Matrix& target,
                              const BehaviorPolicy& behavior, std::int64_t k) {
    config.validate(features.dim());
    if (config.schedule.kind != StepSchedule::Kind::Constant)
        throw BoundInapplicable("theorem1_bound: requires a constant stepsize");
    const double alpha = config.schedule.alpha;
    const int n = config.n;

    Theorem1Report rep;
    rep.t_alpha = mixing_time(mdp, behavior, alpha);
    double zeta = max_ratio(target, behavior);
    rep.f_value = f_factor(mdp.discount() * zeta, n);

    double gate = (1.0 - config.gamma_c) / (456.0 * rep.f_value * rep.f_value);
    if (alpha * (rep.t_alpha + n + 1) > gate) {
        std::ostringstream os;
        os << "theorem1_bound: stepsize condition fails: alpha*(t_alpha+n+1) = "
           << alpha * (rep.t_alpha + n + 1) << " > " << gate;
        throw BoundInapplicable(os.str());
    }
    if (k < rep.t_alpha + n + 1)
        throw BoundInapplicable("theorem1_bound: requires k >= t_alpha + n + 1");

    ProjectedFixedPoint fp = solve_projected_bellman(mdp, features, target, behavior, n);
    rep.c1 = std::pow(config.w0.norm() + (config.w0 - fp.w_pi).norm() + 1.0, 2);
    rep.c2 = 114.0 * rep.f_value * rep.f_value * std::pow(fp.w_pi.norm() + 1.0, 2);
    double ell = (1.0 - config.gamma_c) * fp.lambda_min;
    rep.e1 = rep.c1 * std::pow(1.0 - ell * alpha,
                               static_cast<double>(k - (rep.t_alpha + n + 1)));
    rep.e2 = rep.c2 * alpha * (rep.t_alpha + n + 1) / ell;
    return rep;
}

Theorem3Report theorem3_bound(const CriticConfig& config, const Mdp& mdp,
                              const FeatureMap& features, const Matrix& target,
                              const BehaviorPolicy& behavior, std::int64_t k) {
    config.validate(features.dim());
    if (config.schedule.kind != StepSchedule::Kind::Diminishing)
        throw BoundInapplicable("theorem3_bound: requires a diminishing stepsize");
    const StepSchedule& sch = config.schedule;
    const int n = config.n;

    MixingInfo mix = mixing_info(mdp, behavior, {}, 2000);
    // exact mixing time as a function of the TV level, from the fitted chain
    auto t_of = [&](double level) {
        return mixing_time(mdp, behavior, std::min(0.999999, level));
    };

    std::int64_t k_hat = 0;
    while (k_hat < t_of(sch.at(k_hat)) + n + 1) ++k_hat;
    if (k < k_hat)
        throw BoundInapplicable("theorem3_bound: requires k >= k_hat = " +
                                std::to_string(k_hat));

    ProjectedFixedPoint fp = solve_projected_bellman(mdp, features, target, behavior, n);
    double zeta = max_ratio(target, behavior);
    double f = f_factor(mdp.discount() * zeta, n);
    double ell = (1.0 - config.gamma_c) * fp.lambda_min;
    double gate = (1.0 - config.gamma_c) / (114.0 * f * f);

    // stepsize-sum condition over the mixing window, checked from k_hat to k
    // on a geometrically thinned set of anchors
    for (std::int64_t kk = k_hat; kk <= k;
         kk = std::max(kk + 1, static_cast<std::int64_t>(kk * 1.05))) {
        std::int64_t win = t_of(sch.at(kk)) + n + 1;
        double sum = 0.0;
        for (std::int64_t i = std::max<std::int64_t>(0, kk - win); i < kk; ++i)
            sum += sch.at(i);
        if (sum > gate)
            throw BoundInapplicable(
                "theorem3_bound: stepsize-sum condition fails near k=" +
                std::to_string(kk));
    }

    Theorem3Report rep;
    rep.ell = ell;
    rep.l1 = (1.0 + std::log(mix.geo_C / mix.geo_sigma)) / std::log(1.0 / mix.geo_sigma);
    rep.k_hat = k_hat;

    double c1 = std::pow(config.w0.norm() + (config.w0 - fp.w_pi).norm() + 1.0, 2);
    double c2 = 114.0 * f * f * std::pow(fp.w_pi.norm() + 1.0, 2);
    const double kh = static_cast<double>(k) + sch.h;
    const double kh_hat = static_cast<double>(k_hat) + sch.h;
    const double log_term = std::log(kh / sch.alpha) + 1.0;
    const double la = ell * sch.alpha;

    if (sch.eta == 1.0) {
        if (std::abs(la - 1.0) < 1e-12) {
            rep.bias = c1 * (kh_hat / kh);
            rep.variance = 8.0 * c2 * sch.alpha * sch.alpha * rep.l1 *
                           std::log(kh / kh_hat) * log_term / kh;
        } else if (la < 1.0) {
            rep.bias = c1 * std::pow(kh_hat / kh, la);
            rep.variance = 8.0 * c2 * sch.alpha * sch.alpha * rep.l1 / (1.0 - la) *
                           log_term / std::pow(kh, la);
        } else {
            rep.bias = c1 * std::pow(kh_hat / kh, la);
            rep.variance = 8.0 * std::exp(1.0) * c2 * sch.alpha * sch.alpha * rep.l1 /
                           (la - 1.0) * log_term / kh;
        }
    } else {
        double threshold = std::pow(2.0 * sch.eta / la, 1.0 / (1.0 - sch.eta));
        if (kh_hat < threshold)
            throw BoundInapplicable(
                "theorem3_bound: requires k_hat + h >= [2 eta/(ell alpha)]^{1/(1-eta)}");
        rep.bias = c1 * std::exp(-la / (1.0 - sch.eta) *
                                 (std::pow(kh, 1.0 - sch.eta) -
                                  std::pow(kh_hat, 1.0 - sch.eta)));
        rep.variance = 4.0 * c2 * sch.alpha * sch.alpha * rep.l1 / la * log_term /
                       std::pow(kh, sch.eta);
    }
    return rep;
}

} // namespace naclab

#include "naclab/actor.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace naclab {

double ActorConfig::effective_beta(int num_actions) const {
    if (eval_rule == EvalRule::UniformSample || beta <= 0.0)
        return std::log(static_cast<double>(num_actions));
    return beta;
}

void ActorConfig::validate(int feature_dim, int num_actions) const {
    if (T < 1) throw ConfigError("ActorConfig: T must be >= 1");
    if (num_actions < 2) throw ConfigError("ActorConfig: need at least two actions");
    if (theta0.size() != feature_dim)
        throw ConfigError("ActorConfig: theta0 dimension mismatch");
    critic.validate(feature_dim);
}

Vector natural_update(const Vector& theta, const Vector& w, double beta) {
    if (theta.size() != w.size())
        throw InputError("natural_update: dimension mismatch");
    return theta + beta * w;
}

Matrix multiplicative_update(const Matrix& policy, const FeatureMap& features,
                             const Vector& w, double beta) {
    const int S = static_cast<int>(policy.rows());
    const int A = static_cast<int>(policy.cols());
    if (features.num_rows() != S * A || features.dim() != w.size())
        throw InputError("multiplicative_update: shape mismatch");
    Matrix out(S, A);
    for (int s = 0; s < S; ++s) {
        double m = -std::numeric_limits<double>::infinity();
        Eigen::RowVectorXd shift(A);
        for (int a = 0; a < A; ++a) {
            shift(a) = beta * features.row(sa_index(s, a, A)).dot(w);
            m = std::max(m, shift(a));
        }
        double z = 0.0;
        for (int a = 0; a < A; ++a) {
            out(s, a) = policy(s, a) * std::exp(shift(a) - m);
            z += out(s, a);
        }
        out.row(s) /= z;
    }
    return out;
}

namespace {

/// Exact optimality reference: value iteration's greedy policy evaluated
/// exactly, so reported gaps are nonnegative by construction.
struct GapOracle {
    Vector mu;       // uniform start distribution
    double v_star;   // V^{pi*}(mu)

    GapOracle(const Mdp& mdp) {
        mu = Vector::Constant(mdp.num_states(), 1.0 / mdp.num_states());
        OptimalSolution opt = optimal_values(mdp, 1e-12);
        Matrix table = deterministic_table(mdp.num_states(), mdp.num_actions(), opt.greedy);
        v_star = policy_value(mdp, table, mu);
    }

    double gap(const Mdp& mdp, const Matrix& policy) const {
        return v_star - policy_value(mdp, policy, mu);
    }
};

double sup_residual(const Mdp& mdp, const FeatureMap& features,
                    const Matrix& policy, const Vector& w) {
    return (exact_q(mdp, policy) - features.matrix() * w).lpNorm<Eigen::Infinity>();
}

void draw_output_index(NacRun& run, const ActorConfig& config, std::uint64_t seed) {
    if (config.eval_rule != EvalRule::UniformSample) return;
    Rng rng = Rng::stream(seed, 1);
    run.t_hat = std::min<int>(config.T - 1,
                              static_cast<int>(rng.next_double() * config.T));
}

} // namespace

NacRun run_nac(const Mdp& mdp, const FeatureMap& features,
               const BehaviorPolicy& behavior, const ActorConfig& config,
               std::uint64_t seed) {
    config.validate(features.dim(), mdp.num_actions());
    const double beta = config.effective_beta(mdp.num_actions());
    const int n = config.critic.n;
    const std::int64_t seg_len = config.critic.num_iters + n;
    Trajectory traj = generate(mdp, behavior, 0,
                               static_cast<int>(config.T * seg_len), seed);

    CriticConfig inner = config.critic;
    inner.w0 = Vector::Zero(features.dim());
    GapOracle oracle(mdp);

    NacRun run;
    Vector theta = config.theta0;
    for (int t = 0; t < config.T; ++t) {
        run.thetas.push_back(theta);
        Matrix target = softmax_eval(features, theta, mdp.num_states(), mdp.num_actions());
        run.gaps.push_back(oracle.gap(mdp, target));
        ProjectedFixedPoint fp =
            solve_projected_bellman(mdp, features, target, behavior, n);
        run.xi_trace.push_back(sup_residual(mdp, features, target, fp.w_pi));

        CriticRun cr = run_critic(mdp, features,
                                  traj.segment(static_cast<int>(t * seg_len),
                                               static_cast<int>(seg_len)),
                                  inner, target, behavior);
        run.critic_ws.push_back(cr.final);
        if (cr.diverged) {
            run.divergences.push_back({t, cr.divergence_step});
        } else {
            theta = natural_update(theta, cr.final, beta);
        }
    }
    run.thetas.push_back(theta);
    run.gaps.push_back(oracle.gap(
        mdp, softmax_eval(features, theta, mdp.num_states(), mdp.num_actions())));
    draw_output_index(run, config, seed);
    return run;
}

NacRun run_exact_npg(const Mdp& mdp, const FeatureMap& features,
                     const BehaviorPolicy& behavior, const ActorConfig& config) {
    config.validate(features.dim(), mdp.num_actions());
    const double beta = config.effective_beta(mdp.num_actions());
    const int n = config.critic.n;
    GapOracle oracle(mdp);

    NacRun run;
    Vector theta = config.theta0;
    for (int t = 0; t < config.T; ++t) {
        run.thetas.push_back(theta);
        Matrix target = softmax_eval(features, theta, mdp.num_states(), mdp.num_actions());
        run.gaps.push_back(oracle.gap(mdp, target));
        double norm = certify_contraction(mdp, features, target, behavior, n);
        if (norm > config.critic.gamma_c) {
            std::ostringstream os;
            os << "run_exact_npg: contraction certificate fails at iterate " << t
               << ": weighted norm " << norm << " > gamma_c " << config.critic.gamma_c;
            throw AssumptionViolation(os.str());
        }
        ProjectedFixedPoint fp =
            solve_projected_bellman(mdp, features, target, behavior, n);
        run.critic_ws.push_back(fp.w_pi);
        run.xi_trace.push_back(sup_residual(mdp, features, target, fp.w_pi));
        theta = natural_update(theta, fp.w_pi, beta);
    }
    run.thetas.push_back(theta);
    run.gaps.push_back(oracle.gap(
        mdp, softmax_eval(features, theta, mdp.num_states(), mdp.num_actions())));
    return run;
}

NacRun run_qnpg(const Mdp& mdp, const FeatureMap& features,
                const BehaviorPolicy& behavior, const ActorConfig& config,
                NuChoice nu_choice) {
    config.validate(features.dim(), mdp.num_actions());
    const double beta = config.effective_beta(mdp.num_actions());
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    const Matrix& phi = features.matrix();
    GapOracle oracle(mdp);
    Vector mu_b;
    if (nu_choice == NuChoice::Stationary) mu_b = stationary_info(mdp, behavior).mu_b;

    NacRun run;
    run.lambda_weight = std::numeric_limits<double>::infinity();
    Vector theta = config.theta0;
    for (int t = 0; t < config.T; ++t) {
        run.thetas.push_back(theta);
        Matrix target = softmax_eval(features, theta, S, A);
        run.gaps.push_back(oracle.gap(mdp, target));

        Vector nu = nu_choice == NuChoice::Stationary
                        ? mu_b
                        : discounted_visitation(mdp, target, oracle.mu);
        Vector weight(S * A);
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a)
                weight(sa_index(s, a, A)) = nu(s) * target(s, a);
        run.lambda_weight = std::min(run.lambda_weight, weight.minCoeff());

        // Solve the weighted least-squares problem through sqrt(W)*phi rather
        // than the normal equations: the weights are strictly positive (softmax)
        // but their dynamic range squares in the Gram matrix, which would fail a
        // conditioning check long before the problem itself degenerates.
        Vector wsqrt = weight.cwiseSqrt();
        Matrix design = wsqrt.asDiagonal() * phi;
        Eigen::JacobiSVD<Matrix> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
        if (svd.singularValues().maxCoeff() <= 0.0)
            throw DegenerateSystem(
                "run_qnpg: weighted design matrix vanished at iterate " +
                std::to_string(t) + "; least-squares minimizer is not unique");
        svd.setThreshold(std::numeric_limits<double>::denorm_min());
        Vector q = exact_q(mdp, target);
        Vector w = svd.solve(Vector(wsqrt.asDiagonal() * q));

        run.critic_ws.push_back(w);
        run.xi_trace.push_back((q - phi * w).lpNorm<Eigen::Infinity>());
        Vector resid = q - phi * w;
        run.eps_bias.push_back(resid.dot(weight.asDiagonal() * resid));
        theta = natural_update(theta, w, beta);
    }
    run.thetas.push_back(theta);
    run.gaps.push_back(oracle.gap(mdp, softmax_eval(features, theta, S, A)));
    return run;
}

BoundReport theorem2_bound(const ActorConfig& config, const Mdp& mdp,
                           const FeatureMap& features, const BehaviorPolicy& behavior,
                           double xi, double c3_visited) {
    config.validate(features.dim(), mdp.num_actions());
    if (config.critic.schedule.kind != StepSchedule::Kind::Constant)
        throw BoundInapplicable("theorem2_bound: requires a constant critic stepsize");

    BoundReport rep;
    rep.T = config.T;
    rep.K = config.critic.num_iters;
    rep.alpha = config.critic.schedule.alpha;
    rep.gamma = mdp.discount();
    rep.gamma_c = config.critic.gamma_c;
    rep.n = config.critic.n;
    rep.zeta_max = behavior.zeta_max();
    rep.t_alpha = mixing_time(mdp, behavior, rep.alpha);
    rep.xi = xi;
    rep.c3_visited = c3_visited;

    StationaryInfo info = stationary_info(mdp, behavior);
    const Matrix& phi = features.matrix();
    Eigen::SelfAdjointEigenSolver<Matrix> es(
        Matrix(phi.transpose() * info.kappa_b.asDiagonal() * phi));
    rep.lambda_min = es.eigenvalues().minCoeff();

    double f = f_factor(rep.gamma * rep.zeta_max, rep.n);
    double window = static_cast<double>(rep.t_alpha + rep.n + 1);
    double gate = (1.0 - rep.gamma_c) / (456.0 * f * f);
    if (rep.alpha * window > gate) {
        std::ostringstream os;
        os << "theorem2_bound: stepsize condition fails: alpha*(t_alpha+n+1) = "
           << rep.alpha * window << " > " << gate;
        throw BoundInapplicable(os.str());
    }
    if (rep.K < rep.t_alpha + rep.n + 1)
        throw BoundInapplicable("theorem2_bound: requires K >= t_alpha + n + 1");

    rep.c3_bound = 1.0 + w_pi_norm_bound(rep.gamma, rep.gamma_c, rep.lambda_min);
    double one_minus_g2 = std::pow(1.0 - rep.gamma, 2);
    double ell = (1.0 - rep.gamma_c) * rep.lambda_min;
    rep.a1 = 2.0 / (one_minus_g2 * rep.T);
    rep.a2 = 4.0 * xi / one_minus_g2;
    rep.a3 = 4.0 * rep.c3_bound *
             std::pow(1.0 - ell * rep.alpha,
                      static_cast<double>(rep.K - (rep.t_alpha + rep.n + 1)) / 2.0) /
             one_minus_g2;
    rep.a4 = 44.0 * rep.c3_bound * f * std::sqrt(rep.alpha * window) /
             (one_minus_g2 * std::sqrt(1.0 - rep.gamma_c) * std::sqrt(rep.lambda_min));
    return rep;
}

double xi_proxy(const NacRun& run) {
    if (run.xi_trace.empty()) throw InputError("xi_proxy: empty trace");
    return *std::max_element(run.xi_trace.begin(), run.xi_trace.end());
}

} // namespace naclab

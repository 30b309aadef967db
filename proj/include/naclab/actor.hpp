#pragma once

#include <cstdint>
#include <vector>

#include "naclab/critic.hpp"
#include "naclab/mdp.hpp"
#include "naclab/sampler.hpp"

namespace naclab {

enum class EvalRule { FinalIterate, UniformSample, AllIterates };

/// Which distribution weights the QNPG least-squares fit.
enum class NuChoice { DiscountedVisitation, Stationary };

/// Configuration of the outer policy-update loop.
struct ActorConfig {
    int T = 1;
    double beta = 0.0; // <= 0 means "use the default log |A|"
    Vector theta0;
    CriticConfig critic;
    EvalRule eval_rule = EvalRule::AllIterates;

    /// Resolved stepsize: beta when positive, log|A| otherwise. When
    /// eval_rule is UniformSample (the bound-evaluation rule) the stepsize
    /// is forced to log|A|.
    double effective_beta(int num_actions) const;
    void validate(int feature_dim, int num_actions) const;
};

/// One divergence of the inner critic, attached to its outer iteration.
struct CriticEvent {
    int t = -1;
    std::int64_t step = -1;
};

/// Trace of one outer run. thetas has T+1 entries, critic_ws and xi_trace
/// have T, gaps has T+1 (gap of every visited policy including the last).
struct NacRun {
    std::vector<Vector> thetas;
    std::vector<Vector> critic_ws;
    std::vector<double> gaps;
    std::vector<double> xi_trace;
    std::vector<double> eps_bias;     // QNPG only: weighted mean-square fit error
    std::vector<CriticEvent> divergences;
    int t_hat = -1;                   // drawn output index under UniformSample
    double lambda_weight = 0.0;       // QNPG only: min over visited nu^pi(s) pi(a|s)
};

/// The four terms of the outer-loop optimality-gap bound, plus every input
/// they were evaluated from. c3_bound uses the closed-form norm bound on
/// w_pi; c3_visited is the max over the run's exact fixed points and is
/// reported for comparison only.
struct BoundReport {
    double a1 = 0.0, a2 = 0.0, a3 = 0.0, a4 = 0.0;
    double c3_bound = 0.0;
    double c3_visited = 0.0;
    double xi = 0.0; // proxy: max over visited iterates (lower bounds the sup over all theta)
    int T = 0;
    std::int64_t K = 0;
    double alpha = 0.0;
    double lambda_min = 0.0;
    double gamma = 0.0;
    double gamma_c = 0.0;
    double zeta_max = 0.0;
    int t_alpha = 0;
    int n = 0;

    double total() const { return a1 + a2 + a3 + a4; }
};

/// theta + beta * w.
Vector natural_update(const Vector& theta, const Vector& w, double beta);

/// pi'(a|s) = pi(a|s) exp(beta w^T phi(s,a)) / normalizer; equals the
/// softmax table of theta + beta*w when pi is the softmax table of theta.
Matrix multiplicative_update(const Matrix& policy, const FeatureMap& features,
                             const Vector& w, double beta);

/// Outer loop with the sampled inner critic: one behavior trajectory is
/// split into T disjoint segments of K+n pairs; each outer iteration runs
/// the critic from w0 = 0 on its segment and applies the natural update.
/// Gaps and xi are evaluated exactly from the model each iteration. Critic
/// divergence is recorded in `divergences` and skips that theta update.
NacRun run_nac(const Mdp& mdp, const FeatureMap& features,
               const BehaviorPolicy& behavior, const ActorConfig& config,
               std::uint64_t seed);

/// Deterministic outer loop with the exact projected fixed point in place
/// of the sampled critic; re-certifies the contraction every iteration and
/// throws AssumptionViolation naming the iterate on failure.
NacRun run_exact_npg(const Mdp& mdp, const FeatureMap& features,
                     const BehaviorPolicy& behavior, const ActorConfig& config);

/// Deterministic outer loop where w fits Q^pi by weighted least squares
/// under omega(s,a) = nu^pi(s) pi(a|s); nu is the discounted visitation
/// from the uniform start or the behavior stationary distribution. A
/// fully vanished weighted design matrix throws DegenerateSystem.
NacRun run_qnpg(const Mdp& mdp, const FeatureMap& features,
                const BehaviorPolicy& behavior, const ActorConfig& config,
                NuChoice nu_choice);

/// Evaluates the four-term optimality-gap bound for a sampled run's
/// configuration. xi and c3_visited come from the run; A3/A4 use the
/// closed-form c3_bound. Throws BoundInapplicable on gate violations.
BoundReport theorem2_bound(const ActorConfig& config, const Mdp& mdp,
                           const FeatureMap& features, const BehaviorPolicy& behavior,
                           double xi, double c3_visited);

/// Max of the run's xi_trace. Lower-bounds the sup over all parameters.
double xi_proxy(const NacRun& run);

} // namespace naclab

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "naclab/mdp.hpp"
#include "naclab/sampler.hpp"

namespace naclab {

/// Stepsize schedule: either constant alpha, or alpha / (k + h)^eta.
struct StepSchedule {
    enum class Kind { Constant, Diminishing };
    Kind kind = Kind::Constant;
    double alpha = 0.0;
    double eta = 1.0; // diminishing only, in (0, 1]
    double h = 1.0;   // diminishing only, > 0

    double at(std::int64_t k) const;
    void validate() const;

    static StepSchedule constant(double alpha);
    static StepSchedule diminishing(double alpha, double eta, double h);
};

/// Configuration of one critic run.
struct CriticConfig {
    int n = 1;                 // multi-step horizon
    StepSchedule schedule;
    std::int64_t num_iters = 1; // K
    Vector w0;
    double gamma_c = 0.5;
    double divergence_threshold = 1e8; // inf-norm at which a run is declared divergent
    std::int64_t thin = 0;             // iterate recording stride; 0 = max(1, K/1000)
    bool theorem1_mode = false; // if set, run_critic callers should gate the stepsize

    void validate(int feature_dim) const;
};

/// Thinned iterate trace of a critic run. `diverged` is set instead of
/// throwing when an iterate leaves the finite range.
struct CriticRun {
    std::vector<std::int64_t> ks; // step indices of recorded iterates
    std::vector<Vector> iterates;
    std::vector<double> mse;      // ||w_k - w_pi||^2 when an oracle was attached
    Vector final;
    bool diverged = false;
    std::int64_t divergence_step = -1;
};

/// Exact solution of the n-step projected Bellman equation plus the
/// diagnostics needed by the finite-sample bounds.
struct ProjectedFixedPoint {
    Vector w_pi;
    double residual = 0.0;            // ||Phi^T K (T^n(Phi w) - Phi w)||_inf
    double lambda_min = 0.0;          // smallest eigenvalue of Phi^T K Phi
    double contraction_estimate = 0.0; // kappa_b-weighted norm of the linear part
};

struct Theorem1Report {
    double e1 = 0.0; // convergence-bias term
    double e2 = 0.0; // variance term
    double c1 = 0.0;
    double c2 = 0.0;
    int t_alpha = 0;
    double f_value = 0.0; // f(gamma * zeta_pi)
};

struct Theorem3Report {
    double bias = 0.0;
    double variance = 0.0;
    double ell = 0.0;      // (1 - gamma_c) lambda_min
    double l1 = 0.0;       // (1 + log(C/sigma)) / log(1/sigma)
    std::int64_t k_hat = 0;
};

/// f(x) = sum_{i=0}^{n} x^i: n+1 at x = 1, else (1 - x^{n+1}) / (1 - x).
double f_factor(double x, int n);

/// Smallest integer n >= 1 with n >= (2 log gamma_c + log kappa_min) / (2 log gamma);
/// guarantees gamma^n <= gamma_c * sqrt(kappa_min).
int min_horizon(double gamma, double gamma_c, double kappa_min);

/// rho(s,a) = pi(a|s) / pi_b(a|s).
double importance_ratio(const Matrix& target, const BehaviorPolicy& behavior, int s, int a);

/// One-sample update direction F(w, x) for the window x = (S_k, A_k, ...,
/// S_{k+n}, A_{k+n}): phi(S_k,A_k) * sum_{i=0}^{n-1} gamma^i
/// prod_{j=1}^{i} rho(x_j) * delta_i, where delta_i is the importance-
/// corrected temporal difference at offset i. Empty products are 1.
Vector td_step(const Vector& w, std::span<const Step> win, const Mdp& mdp,
               const FeatureMap& features, const Matrix& target,
               const BehaviorPolicy& behavior, int n);

/// Runs n-step off-policy TD over a trajectory segment. Deterministic given
/// the segment. Iterates with non-finite entries or inf-norm > 1e8 stop the
/// run with a divergence report rather than throwing.
CriticRun run_critic(const Mdp& mdp, const FeatureMap& features,
                     std::span<const Step> segment, const CriticConfig& config,
                     const Matrix& target, const BehaviorPolicy& behavior,
                     const Vector* oracle_w_pi = nullptr);

/// Expected update direction Fbar(w) = Phi^T K (T_pi^n(Phi w) - Phi w).
Vector expected_update(const Vector& w, const Mdp& mdp, const FeatureMap& features,
                       const Matrix& target, const BehaviorPolicy& behavior, int n);

/// Direct d x d solve of Phi^T K (I - (gamma P_pi)^n) Phi w = Phi^T K
/// sum_{i<n} (gamma P_pi)^i R, plus contraction certification.
ProjectedFixedPoint solve_projected_bellman(const Mdp& mdp, const FeatureMap& features,
                                            const Matrix& target,
                                            const BehaviorPolicy& behavior, int n);

/// Exact kappa_b-weighted induced norm of the linear part of the projected
/// n-step Bellman operator, Phi (Phi^T K Phi)^{-1} Phi^T K (gamma P_pi)^n.
double certify_contraction(const Mdp& mdp, const FeatureMap& features,
                           const Matrix& target, const BehaviorPolicy& behavior, int n);

/// Upper bound on ||w_pi||_2 valid whenever the certified contraction
/// is at most gamma_c: 2 / ((1-gamma) sqrt(1-gamma_c) sqrt(lambda_min)).
double w_pi_norm_bound(double gamma, double gamma_c, double lambda_min);

/// Constant-stepsize mean-square bound at iteration k. Throws
/// BoundInapplicable if the stepsize gate alpha (t_alpha+n+1) <=
/// (1-gamma_c) / (456 f(gamma zeta_pi)^2) fails or k < t_alpha + n + 1.
Theorem1Report theorem1_bound(const CriticConfig& config, const Mdp& mdp,
                              const FeatureMap& features, const Matrix& target,
                              const BehaviorPolicy& behavior, std::int64_t k);

/// Diminishing-stepsize mean-square bound at iteration k (three cases for
/// eta = 1 by the size of ell*alpha, one case for eta in (0,1)).
Theorem3Report theorem3_bound(const CriticConfig& config, const Mdp& mdp,
                              const FeatureMap& features, const Matrix& target,
                              const BehaviorPolicy& behavior, std::int64_t k);

} // namespace naclab

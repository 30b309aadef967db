#pragma once

#include <Eigen/Dense>
#include <vector>

#include "naclab/errors.hpp"

namespace naclab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Row indexing convention used by every |S||A|-dimensional object in this
/// codebase: row(s, a) = s * num_actions + a. Action-major within a state.
inline int sa_index(int s, int a, int num_actions) { return s * num_actions + a; }

/// Finite MDP: per-action row-stochastic transition matrices, a reward
/// table with |R(s,a)| <= 1, and discount in (0,1). Immutable after
/// construction; construction validates all invariants.
class Mdp {
public:
    Mdp(std::vector<Matrix> transitions, Matrix rewards, double discount);

    int num_states() const { return num_states_; }
    int num_actions() const { return num_actions_; }
    int num_pairs() const { return num_states_ * num_actions_; }
    double discount() const { return discount_; }
    const Matrix& transition(int a) const { return transitions_[a]; }
    const std::vector<Matrix>& transitions() const { return transitions_; }
    const Matrix& rewards() const { return rewards_; }

    int sa(int s, int a) const { return sa_index(s, a, num_actions_); }

    /// Rewards flattened to an |S||A|-vector in sa-index order.
    Vector reward_vector() const;

private:
    int num_states_;
    int num_actions_;
    std::vector<Matrix> transitions_;
    Matrix rewards_;
    double discount_;
};

/// Feature matrix Phi, one row per (s,a) pair in sa-index order.
/// Columns are linearly independent; every row has L1 norm <= 1.
class FeatureMap {
public:
    explicit FeatureMap(Matrix phi);

    int dim() const { return static_cast<int>(phi_.cols()); }
    int num_rows() const { return static_cast<int>(phi_.rows()); }
    const Matrix& matrix() const { return phi_; }
    Eigen::RowVectorXd row(int sa) const { return phi_.row(sa); }

    /// Tabular features: Phi = I scaled so row L1 norms are 1.
    static FeatureMap identity(int num_pairs);

private:
    Matrix phi_;
};

/// Explicit stochastic policy table pi_b(a|s) with full support
/// (every entry strictly positive; rows sum to 1).
class BehaviorPolicy {
public:
    explicit BehaviorPolicy(Matrix table);

    const Matrix& table() const { return table_; }
    double prob(int s, int a) const { return table_(s, a); }
    int num_states() const { return static_cast<int>(table_.rows()); }
    int num_actions() const { return static_cast<int>(table_.cols()); }

    /// max over (s,a) of 1 / pi_b(a|s); uniform upper bound on the
    /// target/behavior mismatch over all target policies.
    double zeta_max() const;

private:
    Matrix table_;
};

/// Softmax policy parameter vector; the induced table is produced by
/// softmax_eval against a feature map.
struct SoftmaxPolicy {
    Vector theta;
};

/// Stationary quantities of the behavior chain.
struct StationaryInfo {
    Vector mu_b;      // state stationary distribution
    Vector kappa_b;   // state-action stationary distribution, sa-index order
    double kappa_min; // min entry of kappa_b
};

struct OptimalSolution {
    Vector v_star;            // optimal state values
    std::vector<int> greedy;  // argmax action per state, lowest index on ties
};

/// P_pi over state-action pairs: P[(s,a),(s',a')] = P_a(s,s') * pi(a'|s').
Matrix policy_transition_matrix(const Mdp& mdp, const Matrix& policy);

/// State-marginal transition matrix: P(s,s') = sum_a pi(a|s) P_a(s,s').
Matrix state_transition_matrix(const Mdp& mdp, const Matrix& policy);

/// Exact Q^pi as the unique solution of (I - gamma P_pi) Q = R.
Vector exact_q(const Mdp& mdp, const Matrix& policy);

/// V(s) = sum_a pi(a|s) Q(s,a) from an sa-indexed Q vector.
Vector state_values(const Mdp& mdp, const Matrix& policy, const Vector& q);

/// Scalar V^pi(mu) = sum_s mu(s) V^pi(s).
double policy_value(const Mdp& mdp, const Matrix& policy, const Vector& start);

/// Value iteration to tolerance `tol` on the Bellman optimality residual,
/// greedy policy breaks ties toward the lowest action index.
OptimalSolution optimal_values(const Mdp& mdp, double tol);

/// Stationary distribution of the behavior chain via a direct linear solve
/// with a normalization row. Rejects chains whose second-largest eigenvalue
/// modulus is >= 1 - 1e-10.
StationaryInfo stationary_info(const Mdp& mdp, const BehaviorPolicy& behavior);

/// Discounted visitation d^pi_mu = (1-gamma) mu^T (I - gamma P_state)^{-1}.
Vector discounted_visitation(const Mdp& mdp, const Matrix& policy, const Vector& start);

/// Softmax table from features and parameters, max-subtracted per state.
Matrix softmax_eval(const FeatureMap& features, const Vector& theta, int num_states,
                    int num_actions);

/// zeta_pi = max over (s,a) of pi(a|s) / pi_b(a|s).
double max_ratio(const Matrix& target, const BehaviorPolicy& behavior);

/// Deterministic policy table concentrated on `actions` (one per state).
Matrix deterministic_table(int num_states, int num_actions, const std::vector<int>& actions);

/// Uniform policy table.
Matrix uniform_table(int num_states, int num_actions);

} // namespace naclab

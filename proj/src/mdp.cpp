#include "naclab/mdp.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

namespace naclab {

namespace {

void check_policy_table(const Matrix& policy, int num_states, int num_actions,
                        const char* what) {
    if (policy.rows() != num_states || policy.cols() != num_actions) {
        std::ostringstream os;
        os << what << ": policy table is " << policy.rows() << "x" << policy.cols()
           << ", expected " << num_states << "x" << num_actions;
        throw ConfigError(os.str());
    }
    for (int s = 0; s < num_states; ++s) {
        if (std::abs(policy.row(s).sum() - 1.0) > 1e-12) {
            std::ostringstream os;
            os << what << ": policy row " << s << " sums to " << policy.row(s).sum();
            throw ConfigError(os.str());
        }
        for (int a = 0; a < num_actions; ++a) {
            if (policy(s, a) < 0.0) {
                std::ostringstream os;
                os << what << ": negative probability at (" << s << "," << a << ")";
                throw ConfigError(os.str());
            }
        }
    }
}

} // namespace

Mdp::Mdp(std::vector<Matrix> transitions, Matrix rewards, double discount)
    : transitions_(std::move(transitions)), rewards_(std::move(rewards)), discount_(discount) {
    if (transitions_.empty()) throw ConfigError("Mdp: no actions");
    num_actions_ = static_cast<int>(transitions_.size());
    num_states_ = static_cast<int>(transitions_[0].rows());
    if (num_states_ <= 0) throw ConfigError("Mdp: no states");
    if (!(discount_ > 0.0 && discount_ < 1.0))
        throw ConfigError("Mdp: discount must lie in (0,1)");
    if (rewards_.rows() != num_states_ || rewards_.cols() != num_actions_)
        throw ConfigError("Mdp: reward table shape mismatch");
    for (int a = 0; a < num_actions_; ++a) {
        const Matrix& p = transitions_[a];
        if (p.rows() != num_states_ || p.cols() != num_states_)
            throw ConfigError("Mdp: transition matrix shape mismatch for action " +
                              std::to_string(a));
        for (int s = 0; s < num_states_; ++s) {
            if (std::abs(p.row(s).sum() - 1.0) > 1e-12) {
                std::ostringstream os;
                os << "Mdp: row " << s << " of P_" << a << " sums to " << p.row(s).sum();
                throw ConfigError(os.str());
            }
            for (int t = 0; t < num_states_; ++t)
                if (p(s, t) < 0.0)
                    throw ConfigError("Mdp: negative transition probability");
        }
    }
    for (int s = 0; s < num_states_; ++s)
        for (int a = 0; a < num_actions_; ++a)
            if (std::abs(rewards_(s, a)) > 1.0)
                throw ConfigError("Mdp: |R(s,a)| must be <= 1, got " +
                                  std::to_string(rewards_(s, a)));
}

Vector Mdp::reward_vector() const {
    Vector r(num_pairs());
    for (int s = 0; s < num_states_; ++s)
        for (int a = 0; a < num_actions_; ++a)
            r(sa(s, a)) = rewards_(s, a);
    return r;
}

FeatureMap::FeatureMap(Matrix phi) : phi_(std::move(phi)) {
    if (phi_.rows() == 0 || phi_.cols() == 0)
        throw ConfigError("FeatureMap: empty matrix");
    if (phi_.cols() > phi_.rows())
        throw ConfigError("FeatureMap: more features than state-action pairs");
    for (int r = 0; r < phi_.rows(); ++r) {
        if (phi_.row(r).lpNorm<1>() > 1.0 + 1e-12)
            throw ConfigError("FeatureMap: row " + std::to_string(r) +
                              " has L1 norm > 1");
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(phi_);
    if (qr.rank() < phi_.cols())
        throw ConfigError("FeatureMap: columns are not linearly independent");
}

FeatureMap FeatureMap::identity(int num_pairs) {
    return FeatureMap(Matrix::Identity(num_pairs, num_pairs));
}

BehaviorPolicy::BehaviorPolicy(Matrix table) : table_(std::move(table)) {
    check_policy_table(table_, static_cast<int>(table_.rows()),
                       static_cast<int>(table_.cols()), "BehaviorPolicy");
    for (int s = 0; s < table_.rows(); ++s)
        for (int a = 0; a < table_.cols(); ++a)
            if (table_(s, a) <= 0.0)
                throw AssumptionViolation(
                    "BehaviorPolicy: Assumption 1 requires pi_b(a|s) > 0 for all "
                    "(s,a); violated at (" + std::to_string(s) + "," +
                    std::to_string(a) + ")");
}

double BehaviorPolicy::zeta_max() const {
    return 1.0 / table_.minCoeff();
}

Matrix policy_transition_matrix(const Mdp& mdp, const Matrix& policy) {
    const int S = mdp.num_states(), A = mdp.num_actions();
    check_policy_table(policy, S, A, "policy_transition_matrix");
    Matrix p(S * A, S * A);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a)
            for (int s2 = 0; s2 < S; ++s2)
                for (int a2 = 0; a2 < A; ++a2)
                    p(mdp.sa(s, a), mdp.sa(s2, a2)) =
                        mdp.transition(a)(s, s2) * policy(s2, a2);
    return p;
}

Matrix state_transition_matrix(const Mdp& mdp, const Matrix& policy) {
    const int S = mdp.num_states(), A = mdp.num_actions();
    check_policy_table(policy, S, A, "state_transition_matrix");
    Matrix p = Matrix::Zero(S, S);
    for (int a = 0; a < A; ++a)
        for (int s = 0; s < S; ++s)
            p.row(s) += policy(s, a) * mdp.transition(a).row(s);
    return p;
}

Vector exact_q(const Mdp& mdp, const Matrix& policy) {
    const int N = mdp.num_pairs();
    Matrix sys = Matrix::Identity(N, N) - mdp.discount() * policy_transition_matrix(mdp, policy);
    return sys.partialPivLu().solve(mdp.reward_vector());
}

Vector state_values(const Mdp& mdp, const Matrix& policy, const Vector& q) {
    Vector v = Vector::Zero(mdp.num_states());
    for (int s = 0; s < mdp.num_states(); ++s)
        for (int a = 0; a < mdp.num_actions(); ++a)
            v(s) += policy(s, a) * q(mdp.sa(s, a));
    return v;
}

double policy_value(const Mdp& mdp, const Matrix& policy, const Vector& start) {
    return start.dot(state_values(mdp, policy, exact_q(mdp, policy)));
}

OptimalSolution optimal_values(const Mdp& mdp, double tol) {
    if (!(tol > 0.0)) throw ConfigError("optimal_values: tol must be > 0");
    const int S = mdp.num_states(), A = mdp.num_actions();
    const double gamma = mdp.discount();
    Vector v = Vector::Zero(S), next(S);
    // Stop when the value update contracts enough that the Bellman residual
    // of `next` is below tol.
    const double stop = tol * (1.0 - gamma) / std::max(gamma, 1e-12);
    for (;;) {
        for (int s = 0; s < S; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            for (int a = 0; a < A; ++a) {
                double qa = mdp.rewards()(s, a) + gamma * mdp.transition(a).row(s).dot(v);
                if (qa > best) best = qa;
            }
            next(s) = best;
        }
        double delta = (next - v).lpNorm<Eigen::Infinity>();
        v = next;
        if (delta <= stop) break;
    }
    OptimalSolution sol;
    sol.v_star = v;
    sol.greedy.resize(S);
    for (int s = 0; s < S; ++s) {
        int best_a = 0;
        double best = -std::numeric_limits<double>::infinity();
        for (int a = 0; a < A; ++a) {
            double qa = mdp.rewards()(s, a) + gamma * mdp.transition(a).row(s).dot(v);
            if (qa > best + 1e-15) { // strict improvement only: lowest index wins ties
                best = qa;
                best_a = a;
            }
        }
        sol.greedy[s] = best_a;
    }
    return sol;
}

StationaryInfo stationary_info(const Mdp& mdp, const BehaviorPolicy& behavior) {
    const int S = mdp.num_states(), A = mdp.num_actions();
    if (behavior.num_states() != S || behavior.num_actions() != A)
        throw ConfigError("stationary_info: behavior policy shape mismatch");
    Matrix p = state_transition_matrix(mdp, behavior.table());

    // Ergodicity gate: the chain must have a simple eigenvalue 1 and all
    // other eigenvalues strictly inside the unit circle.
    Eigen::EigenSolver<Matrix> es(p);
    std::vector<double> mods(S);
    for (int i = 0; i < S; ++i) mods[i] = std::abs(es.eigenvalues()(i));
    std::sort(mods.begin(), mods.end(), std::greater<double>());
    if (S > 1 && mods[1] >= 1.0 - 1e-10)
        throw AssumptionViolation(
            "stationary_info: behavior chain is not irreducible and aperiodic "
            "(Assumption 1); second-largest eigenvalue modulus = " +
            std::to_string(mods[1]));

    // mu^T P = mu^T with sum(mu) = 1, solved as an overdetermined system.
    Matrix sys(S + 1, S);
    sys.topRows(S) = p.transpose() - Matrix::Identity(S, S);
    sys.row(S) = Eigen::RowVectorXd::Ones(S);
    Vector rhs = Vector::Zero(S + 1);
    rhs(S) = 1.0;
    Vector mu = sys.colPivHouseholderQr().solve(rhs);

    StationaryInfo info;
    info.mu_b = mu;
    info.kappa_b.resize(S * A);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a)
            info.kappa_b(sa_index(s, a, A)) = mu(s) * behavior.prob(s, a);
    info.kappa_min = info.kappa_b.minCoeff();
    if (info.kappa_min <= 0.0)
        throw AssumptionViolation(
            "stationary_info: stationary state-action distribution is not "
            "strictly positive (Assumption 1)");
    return info;
}

Vector discounted_visitation(const Mdp& mdp, const Matrix& policy, const Vector& start) {
    const int S = mdp.num_states();
    if (start.size() != S) throw ConfigError("discounted_visitation: start size mismatch");
    if (std::abs(start.sum() - 1.0) > 1e-10 || start.minCoeff() < -1e-15)
        throw ConfigError("discounted_visitation: start is not a distribution");
    Matrix p = state_transition_matrix(mdp, policy);
    Matrix sys = Matrix::Identity(S, S) - mdp.discount() * p.transpose();
    Vector d = sys.partialPivLu().solve(Vector((1.0 - mdp.discount()) * start));
    return d;
}

Matrix softmax_eval(const FeatureMap& features, const Vector& theta, int num_states,
                    int num_actions) {
    if (features.num_rows() != num_states * num_actions)
        throw ConfigError("softmax_eval: feature rows do not match |S||A|");
    if (theta.size() != features.dim())
        throw ConfigError("softmax_eval: theta dimension mismatch");
    Vector logits = features.matrix() * theta;
    Matrix table(num_states, num_actions);
    for (int s = 0; s < num_states; ++s) {
        double m = -std::numeric_limits<double>::infinity();
        for (int a = 0; a < num_actions; ++a)
            m = std::max(m, logits(sa_index(s, a, num_actions)));
        double z = 0.0;
        for (int a = 0; a < num_actions; ++a) {
            double e = std::exp(logits(sa_index(s, a, num_actions)) - m);
            table(s, a) = e;
            z += e;
        }
        table.row(s) /= z;
    }
    return table;
}

double max_ratio(const Matrix& target, const BehaviorPolicy& behavior) {
    if (target.rows() != behavior.num_states() || target.cols() != behavior.num_actions())
        throw ConfigError("max_ratio: table shape mismatch");
    double zeta = 0.0;
    for (int s = 0; s < target.rows(); ++s)
        for (int a = 0; a < target.cols(); ++a)
            zeta = std::max(zeta, target(s, a) / behavior.prob(s, a));
    return zeta;
}

Matrix deterministic_table(int num_states, int num_actions, const std::vector<int>& actions) {
    Matrix t = Matrix::Zero(num_states, num_actions);
    for (int s = 0; s < num_states; ++s) t(s, actions[s]) = 1.0;
    return t;
}

Matrix uniform_table(int num_states, int num_actions) {
    return Matrix::Constant(num_states, num_actions, 1.0 / num_actions);
}

} // namespace naclab

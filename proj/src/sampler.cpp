#include "naclab/sampler.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace naclab {

std::span<const Step> Trajectory::segment(int offset, int count) const {
    if (offset < 0 || count < 0 || offset + count > length())
        throw InputError("Trajectory::segment out of range");
    return {steps.data() + offset, static_cast<std::size_t>(count)};
}

Trajectory generate(const Mdp& mdp, const BehaviorPolicy& behavior, int start,
                    int length, std::uint64_t seed) {
    if (length < 1) throw InputError("generate: length must be >= 1");
    if (start < 0 || start >= mdp.num_states())
        throw InputError("generate: invalid start state");
    if (behavior.num_states() != mdp.num_states() ||
        behavior.num_actions() != mdp.num_actions())
        throw ConfigError("generate: behavior policy shape mismatch");

    Trajectory traj;
    traj.seed = seed;
    traj.start_state = start;
    traj.steps.reserve(length);
    Rng rng(seed);
    int s = start;
    for (int k = 0; k < length; ++k) {
        int a = rng.sample_discrete(behavior.table().row(s), mdp.num_actions());
        traj.steps.push_back({s, a});
        s = rng.sample_discrete(mdp.transition(a).row(s), mdp.num_states());
    }
    return traj;
}

namespace {

double max_tv_to_stationary(const Matrix& pk, const Vector& mu) {
    double worst = 0.0;
    for (int s = 0; s < pk.rows(); ++s) {
        double tv = 0.0;
        for (int t = 0; t < pk.cols(); ++t) tv += std::abs(pk(s, t) - mu(t));
        worst = std::max(worst, 0.5 * tv);
    }
    return worst;
}

} // namespace

int mixing_time(const Mdp& mdp, const BehaviorPolicy& behavior, double alpha, int cap) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ConfigError("mixing_time: alpha must lie in (0,1)");
    StationaryInfo info = stationary_info(mdp, behavior);
    Matrix p = state_transition_matrix(mdp, behavior.table());
    Matrix pk = Matrix::Identity(mdp.num_states(), mdp.num_states());
    for (int k = 0; k <= cap; ++k) {
        if (max_tv_to_stationary(pk, info.mu_b) <= alpha) return k;
        pk = pk * p;
    }
    throw AssumptionViolation("mixing_time: chain did not mix to alpha=" +
                              std::to_string(alpha) + " within " +
                              std::to_string(cap) + " steps");
}

MixingInfo mixing_info(const Mdp& mdp, const BehaviorPolicy& behavior,
                       const std::vector<double>& alphas, int fit_horizon) {
    StationaryInfo info = stationary_info(mdp, behavior);
    Matrix p = state_transition_matrix(mdp, behavior.table());
    Matrix pk = Matrix::Identity(mdp.num_states(), mdp.num_states());
    std::vector<double> tv(fit_horizon + 1);
    for (int k = 0; k <= fit_horizon; ++k) {
        tv[k] = max_tv_to_stationary(pk, info.mu_b);
        pk = pk * p;
    }

    MixingInfo out;
    out.alphas = alphas;
    for (double alpha : alphas) out.t_alpha.push_back(mixing_time(mdp, behavior, alpha));

    // Least-squares fit of log tv_k ~ log C + k log sigma over the decaying
    // range, then C bumped up so the envelope dominates every sample.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (int k = 1; k <= fit_horizon; ++k) {
        if (tv[k] < 1e-14) break;
        double x = k, y = std::log(tv[k]);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++m;
    }
    double slope = m >= 2 ? (m * sxy - sx * sy) / (m * sxx - sx * sx) : std::log(0.5);
    slope = std::min(slope, -1e-12);
    out.geo_sigma = std::exp(slope);
    double log_c = -std::numeric_limits<double>::infinity();
    for (int k = 0; k <= fit_horizon; ++k) {
        if (tv[k] < 1e-300) continue;
        log_c = std::max(log_c, std::log(tv[k]) - k * slope);
    }
    out.geo_C = std::exp(log_c);
    return out;
}

std::span<const Step> window(const Trajectory& traj, int k, int n) {
    if (k < 0 || n < 0 || k + n >= traj.length())
        throw InputError("window: k + n out of trajectory range");
    return {traj.steps.data() + k, static_cast<std::size_t>(n + 1)};
}

void dump_trajectory(const Trajectory& traj, std::ostream& os) {
    os << "# seed " << traj.seed << " start " << traj.start_state << "\n";
    for (const Step& st : traj.steps) os << st.state << " " << st.action << "\n";
}

Trajectory restore_trajectory(std::istream& is) {
    Trajectory traj;
    std::string line;
    if (!std::getline(is, line))
        throw InputError("restore_trajectory: empty stream");
    {
        std::istringstream hs(line);
        std::string hash, kw1, kw2;
        hs >> hash >> kw1 >> traj.seed >> kw2 >> traj.start_state;
        if (hash != "#" || kw1 != "seed" || kw2 != "start")
            throw InputError("restore_trajectory: malformed header: " + line);
    }
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        Step st{};
        if (!(ls >> st.state >> st.action))
            throw InputError("restore_trajectory: malformed line: " + line);
        traj.steps.push_back(st);
    }
    return traj;
}

} // namespace naclab

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "naclab/mdp.hpp"
#include "naclab/rng.hpp"

namespace naclab {

/// A state-action pair along a behavior trajectory.
struct Step {
    int state;
    int action;
};

/// A single Markovian trajectory generated under the behavior policy,
/// together with the seed that reproduces it bit-for-bit.
struct Trajectory {
    std::vector<Step> steps;
    std::uint64_t seed = 0;
    int start_state = 0;

    int length() const { return static_cast<int>(steps.size()); }

    /// Consecutive disjoint segment [offset, offset+count).
    std::span<const Step> segment(int offset, int count) const;
};

/// Mixing diagnostics of the behavior state chain: exact mixing times per
/// queried level plus a fitted geometric envelope max_s TV(P^k(s,.), mu) <=
/// C sigma^k over the fit horizon.
struct MixingInfo {
    std::vector<double> alphas;
    std::vector<int> t_alpha;
    double geo_C = 0.0;
    double geo_sigma = 0.0;
};

/// Samples A_k ~ pi_b(.|S_k), S_{k+1} ~ P_{A_k}(S_k, .) for `length` steps.
Trajectory generate(const Mdp& mdp, const BehaviorPolicy& behavior, int start,
                    int length, std::uint64_t seed);

/// Exact mixing time t_alpha = min{k >= 0 : max_s TV(P^k(s,.), mu_b) <= alpha}
/// computed by matrix powering. Throws if k exceeds `cap`.
int mixing_time(const Mdp& mdp, const BehaviorPolicy& behavior, double alpha,
                int cap = 1000000);

/// Mixing times over an alpha grid plus the fitted geometric envelope.
MixingInfo mixing_info(const Mdp& mdp, const BehaviorPolicy& behavior,
                       const std::vector<double>& alphas, int fit_horizon = 200);

/// Window X_k = (S_k, A_k, ..., S_{k+n}, A_{k+n}): a view of n+1 pairs.
std::span<const Step> window(const Trajectory& traj, int k, int n);

/// Flat text dump: header line `# seed <seed> start <state>`, then one
/// `state action` pair per line.
void dump_trajectory(const Trajectory& traj, std::ostream& os);
Trajectory restore_trajectory(std::istream& is);

} // namespace naclab

#pragma once

#include "naclab/harness.hpp"

namespace naclab::testing {

struct RandomInstance {
    Mdp mdp;
    FeatureMap features;
    BehaviorPolicy behavior;
    Matrix target;
};

inline Matrix random_stochastic(Rng& rng, int rows, int cols, double floor_mass) {
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        double z = 0.0;
        for (int j = 0; j < cols; ++j) {
            m(i, j) = floor_mass + rng.next_double();
            z += m(i, j);
        }
        m.row(i) /= z;
    }
    return m;
}

/// Dense random instance: every transition entry bounded away from zero, so
/// the behavior chain mixes fast and kappa_min is healthy.
inline RandomInstance random_instance(Rng& rng, int S, int A, int d, double gamma) {
    std::vector<Matrix> trans;
    for (int a = 0; a < A; ++a) trans.push_back(random_stochastic(rng, S, S, 0.1));
    Matrix rewards(S, A);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) rewards(s, a) = 2.0 * rng.next_double() - 1.0;
    Mdp mdp(std::move(trans), rewards, gamma);

    Matrix phi;
    if (d == S * A) {
        phi = FeatureMap::identity(S * A).matrix();
    } else {
        phi = Matrix(S * A, d);
        for (int r = 0; r < S * A; ++r) {
            double l1 = 0.0;
            for (int c = 0; c < d; ++c) {
                phi(r, c) = 2.0 * rng.next_double() - 1.0;
                l1 += std::abs(phi(r, c));
            }
            phi.row(r) /= l1; // row L1 norm exactly 1
        }
    }
    return RandomInstance{std::move(mdp), FeatureMap(phi),
                          BehaviorPolicy(random_stochastic(rng, S, A, 0.2)),
                          random_stochastic(rng, S, A, 0.05)};
}

} // namespace naclab::testing

#include "naclab/gallery.hpp"

#include "naclab/critic.hpp"
#include "naclab/rng.hpp"

#include <cmath>

namespace naclab {

namespace {

CanonicalInstance make_chain4() {
    const int S = 4, A = 2;
    // two noisy ring shifts in opposite directions
    Matrix right = Matrix::Zero(S, S), left = Matrix::Zero(S, S);
    for (int s = 0; s < S; ++s) {
        right(s, (s + 1) % S) = 0.9;
        right(s, s) = 0.1;
        left(s, (s + S - 1) % S) = 0.85;
        left(s, s) = 0.15;
    }
    Matrix rewards(S, A);
    rewards << 0.2, -0.1,
               0.5,  0.0,
              -0.3,  0.4,
               0.1, -0.2;
    Matrix behavior(S, A);
    behavior << 0.6, 0.4,
                0.5, 0.5,
                0.45, 0.55,
                0.7, 0.3;
    return CanonicalInstance{
        "chain4",
        "4-state noisy two-ring, tabular features; the default tabular benchmark",
        Instance::with_defaults(Mdp({right, left}, rewards, 0.75), std::nullopt,
                                behavior),
        uniform_table(S, A), 0.8};
}

CanonicalInstance make_ring6() {
    const int S = 6, A = 2;
    Matrix right = Matrix::Zero(S, S), left = Matrix::Zero(S, S);
    for (int s = 0; s < S; ++s) {
        right(s, (s + 1) % S) = 0.8;
        right(s, s) = 0.2;
        left(s, (s + S - 1) % S) = 0.8;
        left(s, s) = 0.2;
    }
    Matrix rewards(S, A);
    rewards << 0.3, -0.2,
               0.6,  0.1,
              -0.4,  0.5,
               0.2, -0.6,
              -0.1,  0.3,
               0.4,  0.0;
    Matrix behavior(S, A);
    for (int s = 0; s < S; ++s) {
        behavior(s, 0) = s % 2 == 0 ? 0.55 : 0.4;
        behavior(s, 1) = 1.0 - behavior(s, 0);
    }
    // three-way state aggregation: feature j indicates s mod 3 == j
    Matrix phi = Matrix::Zero(S * A, 3);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) phi(sa_index(s, a, A), s % 3) = 1.0;
    return CanonicalInstance{
        "ring6", "6-state ring with three-way state aggregation (d = 3)",
        Instance::with_defaults(Mdp({right, left}, rewards, 0.8), phi, behavior),
        uniform_table(S, A), 0.8};
}

CanonicalInstance make_twostate() {
    const int S = 2, A = 2;
    Matrix a0(S, S), a1(S, S);
    a0 << 0.7, 0.3,
          0.7, 0.3;
    a1 << 0.4, 0.6,
          0.4, 0.6;
    Matrix rewards(S, A);
    rewards << 0.15, -0.1,
               0.05,  0.2;
    Matrix behavior(S, A);
    behavior << 0.6, 0.4,
                0.5, 0.5;
    Matrix phi = Matrix::Constant(S * A, 1, 0.5);
    return CanonicalInstance{
        "twostate",
        "2-state instance with a single constant feature (d = 1); "
        "large lambda_min, used for stepsize-schedule studies",
        Instance::with_defaults(Mdp({a0, a1}, rewards, 0.5), phi, behavior),
        uniform_table(S, A), 0.5};
}

} // namespace

CanonicalInstance build_deadly_triad_instance() {
    // Bounded deterministic search: sample mismatch levels until one-step
    // off-policy TD provably drifts outward (positive expected-update slope
    // and weighted-norm certificate > 1.05) while the n_min-step operator
    // contracts with a tame importance-ratio profile.
    const double gamma_c = 0.8;
    Rng rng(0x5eedfull);
    for (int trial = 0; trial < 2000; ++trial) {
        double gamma = 0.70 + 0.10 * rng.next_double();
        double qb = 0.15 + 0.10 * rng.next_double();   // behavior mass on a2
        double qt = 0.80 + 0.12 * rng.next_double();   // target mass on a2
        double r1 = 0.002 * (2.0 * rng.next_double() - 1.0);
        double r2 = 0.002 * (2.0 * rng.next_double() - 1.0);
        double r3 = 0.002 * (2.0 * rng.next_double() - 1.0);
        double r4 = 0.002 * (2.0 * rng.next_double() - 1.0);

        const int S = 2, A = 2;
        // action a1 moves to state 1, action a2 moves to state 2
        Matrix p0 = Matrix::Zero(S, S), p1 = Matrix::Zero(S, S);
        p0.col(0).setOnes();
        p1.col(1).setOnes();
        Matrix rewards(S, A);
        rewards << r1, r2,
                   r3, r4;
        Matrix behavior(S, A);
        behavior << 1.0 - qb, qb,
                    1.0 - qb, qb;
        Matrix target(S, A);
        target << 1.0 - qt, qt,
                  1.0 - qt, qt;
        // one feature: value 1 on the a1 pairs, 2 on the a2 pairs (scaled)
        Matrix phi(S * A, 1);
        phi << 0.5, 1.0, 0.5, 1.0;

        Instance inst = Instance::with_defaults(Mdp({p0, p1}, rewards, gamma), phi,
                                                behavior);
        double zeta = max_ratio(target, inst.behavior);
        if (zeta > 6.0) continue;
        double cert1 = certify_contraction(inst.mdp, inst.features, target,
                                           inst.behavior, 1);
        if (cert1 <= 1.05) continue;
        Vector one = Vector::Ones(1);
        double slope = (expected_update(one, inst.mdp, inst.features, target,
                                        inst.behavior, 1) -
                        expected_update(Vector::Zero(1), inst.mdp, inst.features,
                                        target, inst.behavior, 1))(0);
        if (slope < 0.004) continue;
        double kmin = stationary_info(inst.mdp, inst.behavior).kappa_min;
        int nmin = min_horizon(gamma, gamma_c, kmin);
        if (nmin > 8) continue;
        double certn = certify_contraction(inst.mdp, inst.features, target,
                                           inst.behavior, nmin);
        if (certn > gamma_c) continue;

        return CanonicalInstance{
            "deadly-triad",
            "frozen divergence demo: one-step off-policy TD drifts outward, "
            "the n_min-step projection contracts",
            std::move(inst), target, gamma_c};
    }
    throw ConfigError("build_deadly_triad_instance: search budget exhausted");
}

std::vector<std::string> gallery_names() {
    return {"chain4", "ring6", "twostate", "deadly-triad"};
}

CanonicalInstance gallery_get(const std::string& name) {
    if (name == "chain4") return make_chain4();
    if (name == "ring6") return make_ring6();
    if (name == "twostate") return make_twostate();
    if (name == "deadly-triad") return build_deadly_triad_instance();
    throw ConfigError("gallery: unknown instance `" + name + "`");
}

Certification certify_instance(const CanonicalInstance& ci) {
    Certification c;
    StationaryInfo info = stationary_info(ci.inst.mdp, ci.inst.behavior);
    c.kappa_min = info.kappa_min;
    c.gamma_c = ci.gamma_c;
    c.zeta = max_ratio(ci.target_policy, ci.inst.behavior);
    c.n_min = min_horizon(ci.inst.mdp.discount(), ci.gamma_c, info.kappa_min);
    const Matrix& phi = ci.inst.features.matrix();
    Eigen::SelfAdjointEigenSolver<Matrix> es(
        Matrix(phi.transpose() * info.kappa_b.asDiagonal() * phi));
    c.lambda_min = es.eigenvalues().minCoeff();
    c.contraction_n1 = certify_contraction(ci.inst.mdp, ci.inst.features,
                                           ci.target_policy, ci.inst.behavior, 1);
    c.contraction_nmin = certify_contraction(ci.inst.mdp, ci.inst.features,
                                             ci.target_policy, ci.inst.behavior, c.n_min);
    return c;
}

} // namespace naclab

#include <doctest.h>

#include "test_support.hpp"

using namespace naclab;
using naclab::testing::random_instance;
using naclab::testing::random_stochastic;

TEST_CASE("mdp construction validates its invariants") {
    Matrix p(2, 2);
    p << 0.5, 0.5, 0.3, 0.7;
    Matrix r(2, 1);
    r << 0.1, -0.2;
    CHECK_NOTHROW(Mdp({p}, r, 0.9));

    Matrix bad = p;
    bad(0, 0) = 0.6; // row no longer sums to 1
    CHECK_THROWS_AS(Mdp({bad}, r, 0.9), ConfigError);

    Matrix big_r = r;
    big_r(0, 0) = 1.5;
    CHECK_THROWS_AS(Mdp({p}, big_r, 0.9), ConfigError);
    CHECK_THROWS_AS(Mdp({p}, r, 1.0), ConfigError);
    CHECK_THROWS_AS(Mdp({p}, r, 0.0), ConfigError);
}

TEST_CASE("sa_index is action-major within a state") {
    CHECK(sa_index(0, 0, 3) == 0);
    CHECK(sa_index(0, 2, 3) == 2);
    CHECK(sa_index(2, 1, 3) == 7);
}

TEST_CASE("policy transition matrix matches the brute-force definition") {
    Rng rng(11);
    auto ri = random_instance(rng, 4, 3, 12, 0.9);
    Matrix pol = random_stochastic(rng, 4, 3, 0.1);
    Matrix p = policy_transition_matrix(ri.mdp, pol);
    REQUIRE(p.rows() == 12);
    for (int s = 0; s < 4; ++s)
        for (int a = 0; a < 3; ++a)
            for (int s2 = 0; s2 < 4; ++s2)
                for (int a2 = 0; a2 < 3; ++a2)
                    CHECK(p(ri.mdp.sa(s, a), ri.mdp.sa(s2, a2)) ==
                          doctest::Approx(ri.mdp.transition(a)(s, s2) * pol(s2, a2))
                              .epsilon(1e-14));
}

TEST_CASE("exact_q agrees with the truncated Neumann series") {
    Rng rng(7);
    auto ri = random_instance(rng, 5, 2, 10, 0.9);
    Matrix pol = random_stochastic(rng, 5, 2, 0.1);
    Vector q = exact_q(ri.mdp, pol);

    Matrix p = 0.9 * policy_transition_matrix(ri.mdp, pol);
    Vector r = ri.mdp.reward_vector();
    Vector series = r, term = r;
    for (int i = 0; i < 400; ++i) { // 0.9^400 << 1e-10
        term = p * term;
        series += term;
    }
    CHECK((q - series).lpNorm<Eigen::Infinity>() < 1e-10);

    Vector v = state_values(ri.mdp, pol, q);
    for (int s = 0; s < 5; ++s) {
        double acc = 0.0;
        for (int a = 0; a < 2; ++a) acc += pol(s, a) * q(ri.mdp.sa(s, a));
        CHECK(v(s) == doctest::Approx(acc).epsilon(1e-14));
    }
}

TEST_CASE("optimal_values matches exhaustive deterministic-policy enumeration") {
    Rng rng(23);
    auto ri = random_instance(rng, 3, 2, 6, 0.85);
    OptimalSolution opt = optimal_values(ri.mdp, 1e-12);

    Vector mu = Vector::Constant(3, 1.0 / 3.0);
    double best = -1e18;
    for (int mask = 0; mask < 8; ++mask) {
        std::vector<int> acts = {mask & 1, (mask >> 1) & 1, (mask >> 2) & 1};
        Matrix table = deterministic_table(3, 2, acts);
        best = std::max(best, policy_value(ri.mdp, table, mu));
    }
    Matrix greedy = deterministic_table(3, 2, opt.greedy);
    CHECK(policy_value(ri.mdp, greedy, mu) == doctest::Approx(best).epsilon(1e-9));
    // v_star from value iteration agrees with the greedy policy's exact value
    CHECK(mu.dot(opt.v_star) == doctest::Approx(best).epsilon(1e-8));
}

TEST_CASE("stationary distribution is invariant and matches long-run powering") {
    Rng rng(3);
    auto ri = random_instance(rng, 6, 2, 12, 0.9);
    StationaryInfo info = stationary_info(ri.mdp, ri.behavior);

    Matrix p = state_transition_matrix(ri.mdp, ri.behavior.table());
    CHECK((info.mu_b.transpose() * p - info.mu_b.transpose()).lpNorm<Eigen::Infinity>() <
          1e-12);
    CHECK(info.mu_b.sum() == doctest::Approx(1.0).epsilon(1e-12));

    Matrix pk = p;
    for (int i = 0; i < 9; ++i) pk = pk * pk; // p^512
    for (int s = 0; s < 6; ++s)
        CHECK((pk.row(s).transpose() - info.mu_b).lpNorm<Eigen::Infinity>() < 1e-10);

    for (int s = 0; s < 6; ++s)
        for (int a = 0; a < 2; ++a)
            CHECK(info.kappa_b(ri.mdp.sa(s, a)) ==
                  doctest::Approx(info.mu_b(s) * ri.behavior.prob(s, a)).epsilon(1e-12));
    CHECK(info.kappa_min == doctest::Approx(info.kappa_b.minCoeff()));
}

TEST_CASE("stationary_info rejects a reducible chain") {
    Matrix p0(2, 2);
    p0 << 1.0, 0.0, 0.0, 1.0; // two absorbing states
    Matrix r = Matrix::Zero(2, 1);
    Mdp mdp({p0}, r, 0.9);
    Matrix b = Matrix::Ones(2, 1);
    CHECK_THROWS_AS(stationary_info(mdp, BehaviorPolicy(b)), AssumptionViolation);
}

TEST_CASE("discounted visitation equals the geometric series") {
    Rng rng(31);
    auto ri = random_instance(rng, 4, 2, 8, 0.8);
    Matrix pol = random_stochastic(rng, 4, 2, 0.1);
    Vector mu = Vector::Constant(4, 0.25);
    Vector d = discounted_visitation(ri.mdp, pol, mu);

    Matrix p = state_transition_matrix(ri.mdp, pol);
    Vector acc = Vector::Zero(4), cur = mu;
    double g = 1.0;
    for (int i = 0; i < 300; ++i) {
        acc += g * cur;
        cur = p.transpose() * cur;
        g *= 0.8;
    }
    acc *= (1.0 - 0.8);
    CHECK((d - acc).lpNorm<Eigen::Infinity>() < 1e-10);
    CHECK(d.sum() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(d.minCoeff() >= (1.0 - 0.8) * mu.minCoeff() - 1e-12);
}

TEST_CASE("softmax_eval matches the direct definition") {
    Rng rng(5);
    FeatureMap phi = FeatureMap::identity(6);
    Vector theta(6);
    for (int i = 0; i < 6; ++i) theta(i) = 6.0 * rng.next_double() - 3.0;
    Matrix pol = softmax_eval(phi, theta, 3, 2);
    for (int s = 0; s < 3; ++s) {
        double z = std::exp(theta(2 * s)) + std::exp(theta(2 * s + 1));
        CHECK(pol(s, 0) == doctest::Approx(std::exp(theta(2 * s)) / z).epsilon(1e-13));
        CHECK(pol.row(s).sum() == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("max_ratio and zeta_max agree with scans over the tables") {
    Rng rng(13);
    auto ri = random_instance(rng, 4, 3, 12, 0.9);
    double zeta = 0.0;
    for (int s = 0; s < 4; ++s)
        for (int a = 0; a < 3; ++a)
            zeta = std::max(zeta, ri.target(s, a) / ri.behavior.prob(s, a));
    CHECK(max_ratio(ri.target, ri.behavior) == doctest::Approx(zeta).epsilon(1e-14));

    double zmax = 1.0 / ri.behavior.table().minCoeff();
    CHECK(ri.behavior.zeta_max() == doctest::Approx(zmax).epsilon(1e-14));
    CHECK(max_ratio(ri.target, ri.behavior) <= ri.behavior.zeta_max() + 1e-14);
}

TEST_CASE("feature map enforces rank and row scale") {
    FeatureMap id = FeatureMap::identity(4);
    CHECK(id.dim() == 4);
    for (int r = 0; r < 4; ++r)
        CHECK(id.matrix().row(r).lpNorm<1>() == doctest::Approx(1.0));

    Matrix dup(4, 2);
    dup.col(0) = Vector::Constant(4, 0.5);
    dup.col(1) = Vector::Constant(4, 0.5); // linearly dependent columns
    CHECK_THROWS_AS((void)FeatureMap(dup), ConfigError);

    Matrix fat(2, 2);
    fat << 0.9, 0.9, 0.1, 0.2; // first row L1 norm 1.8
    CHECK_THROWS_AS((void)FeatureMap(fat), ConfigError);
}

TEST_CASE("behavior policy requires full support") {
    Matrix b(2, 2);
    b << 1.0, 0.0, 0.5, 0.5;
    CHECK_THROWS_AS((void)BehaviorPolicy(b), AssumptionViolation);
    b << 0.6, 0.4, 0.5, 0.5;
    CHECK_NOTHROW((void)BehaviorPolicy(b));
}

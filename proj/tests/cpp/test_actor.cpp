#include <doctest.h>

#include "naclab/gallery.hpp"
#include "test_support.hpp"

using namespace naclab;
using naclab::testing::random_instance;

namespace {

ActorConfig basic_config(const CanonicalInstance& ci, int T, std::int64_t K,
                         double alpha) {
    ActorConfig ac;
    ac.T = T;
    ac.theta0 = Vector::Zero(ci.inst.features.dim());
    ac.critic.n = 3;
    ac.critic.schedule = StepSchedule::constant(alpha);
    ac.critic.num_iters = K;
    ac.critic.w0 = Vector::Zero(ci.inst.features.dim());
    ac.critic.gamma_c = ci.gamma_c;
    return ac;
}

} // namespace

TEST_CASE("parameter-path and multiplicative-path policies coincide") {
    Rng rng(61);
    for (int trial = 0; trial < 200; ++trial) {
        int S = 2 + static_cast<int>(rng.next_double() * 3);
        int A = 2 + static_cast<int>(rng.next_double() * 2);
        int d = 1 + static_cast<int>(rng.next_double() * std::min(4, S * A));
        auto ri = random_instance(rng, S, A, d, 0.9);
        Vector theta(d), w(d);
        for (int i = 0; i < d; ++i) {
            theta(i) = 6.0 * rng.next_double() - 3.0;
            w(i) = 6.0 * rng.next_double() - 3.0;
        }
        double beta = 0.1 + 2.0 * rng.next_double();
        Matrix via_params = softmax_eval(ri.features, theta + beta * w, S, A);
        Matrix via_mult =
            multiplicative_update(softmax_eval(ri.features, theta, S, A), ri.features,
                                  w, beta);
        CHECK((via_params - via_mult).lpNorm<Eigen::Infinity>() < 1e-12);
    }
}

TEST_CASE("natural_update is theta + beta w") {
    Vector theta(2), w(2);
    theta << 1.0, -2.0;
    w << 0.5, 0.25;
    Vector out = natural_update(theta, w, 2.0);
    CHECK(out(0) == 2.0);
    CHECK(out(1) == -1.5);
    Vector bad(3);
    CHECK_THROWS_AS(natural_update(theta, bad, 1.0), InputError);
}

TEST_CASE("effective stepsize defaults to log|A| and is forced under sampling") {
    ActorConfig ac;
    ac.beta = 0.0;
    CHECK(ac.effective_beta(3) == doctest::Approx(std::log(3.0)));
    ac.beta = 7.0;
    CHECK(ac.effective_beta(3) == 7.0);
    ac.eval_rule = EvalRule::UniformSample;
    CHECK(ac.effective_beta(3) == doctest::Approx(std::log(3.0)));
}

TEST_CASE("sampled outer loop produces consistent traces") {
    CanonicalInstance ci = gallery_get("twostate");
    ActorConfig ac = basic_config(ci, 6, 2000, 0.05);
    NacRun run = run_nac(ci.inst.mdp, ci.inst.features, ci.inst.behavior, ac, 9);
    CHECK(run.thetas.size() == 7);
    CHECK(run.gaps.size() == 7);
    CHECK(run.critic_ws.size() == 6);
    CHECK(run.xi_trace.size() == 6);
    for (double g : run.gaps) CHECK(g >= -1e-10);

    NacRun again = run_nac(ci.inst.mdp, ci.inst.features, ci.inst.behavior, ac, 9);
    for (std::size_t t = 0; t < run.thetas.size(); ++t)
        CHECK(run.thetas[t] == again.thetas[t]);

    ac.eval_rule = EvalRule::UniformSample;
    NacRun sampled = run_nac(ci.inst.mdp, ci.inst.features, ci.inst.behavior, ac, 9);
    CHECK(sampled.t_hat >= 0);
    CHECK(sampled.t_hat < 6);
}

TEST_CASE("exact outer loop improves the policy monotonically") {
    CanonicalInstance ci = gallery_get("chain4");
    Certification cert = certify_instance(ci);
    ActorConfig ac = basic_config(ci, 30, 1, 0.01);
    ac.critic.n = cert.n_min;
    NacRun run = run_exact_npg(ci.inst.mdp, ci.inst.features, ci.inst.behavior, ac);
    for (std::size_t t = 1; t < run.gaps.size(); ++t)
        CHECK(run.gaps[t] <= run.gaps[t - 1] + 1e-12);
    CHECK(run.gaps.back() < 0.1 * run.gaps.front() + 1e-12);
    // tabular features: fixed point is the exact Q-function
    for (double xi : run.xi_trace) CHECK(xi < 1e-9);
}

TEST_CASE("exact outer loop rejects an uncertifiable horizon") {
    CanonicalInstance ci = gallery_get("deadly-triad");
    ActorConfig ac = basic_config(ci, 5, 1, 0.01);
    ac.critic.n = 1; // certificate exceeds gamma_c at n = 1
    // start at a policy close to the frozen divergence target
    ac.theta0 = Vector::Constant(1, 6.0);
    CHECK_THROWS_AS(run_exact_npg(ci.inst.mdp, ci.inst.features, ci.inst.behavior, ac),
                    AssumptionViolation);
}

TEST_CASE("weighted least-squares actor has zero bias on tabular features") {
    CanonicalInstance ci = gallery_get("chain4");
    ActorConfig ac = basic_config(ci, 20, 1, 0.01);
    NacRun run = run_qnpg(ci.inst.mdp, ci.inst.features, ci.inst.behavior, ac,
                          NuChoice::DiscountedVisitation);
    CHECK(run.eps_bias.size() == 20);
    for (double e : run.eps_bias) CHECK(e < 1e-16);
    for (double xi : run.xi_trace) CHECK(xi < 1e-7);
    CHECK(run.lambda_weight > 0.0);
    for (std::size_t t = 1; t < run.gaps.size(); ++t)
        CHECK(run.gaps[t] <= run.gaps[t - 1] + 1e-12);

    NacRun stat = run_qnpg(ci.inst.mdp, ci.inst.features, ci.inst.behavior, ac,
                           NuChoice::Stationary);
    CHECK(stat.gaps.back() >= -1e-10);
}

TEST_CASE("outer-loop bound matches an independent evaluation of its terms") {
    CanonicalInstance ci = gallery_get("chain4");
    const Instance& I = ci.inst;
    Certification cert = certify_instance(ci);
    const int n = cert.n_min;

    double f = f_factor(I.mdp.discount() * I.behavior.zeta_max(), n);
    double gate = (1.0 - ci.gamma_c) / (456.0 * f * f);

    ActorConfig ac = basic_config(ci, 50, 1000, gate / 100.0);
    ac.critic.n = n;
    ac.eval_rule = EvalRule::UniformSample;

    double xi = 0.0;
    BoundReport rep = theorem2_bound(ac, I.mdp, I.features, I.behavior, xi, 0.0);

    double alpha = gate / 100.0;
    int t_alpha = mixing_time(I.mdp, I.behavior, alpha);
    double g2 = std::pow(1.0 - I.mdp.discount(), 2);
    double c3 = 1.0 + 2.0 / ((1.0 - I.mdp.discount()) *
                             std::sqrt(1.0 - ci.gamma_c) * std::sqrt(rep.lambda_min));
    double ell = (1.0 - ci.gamma_c) * rep.lambda_min;
    CHECK(rep.t_alpha == t_alpha);
    CHECK(rep.c3_bound == doctest::Approx(c3).epsilon(1e-12));
    CHECK(rep.a1 == doctest::Approx(2.0 / (g2 * 50.0)).epsilon(1e-12));
    CHECK(rep.a2 == 0.0);
    CHECK(rep.a3 ==
          doctest::Approx(4.0 * c3 *
                          std::pow(1.0 - ell * alpha, (1000.0 - (t_alpha + n + 1)) / 2.0) /
                          g2)
              .epsilon(1e-10));
    CHECK(rep.a4 == doctest::Approx(44.0 * c3 * f *
                                    std::sqrt(alpha * (t_alpha + n + 1)) /
                                    (g2 * std::sqrt(1.0 - ci.gamma_c) *
                                     std::sqrt(rep.lambda_min)))
                        .epsilon(1e-10));
    CHECK(rep.total() == doctest::Approx(rep.a1 + rep.a2 + rep.a3 + rep.a4));

    ac.critic.schedule = StepSchedule::constant(0.5); // violates the gate
    CHECK_THROWS_AS(theorem2_bound(ac, I.mdp, I.features, I.behavior, xi, 0.0),
                    BoundInapplicable);
}

TEST_CASE("xi_proxy is the max of the residual trace") {
    NacRun run;
    run.xi_trace = {0.1, 0.7, 0.3};
    CHECK(xi_proxy(run) == 0.7);
    NacRun empty;
    CHECK_THROWS_AS(xi_proxy(empty), InputError);
}

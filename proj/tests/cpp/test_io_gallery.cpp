#include <doctest.h>

#include <sstream>

#include "naclab/gallery.hpp"
#include "test_support.hpp"

using namespace naclab;
using naclab::testing::random_instance;

TEST_CASE("instance JSON round trip preserves every table") {
    Rng rng(71);
    auto ri = random_instance(rng, 4, 2, 5, 0.9);
    Instance inst{ri.mdp, ri.features, ri.behavior};
    std::stringstream ss;
    save_instance(inst, ss);
    Instance back = load_instance(ss, "<roundtrip>");

    CHECK(back.mdp.num_states() == 4);
    CHECK(back.mdp.discount() == doctest::Approx(0.9).epsilon(1e-15));
    for (int a = 0; a < 2; ++a)
        CHECK((back.mdp.transition(a) - ri.mdp.transition(a)).lpNorm<Eigen::Infinity>() <
              1e-15);
    CHECK((back.mdp.rewards() - ri.mdp.rewards()).lpNorm<Eigen::Infinity>() < 1e-15);
    CHECK((back.features.matrix() - ri.features.matrix()).lpNorm<Eigen::Infinity>() <
          1e-15);
    CHECK((back.behavior.table() - ri.behavior.table()).lpNorm<Eigen::Infinity>() <
          1e-15);
    CHECK(instance_hash(back) == instance_hash(inst));
}

TEST_CASE("instance hashes separate distinct instances") {
    Rng rng(72);
    auto a = random_instance(rng, 3, 2, 4, 0.9);
    auto b = random_instance(rng, 3, 2, 4, 0.9);
    CHECK(instance_hash({a.mdp, a.features, a.behavior}) !=
          instance_hash({b.mdp, b.features, b.behavior}));
}

TEST_CASE("loader reports the offending key") {
    std::stringstream missing(R"({"num_states": 2, "num_actions": 2, "gamma": 0.9})");
    bool threw = false;
    try {
        load_instance(missing, "<t>");
    } catch (const ConfigError& e) {
        threw = true;
        CHECK(std::string(e.what()).find("transitions") != std::string::npos);
    }
    CHECK(threw);

    std::stringstream bad_row(R"({
        "num_states": 2, "num_actions": 1, "gamma": 0.9,
        "transitions": [[[0.5, 0.4], [0.5, 0.5]]],
        "rewards": [[0.1], [0.2]]
    })");
    CHECK_THROWS_AS(load_instance(bad_row, "<t>"), ConfigError);

    std::stringstream garbage("{ not json");
    CHECK_THROWS_AS(load_instance(garbage, "<t>"), ConfigError);

    CHECK_THROWS_AS(load_instance_file("/nonexistent/instance.json"), ConfigError);
}

TEST_CASE("omitted features and behavior fall back to documented defaults") {
    std::stringstream ss(R"({
        "num_states": 2, "num_actions": 2, "gamma": 0.8,
        "transitions": [[[0.5, 0.5], [0.5, 0.5]], [[0.9, 0.1], [0.1, 0.9]]],
        "rewards": [[0.1, 0.2], [0.3, 0.4]]
    })");
    Instance inst = load_instance(ss, "<t>");
    CHECK(inst.features.dim() == 4); // tabular
    for (int s = 0; s < 2; ++s)
        for (int a = 0; a < 2; ++a) CHECK(inst.behavior.prob(s, a) == 0.5);
}

TEST_CASE("gallery lists its four instances and they recertify") {
    auto names = gallery_names();
    REQUIRE(names.size() == 4);
    CHECK(names[0] == "chain4");
    CHECK(names[1] == "ring6");
    CHECK(names[2] == "twostate");
    CHECK(names[3] == "deadly-triad");
    CHECK_THROWS_AS(gallery_get("nope"), ConfigError);

    for (const auto& name : names) {
        CanonicalInstance ci = gallery_get(name);
        Certification c = certify_instance(ci);
        CHECK(c.n_min >= 1);
        CHECK(c.lambda_min > 0.0);
        CHECK(c.kappa_min > 0.0);
        // the certified horizon meets its advertised contraction target
        CHECK(c.contraction_nmin <= c.gamma_c + 1e-12);
    }
}

TEST_CASE("the frozen divergence instance reproduces its certification") {
    CanonicalInstance ci = gallery_get("deadly-triad");
    Certification c = certify_instance(ci);
    CHECK(c.n_min == 7);
    CHECK(c.lambda_min == doctest::Approx(0.422633258268).epsilon(1e-9));
    CHECK(c.kappa_min == doctest::Approx(0.0529817633069).epsilon(1e-9));
    CHECK(c.contraction_n1 == doctest::Approx(1.41616313035).epsilon(1e-9));
    CHECK(c.contraction_nmin == doctest::Approx(0.536271336161).epsilon(1e-9));
    CHECK(c.zeta == doctest::Approx(3.78831808389).epsilon(1e-9));
    CHECK(c.gamma_c == 0.8);

    // expansive at n = 1, contractive at the certified horizon
    CHECK(c.contraction_n1 > 1.0);
    CHECK(c.contraction_nmin < c.gamma_c);

    // repeated construction is bit-stable
    CanonicalInstance again = build_deadly_triad_instance();
    CHECK(instance_hash(again.inst) == instance_hash(ci.inst));
    CHECK((again.target_policy - ci.target_policy).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("chain bound dominates the exact certificate on gallery instances") {
    for (const auto& name : gallery_names()) {
        CanonicalInstance ci = gallery_get(name);
        Certification c = certify_instance(ci);
        double chain =
            std::pow(ci.inst.mdp.discount(), c.n_min) / std::sqrt(c.kappa_min);
        CHECK(c.contraction_nmin <= chain + 1e-12);
    }
}

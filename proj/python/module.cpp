#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "naclab/harness.hpp"

#include <fstream>
#include <sstream>

namespace py = pybind11;
using namespace naclab;

namespace {

/// Convenience wrapper: generates the behavior trajectory internally so
/// Python callers don't need to handle span-based segments.
CriticRun run_critic_seeded(const Mdp& mdp, const FeatureMap& features,
                            const BehaviorPolicy& behavior, const Matrix& target,
                            const CriticConfig& config, std::uint64_t seed,
                            bool with_oracle) {
    Trajectory traj = generate(mdp, behavior, 0,
                               static_cast<int>(config.num_iters + config.n), seed);
    if (with_oracle) {
        ProjectedFixedPoint fp =
            solve_projected_bellman(mdp, features, target, behavior, config.n);
        return run_critic(mdp, features, traj.segment(0, traj.length()), config, target,
                          behavior, &fp.w_pi);
    }
    return run_critic(mdp, features, traj.segment(0, traj.length()), config, target,
                      behavior);
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "off-policy n-step TD / natural policy-gradient laboratory";

    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<AssumptionViolation>(m, "AssumptionViolation");
    py::register_exception<BoundInapplicable>(m, "BoundInapplicable");
    py::register_exception<DegenerateSystem>(m, "DegenerateSystem");
    py::register_exception<InputError>(m, "InputError");

    py::class_<Mdp>(m, "Mdp")
        .def(py::init<std::vector<Matrix>, Matrix, double>(), py::arg("transitions"),
             py::arg("rewards"), py::arg("gamma"))
        .def_property_readonly("num_states", &Mdp::num_states)
        .def_property_readonly("num_actions", &Mdp::num_actions)
        .def_property_readonly("gamma", &Mdp::discount)
        .def_property_readonly("rewards", &Mdp::rewards)
        .def("transition", &Mdp::transition);

    py::class_<FeatureMap>(m, "FeatureMap")
        .def(py::init<Matrix>())
        .def_static("identity", &FeatureMap::identity)
        .def_property_readonly("dim", &FeatureMap::dim)
        .def_property_readonly("matrix", &FeatureMap::matrix);

    py::class_<BehaviorPolicy>(m, "BehaviorPolicy")
        .def(py::init<Matrix>())
        .def_property_readonly("table", &BehaviorPolicy::table)
        .def("zeta_max", &BehaviorPolicy::zeta_max);

    py::class_<Instance>(m, "Instance")
        .def_readonly("mdp", &Instance::mdp)
        .def_readonly("features", &Instance::features)
        .def_readonly("behavior", &Instance::behavior);

    py::class_<CanonicalInstance>(m, "CanonicalInstance")
        .def_readonly("name", &CanonicalInstance::name)
        .def_readonly("notes", &CanonicalInstance::notes)
        .def_readonly("inst", &CanonicalInstance::inst)
        .def_readonly("target_policy", &CanonicalInstance::target_policy)
        .def_readonly("gamma_c", &CanonicalInstance::gamma_c);

    py::class_<Certification>(m, "Certification")
        .def_readonly("n_min", &Certification::n_min)
        .def_readonly("lambda_min", &Certification::lambda_min)
        .def_readonly("kappa_min", &Certification::kappa_min)
        .def_readonly("contraction_n1", &Certification::contraction_n1)
        .def_readonly("contraction_nmin", &Certification::contraction_nmin)
        .def_readonly("gamma_c", &Certification::gamma_c)
        .def_readonly("zeta", &Certification::zeta);

    py::class_<StepSchedule>(m, "StepSchedule")
        .def_static("constant", &StepSchedule::constant)
        .def_static("diminishing", &StepSchedule::diminishing, py::arg("alpha"),
                    py::arg("eta"), py::arg("h"))
        .def("at", &StepSchedule::at);

    py::class_<CriticConfig>(m, "CriticConfig")
        .def(py::init<>())
        .def_readwrite("n", &CriticConfig::n)
        .def_readwrite("schedule", &CriticConfig::schedule)
        .def_readwrite("num_iters", &CriticConfig::num_iters)
        .def_readwrite("w0", &CriticConfig::w0)
        .def_readwrite("gamma_c", &CriticConfig::gamma_c)
        .def_readwrite("divergence_threshold", &CriticConfig::divergence_threshold);

    py::class_<CriticRun>(m, "CriticRun")
        .def_readonly("ks", &CriticRun::ks)
        .def_readonly("iterates", &CriticRun::iterates)
        .def_readonly("mse", &CriticRun::mse)
        .def_readonly("final", &CriticRun::final)
        .def_readonly("diverged", &CriticRun::diverged)
        .def_readonly("divergence_step", &CriticRun::divergence_step);

    py::class_<ProjectedFixedPoint>(m, "ProjectedFixedPoint")
        .def_readonly("w_pi", &ProjectedFixedPoint::w_pi)
        .def_readonly("residual", &ProjectedFixedPoint::residual)
        .def_readonly("lambda_min", &ProjectedFixedPoint::lambda_min)
        .def_readonly("contraction_estimate", &ProjectedFixedPoint::contraction_estimate);

    py::enum_<EvalRule>(m, "EvalRule")
        .value("FinalIterate", EvalRule::FinalIterate)
        .value("UniformSample", EvalRule::UniformSample)
        .value("AllIterates", EvalRule::AllIterates);

    py::enum_<NuChoice>(m, "NuChoice")
        .value("DiscountedVisitation", NuChoice::DiscountedVisitation)
        .value("Stationary", NuChoice::Stationary);

    py::class_<ActorConfig>(m, "ActorConfig")
        .def(py::init<>())
        .def_readwrite("T", &ActorConfig::T)
        .def_readwrite("beta", &ActorConfig::beta)
        .def_readwrite("theta0", &ActorConfig::theta0)
        .def_readwrite("critic", &ActorConfig::critic)
        .def_readwrite("eval_rule", &ActorConfig::eval_rule);

    py::class_<NacRun>(m, "NacRun")
        .def_readonly("thetas", &NacRun::thetas)
        .def_readonly("critic_ws", &NacRun::critic_ws)
        .def_readonly("gaps", &NacRun::gaps)
        .def_readonly("xi_trace", &NacRun::xi_trace)
        .def_readonly("eps_bias", &NacRun::eps_bias)
        .def_readonly("t_hat", &NacRun::t_hat)
        .def_readonly("lambda_weight", &NacRun::lambda_weight);

    py::class_<Theorem1Report>(m, "Theorem1Report")
        .def_readonly("e1", &Theorem1Report::e1)
        .def_readonly("e2", &Theorem1Report::e2)
        .def_readonly("c1", &Theorem1Report::c1)
        .def_readonly("c2", &Theorem1Report::c2)
        .def_readonly("t_alpha", &Theorem1Report::t_alpha)
        .def_readonly("f_value", &Theorem1Report::f_value);

    py::class_<BoundReport>(m, "BoundReport")
        .def_readonly("a1", &BoundReport::a1)
        .def_readonly("a2", &BoundReport::a2)
        .def_readonly("a3", &BoundReport::a3)
        .def_readonly("a4", &BoundReport::a4)
        .def_readonly("c3_bound", &BoundReport::c3_bound)
        .def_readonly("xi", &BoundReport::xi)
        .def("total", &BoundReport::total);

    m.def("gallery_names", &gallery_names);
    m.def("gallery_get", &gallery_get);
    m.def("certify_instance", &certify_instance);
    m.def("load_instance_file", &load_instance_file);
    m.def("instance_hash", &instance_hash);

    m.def("f_factor", &f_factor);
    m.def("min_horizon", &min_horizon);
    m.def("importance_ratio", &importance_ratio);
    m.def("max_ratio", &max_ratio);
    m.def("uniform_table", &uniform_table);
    m.def("exact_q", &exact_q);
    m.def("solve_projected_bellman", &solve_projected_bellman, py::arg("mdp"),
          py::arg("features"), py::arg("target"), py::arg("behavior"), py::arg("n"));
    m.def("certify_contraction", &certify_contraction, py::arg("mdp"),
          py::arg("features"), py::arg("target"), py::arg("behavior"), py::arg("n"));
    m.def("mixing_time", &mixing_time, py::arg("mdp"), py::arg("behavior"),
          py::arg("alpha"), py::arg("cap") = 1000000);

    m.def("run_critic", &run_critic_seeded, py::arg("mdp"), py::arg("features"),
          py::arg("behavior"), py::arg("target"), py::arg("config"), py::arg("seed"),
          py::arg("with_oracle") = true);
    m.def("run_nac", &run_nac);
    m.def("run_exact_npg", &run_exact_npg);
    m.def("run_qnpg", &run_qnpg);
    m.def("multiplicative_update", &multiplicative_update);
    m.def("theorem1_bound", &theorem1_bound);
    m.def("theorem2_bound", &theorem2_bound);
    m.def("softmax_eval", &softmax_eval);
    m.def("xi_proxy", &xi_proxy);

    m.def("run_experiment_file", [](const std::string& path) {
        return run_experiment(load_experiment(path)).status;
    });
    m.def("validate_experiment_file", [](const std::string& path) {
        load_experiment(path);
        return true;
    });
}

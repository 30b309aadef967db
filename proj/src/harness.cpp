#include "naclab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <atomic>
#include <functional>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace naclab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

ExperimentSpec::Kind parse_kind(const std::string& s) {
    if (s == "critic-convergence") return ExperimentSpec::Kind::CriticConvergence;
    if (s == "stepsize-sweep") return ExperimentSpec::Kind::StepsizeSweep;
    if (s == "deadly-triad") return ExperimentSpec::Kind::DeadlyTriad;
    if (s == "nac-gap") return ExperimentSpec::Kind::NacGap;
    if (s == "npg-exact") return ExperimentSpec::Kind::NpgExact;
    if (s == "qnpg") return ExperimentSpec::Kind::Qnpg;
    if (s == "bound-table") return ExperimentSpec::Kind::BoundTable;
    throw ConfigError("experiment: unknown kind `" + s + "`");
}

StepSchedule parse_schedule(const json& j) {
    StepSchedule s;
    std::string kind = j.value("kind", "constant");
    if (kind == "constant") {
        s = StepSchedule::constant(j.value("alpha", 0.0));
    } else if (kind == "diminishing") {
        s = StepSchedule::diminishing(j.value("alpha", 0.0), j.value("eta", 1.0),
                                      j.value("h", 1.0));
    } else {
        throw ConfigError("schedule: unknown kind `" + kind + "`");
    }
    s.validate();
    return s;
}

Vector parse_vector(const json& j, int expected, const std::string& key) {
    if (!j.is_array() || static_cast<int>(j.size()) != expected)
        throw ConfigError(key + ": expected " + std::to_string(expected) + " entries");
    Vector v(expected);
    for (int i = 0; i < expected; ++i) v(i) = j[i].get<double>();
    return v;
}

Matrix parse_policy(const json& j, int S, int A, const std::string& key) {
    if (!j.is_array() || static_cast<int>(j.size()) != S)
        throw ConfigError(key + ": expected " + std::to_string(S) + " rows");
    Matrix m(S, A);
    for (int s = 0; s < S; ++s) {
        if (static_cast<int>(j[s].size()) != A)
            throw ConfigError(key + ": row " + std::to_string(s) + " needs " +
                              std::to_string(A) + " entries");
        for (int a = 0; a < A; ++a) m(s, a) = j[s][a].get<double>();
    }
    return m;
}

CanonicalInstance resolve_instance(const json& j, const std::string& dir) {
    if (j.is_string()) {
        std::string name = j.get<std::string>();
        auto names = gallery_names();
        if (std::find(names.begin(), names.end(), name) != names.end())
            return gallery_get(name);
        fs::path p = name;
        if (p.is_relative() && !dir.empty()) p = fs::path(dir) / p;
        Instance inst = load_instance_file(p.string());
        Matrix target = uniform_table(inst.mdp.num_states(), inst.mdp.num_actions());
        return CanonicalInstance{name, "loaded from file", std::move(inst),
                                 std::move(target), 0.8};
    }
    if (j.is_object()) {
        std::istringstream is(j.dump());
        Instance inst = load_instance(is, "<inline instance>");
        Matrix target = uniform_table(inst.mdp.num_states(), inst.mdp.num_actions());
        return CanonicalInstance{"<inline>", "inline instance", std::move(inst),
                                 std::move(target), 0.8};
    }
    throw ConfigError("experiment: `instance` must be a name, a path, or an object");
}

std::string out_root(const std::string& dir) {
    fs::path p = dir;
    if (p.is_relative()) {
        if (const char* env = std::getenv("NACLAB_OUT")) p = fs::path(env) / p;
    }
    return p.string();
}

struct Csv {
    std::ofstream os;
    explicit Csv(const std::string& path) : os(path) {
        if (!os) throw InputError("cannot open output file " + path);
        os.precision(12);
    }
};

/// Runs fn(i) for i in [0, count) on up to `workers` threads.
void parallel_for(int count, int workers, const std::function<void(int)>& fn) {
    workers = std::max(1, std::min(workers, count));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next++; i < count; i = next++) fn(i);
        });
    for (auto& t : pool) t.join();
}

struct MeanStderr {
    double mean = 0.0, stderr_ = 0.0;
};

MeanStderr aggregate(const std::vector<double>& xs) {
    MeanStderr m;
    if (xs.empty()) return m;
    m.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - m.mean) * (x - m.mean);
        m.stderr_ = std::sqrt(ss / (xs.size() - 1) / xs.size());
    }
    return m;
}

json manifest_base(const ExperimentSpec& spec) {
    json m;
    m["instance"] = spec.instance.name;
    m["instance_hash"] = instance_hash(spec.instance.inst);
    m["seeds"] = spec.seeds;
    Certification c = certify_instance(spec.instance);
    m["certification"] = {{"n_min", c.n_min},
                          {"lambda_min", c.lambda_min},
                          {"kappa_min", c.kappa_min},
                          {"contraction_n1", c.contraction_n1},
                          {"contraction_nmin", c.contraction_nmin},
                          {"gamma_c", c.gamma_c},
                          {"zeta", c.zeta}};
    m["generated_at"] = static_cast<std::int64_t>(std::time(nullptr));
    return m;
}

void write_manifest(const json& m, const std::string& path) {
    std::ofstream os(path);
    os << m.dump(2) << "\n";
}

std::span<const Step> critic_segment(const Trajectory& traj, const CriticConfig& cc) {
    return traj.segment(0, static_cast<int>(cc.num_iters + cc.n));
}

Trajectory make_traj(const ExperimentSpec& spec, const CriticConfig& cc,
                     std::uint64_t seed) {
    return generate(spec.instance.inst.mdp, spec.instance.inst.behavior, 0,
                    static_cast<int>(cc.num_iters + cc.n), seed);
}

// ---------- experiment kinds ----------

ExperimentResult run_critic_convergence(const ExperimentSpec& spec,
                                        const std::string& root) {
    const Instance& I = spec.instance.inst;
    const Matrix& target = spec.instance.target_policy;
    CriticConfig cc = spec.critic;
    ProjectedFixedPoint fp =
        solve_projected_bellman(I.mdp, I.features, target, I.behavior, cc.n);

    // bound columns only when the constant-stepsize gate holds (fail-closed)
    bool bounds_ok = false;
    Theorem1Report rep{};
    std::int64_t k_ok = 0;
    try {
        // probe applicability at the final iterate; per-k terms recomputed below
        rep = theorem1_bound(cc, I.mdp, I.features, target, I.behavior, cc.num_iters);
        k_ok = rep.t_alpha + cc.n + 1;
        bounds_ok = true;
    } catch (const BoundInapplicable&) {
    }
    double ell = (1.0 - cc.gamma_c) * fp.lambda_min;

    const int N = static_cast<int>(spec.seeds.size());
    std::vector<CriticRun> runs(N);
    parallel_for(N, spec.workers, [&](int i) {
        Trajectory traj = make_traj(spec, cc, spec.seeds[i]);
        runs[i] = run_critic(I.mdp, I.features, critic_segment(traj, cc), cc, target,
                             I.behavior, &fp.w_pi);
    });

    ExperimentResult res;
    for (int i = 0; i < N; ++i) {
        std::string path = root + "/seed_" + std::to_string(spec.seeds[i]) + ".csv";
        Csv csv(path);
        csv.os << "k,mse" << (bounds_ok ? ",bound_E1,bound_E2" : "") << "\n";
        for (std::size_t r = 0; r < runs[i].ks.size(); ++r) {
            csv.os << runs[i].ks[r] << "," << runs[i].mse[r];
            if (bounds_ok) {
                std::int64_t k = runs[i].ks[r];
                if (k >= k_ok) {
                    double e1 = rep.c1 * std::pow(1.0 - ell * cc.schedule.alpha,
                                                  static_cast<double>(k - k_ok));
                    csv.os << "," << e1 << "," << rep.e2;
                } else {
                    csv.os << ",,";
                }
            }
            csv.os << "\n";
        }
        res.files.push_back(path);
    }
    {
        std::string path = root + "/aggregate.csv";
        Csv csv(path);
        csv.os << "k,mean_mse,stderr_mse\n";
        for (std::size_t r = 0; r < runs[0].ks.size(); ++r) {
            std::vector<double> xs;
            for (const auto& run : runs)
                if (r < run.mse.size()) xs.push_back(run.mse[r]);
            MeanStderr m = aggregate(xs);
            csv.os << runs[0].ks[r] << "," << m.mean << "," << m.stderr_ << "\n";
        }
        res.files.push_back(path);
    }
    json m = manifest_base(spec);
    m["kind"] = "critic-convergence";
    m["n"] = cc.n;
    m["K"] = cc.num_iters;
    m["w_pi_norm"] = fp.w_pi.norm();
    m["lambda_min"] = fp.lambda_min;
    m["contraction"] = fp.contraction_estimate;
    m["zeta_pi"] = max_ratio(target, I.behavior);
    if (bounds_ok) {
        m["t_alpha"] = rep.t_alpha;
        m["f_value"] = rep.f_value;
        m["c1"] = rep.c1;
        m["c2"] = rep.c2;
    }
    write_manifest(m, root + "/manifest.json");
    res.files.push_back(root + "/manifest.json");
    return res;
}

ExperimentResult run_stepsize_sweep(const ExperimentSpec& spec, const std::string& root) {
    if (spec.schedules.empty())
        throw ConfigError("stepsize-sweep: needs a non-empty `schedules` list");
    const Instance& I = spec.instance.inst;
    const Matrix& target = spec.instance.target_policy;
    ProjectedFixedPoint fp = solve_projected_bellman(I.mdp, I.features, target,
                                                     I.behavior, spec.critic.n);
    ExperimentResult res;
    std::string path = root + "/aggregate.csv";
    Csv csv(path);
    csv.os << "schedule,k,mean_mse,stderr_mse\n";
    for (std::size_t si = 0; si < spec.schedules.size(); ++si) {
        CriticConfig cc = spec.critic;
        cc.schedule = spec.schedules[si];
        const int N = static_cast<int>(spec.seeds.size());
        std::vector<CriticRun> runs(N);
        parallel_for(N, spec.workers, [&](int i) {
            Trajectory traj = make_traj(spec, cc, spec.seeds[i]);
            runs[i] = run_critic(I.mdp, I.features, critic_segment(traj, cc), cc,
                                 target, I.behavior, &fp.w_pi);
        });
        for (std::size_t r = 0; r < runs[0].ks.size(); ++r) {
            std::vector<double> xs;
            for (const auto& run : runs)
                if (r < run.mse.size()) xs.push_back(run.mse[r]);
            MeanStderr m = aggregate(xs);
            csv.os << si << "," << runs[0].ks[r] << "," << m.mean << "," << m.stderr_
                   << "\n";
        }
    }
    res.files.push_back(path);
    json m = manifest_base(spec);
    m["kind"] = "stepsize-sweep";
    m["num_schedules"] = spec.schedules.size();
    m["w_pi_norm"] = fp.w_pi.norm();
    write_manifest(m, root + "/manifest.json");
    res.files.push_back(root + "/manifest.json");
    return res;
}

ExperimentResult run_deadly_triad(const ExperimentSpec& spec, const std::string& root) {
    const Instance& I = spec.instance.inst;
    const Matrix& target = spec.instance.target_policy;
    Certification cert = certify_instance(spec.instance);

    CriticConfig base = spec.critic;
    CriticConfig arm1 = base;
    arm1.n = 1;
    arm1.schedule = StepSchedule::constant(spec.triad_alpha_n1);
    arm1.w0 = Vector::Ones(I.features.dim());
    CriticConfig armn = base;
    armn.n = cert.n_min;
    armn.schedule = StepSchedule::constant(spec.triad_alpha_nmin);
    armn.w0 = Vector::Zero(I.features.dim());

    ProjectedFixedPoint fp =
        solve_projected_bellman(I.mdp, I.features, target, I.behavior, armn.n);

    const int N = static_cast<int>(spec.seeds.size());
    std::vector<CriticRun> r1(N), rn(N);
    parallel_for(N, spec.workers, [&](int i) {
        Trajectory t1 = make_traj(spec, arm1, spec.seeds[i]);
        r1[i] = run_critic(I.mdp, I.features, critic_segment(t1, arm1), arm1, target,
                           I.behavior);
        Trajectory tn = make_traj(spec, armn, spec.seeds[i]);
        rn[i] = run_critic(I.mdp, I.features, critic_segment(tn, armn), armn, target,
                           I.behavior, &fp.w_pi);
    });

    ExperimentResult res;
    int diverged = 0;
    {
        std::string path = root + "/arm_n1.csv";
        Csv csv(path);
        csv.os << "seed,diverged,divergence_step,final_norm\n";
        for (int i = 0; i < N; ++i) {
            if (r1[i].diverged) ++diverged;
            csv.os << spec.seeds[i] << "," << (r1[i].diverged ? 1 : 0) << ","
                   << r1[i].divergence_step << "," << r1[i].final.norm() << "\n";
        }
        res.files.push_back(path);
    }
    {
        std::string path = root + "/arm_nmin.csv";
        Csv csv(path);
        csv.os << "seed,final_dist,final_mse\n";
        for (int i = 0; i < N; ++i)
            csv.os << spec.seeds[i] << "," << (rn[i].final - fp.w_pi).norm() << ","
                   << rn[i].mse.back() << "\n";
        res.files.push_back(path);
    }
    json m = manifest_base(spec);
    m["kind"] = "deadly-triad";
    m["diverged_seeds"] = diverged;
    m["n_min"] = cert.n_min;
    m["alpha_n1"] = spec.triad_alpha_n1;
    m["alpha_nmin"] = spec.triad_alpha_nmin;
    write_manifest(m, root + "/manifest.json");
    res.files.push_back(root + "/manifest.json");
    res.status = diverged > 0 ? 4 : 0; // expected-divergence demo
    return res;
}

ExperimentResult run_nac_gap(const ExperimentSpec& spec, const std::string& root) {
    const Instance& I = spec.instance.inst;
    ActorConfig ac = spec.actor;
    ac.critic = spec.critic;

    const int N = static_cast<int>(spec.seeds.size());
    std::vector<NacRun> runs(N);
    parallel_for(N, spec.workers, [&](int i) {
        runs[i] = run_nac(I.mdp, I.features, I.behavior, ac, spec.seeds[i]);
    });

    bool bounds_ok = false;
    BoundReport rep{};
    try {
        double xi = 0.0, c3v = 0.0;
        for (const auto& r : runs) {
            xi = std::max(xi, xi_proxy(r));
            for (const auto& w : r.critic_ws) c3v = std::max(c3v, 1.0 + w.norm());
        }
        rep = theorem2_bound(ac, I.mdp, I.features, I.behavior, xi, c3v);
        bounds_ok = true;
    } catch (const BoundInapplicable&) {
    }

    ExperimentResult res;
    for (int i = 0; i < N; ++i) {
        std::string path = root + "/seed_" + std::to_string(spec.seeds[i]) + ".csv";
        Csv csv(path);
        csv.os << "t,gap,xi_t,wnorm_t\n";
        for (int t = 0; t < ac.T; ++t)
            csv.os << t << "," << runs[i].gaps[t] << "," << runs[i].xi_trace[t] << ","
                   << runs[i].critic_ws[t].norm() << "\n";
        res.files.push_back(path);
    }
    {
        std::string path = root + "/aggregate.csv";
        Csv csv(path);
        csv.os << "t,mean_gap,stderr_gap\n";
        for (int t = 0; t <= ac.T; ++t) {
            std::vector<double> xs;
            for (const auto& r : runs) xs.push_back(r.gaps[t]);
            MeanStderr m = aggregate(xs);
            csv.os << t << "," << m.mean << "," << m.stderr_ << "\n";
        }
        res.files.push_back(path);
    }
    json m = manifest_base(spec);
    m["kind"] = "nac-gap";
    m["T"] = ac.T;
    m["K"] = ac.critic.num_iters;
    if (bounds_ok) {
        m["bound"] = {{"A1", rep.a1},       {"A2", rep.a2},
                      {"A3", rep.a3},       {"A4", rep.a4},
                      {"c3_bound", rep.c3_bound}, {"c3_visited", rep.c3_visited},
                      {"xi_proxy", rep.xi}, {"t_alpha", rep.t_alpha},
                      {"lambda_min", rep.lambda_min}};
    }
    write_manifest(m, root + "/manifest.json");
    res.files.push_back(root + "/manifest.json");
    return res;
}

ExperimentResult run_npg_exact(const ExperimentSpec& spec, const std::string& root) {
    const Instance& I = spec.instance.inst;
    ActorConfig ac = spec.actor;
    ac.critic = spec.critic;
    NacRun run = run_exact_npg(I.mdp, I.features, I.behavior, ac);
    double beta = ac.effective_beta(I.mdp.num_actions());
    double g = I.mdp.discount();
    double logA = std::log(static_cast<double>(I.mdp.num_actions()));

    ExperimentResult res;
    std::string path = root + "/trace.csv";
    Csv csv(path);
    csv.os << "t,gap,xi_t,fact1_bound\n";
    for (int t = 0; t <= ac.T; ++t) {
        csv.os << t << "," << run.gaps[t] << ","
               << (t < ac.T ? run.xi_trace[t] : run.xi_trace.back()) << ",";
        if (t >= 1)
            csv.os << logA / ((1.0 - g) * beta * t) + 1.0 / ((1.0 - g) * (1.0 - g) * t);
        csv.os << "\n";
    }
    res.files.push_back(path);
    json m = manifest_base(spec);
    m["kind"] = "npg-exact";
    m["T"] = ac.T;
    m["beta"] = beta;
    write_manifest(m, root + "/manifest.json");
    res.files.push_back(root + "/manifest.json");
    return res;
}

ExperimentResult run_qnpg_experiment(const ExperimentSpec& spec, const std::string& root) {
    const Instance& I = spec.instance.inst;
    ActorConfig ac = spec.actor;
    ac.critic = spec.critic;
    NacRun run = run_qnpg(I.mdp, I.features, I.behavior, ac, spec.nu);
    double g = I.mdp.discount();

    ExperimentResult res;
    std::string path = root + "/trace.csv";
    Csv csv(path);
    csv.os << "t,gap,xi_t,eps_bias,theorem4_bound\n";
    double avg = 0.0;
    for (int t = 0; t < ac.T; ++t) {
        avg += run.gaps[t];
        csv.os << t << "," << run.gaps[t] << "," << run.xi_trace[t] << ","
               << run.eps_bias[t] << ","
               << 2.0 / ((1.0 - g) * (1.0 - g) * (t + 1)) << "\n";
    }
    res.files.push_back(path);
    json m = manifest_base(spec);
    m["kind"] = "qnpg";
    m["T"] = ac.T;
    m["nu"] = spec.nu == NuChoice::Stationary ? "stationary" : "discounted-visitation";
    m["lambda_weight"] = run.lambda_weight;
    m["average_gap"] = avg / ac.T;
    write_manifest(m, root + "/manifest.json");
    res.files.push_back(root + "/manifest.json");
    return res;
}

ExperimentResult run_bound_table(const ExperimentSpec& spec, const std::string& root) {
    const Instance& I = spec.instance.inst;
    const Matrix& target = spec.instance.target_policy;
    std::vector<std::int64_t> ks = spec.checkpoints;
    if (ks.empty()) ks = {spec.critic.num_iters};

    ExperimentResult res;
    std::string path = root + "/bounds.csv";
    Csv csv(path);
    bool constant = spec.critic.schedule.kind == StepSchedule::Kind::Constant;
    csv.os << (constant ? "k,E1,E2\n" : "k,bias,variance\n");
    for (std::int64_t k : ks) {
        if (constant) {
            Theorem1Report r =
                theorem1_bound(spec.critic, I.mdp, I.features, target, I.behavior, k);
            csv.os << k << "," << r.e1 << "," << r.e2 << "\n";
        } else {
            Theorem3Report r =
                theorem3_bound(spec.critic, I.mdp, I.features, target, I.behavior, k);
            csv.os << k << "," << r.bias << "," << r.variance << "\n";
        }
    }
    res.files.push_back(path);
    json m = manifest_base(spec);
    m["kind"] = "bound-table";
    write_manifest(m, root + "/manifest.json");
    res.files.push_back(root + "/manifest.json");
    return res;
}

} // namespace

ExperimentSpec load_experiment(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError(path + ": cannot open experiment file");
    json j;
    try {
        j = json::parse(is);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }

    std::string dir = fs::path(path).parent_path().string();
    if (!j.contains("instance"))
        throw ConfigError(path + ": missing required key `instance`");
    ExperimentSpec spec{parse_kind(j.value("kind", "")),
                        resolve_instance(j["instance"], dir)};

    const Mdp& mdp = spec.instance.inst.mdp;
    const int d = spec.instance.inst.features.dim();
    if (j.contains("target_policy"))
        spec.instance.target_policy = parse_policy(j["target_policy"], mdp.num_states(),
                                                   mdp.num_actions(), "target_policy");
    if (j.contains("gamma_c")) spec.instance.gamma_c = j["gamma_c"].get<double>();

    if (j.contains("seeds"))
        for (const auto& s : j["seeds"]) spec.seeds.push_back(s.get<std::uint64_t>());
    if (spec.seeds.empty())
        throw ConfigError(path + ": `seeds` must be a non-empty list");
    spec.output_dir = j.value("output_dir", std::string("out"));
    spec.workers = j.value("workers", 1);

    json jc = j.value("critic", json::object());
    spec.critic.n = jc.value("n", 1);
    spec.critic.num_iters = jc.value("K", static_cast<std::int64_t>(1000));
    spec.critic.gamma_c = jc.value("gamma_c", spec.instance.gamma_c);
    spec.critic.divergence_threshold = j.value("divergence_threshold", 1e8);
    spec.critic.thin = j.value("thin", static_cast<std::int64_t>(0));
    spec.critic.schedule = jc.contains("schedule") ? parse_schedule(jc["schedule"])
                                                   : StepSchedule::constant(0.01);
    spec.critic.w0 = jc.contains("w0") ? parse_vector(jc["w0"], d, "critic.w0")
                                       : Vector::Zero(d);

    json ja = j.value("actor", json::object());
    spec.actor.T = ja.value("T", 1);
    spec.actor.beta = ja.value("beta", 0.0);
    std::string rule = ja.value("eval_rule", "all-iterates");
    if (rule == "final-iterate") spec.actor.eval_rule = EvalRule::FinalIterate;
    else if (rule == "uniform-sample") spec.actor.eval_rule = EvalRule::UniformSample;
    else if (rule == "all-iterates") spec.actor.eval_rule = EvalRule::AllIterates;
    else throw ConfigError(path + ": unknown eval_rule `" + rule + "`");
    spec.actor.theta0 = ja.contains("theta0")
                            ? parse_vector(ja["theta0"], d, "actor.theta0")
                            : Vector::Zero(d);
    spec.actor.critic = spec.critic;

    if (j.contains("schedules"))
        for (const auto& s : j["schedules"]) spec.schedules.push_back(parse_schedule(s));
    if (j.contains("checkpoints"))
        for (const auto& k : j["checkpoints"])
            spec.checkpoints.push_back(k.get<std::int64_t>());
    std::string nu = j.value("nu", "discounted-visitation");
    if (nu == "stationary") spec.nu = NuChoice::Stationary;
    else if (nu == "discounted-visitation") spec.nu = NuChoice::DiscountedVisitation;
    else throw ConfigError(path + ": unknown nu `" + nu + "`");

    spec.triad_alpha_n1 = j.value("triad_alpha_n1", spec.triad_alpha_n1);
    spec.triad_alpha_nmin = j.value("triad_alpha_nmin", spec.triad_alpha_nmin);
    if (j.contains("sweep")) {
        const json& s = j["sweep"];
        if (s.contains("eps")) {
            spec.sweep_eps.clear();
            for (const auto& e : s["eps"]) spec.sweep_eps.push_back(e.get<double>());
        }
        spec.sweep_T0 = s.value("T0", spec.sweep_T0);
        spec.sweep_K0 = s.value("K0", spec.sweep_K0);
        spec.sweep_alpha0 = s.value("alpha0", spec.sweep_alpha0);
        spec.sweep_max_level = s.value("max_level", spec.sweep_max_level);
    }

    // preflight validation before any sampling
    spec.critic.validate(d);
    if (spec.kind == ExperimentSpec::Kind::NacGap ||
        spec.kind == ExperimentSpec::Kind::NpgExact ||
        spec.kind == ExperimentSpec::Kind::Qnpg)
        spec.actor.validate(d, mdp.num_actions());
    const Matrix& tp = spec.instance.target_policy;
    for (int si = 0; si < tp.rows(); ++si) {
        if (tp.row(si).minCoeff() < 0.0 || std::abs(tp.row(si).sum() - 1.0) > 1e-9)
            throw ConfigError(path + ": target_policy row " + std::to_string(si) +
                              " is not a distribution");
    }
    return spec;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    if (spec.seeds.empty())
        throw ConfigError("experiment: `seeds` must be a non-empty list");
    std::string root = out_root(spec.output_dir);
    fs::create_directories(root);
    switch (spec.kind) {
        case ExperimentSpec::Kind::CriticConvergence:
            return run_critic_convergence(spec, root);
        case ExperimentSpec::Kind::StepsizeSweep:
            return run_stepsize_sweep(spec, root);
        case ExperimentSpec::Kind::DeadlyTriad:
            return run_deadly_triad(spec, root);
        case ExperimentSpec::Kind::NacGap:
            return run_nac_gap(spec, root);
        case ExperimentSpec::Kind::NpgExact:
            return run_npg_exact(spec, root);
        case ExperimentSpec::Kind::Qnpg:
            return run_qnpg_experiment(spec, root);
        case ExperimentSpec::Kind::BoundTable:
            return run_bound_table(spec, root);
    }
    throw ConfigError("experiment: unhandled kind");
}

SweepResult sample_complexity_sweep(const ExperimentSpec& spec) {
    const Instance& I = spec.instance.inst;
    std::string root = out_root(spec.output_dir);
    fs::create_directories(root);

    auto level_gap = [&](int m) {
        int T = spec.sweep_T0 << m;
        std::int64_t K = spec.sweep_K0 << (2 * m);
        double alpha = spec.sweep_alpha0 / static_cast<double>(1 << (2 * m));
        std::vector<double> gaps(spec.seeds.size());
        parallel_for(static_cast<int>(spec.seeds.size()), spec.workers, [&](int i) {
            ActorConfig ac = spec.actor;
            ac.T = T;
            ac.theta0 = Vector::Zero(I.features.dim());
            ac.critic = spec.critic;
            ac.critic.schedule = StepSchedule::constant(alpha);
            ac.critic.num_iters = K;
            ac.critic.w0 = Vector::Zero(I.features.dim());
            NacRun run = run_nac(I.mdp, I.features, I.behavior, ac, spec.seeds[i]);
            // expectation over the uniformly drawn output iterate
            gaps[i] = std::accumulate(run.gaps.begin(), run.gaps.end() - 1, 0.0) / T;
        });
        MeanStderr ms = aggregate(gaps);
        SweepRow row;
        row.level = m;
        row.T = T;
        row.K = K;
        row.alpha = alpha;
        row.total_samples = static_cast<std::int64_t>(T) * (K + spec.critic.n);
        row.mean_gap = ms.mean;
        return row;
    };

    SweepResult out;
    std::vector<SweepRow> cache;
    int level = 0;
    for (double eps : spec.sweep_eps) {
        SweepRow found;
        found.eps = eps;
        // sample counts are monotone in the level, so resume from the last hit
        for (int m = level; m <= spec.sweep_max_level; ++m) {
            if (m >= static_cast<int>(cache.size())) cache.push_back(level_gap(m));
            if (cache[m].mean_gap <= eps) {
                found = cache[m];
                found.eps = eps;
                found.reachable = true;
                level = m;
                break;
            }
        }
        out.rows.push_back(found);
    }

    // log-log slope of total samples against 1/eps over the reachable rows
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (const auto& r : out.rows) {
        if (!r.reachable) continue;
        double x = std::log(1.0 / r.eps), y = std::log(static_cast<double>(r.total_samples));
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++cnt;
    }
    if (cnt >= 2) out.loglog_slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);

    std::string path = root + "/sweep.csv";
    Csv csv(path);
    csv.os << "eps,level,T,K,alpha,total_samples,mean_gap,reachable\n";
    for (const auto& r : out.rows)
        csv.os << r.eps << "," << r.level << "," << r.T << "," << r.K << "," << r.alpha
               << "," << r.total_samples << "," << r.mean_gap << ","
               << (r.reachable ? 1 : 0) << "\n";
    out.files.push_back(path);
    json m = manifest_base(spec);
    m["kind"] = "sample-complexity-sweep";
    m["loglog_slope"] = out.loglog_slope;
    write_manifest(m, root + "/manifest.json");
    out.files.push_back(root + "/manifest.json");
    return out;
}

} // namespace naclab

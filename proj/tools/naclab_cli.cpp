#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "naclab/harness.hpp"

namespace {

std::vector<std::uint64_t> parse_seed_list(const std::string& s) {
    std::vector<std::uint64_t> out;
    std::istringstream is(s);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(std::stoull(tok));
    }
    return out;
}

void apply_overrides(naclab::ExperimentSpec& spec, const std::string& seeds,
                     const std::string& out, int workers, std::int64_t thin) {
    if (!seeds.empty()) spec.seeds = parse_seed_list(seeds);
    if (!out.empty()) spec.output_dir = out;
    if (workers > 0) spec.workers = workers;
    if (thin > 0) {
        spec.critic.thin = thin;
        spec.actor.critic.thin = thin;
    }
    if (spec.seeds.empty())
        throw naclab::ConfigError("seed list must be non-empty");
}

int dispatch(int argc, char** argv) {
    CLI::App app{"numerical laboratory for off-policy n-step TD and natural "
                 "policy-gradient methods on finite MDPs"};
    app.require_subcommand(1);

    std::string spec_path, seeds, out, gallery_name;
    int workers = 0;
    std::int64_t thin = 0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--seeds", seeds, "comma-separated seed list override");
        cmd->add_option("--out", out, "output directory override");
        cmd->add_option("--workers", workers, "worker thread count");
        cmd->add_option("--thin", thin, "iterate recording stride");
    };

    CLI::App* validate = app.add_subcommand("validate", "parse and validate an experiment file");
    validate->add_option("spec", spec_path, "experiment JSON file")->required();

    CLI::App* run = app.add_subcommand("run", "run an experiment");
    run->add_option("spec", spec_path, "experiment JSON file")->required();
    add_common(run);

    CLI::App* gallery = app.add_subcommand("gallery", "canonical instance gallery");
    CLI::App* glist = gallery->add_subcommand("list", "list gallery instances");
    CLI::App* gcert = gallery->add_subcommand("certify", "print a certification record");
    gcert->add_option("name", gallery_name, "gallery instance name")->required();
    gallery->require_subcommand(1);

    CLI::App* sweep = app.add_subcommand("sweep", "sample-complexity sweep");
    sweep->add_option("spec", spec_path, "experiment JSON file")->required();
    add_common(sweep);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (*validate) {
        naclab::load_experiment(spec_path);
        std::printf("ok: %s\n", spec_path.c_str());
        return 0;
    }
    if (*run) {
        naclab::ExperimentSpec spec = naclab::load_experiment(spec_path);
        apply_overrides(spec, seeds, out, workers, thin);
        naclab::ExperimentResult res = naclab::run_experiment(spec);
        for (const auto& f : res.files) std::printf("wrote %s\n", f.c_str());
        return res.status;
    }
    if (*gallery) {
        if (*glist) {
            for (const auto& n : naclab::gallery_names()) std::printf("%s\n", n.c_str());
            return 0;
        }
        if (*gcert) {
            naclab::CanonicalInstance ci = naclab::gallery_get(gallery_name);
            naclab::Certification c = naclab::certify_instance(ci);
            std::printf("name: %s\n", ci.name.c_str());
            std::printf("notes: %s\n", ci.notes.c_str());
            std::printf("n_min: %d\n", c.n_min);
            std::printf("lambda_min: %.12g\n", c.lambda_min);
            std::printf("kappa_min: %.12g\n", c.kappa_min);
            std::printf("contraction_n1: %.12g\n", c.contraction_n1);
            std::printf("contraction_nmin: %.12g\n", c.contraction_nmin);
            std::printf("gamma_c: %.12g\n", c.gamma_c);
            std::printf("zeta: %.12g\n", c.zeta);
            return 0;
        }
    }
    if (*sweep) {
        naclab::ExperimentSpec spec = naclab::load_experiment(spec_path);
        apply_overrides(spec, seeds, out, workers, thin);
        naclab::SweepResult res = naclab::sample_complexity_sweep(spec);
        for (const auto& r : res.rows)
            std::printf("eps=%g level=%d samples=%lld mean_gap=%g%s\n", r.eps, r.level,
                        static_cast<long long>(r.total_samples), r.mean_gap,
                        r.reachable ? "" : " (unreachable)");
        std::printf("loglog_slope=%g\n", res.loglog_slope);
        for (const auto& f : res.files) std::printf("wrote %s\n", f.c_str());
        return 0;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const naclab::AssumptionViolation& e) {
        std::fprintf(stderr, "assumption violation: %s\n", e.what());
        return 3;
    } catch (const naclab::ConfigError& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return 2;
    } catch (const naclab::InputError& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

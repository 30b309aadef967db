#pragma once

#include <string>
#include <vector>

#include "naclab/actor.hpp"
#include "naclab/gallery.hpp"

namespace naclab {

/// One declarative experiment. Parsed from a JSON config; every sub-config
/// is validated before any sampling starts.
struct ExperimentSpec {
    enum class Kind {
        CriticConvergence,
        StepsizeSweep,
        DeadlyTriad,
        NacGap,
        NpgExact,
        Qnpg,
        BoundTable,
    };

    Kind kind = Kind::CriticConvergence;
    CanonicalInstance instance;         // resolved instance + target policy
    std::vector<std::uint64_t> seeds;
    std::string output_dir;
    CriticConfig critic;
    ActorConfig actor;
    std::vector<StepSchedule> schedules;      // stepsize-sweep arms
    std::vector<std::int64_t> checkpoints;    // bound-table rows
    NuChoice nu = NuChoice::DiscountedVisitation;
    int workers = 1;
    std::int64_t thin = 0;                    // 0 = default max(1, K/1000)

    // deadly-triad arm overrides
    double triad_alpha_n1 = 0.03;
    double triad_alpha_nmin = 5e-5;

    // sample-complexity sweep grid
    std::vector<double> sweep_eps = {0.4, 0.2, 0.1};
    int sweep_T0 = 8;
    std::int64_t sweep_K0 = 2000;
    double sweep_alpha0 = 0.2;
    int sweep_max_level = 5;
};

/// Parses and validates a JSON experiment file. Recognizes gallery names,
/// file paths, and inline objects in the `instance` field.
ExperimentSpec load_experiment(const std::string& path);

/// Result of one experiment: exit status plus the files it wrote.
struct ExperimentResult {
    int status = 0; // 0 ok, 4 = expected divergence demo succeeded
    std::vector<std::string> files;
};

/// Runs an experiment and writes per-seed CSVs, an aggregate CSV, and a
/// manifest JSON under the spec's output directory (prefixed by $NACLAB_OUT
/// when set and the directory is relative). CSV bodies are deterministic
/// functions of (spec, seeds).
ExperimentResult run_experiment(const ExperimentSpec& spec);

struct SweepRow {
    double eps = 0.0;
    int level = -1;
    int T = 0;
    std::int64_t K = 0;
    double alpha = 0.0;
    std::int64_t total_samples = 0;
    double mean_gap = 0.0;
    bool reachable = false;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    double loglog_slope = 0.0; // slope of log(total samples) vs log(1/eps)
    std::vector<std::string> files;
};

/// For each target accuracy eps, finds the smallest grid level (T, K,
/// alpha) = (T0*2^m, K0*4^m, alpha0/4^m) whose mean average-iterate gap
/// over the spec's seeds is <= eps. Unreachable eps values are marked and
/// the sweep continues.
SweepResult sample_complexity_sweep(const ExperimentSpec& spec);

} // namespace naclab

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dyntucker/run.hpp"

namespace {

struct CliOptions {
    std::string experiment = "koch-lubich";
    int dim = 0;        // 0 selects the experiment default
    int size = 0;       // likewise
    std::vector<int> rank;
    double step = 1e-3;
    double horizon = 1.0;
    double eps = 1e-3;
    std::string scheme = "euler";
    std::string reg = "off";
    uint64_t seed = 12345;
    std::string out;
    double tol = 1e-5;
    int max_sweeps = 10;
    int stride = 0;
    bool timing = false;
    bool warm_start = false;
    std::vector<double> steps_list;
    std::vector<int> ranks_list;
};

void add_common_options(CLI::App* cmd, CliOptions& opt) {
    cmd->add_option("--experiment", opt.experiment,
                    "koch-lubich | rotating-decay | heat | reaction-diffusion");
    cmd->add_option("--dim", opt.dim, "number of tensor modes (experiment default when omitted)");
    cmd->add_option("--size", opt.size, "mode size I (experiment default when omitted)");
    cmd->add_option("--rank", opt.rank, "rank vector, e.g. 8,9,10,11 or a single value")->delimiter(',');
    cmd->add_option("--step", opt.step, "time step h");
    cmd->add_option("--horizon", opt.horizon, "integration horizon T");
    cmd->add_option("--eps", opt.eps, "perturbation level (koch-lubich)");
    cmd->add_option("--scheme", opt.scheme, "euler | improved-euler | gauged-reference");
    cmd->add_option("--reg", opt.reg, "off | h2 | fixed alpha value");
    cmd->add_option("--seed", opt.seed, "random seed");
    cmd->add_option("--out", opt.out, "output CSV path");
    cmd->add_option("--tol", opt.tol, "ALS fit tolerance");
    cmd->add_option("--max-sweeps", opt.max_sweeps, "maximum ALS sweeps per step");
    cmd->add_option("--stride", opt.stride, "metric logging stride (0 = automatic)");
    cmd->add_flag("--timing", opt.timing, "record wall-clock per step (breaks byte reproducibility)");
    cmd->add_flag("--warm-start", opt.warm_start, "reuse factor increments across steps");
    cmd->set_config("--config", "", "config file with key=value lines; flags override");
}

int experiment_default_dim(dyntucker::ProblemKind kind) {
    return kind == dyntucker::ProblemKind::koch_lubich ? 4 : 2;
}

int experiment_default_size(dyntucker::ProblemKind kind) {
    switch (kind) {
        case dyntucker::ProblemKind::koch_lubich: return 15;
        case dyntucker::ProblemKind::rotating_decay: return 100;
        case dyntucker::ProblemKind::heat_source: return 200;
        case dyntucker::ProblemKind::reaction_diffusion: return 400;
    }
    return 15;
}

int experiment_default_rank(dyntucker::ProblemKind kind) {
    switch (kind) {
        case dyntucker::ProblemKind::koch_lubich: return 10;
        case dyntucker::ProblemKind::rotating_decay: return 8;
        case dyntucker::ProblemKind::heat_source: return 8;
        case dyntucker::ProblemKind::reaction_diffusion: return 3;
    }
    return 8;
}

dyntucker::RunConfig make_config(const CliOptions& opt) {
    dyntucker::RunConfig cfg;
    if (!dyntucker::parse_problem_kind(opt.experiment, cfg.experiment)) {
        throw CLI::ValidationError("--experiment", "unknown experiment '" + opt.experiment + "'");
    }
    if (!dyntucker::parse_scheme(opt.scheme, cfg.scheme)) {
        throw CLI::ValidationError("--scheme", "unknown scheme '" + opt.scheme + "'");
    }
    if (!dyntucker::parse_regularization(opt.reg, cfg.reg)) {
        throw CLI::ValidationError("--reg", "expected off, h2 or a nonnegative value");
    }
    cfg.dim = opt.dim > 0 ? opt.dim : experiment_default_dim(cfg.experiment);
    cfg.mode_size = opt.size > 0 ? opt.size : experiment_default_size(cfg.experiment);
    if (opt.rank.empty()) {
        cfg.rank.assign(static_cast<size_t>(cfg.dim), experiment_default_rank(cfg.experiment));
    } else if (opt.rank.size() == 1) {
        cfg.rank.assign(static_cast<size_t>(cfg.dim), opt.rank.front());
    } else {
        cfg.rank = opt.rank;
        cfg.dim = static_cast<int>(opt.rank.size());
    }
    cfg.step = opt.step;
    cfg.horizon = opt.horizon;
    cfg.eps = opt.eps;
    cfg.seed = opt.seed;
    cfg.out = opt.out;
    cfg.tol = opt.tol;
    cfg.max_sweeps = opt.max_sweeps;
    cfg.stride = opt.stride;
    cfg.timing = opt.timing;
    cfg.warm_start = opt.warm_start;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dyntucker: dynamical low-rank Tucker approximation experiments"};
    app.require_subcommand(1);

    CliOptions run_opt, conv_opt, stab_opt;
    run_opt.out = "run.csv";
    conv_opt.out = "convergence.csv";
    stab_opt.out = "stability.csv";
    // the stability comparison targets the small-singular-value regime:
    // tighter fit tolerance and h² regularization by default
    stab_opt.experiment = "rotating-decay";
    stab_opt.tol = 1e-6;
    stab_opt.reg = "h2";
    stab_opt.horizon = 0.3;

    CLI::App* run_cmd = app.add_subcommand("run", "integrate one configuration and log metrics");
    add_common_options(run_cmd, run_opt);

    CLI::App* conv_cmd = app.add_subcommand("convergence", "final error against a list of step sizes");
    add_common_options(conv_cmd, conv_opt);
    conv_cmd->add_option("--steps", conv_opt.steps_list, "step sizes, e.g. 1e-2,5e-3,2.5e-3")
        ->delimiter(',')
        ->required();

    CLI::App* stab_cmd = app.add_subcommand("stability", "ALS scheme vs gauged baseline across ranks");
    add_common_options(stab_cmd, stab_opt);
    stab_cmd->add_option("--ranks", stab_opt.ranks_list, "rank list, e.g. 4,8,12,16")->delimiter(',')->required();
    stab_cmd->add_option("--steps", stab_opt.steps_list, "step sizes (defaults to --step only)")->delimiter(',');

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            const dyntucker::RunResult result = dyntucker::run_experiment(make_config(run_opt));
            std::fprintf(stderr, "%s: %zu records%s\n", run_opt.out.c_str(), result.records.size(),
                         result.blew_up ? ", blow-up detected" : "");
            return result.blew_up ? 1 : 0;
        }
        if (conv_cmd->parsed()) {
            const dyntucker::ConvergenceResult result =
                dyntucker::convergence_study(make_config(conv_opt), conv_opt.steps_list);
            std::fprintf(stderr, "fitted slope: %.4f\n", result.slope);
            return result.any_blow_up ? 1 : 0;
        }
        if (stab_cmd->parsed()) {
            CliOptions opt = stab_opt;
            if (opt.steps_list.empty()) opt.steps_list = {opt.step};
            const dyntucker::StabilityResult result =
                dyntucker::stability_comparison(make_config(opt), opt.ranks_list, opt.steps_list);
            bool any_marker = false;
            for (const auto& e : result.entries) any_marker = any_marker || e.blew_up;
            std::fprintf(stderr, "ALS runs %s\n", result.als_all_completed ? "all completed" : "had failures");
            return any_marker ? 1 : 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}

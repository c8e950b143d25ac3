#include "dyntucker/run.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace dyntucker {

namespace {

constexpr double kBlowUpThreshold = 1e6;

ProblemParams problem_params(const RunConfig& cfg) {
    ProblemParams p;
    p.dim = cfg.dim;
    p.mode_size = cfg.mode_size;
    p.eps = cfg.eps;
    if (cfg.experiment == ProblemKind::koch_lubich) p.inner_rank = cfg.rank;
    return p;
}

int default_stride(double horizon, int64_t steps) {
    if (horizon <= 0.1 || steps <= 1000) return 1;
    return static_cast<int>((steps + 999) / 1000);
}

std::string csv_field(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

void write_run_csv(const std::string& path, const std::vector<RunRecord>& records) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("run_experiment: cannot open output file " + path);
    out << "t,rel_error,rel_defect,sweeps,step_ms\n";
    for (const RunRecord& r : records) {
        out << format_double(r.t) << ',';
        if (r.blow_up) {
            out << "blowup,blowup";
        } else {
            out << csv_field(r.rel_error) << ',' << csv_field(r.rel_defect);
        }
        out << ',' << r.sweeps << ',' << csv_field(r.step_ms) << '\n';
    }
    if (!out) throw std::runtime_error("run_experiment: write failure on " + path);
}

bool exceeds(const std::optional<double>& v) {
    return v && (!std::isfinite(*v) || std::abs(*v) > kBlowUpThreshold);
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

RunResult run_experiment(const RunConfig& cfg) {
    if (cfg.step <= 0.0) throw std::invalid_argument("run_experiment: step size must be positive");
    if (cfg.horizon < 0.0) throw std::invalid_argument("run_experiment: horizon must be nonnegative");

    const std::unique_ptr<Problem> problem = build_problem(cfg.experiment, problem_params(cfg), cfg.seed);
    std::unique_ptr<ReferenceSolution> reference = problem->reference();

    RankVector rank = cfg.rank;
    if (static_cast<int>(rank.size()) == 1 && problem->shape().size() > 1) {
        rank.assign(problem->shape().size(), rank.front());
    }
    TuckerTensor y = problem->initial_state(rank);

    IntegratorConfig icfg;
    icfg.step_size = cfg.step;
    icfg.fit_tolerance = cfg.tol;
    icfg.max_sweeps = cfg.max_sweeps;
    icfg.regularization = cfg.reg;
    icfg.scheme = cfg.scheme;
    icfg.warm_start_factors = cfg.warm_start;

    const int64_t steps = std::llround(cfg.horizon / cfg.step);
    const int stride = cfg.stride > 0 ? cfg.stride : default_stride(cfg.horizon, steps);

    RunResult result;
    auto log_record = [&](double t, const StepReport* report, double ms) {
        RunRecord rec;
        rec.t = t;
        if (reference) rec.rel_error = relative_error(y, reference->at(t));
        if (report) {
            rec.rel_defect = report->relative_defect;
            rec.sweeps = report->sweeps;
        }
        if (cfg.timing && ms >= 0.0) rec.step_ms = ms;
        if (exceeds(rec.rel_error) || exceeds(rec.rel_defect)) {
            rec.blow_up = true;
            result.blew_up = true;
        }
        if (rec.rel_error && !rec.blow_up) result.final_rel_error = rec.rel_error;
        result.records.push_back(std::move(rec));
    };

    log_record(0.0, nullptr, -1.0);

    TangentIncrement increment;
    bool have_increment = false;
    for (int64_t k = 1; k <= steps && !result.blew_up; ++k) {
        const double t_prev = static_cast<double>(k - 1) * cfg.step;
        const double t_now = static_cast<double>(k) * cfg.step;
        const auto started = std::chrono::steady_clock::now();
        StepReport report;
        bool have_report = false;
        try {
            switch (cfg.scheme) {
                case Scheme::euler: {
                    auto [next, rep] = als_euler_step(y, t_prev, *problem, icfg, &increment,
                                                      have_increment ? &increment : nullptr);
                    y = std::move(next);
                    report = std::move(rep);
                    have_report = true;
                    have_increment = cfg.warm_start;
                    break;
                }
                case Scheme::improved_euler: {
                    auto [next, rep] = improved_euler_step(y, t_prev, *problem, icfg);
                    y = std::move(next);
                    report = std::move(rep);
                    have_report = true;
                    break;
                }
                case Scheme::gauged_reference: {
                    y = gauged_reference_step(y, t_prev, *problem, cfg.step);
                    break;
                }
            }
        } catch (const std::runtime_error&) {
            // numerical failure inside the step (singular Gram matrix,
            // non-finite defect, lost orthonormality)
            RunRecord rec;
            rec.t = t_now;
            rec.blow_up = true;
            result.records.push_back(rec);
            result.blew_up = true;
            break;
        } catch (const std::invalid_argument&) {
            RunRecord rec;
            rec.t = t_now;
            rec.blow_up = true;
            result.records.push_back(rec);
            result.blew_up = true;
            break;
        }
        const auto finished = std::chrono::steady_clock::now();
        const double ms = std::chrono::duration<double, std::milli>(finished - started).count();

        const bool log_now = (k % stride == 0) || k == steps;
        if (have_report && (!std::isfinite(report.relative_defect) || report.relative_defect > kBlowUpThreshold)) {
            RunRecord rec;
            rec.t = t_now;
            rec.sweeps = report.sweeps;
            rec.blow_up = true;
            result.records.push_back(rec);
            result.blew_up = true;
            break;
        }
        if (log_now) log_record(t_now, have_report ? &report : nullptr, ms);
    }

    if (!cfg.out.empty()) write_run_csv(cfg.out, result.records);
    return result;
}

ConvergenceResult convergence_study(const RunConfig& base, const std::vector<double>& h_list) {
    ConvergenceResult result;
    for (double h : h_list) {
        RunConfig cfg = base;
        cfg.step = h;
        cfg.out.clear();
        const RunResult run = run_experiment(cfg);
        result.points.push_back({h, run.final_rel_error, run.blew_up});
        result.any_blow_up = result.any_blow_up || run.blew_up;
    }

    // least-squares slope of log(error) against log(h)
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int n = 0;
    for (const ConvergencePoint& p : result.points) {
        if (!p.rel_error || *p.rel_error <= 0.0 || p.blew_up) continue;
        const double x = std::log(p.h);
        const double yv = std::log(*p.rel_error);
        sx += x;
        sy += yv;
        sxx += x * x;
        sxy += x * yv;
        ++n;
    }
    if (n >= 2) {
        const double denom = n * sxx - sx * sx;
        result.slope = denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
    }

    if (!base.out.empty()) {
        std::ofstream out(base.out);
        if (!out) throw std::runtime_error("convergence_study: cannot open output file " + base.out);
        out << "h,rel_error,fitted_slope\n";
        for (const ConvergencePoint& p : result.points) {
            out << format_double(p.h) << ',';
            if (p.blew_up) {
                out << "blowup";
            } else if (p.rel_error) {
                out << format_double(*p.rel_error);
            }
            out << ',' << format_double(result.slope) << '\n';
        }
    }
    return result;
}

StabilityResult stability_comparison(const RunConfig& base, const std::vector<int>& ranks,
                                     const std::vector<double>& h_list) {
    StabilityResult result;
    const size_t modes = build_problem(base.experiment, problem_params(base), base.seed)->shape().size();
    for (const Scheme scheme : {Scheme::euler, Scheme::gauged_reference}) {
        for (int r : ranks) {
            for (double h : h_list) {
                RunConfig cfg = base;
                cfg.scheme = scheme;
                cfg.rank.assign(modes, r);
                cfg.step = h;
                cfg.out.clear();
                const RunResult run = run_experiment(cfg);
                result.entries.push_back({scheme, r, h, run.final_rel_error, run.blew_up});
                if (scheme == Scheme::euler && run.blew_up) result.als_all_completed = false;
            }
        }
    }

    if (!base.out.empty()) {
        std::ofstream out(base.out);
        if (!out) throw std::runtime_error("stability_comparison: cannot open output file " + base.out);
        out << "scheme,rank,h,rel_error,status\n";
        for (const StabilityEntry& e : result.entries) {
            out << scheme_name(e.scheme) << ',' << e.rank << ',' << format_double(e.h) << ',';
            if (!e.blew_up && e.rel_error) out << format_double(*e.rel_error);
            out << ',' << (e.blew_up ? "blowup" : "ok") << '\n';
        }
    }
    return result;
}

const char* scheme_name(Scheme s) {
    switch (s) {
        case Scheme::euler: return "euler";
        case Scheme::improved_euler: return "improved-euler";
        case Scheme::gauged_reference: return "gauged-reference";
    }
    return "unknown";
}

bool parse_scheme(const std::string& name, Scheme& out) {
    if (name == "euler") {
        out = Scheme::euler;
    } else if (name == "improved-euler" || name == "improved_euler") {
        out = Scheme::improved_euler;
    } else if (name == "gauged-reference" || name == "gauged_reference") {
        out = Scheme::gauged_reference;
    } else {
        return false;
    }
    return true;
}

const char* problem_kind_name(ProblemKind k) {
    switch (k) {
        case ProblemKind::koch_lubich: return "koch-lubich";
        case ProblemKind::rotating_decay: return "rotating-decay";
        case ProblemKind::heat_source: return "heat";
        case ProblemKind::reaction_diffusion: return "reaction-diffusion";
    }
    return "unknown";
}

bool parse_problem_kind(const std::string& name, ProblemKind& out) {
    if (name == "koch-lubich" || name == "koch_lubich") {
        out = ProblemKind::koch_lubich;
    } else if (name == "rotating-decay" || name == "rotating_decay") {
        out = ProblemKind::rotating_decay;
    } else if (name == "heat" || name == "heat-source") {
        out = ProblemKind::heat_source;
    } else if (name == "reaction-diffusion" || name == "reaction_diffusion") {
        out = ProblemKind::reaction_diffusion;
    } else {
        return false;
    }
    return true;
}

bool parse_regularization(const std::string& name, Regularization& out) {
    if (name == "off" || name == "none") {
        out = Regularization::off();
        return true;
    }
    if (name == "h2" || name == "h^2" || name == "alpha=h^2" || name == "alpha=h2") {
        out = Regularization::h_squared();
        return true;
    }
    try {
        size_t pos = 0;
        const double v = std::stod(name, &pos);
        if (pos != name.size() || v < 0.0) return false;
        out = Regularization::fixed(v);
        return true;
    } catch (const std::exception&) {
        return false;
    }
}

}  // namespace dyntucker

#pragma once

#include <optional>
#include <string>

#include "dyntucker/problems.hpp"

namespace dyntucker {

/// Complete description of one experiment run; serializable to and from the
/// CLI flag set and the key=value config file.
struct RunConfig {
    ProblemKind experiment = ProblemKind::koch_lubich;
    int dim = 4;
    int mode_size = 15;
    RankVector rank = {10, 10, 10, 10};
    double step = 1e-3;
    double horizon = 1.0;
    double eps = 1e-3;
    Scheme scheme = Scheme::euler;
    Regularization reg{};
    uint64_t seed = 12345;
    std::string out;     // CSV path; empty keeps records in memory only
    int stride = 0;      // metric logging stride; 0 selects the default rule
    double tol = 1e-5;   // ALS fit tolerance
    int max_sweeps = 10;
    bool timing = false;      // populate step_ms (off keeps output reproducible)
    bool warm_start = false;  // reuse factor increments across steps
};

struct RunRecord {
    double t = 0.0;
    std::optional<double> rel_error;
    std::optional<double> rel_defect;
    int sweeps = 0;
    std::optional<double> step_ms;
    bool blow_up = false;
};

struct RunResult {
    std::vector<RunRecord> records;
    bool blew_up = false;
    std::optional<double> final_rel_error;
};

/// Time loop for one configuration. Writes one CSV record per logged step
/// (header `t,rel_error,rel_defect,sweeps,step_ms`); a defect or error beyond
/// 1e6, or any non-finite value, produces a blow-up marker and an early stop.
RunResult run_experiment(const RunConfig& cfg);

struct ConvergencePoint {
    double h = 0.0;
    std::optional<double> rel_error;
    bool blew_up = false;
};

struct ConvergenceResult {
    std::vector<ConvergencePoint> points;
    double slope = 0.0;  // fitted log-log slope of error vs step size
    bool any_blow_up = false;
};

/// Runs the base configuration once per step size and fits the log-log slope
/// of the final error. Writes `h,rel_error,fitted_slope` when out is set.
ConvergenceResult convergence_study(const RunConfig& base, const std::vector<double>& h_list);

struct StabilityEntry {
    Scheme scheme = Scheme::euler;
    int rank = 0;
    double h = 0.0;
    std::optional<double> rel_error;
    bool blew_up = false;
};

struct StabilityResult {
    std::vector<StabilityEntry> entries;
    bool als_all_completed = true;
};

/// Head-to-head of the ALS scheme against the gauged baseline over a rank and
/// step-size grid. Writes `scheme,rank,h,rel_error,status` when out is set.
StabilityResult stability_comparison(const RunConfig& base, const std::vector<int>& ranks,
                                     const std::vector<double>& h_list);

std::string format_double(double v);  // fixed "%.17g" formatting used in CSV output

const char* scheme_name(Scheme s);
bool parse_scheme(const std::string& name, Scheme& out);
const char* problem_kind_name(ProblemKind k);
bool parse_problem_kind(const std::string& name, ProblemKind& out);
bool parse_regularization(const std::string& name, Regularization& out);

}  // namespace dyntucker

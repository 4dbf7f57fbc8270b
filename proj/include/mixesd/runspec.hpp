#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mixesd/models.hpp"
#include "mixesd/pipeline.hpp"
#include "mixesd/solver_config.hpp"

namespace mixesd {

enum class RunMode { Esd, MonteCarlo, Compare };

// One population loaded from side files: dense real CSV plus an optional
// imaginary-part CSV of the same shape.
struct CovarianceFile {
    std::string real_path;
    std::string imag_path; // empty = zero imaginary part

    bool operator==(const CovarianceFile&) const = default;
};

struct ExplicitProblem {
    std::vector<CovarianceFile> covariances;
    std::vector<double> alphas;
    double gamma = 0.5;

    bool operator==(const ExplicitProblem&) const = default;
};

struct MonteCarloParams {
    int samples = 0; // 0 = round(M / gamma)
    int trials = 20;
    std::uint64_t seed = 12345;

    bool operator==(const MonteCarloParams&) const = default;
};

// Parsed run configuration. Exactly one of `problem` / `explicit_problem`
// is set; unknown keys in the config file are rejected.
struct RunSpec {
    RunMode mode = RunMode::Esd;
    std::optional<TestProblem> problem;
    std::optional<ExplicitProblem> explicit_problem;
    SolverConfig solver;
    MonteCarloParams montecarlo;
    std::string output_path = "esd.csv";
    std::string eigenvalues_path; // empty = output_path + ".eig"
    bool strict = false;
};

bool operator==(const TestProblem& a, const TestProblem& b);
bool operator==(const RunSpec& a, const RunSpec& b);

RunSpec parse_run_spec(const std::string& json_text);
RunSpec load_run_spec(const std::string& path);
std::string serialize_run_spec(const RunSpec& spec);

/// Dense numeric CSV, one matrix row per line.
Eigen::MatrixXd load_matrix_csv(const std::string& path);

PopulationMixture build_problem(const RunSpec& spec);

void write_density_csv(const DensityEstimate& estimate, const std::string& path);

struct DensityRow {
    double x;
    double f;
    double re_m;
    double im_m;
    bool converged;
};
std::vector<DensityRow> read_density_csv(const std::string& path);

/// Executes the run; returns the process exit status.
int run(const RunSpec& spec);

} // namespace mixesd

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mixesd/runspec.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Limiting spectral density solver for population-mixture covariance models"};

    std::string spec_path;
    std::optional<std::string> mode;
    std::optional<std::string> out_path;
    std::optional<double> epsilon;
    std::optional<int> levels;
    std::optional<int> workers;
    std::optional<std::uint64_t> seed;
    bool strict = false;

    app.add_option("--spec", spec_path, "Run configuration file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    app.add_option("--mode", mode, "esd | montecarlo | compare (overrides the spec)");
    app.add_option("--out", out_path, "Output path (overrides the spec)");
    app.add_option("--epsilon", epsilon, "Target accuracy");
    app.add_option("--levels", levels, "Regrid rounds L");
    app.add_option("--workers", workers, "Worker pool size (0 = all cores)");
    app.add_option("--seed", seed, "Monte Carlo seed");
    app.add_flag("--strict", strict, "Fail on any non-converged grid point");

    CLI11_PARSE(app, argc, argv);

    try {
        mixesd::RunSpec spec = mixesd::load_run_spec(spec_path);
        if (mode) {
            if (*mode == "esd")
                spec.mode = mixesd::RunMode::Esd;
            else if (*mode == "montecarlo")
                spec.mode = mixesd::RunMode::MonteCarlo;
            else if (*mode == "compare")
                spec.mode = mixesd::RunMode::Compare;
            else {
                std::cerr << "error: unknown mode '" << *mode << "'\n";
                return 1;
            }
        }
        if (out_path) spec.output_path = *out_path;
        if (epsilon) spec.solver.epsilon = *epsilon;
        if (levels) spec.solver.levels = *levels;
        if (workers) spec.solver.workers = *workers;
        if (seed) spec.montecarlo.seed = *seed;
        if (strict) spec.strict = true;
        return mixesd::run(spec);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

#include "mixesd/runspec.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "mixesd/montecarlo.hpp"

namespace mixesd {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& object, const char* where,
                         std::initializer_list<const char*> known) {
    for (auto it = object.begin(); it != object.end(); ++it) {
        bool found = false;
        for (const char* key : known)
            if (it.key() == key) {
                found = true;
                break;
            }
        if (!found)
            throw InvalidProblem(std::string("unknown key '") + it.key() + "' in " + where);
    }
}

ProblemKind parse_kind(const std::string& kind) {
    if (kind == "mp") return ProblemKind::Mp;
    if (kind == "two_delta") return ProblemKind::TwoDelta;
    if (kind == "comb") return ProblemKind::Comb;
    if (kind == "diag") return ProblemKind::Diag;
    if (kind == "corr") return ProblemKind::Corr;
    throw InvalidProblem("unknown problem kind '" + kind + "'");
}

std::string kind_name(ProblemKind kind) {
    switch (kind) {
        case ProblemKind::Mp: return "mp";
        case ProblemKind::TwoDelta: return "two_delta";
        case ProblemKind::Comb: return "comb";
        case ProblemKind::Diag: return "diag";
        case ProblemKind::Corr: return "corr";
    }
    return "mp";
}

RunMode parse_mode(const std::string& mode) {
    if (mode == "esd") return RunMode::Esd;
    if (mode == "montecarlo") return RunMode::MonteCarlo;
    if (mode == "compare") return RunMode::Compare;
    throw InvalidProblem("unknown mode '" + mode + "'");
}

std::string mode_name(RunMode mode) {
    switch (mode) {
        case RunMode::Esd: return "esd";
        case RunMode::MonteCarlo: return "montecarlo";
        case RunMode::Compare: return "compare";
    }
    return "esd";
}

} // namespace

bool operator==(const TestProblem& a, const TestProblem& b) {
    return a.kind == b.kind && a.gamma == b.gamma && a.lambdas == b.lambdas &&
           a.weights == b.weights && a.population_count == b.population_count &&
           a.dim == b.dim && a.m_min == b.m_min && a.rho == b.rho && a.ell == b.ell;
}

bool operator==(const RunSpec& a, const RunSpec& b) {
    const auto solver_eq = [](const SolverConfig& x, const SolverConfig& y) {
        return x.epsilon == y.epsilon && x.xi0 == y.xi0 && x.beta == y.beta &&
               x.q_cap == y.q_cap && x.damping_scale == y.damping_scale && x.t == y.t &&
               x.m_outer == y.m_outer && x.m_inner == y.m_inner && x.m_min == y.m_min &&
               x.levels == y.levels && x.regrid_ratios == y.regrid_ratios &&
               x.max_iters == y.max_iters && x.workers == y.workers &&
               x.warm_start == y.warm_start;
    };
    return a.mode == b.mode && a.problem == b.problem &&
           a.explicit_problem == b.explicit_problem && solver_eq(a.solver, b.solver) &&
           a.montecarlo == b.montecarlo && a.output_path == b.output_path &&
           a.eigenvalues_path == b.eigenvalues_path && a.strict == b.strict;
}

RunSpec parse_run_spec(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw InvalidProblem(std::string("config parse error: ") + e.what());
    }
    if (!root.is_object()) throw InvalidProblem("config must be a JSON object");
    reject_unknown_keys(root, "config",
                        {"mode", "problem", "solver", "montecarlo", "output", "strict"});

    RunSpec spec;
    if (root.contains("mode")) spec.mode = parse_mode(root["mode"].get<std::string>());
    if (root.contains("strict")) spec.strict = root["strict"].get<bool>();

    if (!root.contains("problem"))
        throw InvalidProblem("config is missing the required key 'problem'");
    const json& prob = root["problem"];
    if (!prob.is_object()) throw InvalidProblem("'problem' must be an object");
    reject_unknown_keys(prob, "problem",
                        {"kind", "gamma", "lambdas", "weights", "K", "M", "m_min", "rho",
                         "ell", "covariances", "alphas"});
    if (!prob.contains("kind"))
        throw InvalidProblem("problem is missing the required key 'kind'");

    const std::string kind = prob["kind"].get<std::string>();
    if (kind == "explicit") {
        ExplicitProblem ep;
        if (!prob.contains("covariances"))
            throw InvalidProblem("explicit problem is missing the key 'covariances'");
        for (const json& cov : prob["covariances"]) {
            reject_unknown_keys(cov, "covariances entry", {"real", "imag"});
            CovarianceFile file;
            file.real_path = cov.at("real").get<std::string>();
            if (cov.contains("imag")) file.imag_path = cov["imag"].get<std::string>();
            ep.covariances.push_back(std::move(file));
        }
        if (prob.contains("alphas")) ep.alphas = prob["alphas"].get<std::vector<double>>();
        if (prob.contains("gamma")) ep.gamma = prob["gamma"].get<double>();
        spec.explicit_problem = std::move(ep);
    } else {
        if (prob.contains("covariances") || prob.contains("alphas"))
            throw InvalidProblem("covariance files require kind 'explicit'");
        TestProblem tp;
        tp.kind = parse_kind(kind);
        if (prob.contains("gamma")) tp.gamma = prob["gamma"].get<double>();
        if (prob.contains("lambdas")) tp.lambdas = prob["lambdas"].get<std::vector<double>>();
        if (prob.contains("weights")) tp.weights = prob["weights"].get<std::vector<double>>();
        if (prob.contains("K")) tp.population_count = prob["K"].get<int>();
        if (prob.contains("M")) tp.dim = prob["M"].get<int>();
        if (prob.contains("m_min")) tp.m_min = prob["m_min"].get<int>();
        if (prob.contains("rho")) tp.rho = prob["rho"].get<double>();
        if (prob.contains("ell")) tp.ell = prob["ell"].get<double>();
        spec.problem = std::move(tp);
    }

    if (root.contains("solver")) {
        const json& solver = root["solver"];
        reject_unknown_keys(solver, "solver",
                            {"epsilon", "xi0", "beta", "q_cap", "damping_scale", "t",
                             "m_outer", "m_inner", "m_min", "levels", "regrid_ratios",
                             "max_iters", "workers", "warm_start"});
        SolverConfig& c = spec.solver;
        if (solver.contains("epsilon")) c.epsilon = solver["epsilon"].get<double>();
        if (solver.contains("xi0")) c.xi0 = solver["xi0"].get<double>();
        if (solver.contains("beta")) c.beta = solver["beta"].get<double>();
        if (solver.contains("q_cap")) c.q_cap = solver["q_cap"].get<int>();
        if (solver.contains("damping_scale"))
            c.damping_scale = solver["damping_scale"].get<double>();
        if (solver.contains("t")) c.t = solver["t"].get<double>();
        if (solver.contains("m_outer")) c.m_outer = solver["m_outer"].get<int>();
        if (solver.contains("m_inner")) c.m_inner = solver["m_inner"].get<int>();
        if (solver.contains("m_min")) c.m_min = solver["m_min"].get<int>();
        if (solver.contains("levels")) c.levels = solver["levels"].get<int>();
        if (solver.contains("regrid_ratios"))
            c.regrid_ratios = solver["regrid_ratios"].get<std::vector<double>>();
        if (solver.contains("max_iters")) c.max_iters = solver["max_iters"].get<std::size_t>();
        if (solver.contains("workers")) c.workers = solver["workers"].get<int>();
        if (solver.contains("warm_start")) c.warm_start = solver["warm_start"].get<bool>();
    }

    if (root.contains("montecarlo")) {
        const json& mc = root["montecarlo"];
        reject_unknown_keys(mc, "montecarlo", {"samples", "trials", "seed"});
        if (mc.contains("samples")) spec.montecarlo.samples = mc["samples"].get<int>();
        if (mc.contains("trials")) spec.montecarlo.trials = mc["trials"].get<int>();
        if (mc.contains("seed")) spec.montecarlo.seed = mc["seed"].get<std::uint64_t>();
    }

    if (root.contains("output")) {
        const json& output = root["output"];
        reject_unknown_keys(output, "output", {"path", "eigenvalues_path"});
        if (output.contains("path")) spec.output_path = output["path"].get<std::string>();
        if (output.contains("eigenvalues_path"))
            spec.eigenvalues_path = output["eigenvalues_path"].get<std::string>();
    }
    return spec;
}

RunSpec load_run_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidProblem("cannot read config file " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_run_spec(buffer.str());
}

std::string serialize_run_spec(const RunSpec& spec) {
    json root;
    root["mode"] = mode_name(spec.mode);
    root["strict"] = spec.strict;

    json prob;
    if (spec.explicit_problem) {
        const auto& ep = *spec.explicit_problem;
        prob["kind"] = "explicit";
        prob["gamma"] = ep.gamma;
        prob["alphas"] = ep.alphas;
        json covs = json::array();
        for (const auto& cov : ep.covariances) {
            json entry;
            entry["real"] = cov.real_path;
            if (!cov.imag_path.empty()) entry["imag"] = cov.imag_path;
            covs.push_back(entry);
        }
        prob["covariances"] = covs;
    } else if (spec.problem) {
        const auto& tp = *spec.problem;
        prob["kind"] = kind_name(tp.kind);
        prob["gamma"] = tp.gamma;
        if (!tp.lambdas.empty()) prob["lambdas"] = tp.lambdas;
        if (!tp.weights.empty()) prob["weights"] = tp.weights;
        prob["K"] = tp.population_count;
        if (tp.dim > 0) prob["M"] = tp.dim;
        prob["m_min"] = tp.m_min;
        if (tp.kind == ProblemKind::Corr) {
            prob["rho"] = tp.rho;
            prob["ell"] = tp.ell;
        }
    }
    root["problem"] = prob;

    json solver;
    const SolverConfig defaults;
    const SolverConfig& c = spec.solver;
    solver["epsilon"] = c.epsilon;
    solver["xi0"] = c.xi0;
    solver["beta"] = c.beta;
    solver["q_cap"] = c.q_cap;
    solver["damping_scale"] = c.damping_scale;
    solver["t"] = c.t;
    solver["m_outer"] = c.m_outer;
    solver["m_inner"] = c.m_inner;
    solver["m_min"] = c.m_min;
    solver["levels"] = c.levels;
    solver["regrid_ratios"] = c.regrid_ratios;
    solver["max_iters"] = c.max_iters;
    solver["workers"] = c.workers;
    solver["warm_start"] = c.warm_start;
    root["solver"] = solver;

    json mc;
    mc["samples"] = spec.montecarlo.samples;
    mc["trials"] = spec.montecarlo.trials;
    mc["seed"] = spec.montecarlo.seed;
    root["montecarlo"] = mc;

    json output;
    output["path"] = spec.output_path;
    if (!spec.eigenvalues_path.empty()) output["eigenvalues_path"] = spec.eigenvalues_path;
    root["output"] = output;
    return root.dump(2);
}

Eigen::MatrixXd load_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidProblem("cannot read matrix file " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw InvalidProblem("bad numeric cell '" + cell + "' in " + path);
            }
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw InvalidProblem("ragged rows in " + path);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw InvalidProblem("matrix file " + path + " is empty");
    Eigen::MatrixXd matrix(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows.front().size(); ++j)
            matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return matrix;
}

PopulationMixture build_problem(const RunSpec& spec) {
    if (spec.explicit_problem) {
        const auto& ep = *spec.explicit_problem;
        std::vector<Matrix> covs;
        covs.reserve(ep.covariances.size());
        for (const auto& file : ep.covariances) {
            const Eigen::MatrixXd real = load_matrix_csv(file.real_path);
            Matrix cov = real.cast<cplx>();
            if (!file.imag_path.empty()) {
                const Eigen::MatrixXd imag = load_matrix_csv(file.imag_path);
                if (imag.rows() != real.rows() || imag.cols() != real.cols())
                    throw InvalidProblem("real/imag shapes differ for " + file.real_path);
                cov += cplx(0.0, 1.0) * imag.cast<cplx>();
            }
            covs.push_back(std::move(cov));
        }
        std::vector<double> alphas = ep.alphas;
        if (alphas.empty())
            alphas.assign(covs.size(), 1.0 / static_cast<double>(covs.size()));
        return PopulationMixture(std::move(covs), std::move(alphas), ep.gamma);
    }
    if (!spec.problem) throw InvalidProblem("run spec has no problem definition");
    TestProblem tp = *spec.problem;
    tp.m_min = spec.solver.m_min; // solver-level override keeps the two in step
    return build_test_problem(tp);
}

void write_density_csv(const DensityEstimate& estimate, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InvalidProblem("cannot open " + path + " for writing");
    out << "x,f,re_m,im_m,converged\n";
    char buffer[160];
    for (std::size_t i = 0; i < estimate.grid.size(); ++i) {
        const auto& s = estimate.solutions[i];
        std::snprintf(buffer, sizeof(buffer), "%.17g,%.17g,%.17g,%.17g,%d\n",
                      estimate.grid.points[i], s.f, s.m.real(), s.m.imag(),
                      s.converged ? 1 : 0);
        out << buffer;
    }
}

std::vector<DensityRow> read_density_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidProblem("cannot read " + path);
    std::string line;
    if (!std::getline(in, line) || line != "x,f,re_m,im_m,converged")
        throw InvalidProblem("unexpected CSV header in " + path);
    std::vector<DensityRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        DensityRow row{};
        int converged = 0;
        if (std::sscanf(line.c_str(), "%lg,%lg,%lg,%lg,%d", &row.x, &row.f, &row.re_m,
                        &row.im_m, &converged) != 5)
            throw InvalidProblem("bad CSV row in " + path + ": " + line);
        row.converged = converged != 0;
        rows.push_back(row);
    }
    return rows;
}

namespace {

int derive_samples(const RunSpec& spec, const PopulationMixture& mixture) {
    if (spec.montecarlo.samples > 0) return spec.montecarlo.samples;
    return static_cast<int>(std::lround(mixture.dim() / mixture.gamma()));
}

std::string eigenvalue_output(const RunSpec& spec) {
    return spec.eigenvalues_path.empty() ? spec.output_path + ".eig" : spec.eigenvalues_path;
}

} // namespace

int run(const RunSpec& spec) {
    try {
        const PopulationMixture mixture = build_problem(spec);
        if (spec.mode == RunMode::MonteCarlo) {
            const auto spectrum =
                sample_spectrum(mixture, derive_samples(spec, mixture),
                                spec.montecarlo.trials, spec.montecarlo.seed,
                                spec.solver.workers);
            write_eigenvalues(spectrum, eigenvalue_output(spec));
            std::cout << "eigenvalues=" << spectrum.eigenvalues.size() << " file="
                      << eigenvalue_output(spec) << "\n";
            return 0;
        }

        const DensityEstimate estimate = compute_esd(mixture, spec.solver);
        write_density_csv(estimate, spec.output_path);
        std::cout << "points=" << estimate.grid.size() << " segments="
                  << estimate.segments().size() << " mass=" << estimate.mass
                  << " non_converged=" << estimate.diagnostics.non_converged.size() << "\n";
        if (estimate.diagnostics.mass_warning)
            std::cout << "warning: integrated mass deficit exceeds 5e-3; "
                         "support detection may have missed a segment\n";

        if (spec.mode == RunMode::Compare) {
            const auto spectrum =
                sample_spectrum(mixture, derive_samples(spec, mixture),
                                spec.montecarlo.trials, spec.montecarlo.seed,
                                spec.solver.workers);
            write_eigenvalues(spectrum, eigenvalue_output(spec));
            const double distance = ks_distance(spectrum, estimate);
            char buffer[96];
            std::snprintf(buffer, sizeof(buffer), "ks_distance=%.6g mass=%.6g\n", distance,
                          estimate.mass);
            std::cout << buffer;
        }

        if (spec.strict && !estimate.diagnostics.non_converged.empty()) {
            std::cerr << "strict mode: " << estimate.diagnostics.non_converged.size()
                      << " grid points failed to converge\n";
            return 2;
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace mixesd

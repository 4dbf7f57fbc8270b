#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mixesd/models.hpp"

using namespace mixesd;

namespace {

Matrix diag2(double a, double b) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

Matrix scalar1(double a) {
    Matrix m(1, 1);
    m(0, 0) = a;
    return m;
}

} // namespace

TEST_CASE("average covariance of scaled identities") {
    PopulationMixture mix({Matrix::Identity(3, 3), 3.0 * Matrix::Identity(3, 3)},
                          {0.5, 0.5}, 0.5);
    const Matrix avg = average_covariance(mix);
    CHECK((avg - 2.0 * Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("average covariance of a single population is the population") {
    Matrix a(2, 2);
    a << cplx(2.0, 0.0), cplx(0.3, 0.1), cplx(0.3, -0.1), cplx(1.0, 0.0);
    PopulationMixture mix({a}, {1.0}, 0.5);
    CHECK((average_covariance(mix) - a).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("average covariance with uneven weights") {
    PopulationMixture mix({diag2(1, 1), diag2(1, 5)}, {0.25, 0.75}, 0.5);
    const Matrix avg = average_covariance(mix);
    CHECK(avg(0, 0).real() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(avg(1, 1).real() == doctest::Approx(4.0).epsilon(1e-15));
}

TEST_CASE("average covariance is invariant under relabeling") {
    Matrix a = diag2(1, 2), b = diag2(3, 0.5);
    PopulationMixture fwd({a, b}, {0.3, 0.7}, 0.5);
    PopulationMixture rev({b, a}, {0.7, 0.3}, 0.5);
    CHECK((average_covariance(fwd) - average_covariance(rev)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("eigenvalue pool duplicates the spectrum when K=1") {
    PopulationMixture mix({diag2(1, 8)}, {1.0}, 0.5);
    const auto pool = eigenvalue_pool(mix);
    REQUIRE(pool.size() == 4);
    CHECK(pool[0] == doctest::Approx(1.0));
    CHECK(pool[1] == doctest::Approx(1.0));
    CHECK(pool[2] == doctest::Approx(8.0));
    CHECK(pool[3] == doctest::Approx(8.0));
}

TEST_CASE("eigenvalue pool includes the average covariance") {
    PopulationMixture mix({scalar1(1.0), scalar1(3.0)}, {0.5, 0.5}, 0.5);
    const auto pool = eigenvalue_pool(mix);
    REQUIRE(pool.size() == 3);
    CHECK(pool[0] == doctest::Approx(1.0));
    CHECK(pool[1] == doctest::Approx(2.0));
    CHECK(pool[2] == doctest::Approx(3.0));
}

TEST_CASE("eigenvalue pool of complementary diagonals") {
    PopulationMixture mix({diag2(1, 2), diag2(2, 1)}, {0.5, 0.5}, 0.5);
    const auto pool = eigenvalue_pool(mix);
    const std::vector<double> expected{1.0, 1.0, 1.5, 1.5, 2.0, 2.0};
    REQUIRE(pool.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i)
        CHECK(pool[i] == doctest::Approx(expected[i]).epsilon(1e-12));
}

TEST_CASE("eigenvalue pool of a diagonal mixture is the sorted diagonal multiset") {
    PopulationMixture mix({diag2(4, 1), diag2(2, 6)}, {0.5, 0.5}, 0.5);
    auto pool = eigenvalue_pool(mix);
    std::vector<double> manual{4, 1, 2, 6, 3, 3.5}; // populations plus average
    std::sort(manual.begin(), manual.end());
    REQUIRE(pool.size() == manual.size());
    for (std::size_t i = 0; i < manual.size(); ++i)
        CHECK(pool[i] == doctest::Approx(manual[i]).epsilon(1e-13));
}

TEST_CASE("mixture invariants are enforced") {
    CHECK_THROWS_AS(PopulationMixture({}, {}, 0.5), InvalidProblem);
    CHECK_THROWS_AS(PopulationMixture({diag2(1, 1)}, {0.9}, 0.5), InvalidProblem);
    CHECK_THROWS_AS(PopulationMixture({diag2(1, 1), diag2(1, 1)}, {0.5, 0.6}, 0.5),
                    InvalidProblem);
    CHECK_THROWS_AS(PopulationMixture({diag2(1, 1)}, {1.0}, -0.5), InvalidProblem);
    CHECK_THROWS_AS(PopulationMixture({diag2(1, 1)}, {1.0}, 1.0), InvalidProblem);
    CHECK_THROWS_AS(PopulationMixture({diag2(1, 1)}, {1.0}, 1.0 + 5e-10), InvalidProblem);
    CHECK_NOTHROW(PopulationMixture({diag2(1, 1)}, {1.0}, 1.0 + 2e-9));

    Matrix skew(2, 2);
    skew << 1.0, 0.5, -0.5, 1.0; // not Hermitian
    CHECK_THROWS_AS(PopulationMixture({skew}, {1.0}, 0.5), InvalidProblem);

    CHECK_THROWS_AS(PopulationMixture({diag2(1, -1e-3)}, {1.0}, 0.5), InvalidProblem);
    CHECK_NOTHROW(PopulationMixture({diag2(1, -5e-11)}, {1.0}, 0.5)); // round-off clamp

    CHECK_THROWS_AS(PopulationMixture({diag2(1, 1), Matrix::Identity(3, 3)}, {0.5, 0.5}, 0.5),
                    InvalidProblem);
}

TEST_CASE("round-off eigenvalues clamp to zero") {
    PopulationMixture mix({diag2(1, -5e-11)}, {1.0}, 0.5);
    CHECK(mix.population_eigenvalues(0).front() == 0.0);
}

TEST_CASE("multiplicity denominators") {
    CHECK(multiplicity_denominator({0.5, 0.5}) == 2);
    CHECK(multiplicity_denominator({0.99, 0.01}) == 100);
    CHECK(multiplicity_denominator({1.0 / 3.0, 2.0 / 3.0}) == 3);
    CHECK(multiplicity_denominator({1.0}) == 1);
}

TEST_CASE("two-delta generator realizes equiprobable multiplicities") {
    TestProblem spec;
    spec.kind = ProblemKind::TwoDelta;
    spec.gamma = 0.5;
    spec.lambdas = {1.0, 8.0};
    spec.weights = {0.5, 0.5};
    const auto mix = build_test_problem(spec);
    CHECK(mix.dim() == 100);
    CHECK(mix.population_count() == 1);
    CHECK(mix.diagonal());
    const auto& evals = mix.population_eigenvalues(0);
    CHECK(std::count(evals.begin(), evals.end(), 1.0) == 50);
    CHECK(std::count(evals.begin(), evals.end(), 8.0) == 50);
}

TEST_CASE("skewed two-delta multiplicities") {
    TestProblem spec;
    spec.kind = ProblemKind::TwoDelta;
    spec.gamma = 0.5;
    spec.lambdas = {1.0, 100.0};
    spec.weights = {0.99, 0.01};
    const auto mix = build_test_problem(spec);
    CHECK(mix.dim() == 100);
    const auto& evals = mix.population_eigenvalues(0);
    CHECK(std::count(evals.begin(), evals.end(), 1.0) == 99);
    CHECK(std::count(evals.begin(), evals.end(), 100.0) == 1);
}

TEST_CASE("explicit M must realize the weights exactly") {
    TestProblem spec;
    spec.kind = ProblemKind::TwoDelta;
    spec.lambdas = {1.0, 8.0};
    spec.weights = {0.5, 0.5};
    spec.dim = 101; // odd: 0.5 * 101 is not integral
    CHECK_THROWS_AS(build_test_problem(spec), InvalidProblem);
    spec.dim = 200;
    CHECK(build_test_problem(spec).dim() == 200);
}

TEST_CASE("diag generator matches the shifted-period pattern") {
    TestProblem spec;
    spec.kind = ProblemKind::Diag;
    spec.population_count = 2;
    spec.dim = 4;
    spec.gamma = 0.5;
    const auto mix = build_test_problem(spec);
    REQUIRE(mix.population_count() == 2);
    const std::vector<double> first{2, 1, 2, 1}, second{1, 2, 1, 2};
    for (int m = 0; m < 4; ++m) {
        CHECK(mix.population(0)(m, m).real() == first[static_cast<std::size_t>(m)]);
        CHECK(mix.population(1)(m, m).real() == second[static_cast<std::size_t>(m)]);
    }
}

TEST_CASE("corr generator reduces to diag as rho vanishes") {
    TestProblem corr;
    corr.kind = ProblemKind::Corr;
    corr.population_count = 1;
    corr.dim = 6;
    corr.gamma = 0.5;
    corr.rho = 1e-14;
    corr.ell = 0.25;
    const auto mix = build_test_problem(corr);
    TestProblem diag = corr;
    diag.kind = ProblemKind::Diag;
    const auto ref = build_test_problem(diag);
    CHECK((mix.population(0) - ref.population(0)).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("mp generator uses the minimum discretization") {
    TestProblem spec;
    spec.kind = ProblemKind::Mp;
    spec.gamma = 0.5;
    const auto mix = build_test_problem(spec);
    CHECK(mix.dim() == 100);
    CHECK((mix.population(0) - Matrix::Identity(100, 100)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("diagonal profiles group repeated tuples") {
    TestProblem spec;
    spec.kind = ProblemKind::Diag;
    spec.population_count = 6;
    spec.dim = 120;
    spec.gamma = 0.5;
    const auto mix = build_test_problem(spec);
    CHECK(mix.diagonal_profiles().size() == 6);
    int total = 0;
    for (const auto& p : mix.diagonal_profiles()) total += p.count;
    CHECK(total == 120);
}

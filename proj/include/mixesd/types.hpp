#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace mixesd {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

constexpr double kPi = 3.14159265358979323846;

/// Thrown when a problem definition violates a model invariant.
class InvalidProblem : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a linear-algebra kernel cannot produce finite results,
/// typically because the resolvent is evaluated too close to the real axis.
class NumericBreakdown : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace mixesd

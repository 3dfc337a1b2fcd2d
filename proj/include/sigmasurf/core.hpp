#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace sigmasurf {

using cd = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr cd I{0.0, 1.0};

// A point (xi_L, xi_R) of the light-cone domain.
struct Point {
    double l = 0.0;
    double r = 0.0;
};

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Matrix or basis sizes that do not agree.
class DimensionError : public Error {
  public:
    using Error::Error;
};

// Point, stencil or path outside the domain or inside the excluded set.
class DomainError : public Error {
  public:
    using Error::Error;
};

// Degenerate metric, vanishing denominators, poles of a chart.
class SingularityError : public Error {
  public:
    using Error::Error;
};

// A Chebyshev-gauge precondition does not hold.
class GaugeError : public Error {
  public:
    using Error::Error;
};

// Invalid family or algorithm parameters.
class ParameterError : public Error {
  public:
    using Error::Error;
};

// Malformed or out-of-range configuration (CLI exit code 2).
class ConfigError : public Error {
  public:
    using Error::Error;
};

inline std::string fmt_point(Point p) {
    return "(" + std::to_string(p.l) + ", " + std::to_string(p.r) + ")";
}

}  // namespace sigmasurf

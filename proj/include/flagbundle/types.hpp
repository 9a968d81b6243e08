#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace flagbundle {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

/// Coefficient list c[k] ~ z^k; doubles as a truncated power series.
using Poly = std::vector<Complex>;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DomainError : Error {
    using Error::Error;
};

struct DimensionError : Error {
    using Error::Error;
};

/// Assembly/verification of a flag operator failed; carries the offending residual.
struct FlagViolation : Error {
    double residual;
    FlagViolation(const std::string& msg, double r) : Error(msg), residual(r) {}
};

/// The alternating defect sum is not positive semidefinite.
struct NotHypercontraction : Error {
    double min_eigenvalue;
    NotHypercontraction(const std::string& msg, double ev) : Error(msg), min_eigenvalue(ev) {}
};

struct DegenerateFrame : Error {
    using Error::Error;
};

struct InvalidFrame : Error {
    using Error::Error;
};

struct SingularityError : Error {
    using Error::Error;
};

/// Intertwiner back-substitution became inconsistent; carries the failing level.
struct ConstructionFailed : Error {
    int level;
    ConstructionFailed(const std::string& msg, int lvl) : Error(msg), level(lvl) {}
};

struct SchemaError : Error {
    std::vector<std::string> violations;
    explicit SchemaError(std::vector<std::string> v)
        : Error(v.empty() ? std::string("schema error") : v.front()), violations(std::move(v)) {}
};

}  // namespace flagbundle

#pragma once

#include <complex>
#include <iosfwd>
#include <string>

#include <Eigen/Dense>

#include "smech/operators.hpp"

namespace smech {

// Time-t transition kernel e^{tG}. Real kernels are the stochastic ones.
template <typename Scalar>
struct Kernel {
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> values;
    double t = 0.0;
    std::string source;

    Eigen::Index dimension() const noexcept { return values.rows(); }
};

using FiberKernel = Kernel<double>;
using ComplexKernel = Kernel<Complex>;

inline constexpr Eigen::Index kDefaultDenseCap = 4096;

struct ExpmOptions {
    Eigen::Index dense_cap = kDefaultDenseCap;
    // Additional halvings beyond the Pade-13 requirement; 1 gives the
    // recomputation used for the self-consistency residual.
    int extra_squarings = 0;
};

Eigen::MatrixXd expm_dense(const Eigen::MatrixXd& a, double t, const ExpmOptions& options = {});
Eigen::MatrixXcd expm_dense(const Eigen::MatrixXcd& a, double t, const ExpmOptions& options = {});

FiberKernel expm_dense(const SparseGenerator& gen, double t, const ExpmOptions& options = {});
ComplexKernel expm_dense(const ComplexOperator& op, Complex scale, double t,
                         const ExpmOptions& options = {});

// Relative difference between the default exponential and one computed with an
// extra squaring step.
double expm_self_residual(const Eigen::MatrixXcd& a, double t);

struct UniformizationOptions {
    double tol = 1e-12;  // Poisson tail mass; leaves headroom under the 1e-10 stochasticity bound
    double rate_factor = 1.05;      // Lambda = rate_factor * max |diagonal|
    double max_poisson_mean = 64.0; // larger Lambda t is split and squared
    Eigen::Index dense_cap = kDefaultDenseCap;
};

// e^{tG} = e^{-Lambda t} sum_k (Lambda t)^k / k! P^k with P = I + G / Lambda.
FiberKernel uniformize(const SparseGenerator& gen, double t, const UniformizationOptions& options = {});

// Number of Poisson terms kept for mean `mean` so the neglected tail is < tol.
int poisson_truncation(double mean, double tol);

struct ActionOptions {
    double tol = 1e-8;
    int max_terms = 200;
};

struct ActionResult {
    Eigen::VectorXcd value;
    double error_estimate = 0.0;
    int substeps = 0;
};

// e^{t scale A} v by a substepped Taylor series; throws ConvergenceFailure if a
// substep does not converge within max_terms.
ActionResult expm_action(const ComplexSparse& a, Complex scale, const Eigen::VectorXcd& v, double t,
                         const ActionOptions& options = {});
ActionResult expm_action(const SparseGenerator& gen, const Eigen::VectorXcd& v, double t,
                         const ActionOptions& options = {});

// Dense row-major CSV; complex entries as "re,im" pairs.
void write_csv(std::ostream& out, const FiberKernel& kernel, const std::string& provenance = {});
void write_csv(std::ostream& out, const ComplexKernel& kernel, const std::string& provenance = {});
void write_csv(std::ostream& out, const Eigen::MatrixXcd& values, const std::string& provenance = {});

}  // namespace smech

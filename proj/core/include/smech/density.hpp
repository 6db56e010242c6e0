#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "smech/operators.hpp"

namespace smech {

// Classical joint density over (xi, nu; x, n), stored as a 4N x 4N matrix with
// row 4 xi + nu and column 4 x + n. amplitude_scale is the l1 mass of the
// quantum matrix it was prepared from; phase averaging multiplies it back.
struct JointDensity {
    Eigen::MatrixXd values;
    double t = 0.0;
    double amplitude_scale = 1.0;

    SiteIndex num_sites() const noexcept { return static_cast<SiteIndex>(values.rows() / kFiberSize); }
    double operator()(SiteIndex xi, int nu, SiteIndex x, int n) const {
        return values(fiber_state(xi, nu), fiber_state(x, n));
    }
    // Throws InvalidArgument unless entries >= -tol and the sum is 1 within tol.
    void validate(double tol = 1e-12) const;
};

// Quantum density matrix rho_q(xi, x): row xi, column x. A pure state psi is
// conj(psi_xi) psi_x.
struct DensityMatrix {
    Eigen::MatrixXcd values;
    double t = 0.0;

    Eigen::Index dimension() const noexcept { return values.rows(); }
    double hermiticity_error() const;
    Complex trace() const { return values.trace(); }
    double purity() const;
    double min_eigenvalue() const;
    DensityMatrix normalized() const;
    // Throws InvalidArgument on Hermiticity, trace or positivity violations.
    void validate(double hermitian_tol = 1e-10, double trace_tol = 1e-8, double eig_tol = 1e-8) const;
};

// Quantum observable F_q in the same index order as DensityMatrix.
struct Observable {
    Eigen::MatrixXcd values;

    Eigen::Index dimension() const noexcept { return values.rows(); }
    double hermiticity_error() const;
    void validate(double tol = 1e-12) const;

    static Observable diagonal(const Eigen::VectorXd& entries);
    static Observable position_projector(SiteIndex num_sites, SiteIndex site);
    static Observable from_operator(const ComplexOperator& op);
};

// F_c(xi, nu; x, n) = i^{n + nu} F_q(x, xi), laid out like JointDensity.
struct LiftedObservable {
    Eigen::MatrixXcd values;
};

DensityMatrix pure_density(const Eigen::VectorXcd& psi);
DensityMatrix mixed_density(const std::vector<double>& weights, const std::vector<Eigen::VectorXcd>& states);

// Joint density whose phase average at t = 0 is rho: the signed real and
// imaginary parts of each entry sit at nu = 0 and n = 0, 2, 1, 3.
JointDensity prepare_joint_density(const DensityMatrix& rho);

// Outer product of two densities on lattice x Z4.
JointDensity product_density(const Eigen::VectorXd& left, const Eigen::VectorXd& right);

// Applies e^{tG} on the (xi, nu) legs and e^{tL} on the (x, n) legs, with G
// the conjugate generator and L the lifted one.
JointDensity evolve_joint_density(const JointDensity& rho, const ModelSpec& model, double t);

// e^{2 Re(c0) t} S sum_{n, nu} i^{n + nu} rho_c(xi, nu; x, n).
DensityMatrix phase_average(const JointDensity& rho, const ModelSpec& model,
                            double exponent_cap = 40.0);

// U(t) rho U(t)^dagger with U(t) = (e^{itH/hbar})^dagger, which is
// e^{-itH/hbar} when H is Hermitian.
DensityMatrix evolve_quantum(const DensityMatrix& rho, const ModelSpec& model, double t);

struct Theorem1Report {
    double residual = 0.0;  // max entrywise deviation
    DensityMatrix classical;
    DensityMatrix quantum;
};

Theorem1Report verify_theorem1(const JointDensity& rho0, const ModelSpec& model, double t);

LiftedObservable lift_observable(const Observable& f);

// e^{2 Re(c0) t} S sum F_c rho_c; equals Tr(rho_q F_q).
Complex classical_expectation(const LiftedObservable& f, const JointDensity& rho, const ModelSpec& model);
Complex quantum_expectation(const DensityMatrix& rho, const Observable& f);

struct PureStateResult {
    bool is_pure = false;
    std::optional<Eigen::VectorXcd> wavefunction;
    double second_eigenvalue = 0.0;
    double residual = 0.0;
};

PureStateResult pure_state_check(const DensityMatrix& rho, double tol = 1e-8);

// Relative gap used to cluster degenerate eigenvalues.
inline constexpr double kEigenClusterGap = 1e-8;

// Orthogonal projector onto the eigenspace of g; throws EigenvalueNotFound.
Eigen::MatrixXcd spectral_projector(const Observable& g_obs, double g, double tol = 1e-8);

struct ConditionResult {
    DensityMatrix state;
    double g = 0.0;
    double probability = 0.0;
    double purity = 0.0;
};

// P rho P / Tr(P rho P); throws ZeroProbabilityEvent when the trace is <= tol.
ConditionResult condition(const DensityMatrix& rho, const Observable& g_obs, double g, double tol = 1e-8);

double commutator_norm(const Observable& f, const Observable& g);
bool commute_check(const Observable& f, const Observable& g, double tol = 1e-10);

// sum_{xi != x} |rho(xi, x)|.
double off_diagonal_mass(const DensityMatrix& rho);

void write_csv(std::ostream& out, const DensityMatrix& rho, const std::string& provenance = {});
// Nonzero entries as xi,nu,x,n,value.
void write_sparse_csv(std::ostream& out, const JointDensity& rho, const std::string& provenance = {});
void write_json(std::ostream& out, const ConditionResult& result);

}  // namespace smech

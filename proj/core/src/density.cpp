#include "smech/density.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "smech/equivalence.hpp"
#include "smech/error.hpp"
#include "smech/semigroup.hpp"

namespace smech {

namespace {

double max_abs(const Eigen::MatrixXcd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

void require_square(const Eigen::MatrixXcd& m, const char* what) {
    if (m.rows() != m.cols()) throw DimensionMismatch(std::string(what) + " must be square");
}

void require_sites(const JointDensity& rho, const ModelSpec& model) {
    if (rho.values.rows() != rho.values.cols() || rho.num_sites() != model.num_sites() ||
        rho.values.rows() != static_cast<Eigen::Index>(model.num_sites()) * kFiberSize)
        throw DimensionMismatch("joint density does not match the model lattice x Z4");
}

// Joint correction exponent 2 Re(c0): the conjugate generator contributes conj(c0).
Complex joint_constant(const ModelSpec& model) {
    const Complex c0 = derive_sector_constant(model).c0;
    return c0 + std::conj(c0);
}

}  // namespace

void JointDensity::validate(double tol) const {
    if (values.rows() != values.cols() || values.rows() % kFiberSize != 0)
        throw DimensionMismatch("joint density must be square on lattice x Z4");
    if (values.size() && values.minCoeff() < -tol) throw InvalidArgument("joint density has a negative entry");
    if (std::abs(values.sum() - 1.0) > tol) throw InvalidArgument("joint density does not sum to one");
}

double DensityMatrix::hermiticity_error() const { return max_abs(values - values.adjoint()); }

double DensityMatrix::purity() const { return (values * values).trace().real(); }

double DensityMatrix::min_eigenvalue() const {
    const Eigen::MatrixXcd h = 0.5 * (values + values.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

DensityMatrix DensityMatrix::normalized() const {
    const Complex tr = trace();
    if (std::abs(tr) == 0.0) throw ZeroProbabilityEvent("density matrix has zero trace");
    return {values / tr, t};
}

void DensityMatrix::validate(double hermitian_tol, double trace_tol, double eig_tol) const {
    require_square(values, "density matrix");
    if (hermiticity_error() > hermitian_tol) throw InvalidArgument("density matrix is not Hermitian");
    if (std::abs(trace() - 1.0) > trace_tol) throw InvalidArgument("density matrix trace is not one");
    if (min_eigenvalue() < -eig_tol) throw InvalidArgument("density matrix has a negative eigenvalue");
}

double Observable::hermiticity_error() const { return max_abs(values - values.adjoint()); }

void Observable::validate(double tol) const {
    require_square(values, "observable");
    if (hermiticity_error() > tol) throw InvalidArgument("observable is not Hermitian");
}

Observable Observable::diagonal(const Eigen::VectorXd& entries) {
    return {entries.cast<Complex>().asDiagonal()};
}

Observable Observable::position_projector(SiteIndex num_sites, SiteIndex site) {
    if (site < 0 || site >= num_sites) throw OutOfRange("projector site outside the lattice");
    Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(num_sites, num_sites);
    p(site, site) = 1.0;
    return {p};
}

Observable Observable::from_operator(const ComplexOperator& op) { return {Eigen::MatrixXcd(op.matrix)}; }

DensityMatrix pure_density(const Eigen::VectorXcd& psi) {
    const double norm = psi.norm();
    if (norm == 0.0) throw InvalidArgument("wavefunction has zero norm");
    const Eigen::VectorXcd u = psi / norm;
    return {u.conjugate() * u.transpose(), 0.0};
}

DensityMatrix mixed_density(const std::vector<double>& weights, const std::vector<Eigen::VectorXcd>& states) {
    if (weights.empty() || weights.size() != states.size())
        throw InvalidArgument("mixture needs one weight per state");
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw InvalidArgument("mixture weights must be nonnegative");
        total += w;
    }
    if (total <= 0.0) throw InvalidArgument("mixture weights sum to zero");
    const auto n = states.front().size();
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(n, n);
    for (std::size_t k = 0; k < states.size(); ++k) {
        if (states[k].size() != n) throw DimensionMismatch("mixture states differ in size");
        rho += weights[k] / total * pure_density(states[k]).values;
    }
    return {rho, 0.0};
}

JointDensity prepare_joint_density(const DensityMatrix& rho) {
    require_square(rho.values, "density matrix");
    const auto n = rho.dimension();
    JointDensity out{Eigen::MatrixXd::Zero(n * kFiberSize, n * kFiberSize), rho.t, 1.0};
    for (Eigen::Index xi = 0; xi < n; ++xi)
        for (Eigen::Index x = 0; x < n; ++x) {
            const Complex z = rho.values(xi, x);
            const auto row = fiber_state(xi, 0);
            out.values(row, fiber_state(x, 0)) = std::max(z.real(), 0.0);
            out.values(row, fiber_state(x, 2)) = std::max(-z.real(), 0.0);
            out.values(row, fiber_state(x, 1)) = std::max(z.imag(), 0.0);
            out.values(row, fiber_state(x, 3)) = std::max(-z.imag(), 0.0);
        }
    const double mass = out.values.sum();
    if (mass == 0.0) throw InvalidArgument("cannot prepare a joint density from the zero matrix");
    out.values /= mass;
    out.amplitude_scale = mass;
    return out;
}

JointDensity product_density(const Eigen::VectorXd& left, const Eigen::VectorXd& right) {
    if (left.size() != right.size() || left.size() % kFiberSize != 0)
        throw DimensionMismatch("product density factors must live on the same lattice x Z4");
    return {left * right.transpose(), 0.0, 1.0};
}

JointDensity evolve_joint_density(const JointDensity& rho, const ModelSpec& model, double t) {
    require_sites(rho, model);
    if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument("time must be finite and non-negative");
    if (t == 0.0) return rho;
    const auto left = uniformize(build_conjugate_generator(model), t);
    const auto right = uniformize(build_lifted_generator(model), t);
    JointDensity out{left.values.transpose() * rho.values * right.values, rho.t + t, rho.amplitude_scale};
    return out;
}

DensityMatrix phase_average(const JointDensity& rho, const ModelSpec& model, double exponent_cap) {
    require_sites(rho, model);
    const Complex joint = joint_constant(model);
    check_exponent_cap(joint, rho.t, exponent_cap);
    const double factor = std::exp(joint.real() * rho.t) * rho.amplitude_scale;
    const auto n = static_cast<Eigen::Index>(rho.num_sites());
    Eigen::MatrixXcd out(n, n);
    for (Eigen::Index xi = 0; xi < n; ++xi)
        for (Eigen::Index x = 0; x < n; ++x) {
            Complex acc{};
            for (int nu = 0; nu < kFiberSize; ++nu)
                for (int w = 0; w < kFiberSize; ++w) acc += i_power(w + nu) * rho(xi, nu, x, w);
            out(xi, x) = factor * acc;
        }
    return {out, rho.t};
}

DensityMatrix evolve_quantum(const DensityMatrix& rho, const ModelSpec& model, double t) {
    if (rho.dimension() != static_cast<Eigen::Index>(model.num_sites()))
        throw DimensionMismatch("density matrix does not match the model lattice");
    const Eigen::MatrixXcd w = quantum_propagator(model, t);
    return {w.adjoint() * rho.values * w, rho.t + t};
}

Theorem1Report verify_theorem1(const JointDensity& rho0, const ModelSpec& model, double t) {
    const auto initial = phase_average(rho0, model);
    Theorem1Report report;
    report.classical = phase_average(evolve_joint_density(rho0, model, t), model);
    report.quantum = evolve_quantum(initial, model, t);
    report.residual = max_abs(report.classical.values - report.quantum.values);
    return report;
}

LiftedObservable lift_observable(const Observable& f) {
    require_square(f.values, "observable");
    const auto n = f.dimension();
    Eigen::MatrixXcd out(n * kFiberSize, n * kFiberSize);
    for (Eigen::Index xi = 0; xi < n; ++xi)
        for (int nu = 0; nu < kFiberSize; ++nu)
            for (Eigen::Index x = 0; x < n; ++x)
                for (int w = 0; w < kFiberSize; ++w)
                    out(fiber_state(xi, nu), fiber_state(x, w)) = i_power(w + nu) * f.values(x, xi);
    return {out};
}

Complex classical_expectation(const LiftedObservable& f, const JointDensity& rho, const ModelSpec& model) {
    require_sites(rho, model);
    if (f.values.rows() != rho.values.rows() || f.values.cols() != rho.values.cols())
        throw DimensionMismatch("lifted observable does not match the joint density");
    const double factor = std::exp(joint_constant(model).real() * rho.t) * rho.amplitude_scale;
    return factor * (f.values.array() * rho.values.cast<Complex>().array()).sum();
}

Complex quantum_expectation(const DensityMatrix& rho, const Observable& f) {
    if (rho.dimension() != f.dimension()) throw DimensionMismatch("observable does not match the state");
    return (rho.values * f.values).trace();
}

PureStateResult pure_state_check(const DensityMatrix& rho, double tol) {
    require_square(rho.values, "density matrix");
    PureStateResult result;
    const Eigen::MatrixXcd h = 0.5 * (rho.values + rho.values.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    const auto n = h.rows();
    if (n == 0) return result;
    const double top = es.eigenvalues()(n - 1);
    result.second_eigenvalue = n > 1 ? std::max(std::abs(es.eigenvalues()(n - 2)), std::abs(es.eigenvalues()(0)))
                                     : 0.0;
    if (top <= 0.0) {
        result.residual = max_abs(rho.values);
        return result;
    }
    const Eigen::VectorXcd v = es.eigenvectors().col(n - 1);
    const Eigen::VectorXcd psi = std::sqrt(top) * v.conjugate();
    result.residual = max_abs(rho.values - psi.conjugate() * psi.transpose());
    result.is_pure = result.second_eigenvalue < tol && result.residual < tol;
    if (result.is_pure) result.wavefunction = v.conjugate();
    return result;
}

Eigen::MatrixXcd spectral_projector(const Observable& g_obs, double g, double tol) {
    g_obs.validate(std::max(tol, 1e-12));
    const Eigen::MatrixXcd h = 0.5 * (g_obs.values + g_obs.values.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    const auto& ev = es.eigenvalues();
    Eigen::Index nearest = 0;
    for (Eigen::Index k = 1; k < ev.size(); ++k)
        if (std::abs(ev(k) - g) < std::abs(ev(nearest) - g)) nearest = k;
    if (ev.size() == 0 || std::abs(ev(nearest) - g) > tol) {
        std::ostringstream msg;
        msg << "no eigenvalue within " << tol << " of g = " << g;
        throw EigenvalueNotFound(msg.str());
    }
    const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
    Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(h.rows(), h.cols());
    for (Eigen::Index k = 0; k < ev.size(); ++k)
        if (std::abs(ev(k) - ev(nearest)) <= kEigenClusterGap * scale) {
            const auto v = es.eigenvectors().col(k);
            p += v * v.adjoint();
        }
    return p;
}

ConditionResult condition(const DensityMatrix& rho, const Observable& g_obs, double g, double tol) {
    if (rho.dimension() != g_obs.dimension()) throw DimensionMismatch("observable does not match the state");
    const Eigen::MatrixXcd p = spectral_projector(g_obs, g, tol);
    const Eigen::MatrixXcd projected = p * rho.values * p;
    const double probability = projected.trace().real();
    if (probability <= tol) {
        std::ostringstream msg;
        msg << "conditioning event g = " << g << " has probability " << probability;
        throw ZeroProbabilityEvent(msg.str());
    }
    ConditionResult result;
    result.state = {projected / probability, rho.t};
    result.g = g;
    result.probability = probability;
    result.purity = result.state.purity();
    return result;
}

double commutator_norm(const Observable& f, const Observable& g) {
    if (f.dimension() != g.dimension()) throw DimensionMismatch("observables differ in size");
    return max_abs(f.values * g.values - g.values * f.values);
}

bool commute_check(const Observable& f, const Observable& g, double tol) { return commutator_norm(f, g) <= tol; }

double off_diagonal_mass(const DensityMatrix& rho) {
    double mass = 0.0;
    for (Eigen::Index r = 0; r < rho.values.rows(); ++r)
        for (Eigen::Index c = 0; c < rho.values.cols(); ++c)
            if (r != c) mass += std::abs(rho.values(r, c));
    return mass;
}

void write_csv(std::ostream& out, const DensityMatrix& rho, const std::string& provenance) {
    write_csv(out, ComplexKernel{rho.values, rho.t, "density"}, provenance);
}

void write_sparse_csv(std::ostream& out, const JointDensity& rho, const std::string& provenance) {
    out << "# smech-joint-density t=" << rho.t << " amplitude_scale=" << rho.amplitude_scale;
    if (!provenance.empty()) out << ' ' << provenance;
    out << "\nxi,nu,x,n,value\n";
    out.precision(17);
    const auto n = rho.num_sites();
    for (SiteIndex xi = 0; xi < n; ++xi)
        for (int nu = 0; nu < kFiberSize; ++nu)
            for (SiteIndex x = 0; x < n; ++x)
                for (int w = 0; w < kFiberSize; ++w)
                    if (const double v = rho(xi, nu, x, w); v != 0.0)
                        out << xi << ',' << nu << ',' << x << ',' << w << ',' << v << '\n';
}

void write_json(std::ostream& out, const ConditionResult& result) {
    const nlohmann::json j{{"g", result.g}, {"probability", result.probability}, {"purity", result.purity}};
    out << j.dump(2) << '\n';
}

}  // namespace smech

#include "smech/operators.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <vector>

#include "smech/error.hpp"

namespace smech {

namespace {

constexpr double kDropBelow = 1e-15;

template <typename Scalar>
Eigen::SparseMatrix<Scalar, Eigen::RowMajor> assemble(Eigen::Index dim,
                                                      const std::vector<Eigen::Triplet<Scalar>>& t) {
    Eigen::SparseMatrix<Scalar, Eigen::RowMajor> m(dim, dim);
    m.setFromTriplets(t.begin(), t.end());
    m.prune([](Eigen::Index, Eigen::Index, const Scalar& v) { return std::abs(v) >= kDropBelow; });
    m.makeCompressed();
    return m;
}

// Jump list out of a single lifted state, shared by both lifted generators.
// orientation = +1 for the lifted generator, -1 for its mirror.
SparseGenerator build_lifted(const ModelSpec& model, int orientation) {
    const auto& lattice = model.lattice();
    const double kappa = model.hop_rate();
    const double alpha = model.vector_coupling();
    const double hbar = model.constants().hbar;
    const double k0 = model.k0();
    const auto n_sites = lattice.num_sites();

    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(n_sites) * kFiberSize * (4 * lattice.dimension() + 3));
    for (SiteIndex x = 0; x < n_sites; ++x) {
        const auto& a = model.fields().vector_potential[static_cast<std::size_t>(x)];
        const double v = model.potential(x);
        const double up = k0 / hbar + orientation * v / (2.0 * hbar);
        const double down = k0 / hbar - orientation * v / (2.0 * hbar);
        if (up < -kDropBelow || down < -kDropBelow)
            throw NegativeRate("winding jump rate negative at site " + std::to_string(x) +
                               " (|V| > 2 K0)");
        for (int n = 0; n < kFiberSize; ++n) {
            const auto s = fiber_state(x, n);
            double diagonal = 0.0;
            for (int axis = 0; axis < lattice.dimension(); ++axis) {
                const auto [a_plus, a_minus] = split_vector_potential(a[static_cast<std::size_t>(axis)]);
                const auto forward = lattice.neighbor(x, axis, +1);
                const auto backward = lattice.neighbor(x, axis, -1);
                t.emplace_back(s, fiber_state(forward, n - orientation), kappa);
                t.emplace_back(s, fiber_state(backward, n - orientation), kappa);
                t.emplace_back(s, fiber_state(forward, n), kappa * alpha * a_minus);
                t.emplace_back(s, fiber_state(backward, n), kappa * alpha * a_plus);
                diagonal -= kappa * (2.0 + alpha * a_minus + alpha * a_plus);
            }
            t.emplace_back(s, fiber_state(x, n + 1), up);
            t.emplace_back(s, fiber_state(x, n - 1), down);
            diagonal -= up + down;
            t.emplace_back(s, s, diagonal);
        }
    }
    SparseGenerator g{assemble<double>(static_cast<Eigen::Index>(n_sites) * kFiberSize, t),
                      StateSpace::LatticeZ4};
    if (g.min_off_diagonal() < 0.0) throw NegativeRate("lifted generator has a negative rate");
    return g;
}

template <typename Scalar>
Eigen::MatrixXcd fiber_fourier_impl(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& kernel,
                                    double p) {
    if (kernel.rows() != kernel.cols() || kernel.rows() % kFiberSize != 0)
        throw DimensionMismatch("fiber_fourier expects a square kernel on lattice x Z4");
    const int j = sector_index(p);
    const auto n_sites = kernel.rows() / kFiberSize;
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n_sites, n_sites);
    for (Eigen::Index x = 0; x < n_sites; ++x)
        for (Eigen::Index y = 0; y < n_sites; ++y) {
            Complex acc{};
            for (int n = 0; n < kFiberSize; ++n)
                acc += i_power(j * n) * Complex(kernel(x * kFiberSize, y * kFiberSize + n));
            out(x, y) = acc;
        }
    return out;
}

}  // namespace

Complex i_power(int k) noexcept {
    switch (wrap_winding(k)) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
    }
}

double SparseGenerator::max_abs_row_sum() const {
    double worst = 0.0;
    for (Eigen::Index r = 0; r < matrix.outerSize(); ++r) {
        double sum = 0.0;
        for (RealSparse::InnerIterator it(matrix, r); it; ++it) sum += it.value();
        worst = std::max(worst, std::abs(sum));
    }
    return worst;
}

double SparseGenerator::min_off_diagonal() const {
    double lowest = 0.0;
    for (Eigen::Index r = 0; r < matrix.outerSize(); ++r)
        for (RealSparse::InnerIterator it(matrix, r); it; ++it)
            if (it.col() != r) lowest = std::min(lowest, it.value());
    return lowest;
}

double SparseGenerator::max_abs_diagonal() const {
    double m = 0.0;
    for (Eigen::Index r = 0; r < matrix.rows(); ++r) m = std::max(m, std::abs(matrix.coeff(r, r)));
    return m;
}

void SparseGenerator::validate(double tol) const {
    if (matrix.rows() != matrix.cols()) throw NotMarkov("generator must be square");
    if (min_off_diagonal() < 0.0) throw NotMarkov("generator has a negative off-diagonal rate");
    const double scale = std::max(1.0, max_abs_diagonal());
    if (max_abs_row_sum() > tol * scale)
        throw NotMarkov("generator rows do not sum to zero (worst |sum| = " +
                        std::to_string(max_abs_row_sum()) + ")");
}

double ComplexOperator::hermiticity_error() const {
    const ComplexSparse adjoint = matrix.adjoint();
    const ComplexSparse diff = matrix - adjoint;
    double worst = 0.0;
    for (Eigen::Index r = 0; r < diff.outerSize(); ++r)
        for (ComplexSparse::InnerIterator it(diff, r); it; ++it) worst = std::max(worst, std::abs(it.value()));
    return worst;
}

SparseGenerator build_base_generator(const ModelSpec& model) {
    const auto& lattice = model.lattice();
    const double kappa = model.hop_rate();
    const double alpha = model.vector_coupling();
    std::vector<Eigen::Triplet<double>> t;
    for (SiteIndex x = 0; x < lattice.num_sites(); ++x) {
        const auto& a = model.fields().vector_potential[static_cast<std::size_t>(x)];
        double diagonal = 0.0;
        for (int axis = 0; axis < lattice.dimension(); ++axis) {
            const auto [a_plus, a_minus] = split_vector_potential(a[static_cast<std::size_t>(axis)]);
            const double forward_rate = kappa * (1.0 + alpha * a_minus);
            const double backward_rate = kappa * (1.0 + alpha * a_plus);
            if (forward_rate < 0.0 || backward_rate < 0.0)
                throw NegativeRate("base hop rate negative at site " + std::to_string(x));
            t.emplace_back(x, lattice.neighbor(x, axis, +1), forward_rate);
            t.emplace_back(x, lattice.neighbor(x, axis, -1), backward_rate);
            diagonal -= forward_rate + backward_rate;
        }
        t.emplace_back(x, x, diagonal);
    }
    return {assemble<double>(lattice.num_sites(), t), StateSpace::BaseLattice};
}

SparseGenerator build_lifted_generator(const ModelSpec& model) { return build_lifted(model, +1); }

SparseGenerator build_conjugate_generator(const ModelSpec& model) { return build_lifted(model, -1); }

ComplexOperator build_sector_generator(const ModelSpec& model, double p) {
    const auto& lattice = model.lattice();
    const double kappa = model.hop_rate();
    const double alpha = model.vector_coupling();
    const double hbar = model.constants().hbar;
    const Complex forward_phase = std::polar(1.0, p);
    const Complex backward_phase = std::polar(1.0, -p);

    std::vector<Eigen::Triplet<Complex>> t;
    for (SiteIndex x = 0; x < lattice.num_sites(); ++x) {
        const auto& a = model.fields().vector_potential[static_cast<std::size_t>(x)];
        Complex diagonal{};
        for (int axis = 0; axis < lattice.dimension(); ++axis) {
            const auto [a_plus, a_minus] = split_vector_potential(a[static_cast<std::size_t>(axis)]);
            const auto forward = lattice.neighbor(x, axis, +1);
            const auto backward = lattice.neighbor(x, axis, -1);
            t.emplace_back(x, forward, kappa * (backward_phase + alpha * a_minus));
            t.emplace_back(x, backward, kappa * (backward_phase + alpha * a_plus));
            diagonal -= kappa * (2.0 + alpha * a_minus + alpha * a_plus);
        }
        const double v = model.potential(x);
        diagonal += v / (2.0 * hbar) * (forward_phase - backward_phase);
        diagonal += model.k0() / hbar * (forward_phase + backward_phase - 2.0);
        t.emplace_back(x, x, diagonal);
    }
    return {assemble<Complex>(lattice.num_sites(), t), OperatorTag::SectorGenerator, p};
}

ComplexOperator build_hamiltonian(const ModelSpec& model, GradientScheme scheme) {
    const auto& lattice = model.lattice();
    const auto& k = model.constants();
    const double a = lattice.spacing();
    const double kinetic = k.hbar * k.hbar / (2.0 * k.mass * a * a);
    // (i e hbar / c m) / a
    const Complex coupling(0.0, k.charge * k.hbar / (k.light_speed * k.mass * a));

    std::vector<Eigen::Triplet<Complex>> t;
    for (SiteIndex x = 0; x < lattice.num_sites(); ++x) {
        const auto& ax = model.fields().vector_potential[static_cast<std::size_t>(x)];
        Complex diagonal = model.potential(x);
        for (int axis = 0; axis < lattice.dimension(); ++axis) {
            const auto i = static_cast<std::size_t>(axis);
            const auto forward = lattice.neighbor(x, axis, +1);
            const auto backward = lattice.neighbor(x, axis, -1);
            t.emplace_back(x, forward, -kinetic);
            t.emplace_back(x, backward, -kinetic);
            diagonal += 2.0 * kinetic;
            if (scheme == GradientScheme::Upwind) {
                const auto [a_plus, a_minus] = split_vector_potential(ax[i]);
                // A+ (f(x) - f(x-a)) - A- (f(x+a) - f(x))
                t.emplace_back(x, backward, -coupling * a_plus);
                t.emplace_back(x, forward, -coupling * a_minus);
                diagonal += coupling * (a_plus + a_minus);
            } else {
                const auto& af = model.fields().vector_potential[static_cast<std::size_t>(forward)];
                const auto& ab = model.fields().vector_potential[static_cast<std::size_t>(backward)];
                t.emplace_back(x, forward, coupling * 0.25 * (ax[i] + af[i]));
                t.emplace_back(x, backward, -coupling * 0.25 * (ax[i] + ab[i]));
            }
        }
        t.emplace_back(x, x, diagonal);
    }
    return {assemble<Complex>(lattice.num_sites(), t), OperatorTag::Hamiltonian, 0.0};
}

int sector_index(double p) {
    const double quarter = std::numbers::pi / 2.0;
    const double k = p / quarter;
    const double nearest = std::round(k);
    if (std::abs(k - nearest) > 1e-9)
        throw InvalidArgument("Z4 fiber transform needs p to be a multiple of pi/2");
    return wrap_winding(static_cast<int>(nearest));
}

Eigen::MatrixXcd fiber_fourier_matrix(SiteIndex num_sites) {
    const auto n = static_cast<Eigen::Index>(num_sites);
    Eigen::MatrixXcd f = Eigen::MatrixXcd::Zero(kFiberSize * n, kFiberSize * n);
    for (int j = 0; j < kFiberSize; ++j)
        for (Eigen::Index x = 0; x < n; ++x)
            for (int w = 0; w < kFiberSize; ++w)
                f(j * n + x, fiber_state(x, w)) = 0.5 * i_power(-j * w);
    return f;
}

Eigen::MatrixXcd fiber_fourier(const Eigen::MatrixXd& kernel, double p) {
    return fiber_fourier_impl(kernel, p);
}

Eigen::MatrixXcd fiber_fourier(const Eigen::MatrixXcd& kernel, double p) {
    return fiber_fourier_impl(kernel, p);
}

double winding_drift(const SparseGenerator& lifted, SiteIndex site) {
    if (lifted.space != StateSpace::LatticeZ4)
        throw InvalidArgument("winding drift needs a lifted generator");
    const auto row = fiber_state(site, 0);
    double drift = 0.0;
    for (RealSparse::InnerIterator it(lifted.matrix, row); it; ++it) {
        const int step = winding_step(static_cast<int>(it.col() % kFiberSize));
        if (step == 2 && it.value() != 0.0)
            throw InvalidArgument("winding shift of two is ambiguous on Z4");
        drift += it.value() * step;
    }
    return drift;
}

std::string to_string(StateSpace space) {
    return space == StateSpace::BaseLattice ? "base-lattice" : "lattice-x-Z4";
}

void write_triplets(std::ostream& out, const SparseGenerator& op, const std::string& tag,
                    const std::string& provenance) {
    out << "# smech-operator tag=" << tag << " space=" << to_string(op.space)
        << " dimension=" << op.dimension() << " field=real";
    if (!provenance.empty()) out << ' ' << provenance;
    out << '\n' << op.matrix.rows() << ' ' << op.matrix.cols() << ' ' << op.matrix.nonZeros() << '\n';
    out.precision(17);
    for (Eigen::Index r = 0; r < op.matrix.outerSize(); ++r)
        for (RealSparse::InnerIterator it(op.matrix, r); it; ++it)
            out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

void write_triplets(std::ostream& out, const ComplexOperator& op, const std::string& tag,
                    const std::string& provenance) {
    out << "# smech-operator tag=" << tag << " dimension=" << op.dimension() << " field=complex";
    if (op.tag == OperatorTag::SectorGenerator) out << " p=" << op.angle;
    if (!provenance.empty()) out << ' ' << provenance;
    out << '\n' << op.matrix.rows() << ' ' << op.matrix.cols() << ' ' << op.matrix.nonZeros() << '\n';
    out.precision(17);
    for (Eigen::Index r = 0; r < op.matrix.outerSize(); ++r)
        for (ComplexSparse::InnerIterator it(op.matrix, r); it; ++it)
            out << it.row() << ' ' << it.col() << ' ' << it.value().real() << ' ' << it.value().imag()
                << '\n';
}

}  // namespace smech

#include "smech/equivalence.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "smech/error.hpp"

namespace smech {

namespace {

struct IdentityDefect {
    Complex mean_diagonal;
    double residual;
    double scale;
};

// D = (i/hbar) H - L(pi/2); returns its mean diagonal and max |D - mean I|.
IdentityDefect identity_defect(const ModelSpec& model, GradientScheme scheme) {
    const auto hamiltonian = build_hamiltonian(model, scheme);
    const auto sector = build_sector_generator(model, std::numbers::pi / 2.0);
    const Complex i_over_hbar(0.0, 1.0 / model.constants().hbar);
    const ComplexSparse d = i_over_hbar * hamiltonian.matrix - sector.matrix;

    Complex mean{};
    for (Eigen::Index r = 0; r < d.rows(); ++r) mean += d.coeff(r, r);
    mean /= static_cast<double>(d.rows());

    double residual = 0.0;
    double scale = 1.0;
    for (Eigen::Index r = 0; r < d.outerSize(); ++r)
        for (ComplexSparse::InnerIterator it(d, r); it; ++it) {
            const Complex v = it.row() == it.col() ? it.value() - mean : it.value();
            residual = std::max(residual, std::abs(v));
        }
    for (Eigen::Index r = 0; r < sector.matrix.outerSize(); ++r)
        for (ComplexSparse::InnerIterator it(sector.matrix, r); it; ++it)
            scale = std::max(scale, std::abs(it.value()));
    return {mean, residual, scale};
}

Eigen::MatrixXcd fiber_sum(const FiberKernel& lifted, const ModelSpec& model, int direction) {
    const auto n = static_cast<Eigen::Index>(model.num_sites());
    if (lifted.dimension() != kFiberSize * n)
        throw DimensionMismatch("lifted kernel dimension does not match the model");
    Eigen::MatrixXcd out(n, n);
    for (Eigen::Index x = 0; x < n; ++x)
        for (Eigen::Index y = 0; y < n; ++y) {
            Complex acc{};
            for (int w = 0; w < kFiberSize; ++w)
                acc += i_power(direction * w) * lifted.values(fiber_state(x, 0), fiber_state(y, w));
            out(x, y) = acc;
        }
    return out;
}

}  // namespace

SectorConstant derive_sector_constant(const ModelSpec& model, GradientScheme scheme) {
    const auto defect = identity_defect(model, scheme);
    if (defect.residual > kSectorTolerance * defect.scale) {
        std::ostringstream msg;
        msg << "(i/hbar) H - L(pi/2) is not a multiple of the identity (residual " << defect.residual
            << "); operator conventions disagree";
        throw NonConstantDiagonal(msg.str(), defect.residual);
    }
    return {defect.mean_diagonal, defect.residual};
}

double sector_identity_residual(const ModelSpec& model, GradientScheme scheme) {
    return identity_defect(model, scheme).residual;
}

void check_exponent_cap(Complex c0, double t, double cap) {
    const double exponent = c0.real() * t;
    if (exponent > cap) {
        std::ostringstream msg;
        msg << "amplification e^{Re(c0) t} with Re(c0) t = " << exponent << " exceeds the cap " << cap
            << "; shorten t or lower K0";
        throw ExponentCapExceeded(msg.str(), exponent);
    }
}

Eigen::MatrixXcd reconstruct_quantum_kernel(const FiberKernel& lifted, const ModelSpec& model, double t,
                                            const ReconstructionOptions& options) {
    const auto sc = derive_sector_constant(model, options.scheme);
    check_exponent_cap(sc.c0, t, options.exponent_cap);
    return std::exp(sc.c0 * t) * fiber_sum(lifted, model, +1);
}

Eigen::MatrixXcd antiparticle_kernel(const FiberKernel& lifted, const ModelSpec& model, double t,
                                     const ReconstructionOptions& options) {
    const auto sc = derive_sector_constant(model, options.scheme);
    check_exponent_cap(sc.c0, t, options.exponent_cap);
    return std::exp(std::conj(sc.c0) * t) * fiber_sum(lifted, model, -1);
}

Eigen::MatrixXcd quantum_propagator(const ModelSpec& model, double t, GradientScheme scheme) {
    const auto h = build_hamiltonian(model, scheme);
    return expm_dense(h, Complex(0.0, 1.0 / model.constants().hbar), t).values;
}

}  // namespace smech

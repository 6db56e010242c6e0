#pragma once

#include <Eigen/Dense>

#include "smech/operators.hpp"
#include "smech/semigroup.hpp"

namespace smech {

inline constexpr double kSectorTolerance = 1e-12;
inline constexpr double kDefaultExponentCap = 40.0;

// c0 such that L(pi/2) = (i/hbar) H - c0 I, with the residual of that identity.
struct SectorConstant {
    Complex c0;
    double residual = 0.0;
};

// Throws NonConstantDiagonal when the residual exceeds kSectorTolerance
// (scaled by the largest operator entry when that exceeds one).
SectorConstant derive_sector_constant(const ModelSpec& model,
                                      GradientScheme scheme = GradientScheme::Upwind);

// max |L(pi/2) - (i/hbar) H + c0 I| with c0 the mean diagonal; never throws.
double sector_identity_residual(const ModelSpec& model, GradientScheme scheme = GradientScheme::Upwind);

struct ReconstructionOptions {
    double exponent_cap = kDefaultExponentCap;
    GradientScheme scheme = GradientScheme::Upwind;
};

// e^{c0 t} sum_n i^n u(x,0; x',n; t), which equals e^{itH/hbar}.
Eigen::MatrixXcd reconstruct_quantum_kernel(const FiberKernel& lifted, const ModelSpec& model, double t,
                                            const ReconstructionOptions& options = {});

// e^{conj(c0) t} sum_n i^{-n} u(x,0; x',n; t): the p = 3 pi/2 sector, which
// equals e^{itH'/hbar} with H' = -conj(H).
Eigen::MatrixXcd antiparticle_kernel(const FiberKernel& lifted, const ModelSpec& model, double t,
                                     const ReconstructionOptions& options = {});

// Dense e^{itH/hbar} straight from the Hamiltonian.
Eigen::MatrixXcd quantum_propagator(const ModelSpec& model, double t,
                                    GradientScheme scheme = GradientScheme::Upwind);

// Throws ExponentCapExceeded if Re(c0) t exceeds the cap.
void check_exponent_cap(Complex c0, double t, double cap);

}  // namespace smech

#pragma once

#include <complex>
#include <iosfwd>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "smech/lattice.hpp"

namespace smech {

using Complex = std::complex<double>;
using RealSparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using ComplexSparse = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

inline constexpr int kFiberSize = 4;

// Winding classes live in Z4; the lifted state (x, n) has flat index 4 x + n.
constexpr int wrap_winding(int n) noexcept { return ((n % kFiberSize) + kFiberSize) % kFiberSize; }
constexpr Eigen::Index fiber_state(SiteIndex site, int winding) noexcept {
    return static_cast<Eigen::Index>(site) * kFiberSize + wrap_winding(winding);
}
// Representative of a Z4 shift in {-1, 0, 1, 2}.
constexpr int winding_step(int shift) noexcept {
    const int w = wrap_winding(shift);
    return w == 3 ? -1 : w;
}

// i^k for integer k.
Complex i_power(int k) noexcept;

enum class StateSpace { BaseLattice, LatticeZ4 };
enum class OperatorTag { SectorGenerator, Hamiltonian };

// How A.grad enters the Hamiltonian.
//  Upwind:  A+ D_backward - A- D_forward, the operator realised by the lifted
//           process (sector identity exact; Hermitian only when A == 0).
//  Central: link-averaged symmetric difference (always Hermitian).
enum class GradientScheme { Upwind, Central };

// Real Markov generator; entry (s, s') is the jump rate s -> s'.
struct SparseGenerator {
    RealSparse matrix;
    StateSpace space = StateSpace::BaseLattice;

    Eigen::Index dimension() const noexcept { return matrix.rows(); }
    double max_abs_row_sum() const;
    double min_off_diagonal() const;
    double max_abs_diagonal() const;
    // Throws NotMarkov if an off-diagonal is negative or a row sum exceeds tol.
    void validate(double tol = 1e-12) const;
};

struct ComplexOperator {
    ComplexSparse matrix;
    OperatorTag tag = OperatorTag::Hamiltonian;
    double angle = 0.0;  // sector momentum p, for sector generators

    Eigen::Index dimension() const noexcept { return matrix.rows(); }
    double hermiticity_error() const;
};

SparseGenerator build_base_generator(const ModelSpec& model);

// Lifted generator on lattice x Z4: kinetic hops lower the winding by one,
// A-weighted hops keep it, the potential raises it at K0/hbar + V/2hbar and
// lowers it at K0/hbar - V/2hbar.
SparseGenerator build_lifted_generator(const ModelSpec& model);

// Mirror image n -> -n of the lifted generator; its sector p block is the
// entrywise conjugate of the lifted one.
SparseGenerator build_conjugate_generator(const ModelSpec& model);

// Block p of F L F^{-1} with F(p, n) = e^{-ipn}, built from the closed form.
ComplexOperator build_sector_generator(const ModelSpec& model, double p);

ComplexOperator build_hamiltonian(const ModelSpec& model,
                                  GradientScheme scheme = GradientScheme::Upwind);

// Unitary fiber transform on lattice x Z4: F[(j N + x), (4 x + n)] = e^{-i p_j n} / 2
// with p_j = j pi / 2, so F L F^dagger is block diagonal with blocks L(p_0..p_3).
Eigen::MatrixXcd fiber_fourier_matrix(SiteIndex num_sites);

// Sector p of a translation-invariant Z4 kernel: sum_n e^{ipn} K(x,0; x',n).
// p must be a multiple of pi/2.
Eigen::MatrixXcd fiber_fourier(const Eigen::MatrixXd& kernel, double p);
Eigen::MatrixXcd fiber_fourier(const Eigen::MatrixXcd& kernel, double p);

// Index j in {0,1,2,3} with p = j pi/2 (mod 2 pi); throws InvalidArgument otherwise.
int sector_index(double p);

// Sum over jumps out of (site, 0) of rate * (winding step); exact dE[n]/dt.
double winding_drift(const SparseGenerator& lifted, SiteIndex site);

// Plain-text triplet export: a '#' header with tag and dimension, then
// "rows cols nnz" and one "row col value" (or "row col re im") per entry.
void write_triplets(std::ostream& out, const SparseGenerator& op, const std::string& tag,
                    const std::string& provenance = {});
void write_triplets(std::ostream& out, const ComplexOperator& op, const std::string& tag,
                    const std::string& provenance = {});

std::string to_string(StateSpace space);

}  // namespace smech

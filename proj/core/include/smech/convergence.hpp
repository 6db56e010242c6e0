#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "smech/config.hpp"
#include "smech/operators.hpp"

namespace smech {

struct GaussianPacket {
    double center = 12.8;
    double width = 1.0;     // sigma of |psi|^2 is width
    double momentum = 1.0;  // wave number k0
};

// Free Schrodinger evolution psi(x, tau) = e^{-i tau H / hbar} psi0 of a
// Gaussian on the real line.
Complex free_gaussian(const GaussianPacket& packet, const PhysicalConstants& k, double x, double tau);

// Displaced ground state of phi = spring (x - x_c)^2 / 2 released at rest
// from x_c + offset (coherent state); evolution time tau as above.
Complex harmonic_coherent(double offset, double x_c, double spring, const PhysicalConstants& k, double x,
                          double tau);

struct ConvergenceOptions {
    Preset preset = Preset::Free;
    double box_length = 25.6;
    double coarse_spacing = 0.4;
    int levels = 3;
    double t = 1.0;
    GaussianPacket packet{};
    double spring = 0.1;            // harmonic only
    double harmonic_offset = 1.0;   // harmonic only
    PhysicalConstants constants{};
};

struct ConvergenceRow {
    double spacing = 0.0;
    SiteIndex sites = 0;
    double error = 0.0;  // sqrt(a sum |psi_a - psi_ref|^2)
    double ratio = 0.0;  // error of the previous (coarser) row over this one; 0 on the first row
};

struct ConvergenceTable {
    Preset preset = Preset::Free;
    double t = 0.0;
    std::vector<ConvergenceRow> rows;
    double observed_order = 0.0;  // least-squares slope of log error vs log a
};

// Applies e^{itH/hbar} to the sampled packet on a in {a0, a0/2, ...} at fixed
// box and compares with the continuum solution at tau = -t. Throws
// InvalidArgument for presets without a closed-form reference.
ConvergenceTable run_convergence(const ConvergenceOptions& options);

void write_csv(std::ostream& out, const ConvergenceTable& table, const std::string& provenance = {});

}  // namespace smech

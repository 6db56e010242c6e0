#include "smech/convergence.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include "smech/error.hpp"
#include "smech/semigroup.hpp"

namespace smech {

Complex free_gaussian(const GaussianPacket& packet, const PhysicalConstants& k, double x, double tau) {
    using namespace std::complex_literals;
    const double s2 = packet.width * packet.width;
    const Complex spread = 1.0 + 1i * (k.hbar * tau / (2.0 * k.mass * s2));
    const double velocity = k.hbar * packet.momentum / k.mass;
    const double omega = k.hbar * packet.momentum * packet.momentum / (2.0 * k.mass);
    const double dx = x - packet.center;
    const double moved = dx - velocity * tau;
    const Complex exponent = -moved * moved / (4.0 * s2 * spread) + 1i * (packet.momentum * dx - omega * tau);
    return std::pow(2.0 * std::numbers::pi * s2, -0.25) / std::sqrt(spread) * std::exp(exponent);
}

Complex harmonic_coherent(double offset, double x_c, double spring, const PhysicalConstants& k, double x,
                          double tau) {
    using namespace std::complex_literals;
    const double omega = std::sqrt(spring / k.mass);
    const double position = offset * std::cos(omega * tau);
    const double momentum = -k.mass * omega * offset * std::sin(omega * tau);
    const double phase = -omega * tau / 2.0 - k.mass * omega * offset * offset / (4.0 * k.hbar) * std::sin(2.0 * omega * tau);
    const double dx = x - x_c - position;
    const double norm = std::pow(k.mass * omega / (std::numbers::pi * k.hbar), 0.25);
    return norm * std::exp(-k.mass * omega / (2.0 * k.hbar) * dx * dx + 1i * (momentum * dx / k.hbar + phase));
}

ConvergenceTable run_convergence(const ConvergenceOptions& options) {
    if (options.preset == Preset::ConstantA)
        throw InvalidArgument("convergence needs a preset with a closed-form continuum reference (free, harmonic)");
    if (options.levels < 2) throw InvalidArgument("convergence needs at least two levels");
    if (!(options.coarse_spacing > 0.0) || !(options.box_length > 0.0))
        throw InvalidArgument("box length and spacing must be positive");
    if (!(options.t >= 0.0)) throw InvalidArgument("time must be non-negative");

    ConvergenceTable table{options.preset, options.t, {}, 0.0};
    const double x_c = 0.5 * options.box_length;
    for (int level = 0; level < options.levels; ++level) {
        const double a = options.coarse_spacing / std::pow(2.0, level);
        const auto sites = static_cast<int>(std::lround(options.box_length / a));
        PresetOptions preset_options;
        preset_options.sites_per_axis = sites;
        preset_options.spacing = options.box_length / sites;
        preset_options.constants = options.constants;
        preset_options.spring = options.spring;
        const auto model = make_preset(options.preset, preset_options);
        const double spacing = model.lattice().spacing();

        auto reference = [&](double x, double tau) {
            return options.preset == Preset::Free
                       ? free_gaussian(options.packet, options.constants, x, tau)
                       : harmonic_coherent(options.harmonic_offset, x_c, options.spring, options.constants, x, tau);
        };
        Eigen::VectorXcd psi0(sites);
        Eigen::VectorXcd expected(sites);
        for (int s = 0; s < sites; ++s) {
            const double x = model.lattice().position(s)[0];
            psi0(s) = reference(x, 0.0);
            expected(s) = reference(x, -options.t);
        }
        Eigen::VectorXcd evolved = psi0;
        if (options.t > 0.0) {
            const auto h = build_hamiltonian(model);
            const Complex scale(0.0, 1.0 / options.constants.hbar);
            evolved = expm_action(h.matrix, scale, psi0, options.t, {1e-12, 400}).value;
        }
        ConvergenceRow row{spacing, sites, std::sqrt(spacing) * (evolved - expected).norm(), 0.0};
        if (!table.rows.empty() && row.error > 0.0) row.ratio = table.rows.back().error / row.error;
        table.rows.push_back(row);
    }

    // Least-squares slope of log(error) against log(a).
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int count = 0;
    for (const auto& r : table.rows) {
        if (r.error <= 0.0) continue;
        const double lx = std::log(r.spacing);
        const double ly = std::log(r.error);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++count;
    }
    if (count >= 2) table.observed_order = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    return table;
}

void write_csv(std::ostream& out, const ConvergenceTable& table, const std::string& provenance) {
    out << "# smech-convergence preset=" << preset_name(table.preset) << " t=" << table.t
        << " observed_order=" << table.observed_order;
    if (!provenance.empty()) out << ' ' << provenance;
    out << "\nspacing,sites,error,ratio\n";
    out.precision(17);
    for (const auto& r : table.rows) out << r.spacing << ',' << r.sites << ',' << r.error << ',' << r.ratio << '\n';
}

}  // namespace smech

#include "smech/verification.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "smech/density.hpp"
#include "smech/equivalence.hpp"
#include "smech/error.hpp"
#include "smech/montecarlo.hpp"
#include "smech/semigroup.hpp"

namespace smech {

namespace {

double max_abs(const Eigen::MatrixXcd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

CheckResult check(std::string name, double residual, double tolerance, std::string detail = {}) {
    return {std::move(name), residual <= tolerance, residual, tolerance, std::move(detail), false};
}

CheckResult info(std::string name, double value, std::string detail = {}) {
    return {std::move(name), true, value, 0.0, std::move(detail), true};
}

// Runs `body`, turning a library error into a failed check.
template <typename Body>
void guarded(VerificationReport& report, const std::string& name, Body body) {
    try {
        body();
    } catch (const Error& e) {
        report.checks.push_back({name, false, std::numeric_limits<double>::infinity(), 0.0, e.what(), false});
    }
}

Eigen::MatrixXcd reconstruction(const FiberKernel& lifted, const ModelSpec& model, double t, Perturbation p) {
    if (p == Perturbation::ReversedPhase) return antiparticle_kernel(lifted, model, t);
    return reconstruct_quantum_kernel(lifted, model, t);
}

GradientScheme oracle_scheme(Perturbation p) {
    return p == Perturbation::CentralGradient ? GradientScheme::Central : GradientScheme::Upwind;
}

void markov_checks(VerificationReport& report, const ModelSpec& model) {
    for (const auto& [name, gen] : {std::pair{"lifted", build_lifted_generator(model)},
                                    std::pair{"conjugate", build_conjugate_generator(model)}}) {
        report.checks.push_back(check(std::string("markov.") + name + ".min_off_diagonal",
                                      std::max(0.0, -gen.min_off_diagonal()), 0.0));
        report.checks.push_back(check(std::string("markov.") + name + ".row_sum", gen.max_abs_row_sum(), 1e-12));
    }
    const auto lifted = build_lifted_generator(model);
    for (double t : {0.1, 1.0}) {
        const auto k = uniformize(lifted, t);
        const double negativity = std::max(0.0, -k.values.minCoeff());
        const double row = (k.values.rowwise().sum().array() - 1.0).abs().maxCoeff();
        std::ostringstream tag;
        tag << "markov.uniformized.t=" << t;
        report.checks.push_back(check(tag.str() + ".negativity", negativity, 1e-12));
        report.checks.push_back(check(tag.str() + ".row_sum", row, 1e-10));
    }
}

void block_check(VerificationReport& report, const ModelSpec& model) {
    const auto n = static_cast<Eigen::Index>(model.num_sites());
    const Eigen::MatrixXcd f = fiber_fourier_matrix(model.num_sites());
    const Eigen::MatrixXd lifted = Eigen::MatrixXd(build_lifted_generator(model).matrix);
    const Eigen::MatrixXcd blocks = f * lifted.cast<Complex>() * f.adjoint();
    Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(4 * n, 4 * n);
    for (int j = 0; j < kFiberSize; ++j)
        expected.block(j * n, j * n, n, n) =
            Eigen::MatrixXcd(build_sector_generator(model, j * std::numbers::pi / 2.0).matrix);
    report.checks.push_back(check("block_diagonal.residual", max_abs(blocks - expected), 1e-12));
}

void sector_checks(VerificationReport& report, const ModelSpec& model, Perturbation p) {
    const auto scheme = oracle_scheme(p);
    const double residual = sector_identity_residual(model, scheme);
    const double scale = std::max(1.0, Eigen::MatrixXcd(build_sector_generator(model, std::numbers::pi / 2).matrix)
                                           .cwiseAbs()
                                           .maxCoeff());
    report.checks.push_back(check("sector.identity_residual", residual, kSectorTolerance * scale));
    if (residual > kSectorTolerance * scale) return;
    const auto c0 = derive_sector_constant(model, scheme).c0;
    const auto& k = model.constants();
    const double a = model.lattice().spacing();
    const double kinetic = model.dimension() * k.hbar / (k.mass * a * a);
    report.checks.push_back(check("sector.re_c0", std::abs(c0.real() - (kinetic + 2.0 * model.k0() / k.hbar)), 1e-12));
    report.checks.push_back(check("sector.im_c0", std::abs(c0.imag() - kinetic), 1e-12,
                                  "structural form Im c0 = +d hbar / (m a^2)"));
}

void reconstruction_checks(VerificationReport& report, const ModelSpec& model, Perturbation p) {
    const auto lifted_gen = build_lifted_generator(model);
    for (double t : {0.05, 0.2}) {
        std::ostringstream name;
        name << "reconstruction.t=" << t;
        guarded(report, name.str(), [&] {
            const auto u = uniformize(lifted_gen, t);
            const Eigen::MatrixXcd k = reconstruction(u, model, t, p);
            const Eigen::MatrixXcd oracle = quantum_propagator(model, t, oracle_scheme(p));
            report.checks.push_back(check(name.str(), max_abs(k - oracle), 1e-10));
        });
    }
    guarded(report, "antiparticle", [&] {
        const double t = 0.2;
        const auto u = uniformize(lifted_gen, t);
        const Eigen::MatrixXcd particle = reconstruct_quantum_kernel(u, model, t);
        const Eigen::MatrixXcd anti = antiparticle_kernel(u, model, t);
        report.checks.push_back(check("antiparticle.conjugate", max_abs(anti - particle.conjugate()), 1e-10,
                                      "p = 3 pi/2 reconstruction equals e^{itH'/hbar}, H' = -conj(H)"));
    });
}

void unitarity_checks(VerificationReport& report, const ModelSpec& model) {
    const auto lifted_gen = build_lifted_generator(model);
    const double t1 = 0.1;
    const double t2 = 0.2;
    const Eigen::MatrixXcd k1 = reconstruct_quantum_kernel(uniformize(lifted_gen, t1), model, t1);
    const Eigen::MatrixXcd k2 = reconstruct_quantum_kernel(uniformize(lifted_gen, t2), model, t2);
    const Eigen::MatrixXcd k12 = reconstruct_quantum_kernel(uniformize(lifted_gen, t1 + t2), model, t1 + t2);
    report.checks.push_back(check("semigroup.t1+t2", max_abs(k12 - k1 * k2), 1e-9));
    const auto identity = Eigen::MatrixXcd::Identity(k2.rows(), k2.cols());
    const double deviation = max_abs(k2 * k2.adjoint() - identity);
    if (build_hamiltonian(model).hermiticity_error() <= 1e-12)
        report.checks.push_back(check("unitarity", deviation, 1e-9));
    else
        report.checks.push_back(
            info("unitarity", deviation, "H is not Hermitian at finite a when A != 0; reported only"));
}

void density_checks(VerificationReport& report, const ModelSpec& model, std::uint64_t seed) {
    const auto n = model.num_sites();
    const double box = model.lattice().spacing() * model.lattice().sites_per_axis();
    const Eigen::VectorXcd packet = lattice_wavepacket(model);
    const Eigen::VectorXcd other = lattice_wavepacket(model, 0.25 * box, std::nullopt, 0.0);
    const std::vector<std::pair<std::string, DensityMatrix>> states{
        {"pure", pure_density(packet)}, {"mixture", mixed_density({0.6, 0.4}, {packet, other})}};
    for (const auto& [label, rho] : states)
        for (double t : {0.1, 0.3}) {
            std::ostringstream name;
            name << "theorem1." << label << ".t=" << t;
            guarded(report, name.str(), [&] {
                const auto result = verify_theorem1(prepare_joint_density(rho), model, t);
                report.checks.push_back(check(name.str(), result.residual, 1e-8));
            });
        }

    guarded(report, "observable_lifting", [&] {
        const double t = 0.2;
        const auto rho_c = evolve_joint_density(prepare_joint_density(pure_density(packet)), model, t);
        const auto rho_q = phase_average(rho_c, model);
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal;
        double worst = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            Eigen::MatrixXcd m(n, n);
            for (Eigen::Index r = 0; r < n; ++r)
                for (Eigen::Index c = 0; c < n; ++c) m(r, c) = Complex(normal(rng), normal(rng));
            const Observable f{0.5 * (m + m.adjoint())};
            const Complex classical = classical_expectation(lift_observable(f), rho_c, model);
            worst = std::max(worst, std::abs(classical - quantum_expectation(rho_q, f)));
        }
        report.checks.push_back(check("observable_lifting", worst, 1e-8, "20 random Hermitian observables"));
    });

    guarded(report, "conditioning", [&] {
        const auto rho = evolve_quantum(pure_density(packet), model, 0.2);
        // Diagonal state and diagonal G against Bayes restriction.
        Eigen::VectorXd diag = rho.values.diagonal().real();
        diag /= diag.sum();
        Eigen::VectorXd labels(n);
        for (Eigen::Index x = 0; x < n; ++x) labels(x) = static_cast<double>(x % 3);
        const DensityMatrix diagonal_rho{diag.cast<Complex>().asDiagonal(), 0.0};
        double bayes = 0.0;
        for (double g : {0.0, 1.0, 2.0}) {
            const auto result = condition(diagonal_rho, Observable::diagonal(labels), g);
            const Eigen::VectorXd mask = (labels.array() == g).cast<double>();
            const double mass = diag.dot(mask);
            const Eigen::VectorXd expected = diag.cwiseProduct(mask) / mass;
            bayes = std::max(bayes, max_abs(result.state.values - Eigen::MatrixXcd(expected.cast<Complex>().asDiagonal())));
            bayes = std::max(bayes, std::abs(result.probability - mass));
        }
        report.checks.push_back(check("conditioning.bayes", bayes, 1e-12));

        const auto once = condition(rho, Observable::diagonal(labels), 1.0);
        const auto twice = condition(once.state, Observable::diagonal(labels), 1.0);
        report.checks.push_back(check("conditioning.idempotent", max_abs(twice.state.values - once.state.values), 1e-10));

        const auto h = Observable::from_operator(build_hamiltonian(model));
        const auto x0 = Observable::position_projector(n, 0);
        const auto x1 = Observable::position_projector(n, 1);
        const bool classified = commute_check(x0, x1) && (n < 3 || !commute_check(x0, h)) &&
                                commute_check(h, Observable{h.values * h.values});
        report.checks.push_back(check("conditioning.commute_check", classified ? 0.0 : 1.0, 0.0));
    });
}

void monte_carlo_checks(VerificationReport& report, const ModelSpec& model, const VerifyOptions& options) {
    const SamplingOptions sampling{0, options.threads};
    guarded(report, "mc.lifted_kernel", [&] {
        const double t = 0.5;
        const auto exact = uniformize(build_lifted_generator(model), t);
        const auto est = estimate_lifted_kernel(model, options.start, t, options.paths, options.seed, sampling);
        double worst = 0.0;
        const auto row = fiber_state(options.start, 0);
        for (SiteIndex x = 0; x < model.num_sites(); ++x)
            for (int w = 0; w < kFiberSize; ++w) {
                const double p = exact.values(row, fiber_state(x, w));
                const double sigma = std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(options.paths));
                const double dev = std::abs(est.probability(x, w) - p);
                worst = std::max(worst, sigma > 0.0 ? dev / sigma : (dev > 0.0 ? HUGE_VAL : 0.0));
            }
        report.checks.push_back(check("mc.lifted_kernel", worst, 4.0, "max per-cell deviation in binomial sigmas"));
    });
    guarded(report, "mc.quantum_kernel", [&] {
        const double t = 0.1;
        const auto exact = uniformize(build_lifted_generator(model), t);
        const auto c0 = derive_sector_constant(model).c0;
        const Eigen::MatrixXcd oracle = quantum_propagator(model, t);
        const auto est = estimate_quantum_kernel(model, options.start, t, options.paths, options.seed,
                                                 kDefaultExponentCap, sampling);
        const Complex factor = std::exp(c0 * t);
        const auto row = fiber_state(options.start, 0);
        double worst = 0.0;
        for (SiteIndex x = 0; x < model.num_sites(); ++x) {
            Complex mean{};
            double second = 0.0;
            for (int w = 0; w < kFiberSize; ++w) {
                const double p = exact.values(row, fiber_state(x, w));
                mean += p * factor * i_power(w);
                second += p * std::norm(factor);
            }
            const double sigma = std::sqrt(std::max(second - std::norm(mean), 0.0) / static_cast<double>(options.paths));
            const double dev = std::abs(est.mean(x) - oracle(options.start, x));
            worst = std::max(worst, sigma > 0.0 ? dev / sigma : (dev > 1e-12 ? HUGE_VAL : 0.0));
        }
        report.checks.push_back(check("mc.quantum_kernel", worst, 3.0, "max per-entry deviation in sigmas"));
    });
    guarded(report, "mc.drift", [&] {
        const auto lifted = build_lifted_generator(model);
        const auto& k = model.constants();
        const double a = model.lattice().spacing();
        double closed = 0.0;
        for (SiteIndex x = 0; x < model.num_sites(); ++x)
            closed = std::max(closed, std::abs(winding_drift(lifted, x) -
                                               (-model.dimension() * k.hbar / (k.mass * a * a) + model.potential(x) / k.hbar)));
        report.checks.push_back(check("drift.closed_form", closed, 1e-12, "-d hbar/(m a^2) + V/hbar per site"));
        const double t = 0.5;
        const double expected = expected_winding_drift(model, options.start, t);
        const auto stat = winding_drift_statistic(model, options.start, t, options.paths, options.seed, sampling);
        report.checks.push_back(check("drift.monte_carlo", std::abs(stat.mean - expected) / stat.std_error, 3.0,
                                      "deviation in standard errors"));
    });
}

}  // namespace

bool VerificationReport::passed() const {
    for (const auto& c : checks)
        if (!c.informational && !c.passed) return false;
    return true;
}

std::optional<Perturbation> parse_perturbation(std::string_view name) {
    if (name == "none") return Perturbation::None;
    if (name == "reversed-phase") return Perturbation::ReversedPhase;
    if (name == "central-gradient") return Perturbation::CentralGradient;
    return std::nullopt;
}

Eigen::VectorXcd lattice_wavepacket(const ModelSpec& model, std::optional<double> center,
                                    std::optional<double> width, std::optional<double> momentum) {
    const auto& lattice = model.lattice();
    const double a = lattice.spacing();
    const double box = a * lattice.sites_per_axis();
    const double x0 = center.value_or(0.5 * box);
    const double sigma = width.value_or(box / 8.0);
    const double k = momentum.value_or(0.5 / a);
    Eigen::VectorXcd psi(model.num_sites());
    for (SiteIndex s = 0; s < model.num_sites(); ++s) {
        const auto x = lattice.position(s);
        double r2 = 0.0;
        for (int axis = 0; axis < lattice.dimension(); ++axis) {
            // Minimum-image distance on the periodic box.
            double d = x[static_cast<std::size_t>(axis)] - x0;
            d -= box * std::round(d / box);
            r2 += d * d;
        }
        psi(s) = std::exp(-r2 / (4.0 * sigma * sigma)) * std::polar(1.0, k * x[0]);
    }
    return psi / psi.norm();
}

VerificationReport verify_model(const ModelSpec& model, const VerifyOptions& options) {
    if (static_cast<Eigen::Index>(model.num_sites()) * kFiberSize > kDefaultDenseCap)
        throw DimensionCapExceeded("verify needs the lifted space within the dense cap");
    if (options.start < 0 || options.start >= model.num_sites()) throw OutOfRange("start site outside the lattice");
    if (options.monte_carlo && options.paths < 1) throw InvalidArgument("at least one path is required");

    VerificationReport report;
    guarded(report, "markov", [&] { markov_checks(report, model); });
    guarded(report, "block_diagonal", [&] { block_check(report, model); });
    guarded(report, "sector", [&] { sector_checks(report, model, options.perturbation); });
    reconstruction_checks(report, model, options.perturbation);
    guarded(report, "unitarity", [&] { unitarity_checks(report, model); });
    density_checks(report, model, options.seed);
    if (options.monte_carlo) monte_carlo_checks(report, model, options);
    return report;
}

void write_json(std::ostream& out, const VerificationReport& report, const std::string& provenance) {
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : report.checks) {
        nlohmann::json entry{{"name", c.name},
                             {"passed", c.passed},
                             {"residual", std::isfinite(c.residual) ? nlohmann::json(c.residual) : nlohmann::json(nullptr)},
                             {"tolerance", c.tolerance}};
        if (c.informational) entry["informational"] = true;
        if (!c.detail.empty()) entry["detail"] = c.detail;
        checks.push_back(std::move(entry));
    }
    nlohmann::json j{{"passed", report.passed()}, {"checks", std::move(checks)}};
    if (!provenance.empty()) j["provenance"] = provenance;
    out << j.dump(2) << '\n';
}

}  // namespace smech

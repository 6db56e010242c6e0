// smech: build, verify, converge, mc and density subcommands.
// Exit codes: 0 success, 1 verification failure, 2 configuration error.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include <smech/config.hpp>
#include <smech/convergence.hpp>
#include <smech/density.hpp>
#include <smech/equivalence.hpp>
#include <smech/error.hpp>
#include <smech/io.hpp>
#include <smech/montecarlo.hpp>
#include <smech/operators.hpp>
#include <smech/semigroup.hpp>
#include <smech/verification.hpp>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace smech;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerification = 1;
constexpr int kExitConfig = 2;

struct ModelArgs {
    std::string model_path;
    std::string preset = "free";
    int sites = 0;  // 0: preset default
};

struct Common {
    std::string out = ".";
    std::string format = "csv";
};

void add_model_options(CLI::App* cmd, ModelArgs& m) {
    cmd->add_option("--model", m.model_path, "YAML model file")->check(CLI::ExistingFile);
    cmd->add_option("--preset", m.preset, "free | harmonic | constant-A (ignored with --model)");
    cmd->add_option("--sites", m.sites, "sites per axis for presets")->check(CLI::PositiveNumber);
}

void add_output_options(CLI::App* cmd, Common& c) {
    cmd->add_option("--out", c.out, "output directory");
    cmd->add_option("--format", c.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
}

ModelSpec load(const ModelArgs& m) {
    if (!m.model_path.empty()) return load_model(m.model_path);
    const auto preset = parse_preset(m.preset);
    if (!preset) throw ConfigError("unknown preset '" + m.preset + "'", "preset");
    PresetOptions options;
    if (m.sites > 0) options.sites_per_axis = m.sites;
    return make_preset(*preset, options);
}

fs::path prepare_dir(const std::string& out) {
    fs::path dir(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!fs::is_directory(dir)) throw ConfigError("cannot create output directory " + out, "out");
    return dir;
}

std::ofstream open(const fs::path& path) {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write " + path.string(), "out");
    return f;
}

json complex_matrix_json(const Eigen::MatrixXcd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_matrix(const fs::path& dir, const std::string& stem, const DensityMatrix& rho, const Common& c,
                  const std::string& prov) {
    if (c.format == "json") {
        auto f = open(dir / (stem + ".json"));
        f << json{{"provenance", prov}, {"t", rho.t}, {"values", complex_matrix_json(rho.values)}}.dump(2) << '\n';
    } else {
        auto f = open(dir / (stem + ".csv"));
        write_csv(f, rho, prov);
    }
}

int cmd_build(const ModelArgs& m, const Common& c) {
    const auto model = load(m);
    const auto dir = prepare_dir(c.out);
    const auto prov = provenance(model);
    {
        auto f = open(dir / "base.txt");
        write_triplets(f, build_base_generator(model), "base", prov);
    }
    {
        auto f = open(dir / "lifted.txt");
        write_triplets(f, build_lifted_generator(model), "lifted", prov);
    }
    {
        auto f = open(dir / "conjugate.txt");
        write_triplets(f, build_conjugate_generator(model), "conjugate", prov);
    }
    {
        auto f = open(dir / "sector_pi2.txt");
        write_triplets(f, build_sector_generator(model, std::numbers::pi / 2.0), "sector", prov);
    }
    {
        auto f = open(dir / "hamiltonian.txt");
        write_triplets(f, build_hamiltonian(model), "hamiltonian", prov);
    }
    {
        auto f = open(dir / "summary.json");
        f << model_summary_json(model) << '\n';
    }
    std::cout << "wrote 5 operators and summary.json to " << dir.string() << '\n';
    return kExitOk;
}

int cmd_verify(const ModelArgs& m, const Common& c, VerifyOptions options, const std::string& perturb, bool no_mc) {
    const auto model = load(m);
    const auto p = parse_perturbation(perturb);
    if (!p) throw ConfigError("unknown perturbation '" + perturb + "'", "perturb");
    options.perturbation = *p;
    options.monte_carlo = !no_mc;
    const auto report = verify_model(model, options);
    const auto dir = prepare_dir(c.out);
    {
        auto f = open(dir / "verify.json");
        write_json(f, report, provenance(model));
    }
    for (const auto& check : report.checks) {
        const char* status = check.informational ? "info" : (check.passed ? "pass" : "FAIL");
        std::cout << status << "  " << check.name << "  residual=" << check.residual;
        if (!check.informational) std::cout << " tol=" << check.tolerance;
        std::cout << '\n';
    }
    std::cout << (report.passed() ? "verification passed" : "verification FAILED") << '\n';
    return report.passed() ? kExitOk : kExitVerification;
}

int cmd_converge(const std::string& preset_name_arg, const Common& c, ConvergenceOptions options, bool check) {
    const auto preset = parse_preset(preset_name_arg);
    if (!preset) throw ConfigError("unknown preset '" + preset_name_arg + "'", "preset");
    options.preset = *preset;
    const auto table = run_convergence(options);
    const auto dir = prepare_dir(c.out);
    const std::string prov = "version=" + version();
    if (c.format == "json") {
        json rows = json::array();
        for (const auto& r : table.rows)
            rows.push_back({{"spacing", r.spacing}, {"sites", r.sites}, {"error", r.error}, {"ratio", r.ratio}});
        auto f = open(dir / "convergence.json");
        f << json{{"provenance", prov},
                  {"preset", std::string(preset_name(table.preset))},
                  {"t", table.t},
                  {"observed_order", table.observed_order},
                  {"rows", rows}}
                 .dump(2)
          << '\n';
    } else {
        auto f = open(dir / "convergence.csv");
        write_csv(f, table, prov);
    }
    bool ok = true;
    for (const auto& r : table.rows) {
        std::cout << "a=" << r.spacing << " sites=" << r.sites << " error=" << r.error;
        if (r.ratio > 0.0) {
            std::cout << " ratio=" << r.ratio;
            ok = ok && std::abs(r.ratio - 4.0) <= 1.2;
        }
        std::cout << '\n';
    }
    std::cout << "observed order " << table.observed_order << '\n';
    return check && !ok ? kExitVerification : kExitOk;
}

struct McArgs {
    double t = 0.5;
    std::uint64_t paths = 100000;
    std::uint64_t seed = 12345;
    SiteIndex start = 0;
    unsigned threads = 0;
};

int cmd_mc(const ModelArgs& m, const Common& c, const McArgs& a) {
    const auto model = load(m);
    const auto dir = prepare_dir(c.out);
    const auto prov = provenance(model);
    const SamplingOptions sampling{0, a.threads};

    const auto lifted = estimate_lifted_kernel(model, a.start, a.t, a.paths, a.seed, sampling);
    const auto c0 = derive_sector_constant(model).c0;
    check_exponent_cap(c0, a.t, kDefaultExponentCap);
    const auto quantum = phase_weighted_estimate(lifted, c0);
    const auto drift = winding_drift_statistic(model, a.start, a.t, a.paths, a.seed, sampling);
    const double exact_drift = expected_winding_drift(model, a.start, a.t);

    if (c.format == "json") {
        json cells = json::array();
        for (SiteIndex x = 0; x < model.num_sites(); ++x)
            for (int w = 0; w < kFiberSize; ++w)
                cells.push_back({{"site", x},
                                 {"winding", w},
                                 {"count", lifted.counts[static_cast<std::size_t>(fiber_state(x, w))]},
                                 {"prob", lifted.probability(x, w)},
                                 {"stderr", lifted.standard_error(x, w)}});
        auto f = open(dir / "kernel.json");
        f << json{{"provenance", prov}, {"t", a.t}, {"paths", a.paths}, {"seed", a.seed}, {"cells", cells}}.dump(2)
          << '\n';
    } else {
        auto f = open(dir / "kernel.csv");
        write_csv(f, lifted, prov);
    }

    json row = json::array();
    double worst_stderr = 0.0;
    for (SiteIndex x = 0; x < model.num_sites(); ++x) {
        row.push_back({{"site", x},
                       {"re", quantum.mean(x).real()},
                       {"im", quantum.mean(x).imag()},
                       {"re_stderr", quantum.real_stderr(x)},
                       {"im_stderr", quantum.imag_stderr(x)}});
        worst_stderr = std::max({worst_stderr, quantum.real_stderr(x), quantum.imag_stderr(x)});
    }
    json report{{"provenance", prov},
                {"t", a.t},
                {"paths", a.paths},
                {"seed", a.seed},
                {"start", a.start},
                {"c0", {{"re", c0.real()}, {"im", c0.imag()}}},
                {"amplification", quantum.amplification},
                {"max_quantum_stderr", worst_stderr},
                {"quantum_row", row},
                {"drift", {{"mean", drift.mean}, {"stderr", drift.std_error}, {"exact", exact_drift}}}};

    // The action statistic lives on the dt grid; use the largest whole number of steps within t.
    const auto steps = static_cast<int>(std::floor(a.t / model.dt() + 1e-9));
    if (steps >= 1) {
        const auto action = action_statistic(model, a.start, steps * model.dt(), a.paths, a.seed, sampling);
        report["action"] = {{"steps", action.steps},
                            {"action_per_step", action.action_per_step.mean},
                            {"action_stderr", action.action_per_step.std_error},
                            {"winding_per_step", action.winding_per_step.mean},
                            {"winding_stderr", action.winding_per_step.std_error},
                            {"ratio", action.ratio}};
    } else {
        report["action"] = {{"skipped", "t is shorter than one grid step dt"}, {"dt", model.dt()}};
    }
    {
        auto f = open(dir / "mc.json");
        f << report.dump(2) << '\n';
    }
    std::cout << "paths=" << a.paths << " seed=" << a.seed << " drift=" << drift.mean << " +- " << drift.std_error
              << " (exact " << exact_drift << ") amplification=" << quantum.amplification << '\n';
    return kExitOk;
}

struct DensityArgs {
    double t = 0.2;
    std::string state = "wavepacket";
    SiteIndex condition_site = -1;
};

int cmd_density(const ModelArgs& m, const Common& c, const DensityArgs& a) {
    const auto model = load(m);
    if (a.state != "wavepacket" && a.state != "mixture")
        throw ConfigError("unknown state '" + a.state + "'", "state");
    const auto dir = prepare_dir(c.out);
    const auto prov = provenance(model);

    const Eigen::VectorXcd packet = lattice_wavepacket(model);
    const double box = model.lattice().spacing() * model.lattice().sites_per_axis();
    const auto rho0 = a.state == "wavepacket"
                          ? pure_density(packet)
                          : mixed_density({0.7, 0.3}, {packet, lattice_wavepacket(model, 0.25 * box, std::nullopt, 0.0)});
    const auto joint0 = prepare_joint_density(rho0);
    const auto joint = evolve_joint_density(joint0, model, a.t);
    const auto rho_t = phase_average(joint, model);
    const auto quantum = evolve_quantum(rho0, model, a.t);
    const double residual = (rho_t.values - quantum.values).cwiseAbs().maxCoeff();

    write_matrix(dir, "rho0", rho0, c, prov);
    write_matrix(dir, "rho_t", rho_t, c, prov);
    {
        auto f = open(dir / "joint.csv");
        write_sparse_csv(f, joint, prov);
    }
    const auto pure = pure_state_check(rho_t);
    json report{{"provenance", prov},
                {"t", a.t},
                {"state", a.state},
                {"theorem1_residual", residual},
                {"trace", rho_t.trace().real()},
                {"hermiticity_error", rho_t.hermiticity_error()},
                {"purity", rho_t.purity()},
                {"is_pure", pure.is_pure},
                {"off_diagonal_mass", off_diagonal_mass(rho_t)}};
    if (a.condition_site >= 0) {
        const auto g = Observable::position_projector(model.num_sites(), a.condition_site);
        const auto result = condition(rho_t, g, 1.0);
        {
            auto f = open(dir / "condition.json");
            write_json(f, result);
        }
        write_matrix(dir, "rho_conditioned", result.state, c, prov);
        report["condition"] = {{"site", a.condition_site}, {"probability", result.probability}};
    }
    {
        auto f = open(dir / "density.json");
        f << report.dump(2) << '\n';
    }
    std::cout << "theorem-1 residual " << residual << ", trace " << rho_t.trace().real() << ", purity "
              << rho_t.purity() << '\n';
    return residual <= 1e-8 ? kExitOk : kExitVerification;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"smech: Z4-lifted classical diffusion and the lattice quantum propagator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", version());

    ModelArgs model;
    Common common;

    auto* build = app.add_subcommand("build", "export operators and a model summary");
    add_model_options(build, model);
    add_output_options(build, common);

    VerifyOptions verify_options;
    std::string perturb = "none";
    bool no_mc = false;
    auto* verify = app.add_subcommand("verify", "run the property suite on a model");
    add_model_options(verify, model);
    add_output_options(verify, common);
    verify->add_option("--paths", verify_options.paths, "Monte Carlo paths")->check(CLI::PositiveNumber);
    verify->add_option("--seed", verify_options.seed, "master seed");
    verify->add_option("--start", verify_options.start, "start site")->check(CLI::NonNegativeNumber);
    verify->add_option("--threads", verify_options.threads, "worker threads (0: all cores)");
    verify->add_option("--perturb", perturb, "none | reversed-phase | central-gradient (negative controls)");
    verify->add_flag("--no-mc", no_mc, "skip the Monte Carlo checks");

    ConvergenceOptions converge_options;
    std::string converge_preset = "free";
    bool converge_check = false;
    auto* converge = app.add_subcommand("converge", "continuum convergence table");
    add_output_options(converge, common);
    converge->add_option("--preset", converge_preset, "free | harmonic");
    converge->add_option("--t", converge_options.t, "evolution time")->check(CLI::NonNegativeNumber);
    converge->add_option("--spacing", converge_options.coarse_spacing, "coarsest spacing a0")
        ->check(CLI::PositiveNumber);
    converge->add_option("--box", converge_options.box_length, "box length")->check(CLI::PositiveNumber);
    converge->add_option("--levels", converge_options.levels, "number of halvings + 1")->check(CLI::Range(2, 8));
    converge->add_flag("--check", converge_check, "exit 1 unless every ratio is 4 +- 30%");

    McArgs mc_args;
    auto* mc = app.add_subcommand("mc", "Monte Carlo kernel, drift and action estimates");
    add_model_options(mc, model);
    add_output_options(mc, common);
    mc->add_option("--t", mc_args.t, "time")->check(CLI::NonNegativeNumber);
    mc->add_option("--paths", mc_args.paths, "number of paths")->check(CLI::PositiveNumber);
    mc->add_option("--seed", mc_args.seed, "master seed");
    mc->add_option("--start", mc_args.start, "start site")->check(CLI::NonNegativeNumber);
    mc->add_option("--threads", mc_args.threads, "worker threads (0: all cores)");

    DensityArgs density_args;
    auto* density = app.add_subcommand("density", "evolve, phase-average and condition a density matrix");
    add_model_options(density, model);
    add_output_options(density, common);
    density->add_option("--t", density_args.t, "time")->check(CLI::NonNegativeNumber);
    density->add_option("--state", density_args.state, "wavepacket | mixture");
    density->add_option("--condition-site", density_args.condition_site, "condition on the position at a site")
        ->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*build) return cmd_build(model, common);
        if (*verify) return cmd_verify(model, common, verify_options, perturb, no_mc);
        if (*converge) return cmd_converge(converge_preset, common, converge_options, converge_check);
        if (*mc) return cmd_mc(model, common, mc_args);
        if (*density) return cmd_density(model, common, density_args);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitConfig;
}

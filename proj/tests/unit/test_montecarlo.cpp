#include <doctest.h>

#include <cmath>
#include <sstream>

#include <smech/equivalence.hpp>
#include <smech/error.hpp>
#include <smech/montecarlo.hpp>

#include "models.hpp"
#include "oracles.hpp"

using namespace smech;
using testing_models::free_ring;
using testing_models::random_model;

namespace {

constexpr std::uint64_t kSeed = 2024;

Eigen::MatrixXd lifted_oracle(const ModelSpec& model, double t) {
    return oracle::expm(Eigen::MatrixXd(t * Eigen::MatrixXd(build_lifted_generator(model).matrix)));
}

}  // namespace

TEST_CASE("event table reproduces the lifted generator") {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const auto model = random_model(seed, 5, seed == 2 ? 2 : 1);
        const EventTable table(model);
        const Eigen::MatrixXd a(table.as_generator().matrix);
        const Eigen::MatrixXd b(build_lifted_generator(model).matrix);
        CHECK(oracle::max_abs(Eigen::MatrixXd(a - b)) <= 1e-15);
    }
}

TEST_CASE("sample paths") {
    const auto model = free_ring(8);
    CHECK(sample_path(model, 3, 0.0, kSeed).events.empty());
    const auto a = sample_path(model, 3, 5.0, kSeed, 17);
    const auto b = sample_path(model, 3, 5.0, kSeed, 17);
    REQUIRE(a.events.size() == b.events.size());
    for (std::size_t k = 0; k < a.events.size(); ++k) {
        CHECK(a.events[k].time == b.events[k].time);
        CHECK(a.events[k].site == b.events[k].site);
        CHECK(a.events[k].net_winding == b.events[k].net_winding);
    }
    double last = 0.0;
    for (const auto& e : a.events) {
        CHECK(e.time > last);
        CHECK(e.time <= 5.0);
        last = e.time;
    }
    CHECK_THROWS_AS(sample_path(model, 8, 1.0, kSeed), OutOfRange);
    CHECK_THROWS_AS(sample_path(model, 0, -1.0, kSeed), InvalidArgument);
}

TEST_CASE("event counts are Poisson with the exit rate") {
    // Free particle: exit rate 2 kappa + 2 K0 / hbar = 2 everywhere.
    const auto model = free_ring(8);
    const double t = 1.5;
    const int paths = 100000;
    double sum = 0.0;
    for (int i = 0; i < paths; ++i) sum += static_cast<double>(sample_path(model, 0, t, kSeed, i).events.size());
    const double mean = sum / paths;
    const double sigma = std::sqrt(2.0 * t / paths);
    CHECK(std::abs(mean - 2.0 * t) <= 3.0 * sigma);
}

TEST_CASE("grid snapshots unwrap the displacement") {
    const auto model = free_ring(4);
    const auto path = sample_path(model, 0, 20.0, kSeed, 3);
    const auto grid = path.grid_snapshots(model.lattice(), 1.0);
    CHECK(grid.size() == 21);
    CHECK(grid.front().site == 0);
    CHECK(grid.back().site == path.final_site());
    CHECK(grid.back().net_winding == path.net_winding());
    // Unwrapped displacement agrees with the final site modulo the box.
    const auto d = static_cast<long>(std::lround(grid.back().displacement[0]));
    CHECK(((d % 4) + 4) % 4 == path.final_site());
}

TEST_CASE("lifted kernel estimates") {
    const auto model = free_ring(8);
    const auto zero = estimate_lifted_kernel(model, 2, 0.0, 50, kSeed);
    CHECK(zero.counts[static_cast<std::size_t>(fiber_state(2, 0))] == 50);
    const auto one = estimate_lifted_kernel(model, 2, 1.0, 1, kSeed);
    std::uint64_t total = 0, nonzero = 0;
    for (auto c : one.counts) {
        total += c;
        nonzero += c > 0;
    }
    CHECK(total == 1);
    CHECK(nonzero == 1);
    CHECK_THROWS_AS(estimate_lifted_kernel(model, 0, 1.0, 0, kSeed), InvalidArgument);

    const double t = 0.5;
    const std::uint64_t paths = 400000;
    const auto est = estimate_lifted_kernel(model, 0, t, paths, kSeed);
    const auto exact = lifted_oracle(model, t);
    double worst = 0.0;
    for (SiteIndex x = 0; x < 8; ++x)
        for (int w = 0; w < 4; ++w) {
            const double p = exact(0, fiber_state(x, w));
            worst = std::max(worst, std::abs(est.probability(x, w) - p) / std::sqrt(p * (1 - p) / paths));
        }
    CHECK(worst <= 4.0);
}

TEST_CASE("estimates are deterministic and split across workers and path ranges") {
    const auto model = random_model(4);
    SamplingOptions one_thread{0, 1};
    SamplingOptions three_threads{0, 3};
    const auto a = estimate_lifted_kernel(model, 1, 0.8, 5000, kSeed, one_thread);
    const auto b = estimate_lifted_kernel(model, 1, 0.8, 5000, kSeed, three_threads);
    CHECK(a == b);

    SamplingOptions tail{2000, 2};
    auto head = estimate_lifted_kernel(model, 1, 0.8, 2000, kSeed, one_thread);
    head.merge(estimate_lifted_kernel(model, 1, 0.8, 3000, kSeed, tail));
    CHECK(head.counts == a.counts);
    CHECK(head.paths == a.paths);

    const auto other = estimate_lifted_kernel(model, 1, 0.8, 5000, kSeed + 1, one_thread);
    CHECK(other.counts != a.counts);
    CHECK_THROWS_AS(head.merge(estimate_lifted_kernel(model, 2, 0.8, 10, kSeed)), DimensionMismatch);
}

TEST_CASE("phase-weighted quantum kernel") {
    const auto model = free_ring(8);
    const auto at_zero = estimate_quantum_kernel(model, 3, 0.0, 100, kSeed);
    for (SiteIndex x = 0; x < 8; ++x) CHECK(at_zero.mean(x) == Complex(x == 3 ? 1.0 : 0.0, 0.0));

    const double t = 0.1;
    const std::uint64_t paths = 200000;
    const auto est = estimate_quantum_kernel(model, 0, t, paths, kSeed);
    const Eigen::MatrixXcd h(build_hamiltonian(model).matrix);
    const Eigen::MatrixXcd target = oracle::hermitian_phase(h, t);
    for (SiteIndex x = 0; x < 8; ++x) {
        const double sigma = std::hypot(est.real_stderr(x), est.imag_stderr(x));
        if (sigma > 0.0) CHECK(std::abs(est.mean(x) - target(0, x)) <= 4.0 * sigma);
    }
    CHECK(est.amplification == doctest::Approx(std::exp(2.0 * t)));

    // Estimator variance grows with t at fixed N.
    double previous = 0.0;
    for (double s : {0.1, 0.2, 0.4}) {
        const auto e = estimate_quantum_kernel(model, 0, s, 50000, kSeed);
        const double spread = e.real_stderr.norm() + e.imag_stderr.norm();
        CHECK(spread > previous);
        previous = spread;
    }
    CHECK_THROWS_AS(estimate_quantum_kernel(model, 0, 30.0, 10, kSeed), ExponentCapExceeded);
}

TEST_CASE("winding drift") {
    const auto model = free_ring(8);
    CHECK(expected_winding_drift(model, 0, 0.7) == doctest::Approx(-1.0).epsilon(1e-12));
    const auto stat = winding_drift_statistic(model, 0, 2.0, 100000, kSeed);
    CHECK(std::abs(stat.mean + 1.0) <= 3.0 * stat.std_error);

    // Constant potential shifts the drift by V / hbar; K0 does not move it.
    const LatticeSpec lattice(1, 8, 1.0);
    auto fields = FieldConfig::zero(lattice);
    fields.scalar_potential.assign(8, 0.6);
    const ModelSpec shifted(lattice, PhysicalConstants{}, fields, 0.9);
    CHECK(expected_winding_drift(shifted, 0, 1.0) == doctest::Approx(-0.4).epsilon(1e-12));
    const auto s2 = winding_drift_statistic(shifted, 0, 2.0, 100000, kSeed);
    CHECK(std::abs(s2.mean + 0.4) <= 3.0 * s2.std_error);
    const ModelSpec other_k0(lattice, PhysicalConstants{}, fields, 0.4);
    CHECK(expected_winding_drift(other_k0, 0, 1.0) == doctest::Approx(-0.4).epsilon(1e-12));

    // Non-uniform potential: occupation average against a fine quadrature.
    const auto harmonic = make_preset(Preset::Harmonic);
    const Eigen::MatrixXd base(build_base_generator(harmonic).matrix);
    const int steps = 4000;
    double integral = 0.0;
    for (int j = 0; j <= steps; ++j) {
        const Eigen::MatrixXd e = oracle::expm(Eigen::MatrixXd(base * (1.2 * j / steps)));
        double mean = 0.0;
        for (SiteIndex x = 0; x < 8; ++x) mean += e(5, x) * (-1.0 + harmonic.potential(x));
        integral += (j == 0 || j == steps ? 0.5 : 1.0) * mean / steps;
    }
    CHECK(expected_winding_drift(harmonic, 5, 1.2) == doctest::Approx(integral).epsilon(1e-7));
}

TEST_CASE("action statistic") {
    const auto model = free_ring(8);
    CHECK_THROWS_AS(action_statistic(model, 0, 1.5, 10, kSeed), InvalidArgument);
    const auto r = action_statistic(model, 0, 4.0, 100000, kSeed);
    CHECK(r.steps == 4);
    // Free particle: (1/hbar) E[dS] per step is d/2, the winding changes by -d per step.
    CHECK(std::abs(r.action_per_step.mean - 0.5) <= 3.0 * r.action_per_step.std_error);
    CHECK(std::abs(r.winding_per_step.mean + 1.0) <= 3.0 * r.winding_per_step.std_error);
    CHECK(r.ratio == doctest::Approx(r.action_per_step.mean / r.winding_per_step.mean));

    // Halving a at fixed a^2 / dt leaves the per-step statistic unchanged.
    const auto fine = free_ring(16, 0.5);
    const auto rf = action_statistic(fine, 0, 4.0 * fine.dt(), 100000, kSeed + 7);
    const double sigma = std::hypot(r.action_per_step.std_error, rf.action_per_step.std_error);
    CHECK(std::abs(rf.action_per_step.mean - r.action_per_step.mean) <= 3.0 * sigma);
}

TEST_CASE("kernel estimate CSV") {
    const auto est = estimate_lifted_kernel(free_ring(4), 0, 0.0, 10, kSeed);
    std::ostringstream out;
    write_csv(out, est, "model=m");
    const auto text = out.str();
    CHECK(text.find("site,winding,count,prob,stderr\n0,0,10,1,0\n") != std::string::npos);
    CHECK(text.rfind("# smech-kernel-estimate start=0", 0) == 0);
}

#include <doctest.h>

#include <cmath>
#include <numbers>

#include <smech/convergence.hpp>
#include <smech/error.hpp>

using namespace smech;

namespace {

// Second-order finite-difference residual of i hbar psi_tau = -(hbar^2/2m) psi_xx + phi psi.
template <typename F>
double schrodinger_residual(F psi, double x, double tau, const PhysicalConstants& k, double phi) {
    const double h = 1e-4;
    const Complex dt = (psi(x, tau + h) - psi(x, tau - h)) / (2 * h);
    const Complex dxx = (psi(x + h, tau) - 2.0 * psi(x, tau) + psi(x - h, tau)) / (h * h);
    const Complex lhs = Complex(0, k.hbar) * dt;
    const Complex rhs = -(k.hbar * k.hbar / (2 * k.mass)) * dxx + phi * psi(x, tau);
    return std::abs(lhs - rhs);
}

}  // namespace

TEST_CASE("closed-form packets solve the Schrodinger equation") {
    PhysicalConstants k;
    k.mass = 1.3;
    k.hbar = 0.8;
    const GaussianPacket packet{2.0, 0.9, 1.1};
    for (double x : {1.0, 2.4, 3.3})
        for (double tau : {-0.7, 0.0, 0.5})
            CHECK(schrodinger_residual([&](double y, double s) { return free_gaussian(packet, k, y, s); }, x, tau, k,
                                       0.0) <= 1e-5);
    const double spring = 0.4, x_c = 0.5;
    for (double x : {-0.5, 0.6, 1.9})
        for (double tau : {-1.1, 0.3})
            CHECK(schrodinger_residual([&](double y, double s) { return harmonic_coherent(0.8, x_c, spring, k, y, s); },
                                       x, tau, k, 0.5 * spring * (x - x_c) * (x - x_c)) <= 1e-5);
    // Unit norm.
    double norm = 0.0;
    for (int j = -4000; j <= 4000; ++j) norm += std::norm(free_gaussian(packet, k, 2.0 + j * 0.005, 0.9)) * 0.005;
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("free-particle convergence is second order") {
    const auto table = run_convergence({});
    REQUIRE(table.rows.size() == 3);
    for (std::size_t k = 1; k < 3; ++k) CHECK(table.rows[k].ratio == doctest::Approx(4.0).epsilon(0.3));
    CHECK(table.observed_order == doctest::Approx(2.0).epsilon(0.1));
    CHECK(table.rows[0].sites == 64);
    CHECK(table.rows[2].sites == 256);
}

TEST_CASE("harmonic convergence is second order") {
    ConvergenceOptions options;
    options.preset = Preset::Harmonic;
    const auto table = run_convergence(options);
    for (std::size_t k = 1; k < 3; ++k) CHECK(table.rows[k].ratio == doctest::Approx(4.0).epsilon(0.3));
}

TEST_CASE("t = 0 gives zero error and error grows with t") {
    ConvergenceOptions options;
    options.t = 0.0;
    for (const auto& r : run_convergence(options).rows) CHECK(r.error == 0.0);
    double previous = 0.0;
    for (double t : {0.25, 0.5, 1.0, 2.0}) {
        options.t = t;
        const double e = run_convergence(options).rows.front().error;
        CHECK(e > previous);
        previous = e;
    }
}

TEST_CASE("presets without a reference are rejected") {
    ConvergenceOptions options;
    options.preset = Preset::ConstantA;
    CHECK_THROWS_AS(run_convergence(options), InvalidArgument);
}

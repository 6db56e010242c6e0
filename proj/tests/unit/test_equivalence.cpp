#include <doctest.h>

#include <numbers>

#include <smech/equivalence.hpp>
#include <smech/error.hpp>

#include "models.hpp"
#include "oracles.hpp"

using namespace smech;
using testing_models::free_ring;
using testing_models::random_model;

namespace {

Eigen::MatrixXcd oracle_propagator(const ModelSpec& model, double t, GradientScheme s = GradientScheme::Upwind) {
    const Eigen::MatrixXcd h(build_hamiltonian(model, s).matrix);
    return oracle::expm(Eigen::MatrixXcd(Complex(0.0, t / model.constants().hbar) * h));
}

FiberKernel lifted_kernel(const ModelSpec& model, double t) {
    return {oracle::expm(Eigen::MatrixXd(t * Eigen::MatrixXd(build_lifted_generator(model).matrix))), t, "oracle"};
}

}  // namespace

TEST_CASE("sector constant of the free particle") {
    // Structural form (1 + i) d hbar / (m a^2) + 2 K0 / hbar.
    const auto sc = derive_sector_constant(free_ring(8, 1.0, 0.5));
    CHECK(sc.c0.real() == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(sc.c0.imag() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(sc.residual <= 1e-13);

    const auto fine = derive_sector_constant(free_ring(8, 0.5));
    CHECK(fine.c0.imag() == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("sector constant responds to K0 and ignores constant shifts of phi") {
    const auto a = derive_sector_constant(free_ring(8, 1.0, 0.3)).c0;
    const auto b = derive_sector_constant(free_ring(8, 1.0, 0.6)).c0;
    CHECK(b.real() - a.real() == doctest::Approx(0.6).epsilon(1e-13));
    CHECK(b.imag() == doctest::Approx(a.imag()).epsilon(1e-14));

    const LatticeSpec lattice(1, 8, 1.0);
    auto fields = FieldConfig::zero(lattice);
    fields.scalar_potential.assign(8, 0.4);
    const auto shifted = derive_sector_constant(ModelSpec(lattice, PhysicalConstants{}, fields, 0.5)).c0;
    CHECK(std::abs(shifted - derive_sector_constant(free_ring(8, 1.0, 0.5)).c0) <= 1e-14);
}

TEST_CASE("sector identity holds for random admissible models") {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        const auto model = random_model(seed, 6, seed % 3 == 0 ? 2 : 1);
        CHECK(sector_identity_residual(model) <= 1e-12);
        const auto c0 = derive_sector_constant(model).c0;
        CHECK(c0.real() == doctest::Approx(model.dimension() + 2 * model.k0()).epsilon(1e-13));
        CHECK(c0.imag() == doctest::Approx(model.dimension()).epsilon(1e-13));
    }
}

TEST_CASE("central gradient is the negative control for A != 0") {
    const auto model = make_preset(Preset::ConstantA);
    // Residual e |A| / (2 c m a) on neighbours.
    CHECK(sector_identity_residual(model, GradientScheme::Central) == doctest::Approx(0.05).epsilon(1e-12));
    CHECK_THROWS_AS(derive_sector_constant(model, GradientScheme::Central), NonConstantDiagonal);
    CHECK(sector_identity_residual(free_ring(8)) <= 1e-13);
}

TEST_CASE("reconstruction equals e^{itH/hbar}") {
    for (auto preset : {Preset::Free, Preset::Harmonic, Preset::ConstantA}) {
        const auto model = make_preset(preset);
        for (double t : {0.0, 0.1, 0.7}) {
            const auto k = reconstruct_quantum_kernel(lifted_kernel(model, t), model, t);
            CHECK(oracle::max_abs(Eigen::MatrixXcd(k - oracle_propagator(model, t))) <= 1e-10);
        }
    }
    const auto model = free_ring(8);
    const auto k = reconstruct_quantum_kernel(lifted_kernel(model, 0.1), model, 0.1);
    CHECK(oracle::max_abs(Eigen::MatrixXcd(k * k.adjoint() - Eigen::MatrixXcd::Identity(8, 8))) <= 1e-9);
    const Eigen::MatrixXcd h(build_hamiltonian(model).matrix);
    CHECK(oracle::max_abs(Eigen::MatrixXcd(k - oracle::hermitian_phase(h, 0.1))) <= 1e-10);
}

TEST_CASE("antiparticle kernel") {
    const auto free = free_ring(8);
    const auto u = lifted_kernel(free, 0.2);
    CHECK(oracle::max_abs(Eigen::MatrixXcd(antiparticle_kernel(u, free, 0.2) -
                                           reconstruct_quantum_kernel(u, free, 0.2).conjugate())) <= 1e-10);
    CHECK(oracle::max_abs(Eigen::MatrixXcd(antiparticle_kernel(lifted_kernel(free, 0.0), free, 0.0) -
                                           Eigen::MatrixXcd::Identity(8, 8))) <= 1e-15);
    // General contract: e^{itH'/hbar} with H' = -conj(H), for any A.
    const auto model = make_preset(Preset::ConstantA);
    const auto ua = lifted_kernel(model, 0.3);
    const Eigen::MatrixXcd h(build_hamiltonian(model).matrix);
    const Eigen::MatrixXcd expected = oracle::expm(Eigen::MatrixXcd(Complex(0, 0.3) * Eigen::MatrixXcd(-h.conjugate())));
    CHECK(oracle::max_abs(Eigen::MatrixXcd(antiparticle_kernel(ua, model, 0.3) - expected)) <= 1e-10);
}

TEST_CASE("exponent cap") {
    const auto model = free_ring(8);
    CHECK_NOTHROW(check_exponent_cap(Complex(2, 1), 19.0, 40.0));
    try {
        check_exponent_cap(Complex(2, 1), 25.0, 40.0);
        FAIL("expected ExponentCapExceeded");
    } catch (const ExponentCapExceeded& e) {
        CHECK(e.exponent() == doctest::Approx(50.0));
    }
    ReconstructionOptions options;
    options.exponent_cap = 1.0;
    CHECK_THROWS_AS(reconstruct_quantum_kernel(lifted_kernel(model, 1.0), model, 1.0, options), ExponentCapExceeded);
}

TEST_CASE("reconstruction rejects mismatched kernels") {
    const auto model = free_ring(8);
    CHECK_THROWS_AS(reconstruct_quantum_kernel(lifted_kernel(free_ring(6), 0.1), model, 0.1), DimensionMismatch);
}

TEST_CASE("quantum_propagator uses the library exponential") {
    const auto model = make_preset(Preset::Harmonic);
    CHECK(oracle::max_abs(Eigen::MatrixXcd(quantum_propagator(model, 0.4) - oracle_propagator(model, 0.4))) <= 1e-12);
}

#include <doctest.h>

#include <cmath>
#include <sstream>

#include <smech/error.hpp>
#include <smech/semigroup.hpp>

#include "models.hpp"
#include "oracles.hpp"

using namespace smech;
using testing_models::free_ring;
using testing_models::random_model;

namespace {

SparseGenerator two_state(double r) {
    RealSparse m(2, 2);
    m.insert(0, 0) = -r;
    m.insert(0, 1) = r;
    m.insert(1, 0) = r;
    m.insert(1, 1) = -r;
    return {m, StateSpace::BaseLattice};
}

}  // namespace

TEST_CASE("expm_dense closed forms") {
    const auto g = build_lifted_generator(random_model(1));
    CHECK(oracle::max_abs(Eigen::MatrixXd(expm_dense(g, 0.0).values - Eigen::MatrixXd::Identity(32, 32))) == 0.0);

    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, 3);
    d.diagonal() << -1.0, -2.5, -0.1;
    const Eigen::MatrixXd e = expm_dense(d, 0.7);
    for (int k = 0; k < 3; ++k) CHECK(e(k, k) == doctest::Approx(std::exp(0.7 * d(k, k))).epsilon(1e-15));

    for (double r : {0.3, 2.0, 40.0})
        for (double t : {0.01, 1.0, 3.0}) {
            const auto k = expm_dense(two_state(r), t);
            CHECK(k.values(0, 1) == doctest::Approx((1.0 - std::exp(-2 * r * t)) / 2).epsilon(1e-13));
        }
}

TEST_CASE("expm_dense agrees with the Eigen oracle") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal;
    for (int n : {5, 17, 40}) {
        Eigen::MatrixXcd a(n, n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) a(r, c) = Complex(normal(rng), normal(rng));
        for (double t : {0.01, 0.5, 3.0}) {
            const Eigen::MatrixXcd expected = oracle::expm(Eigen::MatrixXcd(t * a));
            const double scale = std::max(1.0, oracle::max_abs(expected));
            CHECK(oracle::max_abs(Eigen::MatrixXcd(expm_dense(a, t) - expected)) <= 1e-12 * scale);
        }
    }
    CHECK(expm_self_residual(Eigen::MatrixXcd::Identity(4, 4) * Complex(0, 2.0), 1.0) <= 1e-13);
}

TEST_CASE("expm_dense respects the dense cap") {
    const auto g = build_lifted_generator(free_ring(8));
    ExpmOptions options;
    options.dense_cap = 16;
    CHECK_THROWS_AS(expm_dense(g, 0.1, options), DimensionCapExceeded);
}

TEST_CASE("uniformization matches the dense oracle and stays stochastic") {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        const auto g = build_lifted_generator(random_model(seed));
        for (double t : {0.0, 0.05, 1.0, 7.5, 40.0}) {
            const auto k = uniformize(g, t);
            const Eigen::MatrixXd expected = oracle::expm(Eigen::MatrixXd(t * Eigen::MatrixXd(g.matrix)));
            CHECK(oracle::max_abs(Eigen::MatrixXd(k.values - expected)) <= 1e-9);
            CHECK(k.values.minCoeff() >= -1e-12);
            CHECK((k.values.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-10);
        }
    }
    CHECK(oracle::max_abs(Eigen::MatrixXd(uniformize(build_lifted_generator(free_ring(4)), 0.0).values -
                                          Eigen::MatrixXd::Identity(16, 16))) == 0.0);
}

TEST_CASE("uniformization rejects non-generators") {
    RealSparse m(2, 2);
    m.insert(0, 1) = -1.0;
    m.insert(0, 0) = 1.0;
    CHECK_THROWS_AS(uniformize(SparseGenerator{m, StateSpace::BaseLattice}, 1.0), NotMarkov);
}

TEST_CASE("Poisson truncation leaves a tail below tol") {
    for (double mean : {0.5, 5.0, 50.0}) {
        const int k = poisson_truncation(mean, 1e-10);
        double cdf = 0.0, term = std::exp(-mean);
        for (int j = 0; j <= k; ++j) {
            cdf += term;
            term *= mean / (j + 1);
        }
        CHECK(1.0 - cdf <= 1e-10);
    }
}

TEST_CASE("semigroup law") {
    const auto g = build_lifted_generator(random_model(6));
    const auto k1 = uniformize(g, 0.3);
    const auto k2 = uniformize(g, 0.9);
    const auto k12 = uniformize(g, 1.2);
    CHECK(oracle::max_abs(Eigen::MatrixXd(k12.values - k1.values * k2.values)) <= 1e-9);
}

TEST_CASE("expm_action on eigenvectors and probability vectors") {
    const auto model = testing_models::free_ring(12, 1.0);
    const auto h = build_hamiltonian(model);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es{Eigen::MatrixXcd(h.matrix)};
    const Eigen::VectorXcd v = es.eigenvectors().col(5);
    const double e = es.eigenvalues()(5);
    const double t = 2.3;
    const auto r = expm_action(h.matrix, Complex(0, 1.0), v, t);
    CHECK((r.value - std::polar(1.0, e * t) * v).cwiseAbs().maxCoeff() <= 1e-8);

    const auto unchanged = expm_action(h.matrix, Complex(0, 1.0), v, 0.0);
    CHECK((unchanged.value - v).cwiseAbs().maxCoeff() == 0.0);

    const auto g = build_lifted_generator(model);
    Eigen::VectorXcd p = Eigen::VectorXcd::Zero(g.dimension());
    p(0) = 1.0;
    const ComplexSparse gt = RealSparse(g.matrix.transpose()).cast<Complex>();
    const auto evolved = expm_action(gt, Complex(1.0, 0.0), p, 3.0);
    CHECK(std::abs(evolved.value.sum() - 1.0) <= 1e-8);
    const Eigen::MatrixXd oracle_k = oracle::expm(Eigen::MatrixXd(3.0 * Eigen::MatrixXd(g.matrix)));
    CHECK((evolved.value.real() - oracle_k.row(0).transpose()).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("kernel CSV export") {
    std::ostringstream out;
    write_csv(out, FiberKernel{Eigen::MatrixXd::Identity(2, 2), 0.5, "test"}, "model=abc");
    CHECK(out.str() == "# smech-kernel kind=real dimension=2 t=0.5 source=test model=abc\n1,0\n0,1\n");
    std::ostringstream cout_;
    write_csv(cout_, Eigen::MatrixXcd::Identity(1, 1) * Complex(0.25, -1.0));
    CHECK(cout_.str().find("0.25,-1") != std::string::npos);
}

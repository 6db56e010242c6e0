#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <smech/config.hpp>
#include <smech/error.hpp>

using namespace smech;

TEST_CASE("presets") {
    CHECK(parse_preset("free") == Preset::Free);
    CHECK(parse_preset("harmonic") == Preset::Harmonic);
    CHECK(parse_preset("constant-A") == Preset::ConstantA);
    CHECK_FALSE(parse_preset("nope"));

    const auto free = make_preset(Preset::Free);
    CHECK(free.num_sites() == 8);
    CHECK(free.k0() == doctest::Approx(0.5));
    CHECK(free.max_abs_potential() == 0.0);

    const auto harmonic = make_preset(Preset::Harmonic);
    // phi = k (x - 4)^2 / 2 with k = 0.1 on sites 0..7.
    CHECK(harmonic.potential(4) == doctest::Approx(0.0));
    CHECK(harmonic.potential(0) == doctest::Approx(0.8));
    CHECK(harmonic.potential(7) == doctest::Approx(0.45));

    const auto a = make_preset(Preset::ConstantA);
    CHECK(a.fields().vector_potential[3][0] == doctest::Approx(0.1));
    CHECK(a.potential(0) == doctest::Approx(0.005));
}

TEST_CASE("parse_model reads nested YAML") {
    const auto m = parse_model(R"(
dimension: 1
sites_per_axis: 6
spacing: 0.5
mass: 2
potential:
  kind: custom-table
  values: [0, 0.1, 0.2, 0.3, 0.2, 0.1]
vector_potential:
  kind: constant
  value: [0.05]
k0: 1.0
)");
    CHECK(m.num_sites() == 6);
    CHECK(m.lattice().spacing() == 0.5);
    CHECK(m.constants().mass == 2.0);
    CHECK(m.k0() == 1.0);
    CHECK(m.fields().scalar_potential[3] == doctest::Approx(0.3));
    CHECK(m.fields().vector_potential[0][0] == doctest::Approx(0.05));

    const auto p = parse_model("preset: harmonic\nsites_per_axis: 10\npotential:\n  spring: 0.05\n");
    CHECK(p.num_sites() == 10);
    CHECK(p.potential(0) == doctest::Approx(0.5 * 0.05 * 25.0));
}

TEST_CASE("config errors carry key and line") {
    try {
        parse_model("dimension: 1\nsites_per_axis: 4\nspacing: 1\nmystery: 2\n");
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.key() == "mystery");
        CHECK(e.line() == 4);
    }
    try {
        parse_model("dimension: 1\nspacing: 1\n");
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.key() == "sites_per_axis");
    }
    CHECK_THROWS_AS(parse_model("dimension: [1\n"), ConfigError);
    CHECK_THROWS_AS(parse_model("dimension: 1\nsites_per_axis: 4\nspacing: 1\npotential:\n  kind: cubic\n"),
                    ConfigError);
    CHECK_THROWS_AS(parse_model("dimension: one\nsites_per_axis: 4\nspacing: 1\n"), ConfigError);
}

TEST_CASE("infeasible K0 is reported") {
    CHECK_THROWS_AS(parse_model("dimension: 1\nsites_per_axis: 4\nspacing: 1\npotential:\n  kind: harmonic\n  spring: 100\n"),
                    InfeasibleModel);
}

TEST_CASE("load_model reads files") {
    const auto path = std::filesystem::temp_directory_path() / "smech_test_model.yaml";
    {
        std::ofstream f(path);
        f << "preset: free\nsites_per_axis: 5\n";
    }
    CHECK(load_model(path).num_sites() == 5);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_model(path), ConfigError);
}

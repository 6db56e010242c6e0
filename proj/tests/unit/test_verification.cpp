#include <doctest.h>

#include <sstream>

#include <smech/config.hpp>
#include <smech/io.hpp>
#include <smech/verification.hpp>

#include "models.hpp"

using namespace smech;

namespace {

const CheckResult* find(const VerificationReport& r, const std::string& name) {
    for (const auto& c : r.checks)
        if (c.name == name) return &c;
    return nullptr;
}

}  // namespace

TEST_CASE("model hash and provenance") {
    const auto a = make_preset(Preset::Free);
    const auto b = make_preset(Preset::Free);
    CHECK(model_hash(a) == model_hash(b));
    CHECK(model_hash(a) != model_hash(make_preset(Preset::Harmonic)));
    CHECK(model_hash(a) != model_hash(testing_models::free_ring(8, 1.0, 0.3)));
    CHECK(model_hash_hex(a).size() == 16);
    CHECK(provenance(a) == "model=" + model_hash_hex(a) + " version=" + version());
    CHECK(model_summary_json(a).find("\"c0\"") != std::string::npos);
}

TEST_CASE("lattice wavepacket is normalized") {
    const auto model = testing_models::free_ring(16);
    CHECK(lattice_wavepacket(model).norm() == doctest::Approx(1.0));
    CHECK(lattice_wavepacket(model, 1.0, 0.5, 0.0).norm() == doctest::Approx(1.0));
}

TEST_CASE("perturbation names") {
    CHECK(parse_perturbation("none") == Perturbation::None);
    CHECK(parse_perturbation("reversed-phase") == Perturbation::ReversedPhase);
    CHECK(parse_perturbation("central-gradient") == Perturbation::CentralGradient);
    CHECK_FALSE(parse_perturbation("bogus").has_value());
}

TEST_CASE("verify_model passes on presets and fails under negative controls") {
    VerifyOptions options;
    options.monte_carlo = false;
    for (auto preset : {Preset::Free, Preset::Harmonic, Preset::ConstantA}) {
        const auto report = verify_model(make_preset(preset), options);
        for (const auto& c : report.checks)
            if (!c.informational) CHECK_MESSAGE(c.passed, c.name << ": " << c.detail);
        CHECK(report.passed());
    }
    const auto model = make_preset(Preset::Free);
    options.perturbation = Perturbation::ReversedPhase;
    CHECK_FALSE(verify_model(model, options).passed());
    // Central and upwind gradients coincide when A = 0.
    options.perturbation = Perturbation::CentralGradient;
    CHECK(verify_model(model, options).passed());
    CHECK_FALSE(verify_model(make_preset(Preset::ConstantA), options).passed());
}

TEST_CASE("verify_model Monte Carlo checks and JSON") {
    VerifyOptions options;
    options.paths = 20000;
    const auto report = verify_model(make_preset(Preset::Free), options);
    REQUIRE(find(report, "mc.lifted_kernel") != nullptr);
    CHECK(find(report, "mc.lifted_kernel")->passed);
    CHECK(report.passed());
    std::ostringstream out;
    write_json(out, report, "model=x");
    CHECK(out.str().find("\"mc.lifted_kernel\"") != std::string::npos);
}

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "smech/operators.hpp"

namespace smech {

struct CheckResult {
    std::string name;
    bool passed = false;
    double residual = 0.0;
    double tolerance = 0.0;
    std::string detail;
    bool informational = false;  // reported, never gates the verdict
};

struct VerificationReport {
    std::vector<CheckResult> checks;
    bool passed() const;
};

// Deliberately broken conventions used as negative controls.
enum class Perturbation {
    None,
    ReversedPhase,    // reconstruct with i^{-n} and e^{conj(c0) t}
    CentralGradient,  // compare against the central-gradient Hamiltonian
};

std::optional<Perturbation> parse_perturbation(std::string_view name);

struct VerifyOptions {
    std::uint64_t paths = 100000;
    std::uint64_t seed = 12345;
    SiteIndex start = 0;
    bool monte_carlo = true;
    Perturbation perturbation = Perturbation::None;
    unsigned threads = 0;
};

// Gaussian wavepacket sampled on the lattice, unit l2 norm. Defaults: centre
// at the box centre, width L a / 8, wave number 1 / (2 a).
Eigen::VectorXcd lattice_wavepacket(const ModelSpec& model, std::optional<double> center = std::nullopt,
                                    std::optional<double> width = std::nullopt,
                                    std::optional<double> momentum = std::nullopt);

// Runs the property suite on a dense-cap model; throws DimensionCapExceeded
// when the lifted space is larger than the dense cap.
VerificationReport verify_model(const ModelSpec& model, const VerifyOptions& options = {});

void write_json(std::ostream& out, const VerificationReport& report, const std::string& provenance = {});

}  // namespace smech

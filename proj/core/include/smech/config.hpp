#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "smech/lattice.hpp"

namespace smech {

enum class Preset { Free, Harmonic, ConstantA };

// Defaults keep every CLI command on a desk-scale d = 1, L = 8 lattice.
struct PresetOptions {
    int dimension = 1;
    int sites_per_axis = 8;
    double spacing = 1.0;
    PhysicalConstants constants{};
    double spring = 0.1;            // harmonic: phi(x) = k |x - x_c|^2 / 2
    double vector_potential = 0.1;  // constant-A: A along axis 0
    std::optional<double> k0;
};

std::optional<Preset> parse_preset(std::string_view name);
std::string_view preset_name(Preset preset);

ModelSpec make_preset(Preset preset, const PresetOptions& options = {});

// Model from YAML text. Keys: dimension, sites_per_axis, spacing, mass, charge,
// light_speed, hbar, potential.kind (zero | harmonic | custom-table),
// vector_potential.kind (zero | constant | custom-table), optional k0 and preset.
ModelSpec parse_model(std::string_view yaml_text);
ModelSpec load_model(const std::filesystem::path& path);

}  // namespace smech

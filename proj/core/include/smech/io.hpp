#pragma once

#include <cstdint>
#include <string>

#include "smech/lattice.hpp"

namespace smech {

std::string version();

// FNV-1a over the lattice, constants, K0 and field tables.
std::uint64_t model_hash(const ModelSpec& model);
std::string model_hash_hex(const ModelSpec& model);

// "model=<hash> version=<version>", appended to every output header.
std::string provenance(const ModelSpec& model);

// JSON object with geometry, constants, dt, K0 and the sector constant c0.
std::string model_summary_json(const ModelSpec& model);

}  // namespace smech

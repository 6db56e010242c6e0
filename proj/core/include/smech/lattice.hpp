#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace smech {

inline constexpr int kMaxDimension = 3;

using SiteIndex = std::int64_t;
using Coordinates = std::array<int, kMaxDimension>;
using Vector3 = std::array<double, kMaxDimension>;

// Periodic hypercubic lattice (aZ/LZ)^d.
class LatticeSpec {
public:
    LatticeSpec(int dimension, int sites_per_axis, double spacing);

    int dimension() const noexcept { return dimension_; }
    int sites_per_axis() const noexcept { return sites_per_axis_; }
    double spacing() const noexcept { return spacing_; }
    SiteIndex num_sites() const noexcept { return num_sites_; }

    // Row-major: the last axis varies fastest.
    SiteIndex site_index(std::span<const int> coordinates) const;
    Coordinates index_site(SiteIndex index) const;

    // Neighbour one step along `axis` in direction `step` (+1 or -1), with wrap.
    SiteIndex neighbor(SiteIndex site, int axis, int step) const;

    // Position of the site in physical units along each axis (origin at site 0).
    Vector3 position(SiteIndex site) const;

    bool operator==(const LatticeSpec&) const = default;

private:
    int dimension_;
    int sites_per_axis_;
    double spacing_;
    SiteIndex num_sites_;
    std::array<SiteIndex, kMaxDimension> strides_{};
};

struct PhysicalConstants {
    double mass = 1.0;
    double charge = 1.0;
    double light_speed = 1.0;
    double hbar = 1.0;

    // Throws InvalidArgument unless m, c, hbar > 0 and all are finite.
    void validate() const;
    bool operator==(const PhysicalConstants&) const = default;
};

// Site-sampled electromagnetic potentials.
struct FieldConfig {
    std::vector<Vector3> vector_potential;  // components beyond d are ignored
    std::vector<double> scalar_potential;

    static FieldConfig zero(const LatticeSpec& lattice);
    void validate(const LatticeSpec& lattice) const;
    bool operator==(const FieldConfig&) const = default;
};

double derive_dt(const LatticeSpec& lattice, const PhysicalConstants& constants);

// V(x) = e^2 |A(x)|^2 / (2 c^2 m) + e phi(x)
double effective_potential(const FieldConfig& fields, const PhysicalConstants& constants,
                           const LatticeSpec& lattice, SiteIndex site);

// (max(v, 0), max(-v, 0))
std::pair<double, double> split_vector_potential(double value);

// hbar^2 / (a^2 m): the upper end of the admissible K0 interval.
double k0_upper_bound(const LatticeSpec& lattice, const PhysicalConstants& constants);

// Midpoint of [sup|V|/2, hbar^2/(a^2 m)]; throws InfeasibleModel if empty.
double choose_k0(const FieldConfig& fields, const PhysicalConstants& constants,
                 const LatticeSpec& lattice);

// Lattice, constants, fields, and the derived regularisation scales.
// Immutable once built; construction enforces |V| <= 2 K0 <= 2 hbar^2/(a^2 m).
class ModelSpec {
public:
    ModelSpec(LatticeSpec lattice, PhysicalConstants constants, FieldConfig fields,
              std::optional<double> k0 = std::nullopt);

    const LatticeSpec& lattice() const noexcept { return lattice_; }
    const PhysicalConstants& constants() const noexcept { return constants_; }
    const FieldConfig& fields() const noexcept { return fields_; }
    double k0() const noexcept { return k0_; }
    double dt() const noexcept { return dt_; }

    SiteIndex num_sites() const noexcept { return lattice_.num_sites(); }
    int dimension() const noexcept { return lattice_.dimension(); }
    double potential(SiteIndex site) const { return potential_[static_cast<std::size_t>(site)]; }
    std::span<const double> potentials() const noexcept { return potential_; }
    double max_abs_potential() const noexcept;

    // hbar / (2 m a^2): the bare kinetic hop rate.
    double hop_rate() const noexcept;
    // 2 a e / (c hbar): the A-weighted hop coefficient.
    double vector_coupling() const noexcept;

    // Same geometry and constants with A -> -A.
    ModelSpec with_reversed_vector_potential() const;

private:
    LatticeSpec lattice_;
    PhysicalConstants constants_;
    FieldConfig fields_;
    double k0_;
    double dt_;
    std::vector<double> potential_;
};

}  // namespace smech

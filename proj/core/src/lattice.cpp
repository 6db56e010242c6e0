#include "smech/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "smech/error.hpp"

namespace smech {

LatticeSpec::LatticeSpec(int dimension, int sites_per_axis, double spacing)
    : dimension_(dimension), sites_per_axis_(sites_per_axis), spacing_(spacing), num_sites_(1) {
    if (dimension < 1 || dimension > kMaxDimension)
        throw InvalidArgument("lattice dimension must be 1, 2 or 3, got " + std::to_string(dimension));
    if (sites_per_axis < 1)
        throw InvalidArgument("sites_per_axis must be positive");
    if (!(spacing > 0.0) || !std::isfinite(spacing))
        throw InvalidArgument("lattice spacing must be a finite positive length");
    for (int axis = dimension - 1; axis >= 0; --axis) {
        strides_[static_cast<std::size_t>(axis)] = num_sites_;
        num_sites_ *= sites_per_axis;
    }
    if (num_sites_ < 2)
        throw InvalidArgument("lattice needs at least two sites");
}

SiteIndex LatticeSpec::site_index(std::span<const int> coordinates) const {
    if (static_cast<int>(coordinates.size()) < dimension_)
        throw OutOfRange("expected " + std::to_string(dimension_) + " coordinates");
    SiteIndex index = 0;
    for (int axis = 0; axis < dimension_; ++axis) {
        const int c = coordinates[static_cast<std::size_t>(axis)];
        if (c < 0 || c >= sites_per_axis_)
            throw OutOfRange("coordinate " + std::to_string(c) + " outside [0, " +
                             std::to_string(sites_per_axis_) + ")");
        index += c * strides_[static_cast<std::size_t>(axis)];
    }
    return index;
}

Coordinates LatticeSpec::index_site(SiteIndex index) const {
    if (index < 0 || index >= num_sites_)
        throw OutOfRange("site index " + std::to_string(index) + " outside lattice of " +
                         std::to_string(num_sites_) + " sites");
    Coordinates coords{};
    for (int axis = 0; axis < dimension_; ++axis) {
        const auto stride = strides_[static_cast<std::size_t>(axis)];
        coords[static_cast<std::size_t>(axis)] = static_cast<int>(index / stride);
        index %= stride;
    }
    return coords;
}

SiteIndex LatticeSpec::neighbor(SiteIndex site, int axis, int step) const {
    auto coords = index_site(site);
    auto& c = coords[static_cast<std::size_t>(axis)];
    c = ((c + step) % sites_per_axis_ + sites_per_axis_) % sites_per_axis_;
    return site_index(coords);
}

Vector3 LatticeSpec::position(SiteIndex site) const {
    const auto coords = index_site(site);
    Vector3 x{};
    for (int axis = 0; axis < dimension_; ++axis)
        x[static_cast<std::size_t>(axis)] = spacing_ * coords[static_cast<std::size_t>(axis)];
    return x;
}

void PhysicalConstants::validate() const {
    if (!(mass > 0.0) || !std::isfinite(mass)) throw InvalidArgument("mass must be positive");
    if (!(light_speed > 0.0) || !std::isfinite(light_speed))
        throw InvalidArgument("light_speed must be positive");
    if (!(hbar > 0.0) || !std::isfinite(hbar)) throw InvalidArgument("hbar must be positive");
    if (!std::isfinite(charge)) throw InvalidArgument("charge must be finite");
}

FieldConfig FieldConfig::zero(const LatticeSpec& lattice) {
    const auto n = static_cast<std::size_t>(lattice.num_sites());
    return FieldConfig{std::vector<Vector3>(n, Vector3{}), std::vector<double>(n, 0.0)};
}

void FieldConfig::validate(const LatticeSpec& lattice) const {
    const auto n = static_cast<std::size_t>(lattice.num_sites());
    if (vector_potential.size() != n || scalar_potential.size() != n)
        throw InvalidArgument("field arrays must have one entry per lattice site (" +
                              std::to_string(n) + ")");
    for (std::size_t s = 0; s < n; ++s) {
        if (!std::isfinite(scalar_potential[s]))
            throw InvalidArgument("scalar potential not finite at site " + std::to_string(s));
        for (double component : vector_potential[s])
            if (!std::isfinite(component))
                throw InvalidArgument("vector potential not finite at site " + std::to_string(s));
    }
}

double derive_dt(const LatticeSpec& lattice, const PhysicalConstants& constants) {
    const double a = lattice.spacing();
    return constants.mass * a * a / constants.hbar;
}

double effective_potential(const FieldConfig& fields, const PhysicalConstants& constants,
                           const LatticeSpec& lattice, SiteIndex site) {
    const auto s = static_cast<std::size_t>(site);
    double a2 = 0.0;
    for (int axis = 0; axis < lattice.dimension(); ++axis) {
        const double ai = fields.vector_potential[s][static_cast<std::size_t>(axis)];
        a2 += ai * ai;
    }
    const double e = constants.charge;
    const double c = constants.light_speed;
    return e * e / (2.0 * c * c * constants.mass) * a2 + e * fields.scalar_potential[s];
}

std::pair<double, double> split_vector_potential(double value) {
    return {std::max(value, 0.0), std::max(-value, 0.0)};
}

double k0_upper_bound(const LatticeSpec& lattice, const PhysicalConstants& constants) {
    const double a = lattice.spacing();
    return constants.hbar * constants.hbar / (a * a * constants.mass);
}

namespace {

double sup_abs_potential(const FieldConfig& fields, const PhysicalConstants& constants,
                         const LatticeSpec& lattice) {
    double sup = 0.0;
    for (SiteIndex s = 0; s < lattice.num_sites(); ++s)
        sup = std::max(sup, std::abs(effective_potential(fields, constants, lattice, s)));
    return sup;
}

}  // namespace

double choose_k0(const FieldConfig& fields, const PhysicalConstants& constants,
                 const LatticeSpec& lattice) {
    const double lower = 0.5 * sup_abs_potential(fields, constants, lattice);
    const double upper = k0_upper_bound(lattice, constants);
    if (lower > upper)
        throw InfeasibleModel("no admissible K0: sup|V|/2 = " + std::to_string(lower) +
                              " exceeds hbar^2/(a^2 m) = " + std::to_string(upper) +
                              "; refine the lattice spacing");
    return 0.5 * (lower + upper);
}

ModelSpec::ModelSpec(LatticeSpec lattice, PhysicalConstants constants, FieldConfig fields,
                     std::optional<double> k0)
    : lattice_(std::move(lattice)), constants_(constants), fields_(std::move(fields)) {
    constants_.validate();
    fields_.validate(lattice_);
    potential_.resize(static_cast<std::size_t>(lattice_.num_sites()));
    for (SiteIndex s = 0; s < lattice_.num_sites(); ++s)
        potential_[static_cast<std::size_t>(s)] = effective_potential(fields_, constants_, lattice_, s);

    if (k0) {
        const double upper = k0_upper_bound(lattice_, constants_);
        const double sup = max_abs_potential();
        if (!std::isfinite(*k0) || *k0 < 0.0)
            throw InvalidArgument("K0 must be a finite non-negative energy");
        if (sup > 2.0 * *k0)
            throw InfeasibleModel("|V| <= 2 K0 violated: sup|V| = " + std::to_string(sup) +
                                  ", K0 = " + std::to_string(*k0));
        if (*k0 > upper)
            throw InfeasibleModel("K0 <= hbar^2/(a^2 m) violated: K0 = " + std::to_string(*k0) +
                                  ", bound = " + std::to_string(upper));
        k0_ = *k0;
    } else {
        k0_ = choose_k0(fields_, constants_, lattice_);
    }
    dt_ = derive_dt(lattice_, constants_);
}

double ModelSpec::max_abs_potential() const noexcept {
    double sup = 0.0;
    for (double v : potential_) sup = std::max(sup, std::abs(v));
    return sup;
}

double ModelSpec::hop_rate() const noexcept {
    const double a = lattice_.spacing();
    return constants_.hbar / (2.0 * constants_.mass * a * a);
}

double ModelSpec::vector_coupling() const noexcept {
    return 2.0 * lattice_.spacing() * constants_.charge / (constants_.light_speed * constants_.hbar);
}

ModelSpec ModelSpec::with_reversed_vector_potential() const {
    FieldConfig flipped = fields_;
    for (auto& a : flipped.vector_potential)
        for (auto& component : a) component = -component;
    return ModelSpec(lattice_, constants_, std::move(flipped), k0_);
}

}  // namespace smech

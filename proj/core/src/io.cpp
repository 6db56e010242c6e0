#include "smech/io.hpp"

#include <cstdio>

#include <json.hpp>

#include "smech/equivalence.hpp"

namespace smech {

namespace {

class Fnv1a {
public:
    void bytes(const void* data, std::size_t size) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < size; ++i) {
            hash_ ^= p[i];
            hash_ *= 0x100000001b3ULL;
        }
    }
    template <typename T>
    void value(T v) {
        bytes(&v, sizeof v);
    }
    std::uint64_t digest() const noexcept { return hash_; }

private:
    std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

}  // namespace

std::string version() { return "0.1.0"; }

std::uint64_t model_hash(const ModelSpec& model) {
    Fnv1a h;
    const auto& lattice = model.lattice();
    h.value(lattice.dimension());
    h.value(lattice.sites_per_axis());
    h.value(lattice.spacing());
    const auto& k = model.constants();
    h.value(k.mass);
    h.value(k.charge);
    h.value(k.light_speed);
    h.value(k.hbar);
    h.value(model.k0());
    for (const auto& a : model.fields().vector_potential)
        for (int axis = 0; axis < lattice.dimension(); ++axis) h.value(a[static_cast<std::size_t>(axis)]);
    for (double phi : model.fields().scalar_potential) h.value(phi);
    return h.digest();
}

std::string model_hash_hex(const ModelSpec& model) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(model_hash(model)));
    return buf;
}

std::string provenance(const ModelSpec& model) { return "model=" + model_hash_hex(model) + " version=" + version(); }

std::string model_summary_json(const ModelSpec& model) {
    const auto sc = derive_sector_constant(model);
    const auto& k = model.constants();
    const nlohmann::json j{
        {"model_hash", model_hash_hex(model)},
        {"version", version()},
        {"dimension", model.dimension()},
        {"sites_per_axis", model.lattice().sites_per_axis()},
        {"spacing", model.lattice().spacing()},
        {"num_sites", model.num_sites()},
        {"mass", k.mass},
        {"charge", k.charge},
        {"light_speed", k.light_speed},
        {"hbar", k.hbar},
        {"dt", model.dt()},
        {"k0", model.k0()},
        {"max_abs_potential", model.max_abs_potential()},
        {"c0", {{"re", sc.c0.real()}, {"im", sc.c0.imag()}}},
        {"sector_residual", sc.residual},
    };
    return j.dump(2);
}

}  // namespace smech

#include "smech/config.hpp"

#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "smech/error.hpp"

namespace smech {

std::optional<Preset> parse_preset(std::string_view name) {
    if (name == "free") return Preset::Free;
    if (name == "harmonic") return Preset::Harmonic;
    if (name == "constant-A" || name == "constant-a") return Preset::ConstantA;
    return std::nullopt;
}

std::string_view preset_name(Preset preset) {
    switch (preset) {
        case Preset::Free: return "free";
        case Preset::Harmonic: return "harmonic";
        case Preset::ConstantA: return "constant-A";
    }
    return "unknown";
}

namespace {

std::vector<double> harmonic_table(const LatticeSpec& lattice, double spring,
                                   const Vector3& center) {
    std::vector<double> phi(static_cast<std::size_t>(lattice.num_sites()));
    for (SiteIndex s = 0; s < lattice.num_sites(); ++s) {
        const auto x = lattice.position(s);
        double r2 = 0.0;
        for (int axis = 0; axis < lattice.dimension(); ++axis) {
            const auto i = static_cast<std::size_t>(axis);
            r2 += (x[i] - center[i]) * (x[i] - center[i]);
        }
        phi[static_cast<std::size_t>(s)] = 0.5 * spring * r2;
    }
    return phi;
}

Vector3 box_center(const LatticeSpec& lattice) {
    Vector3 c{};
    for (int axis = 0; axis < lattice.dimension(); ++axis)
        c[static_cast<std::size_t>(axis)] = 0.5 * lattice.spacing() * lattice.sites_per_axis();
    return c;
}

}  // namespace

ModelSpec make_preset(Preset preset, const PresetOptions& options) {
    LatticeSpec lattice(options.dimension, options.sites_per_axis, options.spacing);
    auto fields = FieldConfig::zero(lattice);
    switch (preset) {
        case Preset::Free:
            break;
        case Preset::Harmonic:
            fields.scalar_potential = harmonic_table(lattice, options.spring, box_center(lattice));
            break;
        case Preset::ConstantA:
            for (auto& a : fields.vector_potential) a[0] = options.vector_potential;
            break;
    }
    return ModelSpec(lattice, options.constants, std::move(fields), options.k0);
}

namespace {

int line_of(const YAML::Node& node) { return node.Mark().line >= 0 ? node.Mark().line + 1 : -1; }

template <typename T>
T read_scalar(const YAML::Node& parent, const std::string& key, const std::string& path, T fallback) {
    const auto node = parent[key];
    if (!node) return fallback;
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError("line " + std::to_string(line_of(node)) + ": key '" + path +
                              "' has the wrong type",
                          path, line_of(node));
    }
}

template <typename T>
T require_scalar(const YAML::Node& parent, const std::string& key, const std::string& path) {
    if (!parent[key])
        throw ConfigError("missing required key '" + path + "'", path, line_of(parent));
    return read_scalar<T>(parent, key, path, T{});
}

Vector3 read_vector(const YAML::Node& node, const std::string& path, int dimension) {
    Vector3 v{};
    if (node.IsScalar()) {
        v[0] = node.as<double>();
        return v;
    }
    if (!node.IsSequence() || static_cast<int>(node.size()) != dimension)
        throw ConfigError("line " + std::to_string(line_of(node)) + ": key '" + path +
                              "' must be a list of " + std::to_string(dimension) + " numbers",
                          path, line_of(node));
    for (int i = 0; i < dimension; ++i) v[static_cast<std::size_t>(i)] = node[i].as<double>();
    return v;
}

void check_known_keys(const YAML::Node& map, std::initializer_list<std::string_view> known,
                      const std::string& prefix) {
    for (const auto& entry : map) {
        const auto key = entry.first.as<std::string>();
        bool ok = false;
        for (auto k : known) ok = ok || key == k;
        if (!ok)
            throw ConfigError("line " + std::to_string(line_of(entry.first)) + ": unknown key '" +
                                  prefix + key + "'",
                              prefix + key, line_of(entry.first));
    }
}

ModelSpec build_from_yaml(const YAML::Node& root) {
    if (!root.IsMap()) throw ConfigError("model file must be a key/value mapping");
    check_known_keys(root,
                     {"preset", "dimension", "sites_per_axis", "spacing", "mass", "charge",
                      "light_speed", "hbar", "potential", "vector_potential", "k0"},
                     "");

    if (root["preset"]) {
        const auto name = read_scalar<std::string>(root, "preset", "preset", "");
        const auto preset = parse_preset(name);
        if (!preset)
            throw ConfigError("line " + std::to_string(line_of(root["preset"])) +
                                  ": unknown preset '" + name + "'",
                              "preset", line_of(root["preset"]));
        PresetOptions options;
        options.dimension = read_scalar<int>(root, "dimension", "dimension", options.dimension);
        options.sites_per_axis =
            read_scalar<int>(root, "sites_per_axis", "sites_per_axis", options.sites_per_axis);
        options.spacing = read_scalar<double>(root, "spacing", "spacing", options.spacing);
        options.constants.mass = read_scalar<double>(root, "mass", "mass", 1.0);
        options.constants.charge = read_scalar<double>(root, "charge", "charge", 1.0);
        options.constants.light_speed = read_scalar<double>(root, "light_speed", "light_speed", 1.0);
        options.constants.hbar = read_scalar<double>(root, "hbar", "hbar", 1.0);
        if (root["potential"])
            options.spring = read_scalar<double>(root["potential"], "spring", "potential.spring",
                                                 options.spring);
        if (root["vector_potential"] && root["vector_potential"]["value"])
            options.vector_potential = read_vector(root["vector_potential"]["value"],
                                                   "vector_potential.value", 1)[0];
        if (root["k0"]) options.k0 = read_scalar<double>(root, "k0", "k0", 0.0);
        return make_preset(*preset, options);
    }

    const int dimension = require_scalar<int>(root, "dimension", "dimension");
    const int sites = require_scalar<int>(root, "sites_per_axis", "sites_per_axis");
    const double spacing = require_scalar<double>(root, "spacing", "spacing");
    PhysicalConstants constants;
    constants.mass = read_scalar<double>(root, "mass", "mass", 1.0);
    constants.charge = read_scalar<double>(root, "charge", "charge", 1.0);
    constants.light_speed = read_scalar<double>(root, "light_speed", "light_speed", 1.0);
    constants.hbar = read_scalar<double>(root, "hbar", "hbar", 1.0);

    LatticeSpec lattice(dimension, sites, spacing);
    auto fields = FieldConfig::zero(lattice);
    const auto n = static_cast<std::size_t>(lattice.num_sites());

    if (const auto pot = root["potential"]) {
        check_known_keys(pot, {"kind", "spring", "center", "values"}, "potential.");
        const auto kind = read_scalar<std::string>(pot, "kind", "potential.kind", "zero");
        if (kind == "zero") {
        } else if (kind == "harmonic") {
            const double spring = require_scalar<double>(pot, "spring", "potential.spring");
            const Vector3 center = pot["center"] ? read_vector(pot["center"], "potential.center", dimension)
                                                 : box_center(lattice);
            fields.scalar_potential = harmonic_table(lattice, spring, center);
        } else if (kind == "custom-table") {
            const auto values = pot["values"];
            if (!values || !values.IsSequence() || values.size() != n)
                throw ConfigError("line " + std::to_string(line_of(pot)) +
                                      ": potential.values must list one value per site (" +
                                      std::to_string(n) + ")",
                                  "potential.values", line_of(pot));
            for (std::size_t s = 0; s < n; ++s) fields.scalar_potential[s] = values[s].as<double>();
        } else {
            throw ConfigError("line " + std::to_string(line_of(pot["kind"])) +
                                  ": potential.kind must be zero, harmonic or custom-table",
                              "potential.kind", line_of(pot["kind"]));
        }
    }

    if (const auto vp = root["vector_potential"]) {
        check_known_keys(vp, {"kind", "value", "values"}, "vector_potential.");
        const auto kind = read_scalar<std::string>(vp, "kind", "vector_potential.kind", "zero");
        if (kind == "zero") {
        } else if (kind == "constant") {
            if (!vp["value"])
                throw ConfigError("missing required key 'vector_potential.value'",
                                  "vector_potential.value", line_of(vp));
            const auto value = read_vector(vp["value"], "vector_potential.value", dimension);
            for (auto& a : fields.vector_potential) a = value;
        } else if (kind == "custom-table") {
            const auto values = vp["values"];
            if (!values || !values.IsSequence() || values.size() != n)
                throw ConfigError("line " + std::to_string(line_of(vp)) +
                                      ": vector_potential.values must list one vector per site (" +
                                      std::to_string(n) + ")",
                                  "vector_potential.values", line_of(vp));
            for (std::size_t s = 0; s < n; ++s)
                fields.vector_potential[s] = read_vector(values[s], "vector_potential.values", dimension);
        } else {
            throw ConfigError("line " + std::to_string(line_of(vp["kind"])) +
                                  ": vector_potential.kind must be zero, constant or custom-table",
                              "vector_potential.kind", line_of(vp["kind"]));
        }
    }

    std::optional<double> k0;
    if (root["k0"]) k0 = read_scalar<double>(root, "k0", "k0", 0.0);
    return ModelSpec(lattice, constants, std::move(fields), k0);
}

}  // namespace

ModelSpec parse_model(std::string_view yaml_text) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(yaml_text));
    } catch (const YAML::ParserException& e) {
        throw ConfigError("line " + std::to_string(e.mark.line + 1) + ": " + e.msg, {},
                          e.mark.line + 1);
    }
    try {
        return build_from_yaml(root);
    } catch (const YAML::Exception& e) {
        throw ConfigError("line " + std::to_string(e.mark.line + 1) + ": " + e.msg, {},
                          e.mark.line + 1);
    }
}

ModelSpec load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open model file '" + path.string() + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_model(buffer.str());
}

}  // namespace smech

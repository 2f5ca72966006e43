#include "aniso/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace aniso {

namespace {

void require_keys(const nlohmann::json& obj, const std::set<std::string>& allowed,
                  const std::string& where) {
    if (!obj.is_object()) throw std::invalid_argument(where + " must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw std::invalid_argument("unknown key '" + it.key() + "' in " + where);
}

void validate_region_spec(const nlohmann::json& spec, const std::string& where) {
    const std::set<std::string> base = {"type", "name"};
    if (!spec.contains("type")) throw std::invalid_argument(where + " missing 'type'");
    const std::string type = spec.at("type").get<std::string>();
    if (type == "all") {
        require_keys(spec, base, where);
    } else if (type == "cone_iso" || type == "cone_aniso" || type == "type_region" ||
               type == "dual_type_region") {
        std::set<std::string> keys = base;
        keys.insert("c");
        require_keys(spec, keys, where);
        spec.at("c").get<double>();
    } else if (type == "halfplane") {
        std::set<std::string> keys = base;
        keys.insert("axis");
        keys.insert("min");
        require_keys(spec, keys, where);
    } else if (type == "annulus") {
        std::set<std::string> keys = base;
        keys.insert("r0");
        keys.insert("r1");
        require_keys(spec, keys, where);
    } else if (type == "box_aniso") {
        std::set<std::string> keys = base;
        keys.insert("cx");
        keys.insert("cxi");
        keys.insert("rx");
        keys.insert("rxi");
        require_keys(spec, keys, where);
    } else if (type == "complement") {
        std::set<std::string> keys = base;
        keys.insert("arg");
        require_keys(spec, keys, where);
        validate_region_spec(spec.at("arg"), where + ".arg");
    } else if (type == "union" || type == "intersection") {
        std::set<std::string> keys = base;
        keys.insert("args");
        require_keys(spec, keys, where);
        for (const auto& sub : spec.at("args")) validate_region_spec(sub, where + ".args[]");
    } else {
        throw std::invalid_argument(where + ": unknown region type '" + type + "'");
    }
}

} // namespace

CatalogKind catalog_kind_from_json(const nlohmann::json& spec) {
    const std::string kind = spec.at("kind").get<std::string>();
    if (kind == "gaussian") return GaussianSpec{spec.value("width", 1.0)};
    if (kind == "hermite") return HermiteSpec{spec.value("order", 0)};
    if (kind == "delta_approx") return DeltaApproxSpec{spec.value("width", 0.05)};
    if (kind == "constant") return ConstantSpec{};
    if (kind == "chirp") return ChirpSpec{spec.value("rate", 1.0)};
    throw std::invalid_argument("unknown signal kind: " + kind);
}

Window window_from_json(const nlohmann::json& spec, const SpatialGrid& grid) {
    const std::string kind = spec.at("kind").get<std::string>();
    if (kind == "gaussian") return make_window(WindowKind::gaussian, 0, grid);
    if (kind == "hermite") return make_window(WindowKind::hermite, spec.value("order", 2), grid);
    throw std::invalid_argument("unknown window kind: " + kind);
}

ExperimentConfig parse_config(const nlohmann::json& doc) {
    require_keys(doc,
                 {"signal", "window", "aniso", "phase_grid", "spatial_grid", "hamiltonian",
                  "times", "regions", "thresholds", "output_dir"},
                 "config");
    ExperimentConfig cfg;

    if (doc.contains("signal")) {
        require_keys(doc["signal"], {"kind", "width", "order", "rate"}, "signal");
        cfg.signal = doc["signal"];
        catalog_kind_from_json(cfg.signal); // validates
    }
    if (doc.contains("window")) {
        require_keys(doc["window"], {"kind", "order"}, "window");
        cfg.window = doc["window"];
    }
    if (doc.contains("aniso")) {
        require_keys(doc["aniso"], {"k", "m", "rho"}, "aniso");
        cfg.k = doc["aniso"].value("k", 1);
        cfg.m = doc["aniso"].value("m", 1);
        cfg.rho = doc["aniso"].value("rho", 1.0);
    }
    if (doc.contains("phase_grid")) {
        require_keys(doc["phase_grid"], {"x_max", "xi_max", "nx", "nxi"}, "phase_grid");
        cfg.phase_grid = PhaseGrid(doc["phase_grid"].value("x_max", 20.0),
                                   doc["phase_grid"].value("xi_max", 20.0),
                                   doc["phase_grid"].value("nx", 257),
                                   doc["phase_grid"].value("nxi", 257));
    }
    if (doc.contains("spatial_grid")) {
        require_keys(doc["spatial_grid"], {"x_max", "n"}, "spatial_grid");
        cfg.spatial_grid = SpatialGrid(doc["spatial_grid"].value("x_max", 20.0),
                                       doc["spatial_grid"].value("n", 4097));
    }
    if (doc.contains("hamiltonian")) {
        require_keys(doc["hamiltonian"], {"k", "m", "p", "mu", "basis_size"}, "hamiltonian");
        cfg.ham_k = doc["hamiltonian"].value("k", 1);
        cfg.ham_m = doc["hamiltonian"].value("m", 1);
        cfg.ham_p = doc["hamiltonian"].value("p", 1.0);
        cfg.ham_mu = doc["hamiltonian"].value("mu", 0.5);
        cfg.basis_size = doc["hamiltonian"].value("basis_size", 200);
    }
    if (doc.contains("times")) cfg.times = doc["times"].get<std::vector<double>>();
    if (doc.contains("regions")) {
        for (const auto& spec : doc["regions"]) {
            validate_region_spec(spec, "regions[]");
            cfg.regions.push_back(spec);
        }
    }
    if (doc.contains("thresholds")) {
        require_keys(doc["thresholds"], {"n_threshold", "n_cap", "r_min", "eps"}, "thresholds");
        cfg.n_threshold = doc["thresholds"].value("n_threshold", 8.0);
        cfg.n_cap = doc["thresholds"].value("n_cap", 12.0);
        cfg.r_min = doc["thresholds"].value("r_min", 2.0);
        cfg.eps = doc["thresholds"].value("eps", 0.25);
    }
    if (doc.contains("output_dir")) cfg.output_dir = doc["output_dir"].get<std::string>();

    cfg.aniso(); // validates k, m, rho
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config " + path);
    nlohmann::json doc;
    in >> doc;
    return parse_config(doc);
}

nlohmann::json ExperimentConfig::resolved() const {
    nlohmann::json j;
    j["signal"] = signal;
    j["window"] = window;
    j["aniso"] = {{"k", k}, {"m", m}, {"rho", rho}};
    j["phase_grid"] = {{"x_max", phase_grid.x_max}, {"xi_max", phase_grid.xi_max},
                       {"nx", phase_grid.nx}, {"nxi", phase_grid.nxi}};
    j["spatial_grid"] = {{"x_max", spatial_grid.x_max}, {"n", spatial_grid.n}};
    j["hamiltonian"] = {{"k", ham_k}, {"m", ham_m}, {"p", ham_p}, {"mu", ham_mu},
                        {"basis_size", basis_size}};
    j["times"] = times;
    j["regions"] = regions;
    j["thresholds"] = {{"n_threshold", n_threshold}, {"n_cap", n_cap}, {"r_min", r_min},
                       {"eps", eps}};
    j["output_dir"] = output_dir;
    return j;
}

} // namespace aniso

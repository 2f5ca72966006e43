#pragma once

#include "aniso/geometry.hpp"
#include "aniso/signal.hpp"
#include "aniso/stft.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace aniso {

// Schema-validated experiment configuration. Unknown keys are rejected;
// defaults are materialized so the emitted resolved_config.json is complete.
struct ExperimentConfig {
    nlohmann::json signal = {{"kind", "gaussian"}, {"width", 1.0}};
    nlohmann::json window = {{"kind", "gaussian"}, {"order", 0}};
    int k = 1;
    int m = 1;
    double rho = 1.0;
    PhaseGrid phase_grid;
    SpatialGrid spatial_grid;
    int ham_k = 1;
    int ham_m = 1;
    double ham_p = 1.0;
    double ham_mu = 0.5;
    int basis_size = 200;
    std::vector<double> times = {0.7853981633974483};
    std::vector<nlohmann::json> regions;
    double n_threshold = 8.0;
    double n_cap = 12.0;
    double r_min = 2.0;
    double eps = 0.25;
    std::string output_dir = "out";

    AnisoParams aniso() const { return AnisoParams(k, m, rho); }
    nlohmann::json resolved() const;
};

ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);

CatalogKind catalog_kind_from_json(const nlohmann::json& spec);
Window window_from_json(const nlohmann::json& spec, const SpatialGrid& grid);

} // namespace aniso

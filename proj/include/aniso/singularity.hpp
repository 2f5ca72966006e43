#pragma once

#include "aniso/geometry.hpp"
#include "aniso/stft.hpp"

#include <string>
#include <vector>

namespace aniso {

struct DecayOptions {
    double n_cap = 12.0;
    double r_min = 2.0;
    int n_rays = 720;
    int ladder = 64;
};

struct ShellEntry {
    int j = 0;          // dyadic shell [2^j, 2^{j+1})
    double radius = 0.0;
    double max_abs = 0.0;
};

// Per-ray and per-cell estimated polynomial decay exponents of |V| along
// sigma-anisotropic rays through the unit curve {x^{2k} + xi^{2m} = 1}.
struct DecayMap {
    PhaseGrid grid;
    std::vector<double> exponents;       // per cell, capped at n_cap
    std::vector<std::uint8_t> unresolved; // |z| < r_min
    std::vector<double> ray_params;      // curve parameter (angle) per ray
    std::vector<double> ray_exponents;
    DecayOptions opts;

    double exponent_at(int i, int j) const { return exponents[grid.index(i, j)]; }
};

DecayMap decay_map(const STFTField& F, const AnisoParams& p, const DecayOptions& opts = {});

void save_decay_csv(const DecayMap& d, const std::string& path);

struct FilterReport {
    double eps = 0.0;
    double rho = 1.0;
    bool member = false;
    double estimated_exponent = 0.0;
    double n_threshold = 8.0;
    std::vector<ShellEntry> shell_table;
    std::string caveat = "finite-scale surrogate";
};

// Decay test over the eps-neighborhood of a region: shell maxima of |V| over
// the Omega_{rho,eps} raster, regression exponent over the top dyadic shells,
// member = (estimated exponent >= n_threshold).
FilterReport filter_membership(const STFTField& F, const AnisoParams& p, const RegionMask& omega,
                               double eps, double n_threshold, double r_min = 2.0);

std::string filter_report_json(const FilterReport& r);
void save_filter_report(const FilterReport& r, const std::string& path);

struct WavefrontResult {
    std::vector<double> ray_params;     // all rays
    std::vector<double> ray_exponents;
    std::vector<double> raw_rays;       // rays with exponent < n_threshold
    std::vector<double> directions;     // per-bundle minimizers (representatives)
};

// Singular directions on the unit curve: rays whose decay exponent stays
// below the threshold. directions collapses each contiguous sub-threshold
// bundle to its minimizing ray.
WavefrontResult wavefront_extract(const STFTField& F, const AnisoParams& p, double n_threshold,
                                  const DecayOptions& opts = {});

// Cyclic Hausdorff distance between direction sets, in curve parameter.
double direction_set_distance(const std::vector<double>& a, const std::vector<double>& b);

// Numerical filter axioms over a finite family: upward closure on nested
// pairs and intersection stability, with membership in the filter sense
// (complement-side decay). The full plane is a member by convention.
bool filter_axioms_check(const STFTField& F, const AnisoParams& p,
                         const std::vector<RegionMask>& regions, double eps, double n_threshold);

// Filter-side membership of a single region (decay over the complement).
bool filter_member(const STFTField& F, const AnisoParams& p, const RegionMask& region, double eps,
                   double n_threshold);

} // namespace aniso

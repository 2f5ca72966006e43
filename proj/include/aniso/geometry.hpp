#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace aniso {

// Anisotropy data: sigma = k/m is kept as the integer pair so exponents like
// 1/sigma and rho*sigma never accumulate rounding from a stored quotient.
struct AnisoParams {
    int k = 1;
    int m = 1;
    double rho = 1.0;

    AnisoParams() = default;
    AnisoParams(int k_, int m_, double rho_);

    double sigma() const { return static_cast<double>(k) / static_cast<double>(m); }
    double inv_sigma() const { return static_cast<double>(m) / static_cast<double>(k); }
};

struct PhasePoint {
    double x = 0.0;
    double xi = 0.0;
};

// Centered uniform lattice on [-x_max, x_max] x [-xi_max, xi_max].
struct PhaseGrid {
    double x_max = 20.0;
    double xi_max = 20.0;
    int nx = 257;
    int nxi = 257;

    PhaseGrid() = default;
    PhaseGrid(double xm, double xim, int nx_, int nxi_);

    double hx() const { return 2.0 * x_max / (nx - 1); }
    double hxi() const { return 2.0 * xi_max / (nxi - 1); }
    double x(int i) const { return -x_max + i * hx(); }
    double xi(int j) const { return -xi_max + j * hxi(); }
    PhasePoint point(int i, int j) const { return {x(i), xi(j)}; }
    std::size_t cells() const { return static_cast<std::size_t>(nx) * nxi; }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
    // Nearest lattice indices, clamped to the grid.
    int nearest_i(double xv) const;
    int nearest_j(double xiv) const;
    bool contains(const PhasePoint& z) const;
    bool operator==(const PhaseGrid& o) const;
};

// A phase-plane region: analytic predicate plus its rasterization. The raster
// holds predicate(point(i,j)) for every lattice cell; derived regions
// (dilations, transports) carry a predicate backed by the construction.
struct RegionMask {
    std::function<bool(PhasePoint)> predicate;
    std::shared_ptr<std::vector<std::uint8_t>> raster;
    PhaseGrid grid;

    bool cell(int i, int j) const { return (*raster)[grid.index(i, j)] != 0; }
    // Raster lookup at the nearest cell, clamped to the grid edge.
    bool raster_at(const PhasePoint& z) const;
    std::size_t count_true() const;
    bool empty() const { return count_true() == 0; }
};

RegionMask rasterize(const PhaseGrid& grid, std::function<bool(PhasePoint)> pred);
RegionMask complement(const RegionMask& r);
RegionMask intersect(const RegionMask& a, const RegionMask& b);
RegionMask unite(const RegionMask& a, const RegionMask& b);
bool raster_subset(const RegionMask& a, const RegionMask& b); // a ⊆ b on the grid
bool raster_disjoint(const RegionMask& a, const RegionMask& b);

// theta_sigma(z) = 1 + |x| + |xi|^{1/sigma}, the anisotropic bracket.
double theta_weight(const AnisoParams& p, const PhasePoint& z);

// w_{k,m}(z) = (1 + x^{2k} + xi^{2m})^{1/2}; smooth companion of theta^k.
double wkm_weight(const AnisoParams& p, const PhasePoint& z);

struct StructuralConstants {
    double C_sigma;  // quasi-triangle constant for exponent 1/sigma
    double B_sigma;  // triangle constant for theta_sigma
    double c_k;      // sandwich constant between theta^k and w_{k,m}
};
StructuralConstants structural_constants(const AnisoParams& p);

// Supremum of eps in (0,1) satisfying both smallness conditions
//   eps + eps^{1/sigma} C_sigma < 1   and   eps (1-eps)^{-sigma} C_{1/sigma}^2 < 1,
// found by bisection to relative accuracy 1e-12. Serves as the working bound
// below which dilation parameters are known to be well behaved.
double feasible_epsilon_bound(const AnisoParams& p);

PhasePoint sigma_dilate(const AnisoParams& p, const PhasePoint& z, double lambda);

// Anisotropic open neighborhood: union over region points (y,eta) of boxes
// |x-y| < eps*theta^rho(y,eta), |xi-eta| < eps*theta^{rho*sigma}(y,eta).
// Rasterized conservatively: box radii are rounded up to whole cells, so the
// raster is a superset of the true neighborhood restricted to the grid.
RegionMask aniso_neighborhood(const AnisoParams& p, const RegionMask& omega, double eps);

// Smallest mu (decreasing search from min(1, delta-eps) by halving, raster
// verified) separating the mu-dilations of Omega_{rho,eps} and of the
// complement of Omega_{rho,delta}.
double separation_mu(const AnisoParams& p, const RegionMask& omega, double eps, double delta);

// Serialization. CSV header: x,xi,inside (row-major over j then i). JSON
// carries grid metadata plus a run-length-encoded raster.
void save_region_csv(const RegionMask& r, const std::string& path);
void save_region_json(const RegionMask& r, const std::string& path);
RegionMask load_region_json(const std::string& path);
std::string region_json_string(const RegionMask& r);
RegionMask region_from_json_string(const std::string& text);

} // namespace aniso

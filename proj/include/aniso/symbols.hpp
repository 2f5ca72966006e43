#pragma once

#include "aniso/geometry.hpp"
#include "aniso/stft.hpp"

#include <string>
#include <vector>

namespace aniso {

// Real symbol on the phase grid with its nominal order; fitted_K is the
// observed sup of |a| theta^{-order} (finite by construction check).
struct SymbolField {
    std::vector<double> values;
    PhaseGrid grid;
    double order_r = 0.0;
    AnisoParams params;
    std::string label;
    double fitted_K = 0.0;

    double at(int i, int j) const { return values[grid.index(i, j)]; }
    double& at(int i, int j) { return values[grid.index(i, j)]; }
    double max_abs() const;
};

SymbolField make_symbol_field(const PhaseGrid& grid, const AnisoParams& params, double order_r,
                              const std::string& label,
                              const std::function<double(PhasePoint)>& f);

// Smooth step glued from e^{-1/t}: 0 for u <= 0, 1 for u >= 1.
double smooth_step(double u);
// Excision factor psi_mu: 0 on B_{mu/2}, 1 off B_mu.
double excision_psi(double mu, const PhasePoint& z);

// a(x,xi) = psi_mu(x,xi) (x^{2k} + xi^{2m})^p, order 2kp.
SymbolField power_hamiltonian(double p_exp, int k, int m, double mu, const PhaseGrid& grid);

// Parameters of the mollified cutoff q_{eps,delta,rho,Omega}. mu must satisfy
// the raster separation property; make_cutoff_spec picks it via separation_mu.
struct CutoffSpec {
    double eps = 0.1;
    double delta = 0.3;
    double mu = 0.0;
    AnisoParams params;
    RegionMask omega;
};

CutoffSpec make_cutoff_spec(const AnisoParams& p, const RegionMask& omega, double eps,
                            double delta);

std::string cutoff_spec_json_string(const CutoffSpec& s);
CutoffSpec cutoff_spec_from_json_string(const std::string& text);

// Mollified indicator of (Omega_{rho,eps})_{rho,mu}: separable bump kernel
// with z-dependent radii mu w^{rho/k}/2, mu w^{rho/m}/2, integrated exactly
// over each raster cell (Gauss-Legendre per cell), so the result is a smooth
// function of z. Range [0,1], == 1 on the Omega_{rho,eps} raster, == 0 off
// the Omega_{rho,delta} raster. Masks live on the spec's grid; evaluation may
// use a finer one.
SymbolField mollified_cutoff(const CutoffSpec& spec, const PhaseGrid& grid,
                             int points_per_radius = 16);

struct EllipticityResult {
    bool is_elliptic = false;
    double best_C = 0.0;
};

// best_C = min over (Omega \ B_R) raster cells of |a(z)| theta^{-order}(z).
EllipticityResult ellipticity_test(const SymbolField& a, const RegionMask& omega, double R);

struct SymbolEstimateEntry {
    int alpha = 0;
    int beta = 0;
    double constant = 0.0;
};

// Fitted seminorm table: max over the interior grid (optionally outside
// |z| <= exclude_radius) of |D^{alpha,beta} a| theta^{-r + rho(alpha+sigma beta)}
// with central finite differences, for alpha+beta <= max_order.
std::vector<SymbolEstimateEntry> symbol_estimate_check(const SymbolField& a, int max_order,
                                                       double exclude_radius = 0.0);

// Anti-Wick localization A_a u with the fixed unit Gaussian window.
SampledSignal antiwick_apply(const SymbolField& a, const SampledSignal& u);

void save_symbol_csv(const SymbolField& a, const std::string& path);
// Same compact binary layout as STFTField (values as float64 LE + sidecar).
void save_symbol_binary(const SymbolField& a, const std::string& data_path,
                        const std::string& sidecar_path);
SymbolField load_symbol_binary(const std::string& data_path, const std::string& sidecar_path);

} // namespace aniso

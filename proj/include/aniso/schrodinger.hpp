#pragma once

#include "aniso/geometry.hpp"
#include "aniso/hamilton.hpp"
#include "aniso/signal.hpp"
#include "aniso/singularity.hpp"
#include "aniso/stft.hpp"

#include <optional>
#include <string>
#include <vector>

namespace aniso {

// Eigenpairs of x^{2k} + (-d^2/dx^2)^m assembled in the orthonormal Hermite
// basis (ladder recursions are exact there). Vectors are column-major M x M.
// Only the lower, residual-certified part of the spectrum is trusted.
struct SpectralBasis {
    int k = 1;
    int m = 1;
    int M = 0;
    std::vector<double> eigenvalues;
    std::vector<double> vectors;   // column j = eigenvector j in Hermite coords
    std::vector<double> residuals; // vs the untruncated operator rows
    int certified = 0;             // modes 0..certified-1 pass the residual gate
    double shift_C = 0.0;          // lambda_j + shift_C > 0 for all j

    double vec(int row, int col) const { return vectors[static_cast<std::size_t>(col) * M + row]; }
};

SpectralBasis build_operator(int k, int m, int basis_size);

void save_basis(const SpectralBasis& b, const std::string& data_path,
                const std::string& header_path);
SpectralBasis load_basis(const std::string& data_path, const std::string& header_path);

// Eigenfunction j evaluated on a spatial grid.
std::vector<double> eigenfunction_on_grid(const SpectralBasis& b, int j, const SpatialGrid& grid);

// Certified-mode expansion coefficients c_j = (u, phi_j); throws
// "basis too small" when the relative expansion residual exceeds 1e-6.
std::vector<cplx> expand(const SpectralBasis& b, const SampledSignal& u);
std::vector<cplx> expand_unchecked(const SpectralBasis& b, const SampledSignal& u);

// Truncated eigen-expansion of delta_0: c_j = phi_j(0) over certified modes.
std::vector<cplx> delta_coefficients(const SpectralBasis& b);

// Band-limited delta surrogate for decay experiments: c_j = phi_j(0) with a
// smooth spectral taper (plateau over the lower half of the certified modes).
// A hard cutoff leaves kernel tails decaying only like 1/x, which fake
// singularities along the position axis; the smooth taper restores
// super-polynomial decay away from the frequency axis.
std::vector<cplx> tapered_delta_coefficients(const SpectralBasis& b);

SampledSignal reconstruct(const SpectralBasis& b, const std::vector<cplx>& coeffs,
                          const SpatialGrid& grid, const std::string& label);

struct EvolutionResult {
    std::vector<double> times;
    std::vector<std::vector<cplx>> coefficients; // per time, certified modes
    std::vector<SampledSignal> snapshots;
    int truncation_level = 0;
};

struct Forcing {
    std::vector<double> times;                 // quadrature grid for the Duhamel term
    std::vector<std::vector<cplx>> coefficients; // f_j(t) per time sample
};

// Spectral series solution with shifted functional calculus
// lambda_tilde_j = (lambda_j + C)^p - C^p; trapezoid quadrature for forcing.
EvolutionResult propagate(const SpectralBasis& b, const std::vector<cplx>& c0, double p_exp,
                          const std::vector<double>& times, const SpatialGrid& grid,
                          const std::string& label,
                          const std::optional<Forcing>& forcing = std::nullopt);
EvolutionResult propagate(const SpectralBasis& b, const SampledSignal& u0, double p_exp,
                          const std::vector<double>& times,
                          const std::optional<Forcing>& forcing = std::nullopt);

// (sum_j (lambda_j + C)^{s/(k p)} |(u, phi_j)|^2)^{1/2}.
double modulation_norm(const SpectralBasis& b, const SampledSignal& u, double s, int k,
                       double p_for_scaling);
double modulation_norm_coeffs(const SpectralBasis& b, const std::vector<cplx>& coeffs, double s,
                              int k, double p_for_scaling);

enum class PropagationRegime { critical, subcritical, supercritical, unclassified };

struct RegionVerdict {
    std::string name;
    bool member0 = false;
    bool member_t = false;
    bool implication = true;
};

struct PropagationReport {
    PropagationRegime regime = PropagationRegime::unclassified;
    double rho_source = 1.0;
    double rho_target = 1.0;
    bool inclusion_only = false; // supercritical: rho gap, equality never asserted
    double t = 0.0;
    int truncation_level = 0;
    std::vector<RegionVerdict> regions;
    bool pass = true;
    std::string note;
};

struct VerifyConfig {
    double eps = 0.25;
    double n_threshold = 4.0;
    double r_min = 2.0;
    int transport_steps_per_period = 512;
};

// Evolves u0 (or the truncated delta expansion), computes decay membership of
// each region at t = 0 and of its flow transport at time t, classifies the
// regime, and checks the implication "member at 0 => transported member at t".
PropagationReport verify_propagation(const SpectralBasis& b, const HamiltonianSpec& h,
                                     const std::vector<cplx>& c0, const std::string& label,
                                     double t, const std::vector<RegionMask>& regions,
                                     const std::vector<std::string>& region_names,
                                     const Window& w, const PhaseGrid& grid,
                                     const SpatialGrid& sgrid, const VerifyConfig& cfg);

std::string propagation_report_json(const PropagationReport& r);

void save_evolution_csv(const EvolutionResult& ev, const std::string& dir_prefix);

} // namespace aniso

#pragma once

#include "aniso/geometry.hpp"
#include "aniso/signal.hpp"

#include <functional>
#include <string>

namespace aniso {

enum class WindowKind { gaussian, hermite };

// Window function: sampled on a spatial grid, with an analytic evaluator so
// translates are exact (no interpolation of window values).
struct Window {
    SampledSignal samples;
    double l2 = 1.0;
    std::function<double(double)> eval;
    std::string label;
    WindowKind kind = WindowKind::gaussian;
    int order = 0;
};

Window make_window(WindowKind kind, int order, const SpatialGrid& grid);
// Metaplectic dilation |A|^{1/2} w(A x) of a window.
Window dilated_window(const Window& w, double A, const SpatialGrid& grid);

// Complex STFT values on a phase grid, stored column-major: index (i, j) at
// i*nxi + j so each x column is contiguous.
struct STFTField {
    std::vector<cplx> values;
    PhaseGrid grid;
    std::string source_label;
    std::string window_label;
    double window_l2 = 1.0;
    double source_l2 = 0.0;

    cplx at(int i, int j) const { return values[static_cast<std::size_t>(i) * grid.nxi + j]; }
    cplx& at(int i, int j) { return values[static_cast<std::size_t>(i) * grid.nxi + j]; }
    double abs_at(int i, int j) const { return std::abs(at(i, j)); }
    // Bilinear interpolation of |V| at an arbitrary phase point (clamped).
    double abs_interp(const PhasePoint& z) const;
    double max_abs() const;
};

// V_phi u(x, xi) = (2pi)^{-1/2} F(u T_x conj(phi))(xi), evaluated at exactly
// the phase lattice by a chirp-Z transform per x column.
STFTField analyze(const SampledSignal& u, const Window& w, const PhaseGrid& grid);

// Adjoint quadrature: (2pi)^{-1/2} iint F(z) Pi(z) w dz over the phase grid.
SampledSignal synthesize(const STFTField& F, const Window& w, const SpatialGrid& out_grid);
SampledSignal synthesize(const STFTField& F, const Window& w);

// Unitary Fourier transform with the (2pi)^{-1/2} convention, evaluated on
// the same symmetric lattice as the input.
SampledSignal fourier(const SampledSignal& u);

// Quadrature approximation of V_phi^* chi_Omega restricted to the phase grid
// (synthesized indicator distribution). Shares the synthesize code path.
SampledSignal indicator_synth(const RegionMask& region, const Window& w,
                              const SpatialGrid& out_grid);

struct MetaplecticOp {
    enum class Kind { fourier, dilation } kind = Kind::fourier;
    double A = 1.0;
};

// Max over the lattice of | |V_{mu(chi) w}(mu(chi) u)(chi z)| - |V_w u(z)| |.
// For dilation the transformed side is sampled on the rescaled grid
// {(x/A, A xi)} so both sides are compared on common points; dilated signals
// are resampled band-limited (exact for signals resolved by the grid).
double metaplectic_check(const SampledSignal& u, const Window& w, const MetaplecticOp& op,
                         const PhaseGrid& grid);
double metaplectic_check(const CatalogKind& kind, const Window& w, const MetaplecticOp& op,
                         const PhaseGrid& grid, const SpatialGrid& sgrid);

// Exact analytic fields used to take discretization error out of decay tests.
STFTField exact_delta_field(const Window& w, const PhaseGrid& grid);
STFTField exact_constant_field(const Window& w, const PhaseGrid& grid);

// Band-limited resample of u(A x) on the same grid (two chirp-Z passes).
SampledSignal resample_dilated(const SampledSignal& u, double A);

void save_field_csv(const STFTField& F, const std::string& path);
// Compact binary: little-endian float64 matrix plus a JSON sidecar.
void save_field_binary(const STFTField& F, const std::string& data_path,
                       const std::string& sidecar_path);
STFTField load_field_binary(const std::string& data_path, const std::string& sidecar_path);

} // namespace aniso

#pragma once

#include "aniso/fft.hpp"

#include <string>
#include <variant>
#include <vector>

namespace aniso {

// Uniform 1-D spatial grid on [-x_max, x_max], endpoints included.
struct SpatialGrid {
    double x_max = 20.0;
    int n = 4097;

    SpatialGrid() = default;
    SpatialGrid(double xm, int n_);

    double h() const { return 2.0 * x_max / (n - 1); }
    double point(int k) const { return -x_max + k * h(); }
    bool operator==(const SpatialGrid& o) const { return x_max == o.x_max && n == o.n; }
};

struct SampledSignal {
    std::vector<cplx> values;
    SpatialGrid grid;
    std::string label;

    double l2_norm() const;
    double l1_norm() const;
};

// Catalog of test distributions.
struct GaussianSpec { double width = 1.0; };
struct HermiteSpec { int order = 0; };
struct DeltaApproxSpec { double width = 0.05; };
struct ConstantSpec {};
struct ChirpSpec { double rate = 1.0; };

using CatalogKind =
    std::variant<GaussianSpec, HermiteSpec, DeltaApproxSpec, ConstantSpec, ChirpSpec>;

SampledSignal make_catalog_signal(const CatalogKind& kind, const SpatialGrid& grid);

// The signal |A|^{1/2} u(A x) sampled analytically (metaplectic dilation of a
// catalog entry).
SampledSignal make_dilated_catalog_signal(const CatalogKind& kind, double A,
                                          const SpatialGrid& grid);

// Orthonormal Hermite functions h_0..h_{count-1} evaluated at x (three-term
// recurrence; stable in function form).
std::vector<double> hermite_functions(double x, int count);

SampledSignal zero_signal(const SpatialGrid& grid);
SampledSignal scaled(const SampledSignal& u, cplx factor);
SampledSignal subtract(const SampledSignal& a, const SampledSignal& b);

void save_signal_csv(const SampledSignal& u, const std::string& path);
void save_signal_json(const SampledSignal& u, const std::string& path);
SampledSignal load_signal_json(const std::string& path);

} // namespace aniso

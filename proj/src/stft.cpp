#include "aniso/stft.hpp"

#include "aniso/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace aniso {

namespace {

constexpr double pi = 3.14159265358979323846;
const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * pi);

} // namespace

Window make_window(WindowKind kind, int order, const SpatialGrid& grid) {
    Window w;
    w.kind = kind;
    w.order = kind == WindowKind::gaussian ? 0 : order;
    if (kind == WindowKind::gaussian) {
        w.samples = make_catalog_signal(GaussianSpec{1.0}, grid);
        w.eval = [](double y) { return std::pow(pi, -0.25) * std::exp(-y * y / 2.0); };
        w.label = "gaussian";
    } else {
        w.samples = make_catalog_signal(HermiteSpec{order}, grid);
        w.eval = [order](double y) { return hermite_functions(y, order + 1).back(); };
        w.label = "hermite" + std::to_string(order);
    }
    w.l2 = w.samples.l2_norm();
    if (!(w.l2 > 0.0)) throw std::invalid_argument("window must be nonzero");
    return w;
}

Window dilated_window(const Window& w, double A, const SpatialGrid& grid) {
    if (A == 0.0) throw std::invalid_argument("dilation factor must be nonzero");
    Window out;
    auto base = w.eval;
    const double amp = std::sqrt(std::abs(A));
    out.eval = [base, A, amp](double y) { return amp * base(A * y); };
    out.label = w.label + "_dil";
    out.samples.grid = grid;
    out.samples.label = out.label;
    out.samples.values.resize(grid.n);
    for (int k = 0; k < grid.n; ++k) out.samples.values[k] = out.eval(grid.point(k));
    out.l2 = out.samples.l2_norm();
    return out;
}

double STFTField::abs_interp(const PhasePoint& z) const {
    const double fx = std::clamp((z.x + grid.x_max) / grid.hx(), 0.0, grid.nx - 1.0);
    const double fj = std::clamp((z.xi + grid.xi_max) / grid.hxi(), 0.0, grid.nxi - 1.0);
    const int i0 = std::min(static_cast<int>(fx), grid.nx - 2);
    const int j0 = std::min(static_cast<int>(fj), grid.nxi - 2);
    const double tx = fx - i0, tj = fj - j0;
    const double v00 = abs_at(i0, j0), v10 = abs_at(i0 + 1, j0);
    const double v01 = abs_at(i0, j0 + 1), v11 = abs_at(i0 + 1, j0 + 1);
    return (1 - tx) * ((1 - tj) * v00 + tj * v01) + tx * ((1 - tj) * v10 + tj * v11);
}

double STFTField::max_abs() const {
    double m = 0.0;
    for (const cplx& v : values) m = std::max(m, std::abs(v));
    return m;
}

STFTField analyze(const SampledSignal& u, const Window& w, const PhaseGrid& grid) {
    if (!(u.grid == w.samples.grid)) throw std::invalid_argument("signal and window grids differ");

    STFTField F;
    F.grid = grid;
    F.source_label = u.label;
    F.window_label = w.label;
    F.window_l2 = w.l2;
    F.source_l2 = u.l2_norm();
    F.values.resize(grid.cells());

    const int n = u.grid.n;
    const double h = u.grid.h();
    const double y0 = -u.grid.x_max;
    const double xi0 = -grid.xi_max;
    const double dxi = grid.hxi();

    parallel_for(grid.nx, [&](std::size_t ii) {
        const int i = static_cast<int>(ii);
        const double x = grid.x(i);
        std::vector<cplx> g(n);
        for (int k = 0; k < n; ++k)
            g[k] = u.values[k] * w.eval(u.grid.point(k) - x);
        // sum_k g_k e^{-i y_k xi_j} = e^{-i y0 xi_j} * czt_sum(g, -h xi0, -h dxi)
        std::vector<cplx> col = czt_sum(g, grid.nxi, -h * xi0, -h * dxi);
        for (int j = 0; j < grid.nxi; ++j) {
            const double xi = grid.xi(j);
            F.at(i, j) = inv_sqrt_2pi * h * col[j] * std::polar(1.0, -y0 * xi);
        }
    });
    return F;
}

namespace {

// Core adjoint quadrature shared by synthesize and indicator_synth: integrate
// G(z) Pi(z) w over the phase lattice, G supplied per column.
SampledSignal adjoint_quadrature(const PhaseGrid& grid,
                                 const std::function<cplx(int, int)>& G, const Window& w,
                                 const SpatialGrid& out_grid, const std::string& label) {
    const int n = out_grid.n;
    const double y0 = -out_grid.x_max;
    const double hy = out_grid.h();
    const double xi0 = -grid.xi_max;
    const double dxi = grid.hxi();
    const double cell = grid.hx() * grid.hxi();

    const int workers = std::max(1, thread_count());
    std::vector<std::vector<cplx>> partial(workers, std::vector<cplx>(n, cplx(0, 0)));
    const int chunk = (grid.nx + workers - 1) / workers;

    parallel_for(workers, [&](std::size_t wi) {
        const int lo = static_cast<int>(wi) * chunk;
        const int hi = std::min(grid.nx, lo + chunk);
        std::vector<cplx> colvals(grid.nxi);
        auto& acc = partial[wi];
        for (int i = lo; i < hi; ++i) {
            const double x = grid.x(i);
            for (int j = 0; j < grid.nxi; ++j) colvals[j] = G(i, j);
            // s(y_l) = sum_j G_ij e^{i y_l xi_j} = e^{i y_l xi0} czt_sum(G_i., dxi*y0, dxi*hy)
            std::vector<cplx> s = czt_sum(colvals, n, dxi * y0, dxi * hy);
            for (int l = 0; l < n; ++l) {
                const double y = out_grid.point(l);
                acc[l] += s[l] * std::polar(1.0, y * xi0) * w.eval(y - x);
            }
        }
    });

    SampledSignal out = zero_signal(out_grid);
    out.label = label;
    for (int wi = 0; wi < workers; ++wi)
        for (int l = 0; l < n; ++l) out.values[l] += partial[wi][l];
    const double scale = inv_sqrt_2pi * cell;
    for (cplx& v : out.values) v *= scale;
    return out;
}

} // namespace

SampledSignal synthesize(const STFTField& F, const Window& w, const SpatialGrid& out_grid) {
    for (const cplx& v : F.values)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw std::invalid_argument("field has non-finite values");
    auto G = [&F](int i, int j) { return F.at(i, j); };
    return adjoint_quadrature(F.grid, G, w, out_grid, "synth_" + F.source_label);
}

SampledSignal synthesize(const STFTField& F, const Window& w) {
    return synthesize(F, w, w.samples.grid);
}

SampledSignal indicator_synth(const RegionMask& region, const Window& w,
                              const SpatialGrid& out_grid) {
    auto G = [&region](int i, int j) {
        return region.cell(i, j) ? cplx(1.0, 0.0) : cplx(0.0, 0.0);
    };
    return adjoint_quadrature(region.grid, G, w, out_grid, "indicator_synth");
}

SampledSignal fourier(const SampledSignal& u) {
    const int n = u.grid.n;
    const double h = u.grid.h();
    const double y0 = -u.grid.x_max;
    SampledSignal out;
    out.grid = u.grid;
    out.label = "F(" + u.label + ")";
    // uhat(xi_j) on the same lattice; frequency grid matched to spatial extent.
    std::vector<cplx> s = czt_sum(u.values, n, -h * y0, -h * h);
    out.values.resize(n);
    for (int j = 0; j < n; ++j) {
        const double xi = u.grid.point(j);
        out.values[j] = inv_sqrt_2pi * h * s[j] * std::polar(1.0, -y0 * xi);
    }
    return out;
}

SampledSignal resample_dilated(const SampledSignal& u, double A) {
    if (A == 0.0) throw std::invalid_argument("dilation factor must be nonzero");
    // u(A x) = (2pi)^{-1/2} int uhat(xi) e^{i A x xi} dxi, quadrature on the
    // frequency lattice of fourier(u).
    SampledSignal uh = fourier(u);
    const int n = u.grid.n;
    const double h = u.grid.h();
    const double xi0 = -u.grid.x_max;
    SampledSignal out;
    out.grid = u.grid;
    out.label = u.label + "_dil";
    // v(x_l) = (2pi)^{-1/2} h sum_j uhat(xi_j) e^{i A x_l xi_j}
    std::vector<cplx> s = czt_sum(uh.values, n, h * A * (-u.grid.x_max), h * A * h);
    out.values.resize(n);
    const double amp = std::sqrt(std::abs(A));
    for (int l = 0; l < n; ++l) {
        const double x = u.grid.point(l);
        out.values[l] = amp * inv_sqrt_2pi * h * s[l] * std::polar(1.0, A * x * xi0);
    }
    return out;
}

namespace {

double metaplectic_deviation(const STFTField& base, const STFTField& mapped,
                             const MetaplecticOp& op) {
    const PhaseGrid& g = base.grid;
    double dev = 0.0;
    for (int i = 0; i < g.nx; ++i) {
        for (int j = 0; j < g.nxi; ++j) {
            double lhs;
            if (op.kind == MetaplecticOp::Kind::fourier) {
                // chi = J, J(x,xi) = (xi,-x); symmetric lattice maps to itself.
                const int ii = j;                 // x index of Jz is the xi index
                const int jj = g.nx - 1 - i;      // xi component -x
                lhs = mapped.abs_at(ii, jj);
            } else {
                // mapped field lives on the rescaled lattice {(x/A, A xi)}:
                // same (i, j) indexes the image point.
                lhs = mapped.abs_at(i, j);
            }
            dev = std::max(dev, std::abs(lhs - base.abs_at(i, j)));
        }
    }
    return dev;
}

} // namespace

double metaplectic_check(const SampledSignal& u, const Window& w, const MetaplecticOp& op,
                         const PhaseGrid& grid) {
    if (op.kind == MetaplecticOp::Kind::fourier) {
        if (grid.nx != grid.nxi || grid.x_max != grid.xi_max)
            throw std::invalid_argument("fourier check needs a symmetric phase grid");
        STFTField base = analyze(u, w, grid);
        SampledSignal uf = fourier(u);
        // Catalog windows are Fourier eigenfunctions: F(h_n) = (-i)^n h_n, so
        // mu(J) w equals w up to a unimodular factor that drops out of |V|.
        STFTField mapped = analyze(uf, w, grid);
        return metaplectic_deviation(base, mapped, op);
    }
    if (op.A == 1.0) return 0.0;
    STFTField base = analyze(u, w, grid);
    SampledSignal ud = resample_dilated(u, op.A);
    Window wd = dilated_window(w, op.A, w.samples.grid);
    PhaseGrid scaled(grid.x_max / std::abs(op.A), grid.xi_max * std::abs(op.A), grid.nx, grid.nxi);
    STFTField mapped = analyze(ud, wd, scaled);
    return metaplectic_deviation(base, mapped, op);
}

double metaplectic_check(const CatalogKind& kind, const Window& w, const MetaplecticOp& op,
                         const PhaseGrid& grid, const SpatialGrid& sgrid) {
    SampledSignal u = make_catalog_signal(kind, sgrid);
    if (op.kind == MetaplecticOp::Kind::dilation && op.A != 1.0) {
        STFTField base = analyze(u, w, grid);
        SampledSignal ud = make_dilated_catalog_signal(kind, op.A, sgrid);
        Window wd = dilated_window(w, op.A, sgrid);
        PhaseGrid scaled(grid.x_max / std::abs(op.A), grid.xi_max * std::abs(op.A), grid.nx,
                         grid.nxi);
        STFTField mapped = analyze(ud, wd, scaled);
        return metaplectic_deviation(base, mapped, op);
    }
    return metaplectic_check(u, w, op, grid);
}

STFTField exact_delta_field(const Window& w, const PhaseGrid& grid) {
    STFTField F;
    F.grid = grid;
    F.source_label = "delta_exact";
    F.window_label = w.label;
    F.window_l2 = w.l2;
    F.source_l2 = 0.0;
    F.values.resize(grid.cells());
    for (int i = 0; i < grid.nx; ++i) {
        const cplx v = inv_sqrt_2pi * w.eval(-grid.x(i)); // real windows: conj free
        for (int j = 0; j < grid.nxi; ++j) F.at(i, j) = v;
    }
    return F;
}

STFTField exact_constant_field(const Window& w, const PhaseGrid& grid) {
    // V_phi 1(x,xi) = e^{-i x xi} conj(what(-xi)); |.| depends on xi only.
    // Catalog windows satisfy what = (-i)^order w, so the evaluator is exact.
    STFTField F;
    F.grid = grid;
    F.source_label = "constant_exact";
    F.window_label = w.label;
    F.window_l2 = w.l2;
    F.source_l2 = 0.0;
    F.values.resize(grid.cells());

    const cplx minus_i(0.0, -1.0);
    cplx eig(1.0, 0.0);
    for (int r = 0; r < (w.order & 3); ++r) eig *= minus_i;
    for (int j = 0; j < grid.nxi; ++j) {
        const double xi = grid.xi(j);
        const cplx amp = std::conj(eig * w.eval(-xi));
        for (int i = 0; i < grid.nx; ++i)
            F.at(i, j) = amp * std::polar(1.0, -grid.x(i) * xi);
    }
    return F;
}

// ---------------------------------------------------------------------------
// serialization

void save_field_csv(const STFTField& F, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "x,xi,re,im,abs\n";
    char buf[192];
    for (int j = 0; j < F.grid.nxi; ++j)
        for (int i = 0; i < F.grid.nx; ++i) {
            const cplx v = F.at(i, j);
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n", F.grid.x(i),
                          F.grid.xi(j), v.real(), v.imag(), std::abs(v));
            out << buf;
        }
}

void save_field_binary(const STFTField& F, const std::string& data_path,
                       const std::string& sidecar_path) {
    std::ofstream out(data_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + data_path);
    // interleaved re, im as little-endian float64 (x86-64 native)
    for (const cplx& v : F.values) {
        double re = v.real(), im = v.imag();
        out.write(reinterpret_cast<const char*>(&re), sizeof(double));
        out.write(reinterpret_cast<const char*>(&im), sizeof(double));
    }
    nlohmann::json j;
    j["layout"] = "x-major interleaved re,im float64 little-endian";
    j["grid"] = {{"x_max", F.grid.x_max}, {"xi_max", F.grid.xi_max},
                 {"nx", F.grid.nx}, {"nxi", F.grid.nxi}};
    j["source_label"] = F.source_label;
    j["window_label"] = F.window_label;
    j["window_l2"] = F.window_l2;
    j["source_l2"] = F.source_l2;
    std::ofstream side(sidecar_path);
    if (!side) throw std::runtime_error("cannot open " + sidecar_path);
    side << j.dump() << "\n";
}

STFTField load_field_binary(const std::string& data_path, const std::string& sidecar_path) {
    std::ifstream side(sidecar_path);
    if (!side) throw std::runtime_error("cannot open " + sidecar_path);
    nlohmann::json j;
    side >> j;
    STFTField F;
    F.grid = PhaseGrid(j.at("grid").at("x_max").get<double>(),
                       j.at("grid").at("xi_max").get<double>(), j.at("grid").at("nx").get<int>(),
                       j.at("grid").at("nxi").get<int>());
    F.source_label = j.at("source_label").get<std::string>();
    F.window_label = j.at("window_label").get<std::string>();
    F.window_l2 = j.at("window_l2").get<double>();
    F.source_l2 = j.at("source_l2").get<double>();
    F.values.resize(F.grid.cells());
    std::ifstream in(data_path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + data_path);
    for (cplx& v : F.values) {
        double re = 0.0, im = 0.0;
        in.read(reinterpret_cast<char*>(&re), sizeof(double));
        in.read(reinterpret_cast<char*>(&im), sizeof(double));
        v = cplx(re, im);
    }
    if (!in) throw std::runtime_error("field binary truncated");
    return F;
}

} // namespace aniso

#include "aniso/symbols.hpp"

#include "aniso/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace aniso {

namespace {

double ipow(double base, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

} // namespace

double SymbolField::max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

SymbolField make_symbol_field(const PhaseGrid& grid, const AnisoParams& params, double order_r,
                              const std::string& label,
                              const std::function<double(PhasePoint)>& f) {
    SymbolField a;
    a.grid = grid;
    a.params = params;
    a.order_r = order_r;
    a.label = label;
    a.values.resize(grid.cells());
    double K = 0.0;
    for (int j = 0; j < grid.nxi; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            const PhasePoint z = grid.point(i, j);
            const double v = f(z);
            if (!std::isfinite(v)) throw std::runtime_error("symbol value not finite");
            a.values[grid.index(i, j)] = v;
            K = std::max(K, std::abs(v) * std::pow(theta_weight(params, z), -order_r));
        }
    }
    a.fitted_K = K;
    return a;
}

double smooth_step(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / u);
    const double b = std::exp(-1.0 / (1.0 - u));
    return a / (a + b);
}

double excision_psi(double mu, const PhasePoint& z) {
    const double r2 = z.x * z.x + z.xi * z.xi;
    const double lo = mu * mu / 4.0;
    const double hi = mu * mu;
    return smooth_step((r2 - lo) / (hi - lo));
}

SymbolField power_hamiltonian(double p_exp, int k, int m, double mu, const PhaseGrid& grid) {
    if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
    if (p_exp == 0.0) throw std::invalid_argument("exponent must be nonzero");
    AnisoParams params(k, m, 1.0);
    auto f = [=](PhasePoint z) {
        const double e = ipow(z.x, 2 * k) + ipow(z.xi, 2 * m);
        const double psi = excision_psi(mu, z);
        if (psi == 0.0) return 0.0;
        return psi * std::pow(e, p_exp);
    };
    return make_symbol_field(grid, params, 2.0 * k * p_exp, "power_hamiltonian", f);
}

CutoffSpec make_cutoff_spec(const AnisoParams& p, const RegionMask& omega, double eps,
                            double delta) {
    if (!(0.0 < eps && eps < delta && delta < 1.0))
        throw std::invalid_argument("need 0 < eps < delta < 1");
    CutoffSpec s;
    s.eps = eps;
    s.delta = delta;
    s.params = p;
    s.omega = omega;
    s.mu = separation_mu(p, omega, eps, delta);
    return s;
}

std::string cutoff_spec_json_string(const CutoffSpec& s) {
    nlohmann::json j;
    j["eps"] = s.eps;
    j["delta"] = s.delta;
    j["mu"] = s.mu;
    j["k"] = s.params.k;
    j["m"] = s.params.m;
    j["rho"] = s.params.rho;
    j["omega"] = nlohmann::json::parse(region_json_string(s.omega));
    return j.dump();
}

CutoffSpec cutoff_spec_from_json_string(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    CutoffSpec s;
    s.eps = j.at("eps").get<double>();
    s.delta = j.at("delta").get<double>();
    s.mu = j.at("mu").get<double>();
    s.params = AnisoParams(j.at("k").get<int>(), j.at("m").get<int>(), j.at("rho").get<double>());
    s.omega = region_from_json_string(j.at("omega").dump());
    return s;
}

namespace {

// Bump profile of the mollifier as a function of the scaled offset
// u = (y - x)/(2r): psi(u^2) with psi(t) = exp(-1/(1/16 - t^2)) on |t| < 1/4
// (e^{-1/t} glue); support |u| < 1/2. Normalization cancels in the ratio.
double bump_u(double u) {
    const double t = u * u;
    const double arg = 1.0 / 16.0 - t * t;
    return arg > 0.0 ? std::exp(-1.0 / arg) : 0.0;
}

// 8-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr double kGL8X[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                             -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                             0.7966664774136267,  0.9602898564975363};
constexpr double kGL8W[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                             0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                             0.2223810344533745, 0.1012285362903763};

// Integral of the bump profile over one raster cell [lo, hi], kernel centered
// at c with half-width r. Exact per cell (smooth integrand), so the assembled
// quadrature is a smooth function of the evaluation point.
double cell_bump_integral(double lo, double hi, double c, double r) {
    const double a = std::max(lo, c - r);
    const double b = std::min(hi, c + r);
    if (a >= b) return 0.0;
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (int g = 0; g < 8; ++g)
        s += kGL8W[g] * bump_u((mid + half * kGL8X[g] - c) / (2.0 * r));
    return s * half;
}

} // namespace

SymbolField mollified_cutoff(const CutoffSpec& spec, const PhaseGrid& grid, int points_per_radius) {
    if (!(0.0 < spec.eps && spec.eps < spec.delta && spec.delta < 1.0))
        throw std::invalid_argument("cutoff spec violates 0 < eps < delta < 1");
    if (!(spec.mu > 0.0 && spec.mu <= 1.0))
        throw std::invalid_argument("cutoff spec needs mu in (0,1]");
    if (points_per_radius < 8) throw std::runtime_error("under-resolved mollifier");

    const AnisoParams& p = spec.params;

    // Masks live on the spec's own grid; evaluation may be finer. The cutoff
    // is then one fixed function of z regardless of the output lattice.
    const RegionMask omega_eps = aniso_neighborhood(p, spec.omega, spec.eps);
    const RegionMask omega_eps_mu = aniso_neighborhood(p, omega_eps, spec.mu);
    const PhaseGrid& mg = omega_eps_mu.grid;
    const double mhx = mg.hx(), mhxi = mg.hxi();

    SymbolField q;
    q.grid = grid;
    q.params = p;
    q.order_r = 0.0;
    q.label = "mollified_cutoff";
    q.values.assign(grid.cells(), 0.0);

    const double ex = p.rho / p.k;
    const double exi = p.rho / p.m;

    parallel_for(grid.nxi, [&](std::size_t jj) {
        const int j = static_cast<int>(jj);
        std::vector<double> fx(mg.nx, 0.0), fxi(mg.nxi, 0.0);
        for (int i = 0; i < grid.nx; ++i) {
            const PhasePoint z = grid.point(i, j);
            const double w = wkm_weight(p, z);
            const double rx = 0.5 * spec.mu * std::pow(w, ex);
            const double rxi = 0.5 * spec.mu * std::pow(w, exi);

            const int i0 = std::max(0, mg.nearest_i(z.x - rx) - 1);
            const int i1 = std::min(mg.nx - 1, mg.nearest_i(z.x + rx) + 1);
            const int j0 = std::max(0, mg.nearest_j(z.xi - rxi) - 1);
            const int j1 = std::min(mg.nxi - 1, mg.nearest_j(z.xi + rxi) + 1);

            double sx = 0.0, sxi = 0.0;
            for (int a = i0; a <= i1; ++a) {
                fx[a] = cell_bump_integral(mg.x(a) - 0.5 * mhx, mg.x(a) + 0.5 * mhx, z.x, rx);
                sx += fx[a];
            }
            for (int b = j0; b <= j1; ++b) {
                fxi[b] = cell_bump_integral(mg.xi(b) - 0.5 * mhxi, mg.xi(b) + 0.5 * mhxi, z.xi, rxi);
                sxi += fxi[b];
            }
            double num = 0.0;
            for (int b = j0; b <= j1; ++b) {
                if (fxi[b] == 0.0) continue;
                double row = 0.0;
                for (int a = i0; a <= i1; ++a)
                    if (omega_eps_mu.cell(a, b)) row += fx[a];
                num += fxi[b] * row;
            }
            const double denom = sx * sxi;
            q.values[grid.index(i, j)] = denom > 0.0 ? num / denom : 0.0;
        }
    });

    // No clamping: a kernel box around a cell of Omega_{rho,eps} lies inside
    // the mu-dilated raster (w^{rho/k} <= theta^rho), and a box around a cell
    // off Omega_{rho,delta} misses it entirely by the separation property of
    // mu, so the ratio is exactly 1 and exactly 0 there up to roundoff.
    q.fitted_K = q.max_abs();
    return q;
}

EllipticityResult ellipticity_test(const SymbolField& a, const RegionMask& omega, double R) {
    if (!(omega.grid == a.grid)) throw std::invalid_argument("region grid differs from symbol grid");
    if (!(R > 0.0)) throw std::invalid_argument("R must be positive");
    double best = std::numeric_limits<double>::infinity();
    bool any = false;
    for (int j = 0; j < a.grid.nxi; ++j)
        for (int i = 0; i < a.grid.nx; ++i) {
            if (!omega.cell(i, j)) continue;
            const PhasePoint z = a.grid.point(i, j);
            if (z.x * z.x + z.xi * z.xi <= R * R) continue;
            any = true;
            best = std::min(best,
                            std::abs(a.at(i, j)) * std::pow(theta_weight(a.params, z), -a.order_r));
        }
    if (!any) throw std::runtime_error("nothing to test");
    return {best > 1e-9, best};
}

namespace {

// Central-difference derivative of order (alpha, beta); needs a margin of
// alpha+beta cells around (i, j).
double central_diff(const SymbolField& a, int i, int j, int alpha, int beta) {
    if (alpha > 0) {
        return (central_diff(a, i + 1, j, alpha - 1, beta) -
                central_diff(a, i - 1, j, alpha - 1, beta)) /
               (2.0 * a.grid.hx());
    }
    if (beta > 0) {
        return (central_diff(a, i, j + 1, alpha, beta - 1) -
                central_diff(a, i, j - 1, alpha, beta - 1)) /
               (2.0 * a.grid.hxi());
    }
    return a.at(i, j);
}

} // namespace

std::vector<SymbolEstimateEntry> symbol_estimate_check(const SymbolField& a, int max_order,
                                                       double exclude_radius) {
    if (max_order > 3) throw std::invalid_argument("max_order must be <= 3");
    std::vector<SymbolEstimateEntry> table;
    const double sigma = a.params.sigma();
    for (int total = 0; total <= max_order; ++total) {
        for (int alpha = total; alpha >= 0; --alpha) {
            const int beta = total - alpha;
            const int margin = total;
            double best = 0.0;
            for (int j = margin; j < a.grid.nxi - margin; ++j)
                for (int i = margin; i < a.grid.nx - margin; ++i) {
                    const PhasePoint z = a.grid.point(i, j);
                    if (z.x * z.x + z.xi * z.xi <= exclude_radius * exclude_radius) continue;
                    const double d = central_diff(a, i, j, alpha, beta);
                    const double wexp =
                        -a.order_r + a.params.rho * (alpha + sigma * beta);
                    best = std::max(best,
                                    std::abs(d) * std::pow(theta_weight(a.params, z), wexp));
                }
            table.push_back({alpha, beta, best});
        }
    }
    return table;
}

SampledSignal antiwick_apply(const SymbolField& a, const SampledSignal& u) {
    for (double v : a.values)
        if (!std::isfinite(v)) throw std::invalid_argument("symbol must be bounded");
    Window psi = make_window(WindowKind::gaussian, 0, u.grid);
    STFTField F = analyze(u, psi, a.grid);
    for (int i = 0; i < a.grid.nx; ++i)
        for (int j = 0; j < a.grid.nxi; ++j) F.at(i, j) *= a.at(i, j);
    SampledSignal out = synthesize(F, psi, u.grid);
    out.label = "antiwick_" + u.label;
    return out;
}

void save_symbol_csv(const SymbolField& a, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "x,xi,value\n";
    char buf[128];
    for (int j = 0; j < a.grid.nxi; ++j)
        for (int i = 0; i < a.grid.nx; ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", a.grid.x(i), a.grid.xi(j),
                          a.at(i, j));
            out << buf;
        }
}

void save_symbol_binary(const SymbolField& a, const std::string& data_path,
                        const std::string& sidecar_path) {
    std::ofstream out(data_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + data_path);
    out.write(reinterpret_cast<const char*>(a.values.data()),
              static_cast<std::streamsize>(a.values.size() * sizeof(double)));
    nlohmann::json j;
    j["layout"] = "cell-major float64 little-endian";
    j["grid"] = {{"x_max", a.grid.x_max}, {"xi_max", a.grid.xi_max},
                 {"nx", a.grid.nx}, {"nxi", a.grid.nxi}};
    j["order_r"] = a.order_r;
    j["k"] = a.params.k;
    j["m"] = a.params.m;
    j["rho"] = a.params.rho;
    j["label"] = a.label;
    j["fitted_K"] = a.fitted_K;
    std::ofstream side(sidecar_path);
    if (!side) throw std::runtime_error("cannot open " + sidecar_path);
    side << j.dump() << "\n";
}

SymbolField load_symbol_binary(const std::string& data_path, const std::string& sidecar_path) {
    std::ifstream side(sidecar_path);
    if (!side) throw std::runtime_error("cannot open " + sidecar_path);
    nlohmann::json j;
    side >> j;
    SymbolField a;
    a.grid = PhaseGrid(j.at("grid").at("x_max").get<double>(),
                       j.at("grid").at("xi_max").get<double>(), j.at("grid").at("nx").get<int>(),
                       j.at("grid").at("nxi").get<int>());
    a.order_r = j.at("order_r").get<double>();
    a.params = AnisoParams(j.at("k").get<int>(), j.at("m").get<int>(), j.at("rho").get<double>());
    a.label = j.at("label").get<std::string>();
    a.fitted_K = j.at("fitted_K").get<double>();
    a.values.resize(a.grid.cells());
    std::ifstream in(data_path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + data_path);
    in.read(reinterpret_cast<char*>(a.values.data()),
            static_cast<std::streamsize>(a.values.size() * sizeof(double)));
    if (!in) throw std::runtime_error("symbol binary truncated");
    return a;
}

} // namespace aniso

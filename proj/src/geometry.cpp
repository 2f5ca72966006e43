#include "aniso/geometry.hpp"

#include "aniso/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace aniso {

namespace {

int gcd_int(int a, int b) { return b == 0 ? a : gcd_int(b, a % b); }

double ipow(double base, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

} // namespace

AnisoParams::AnisoParams(int k_, int m_, double rho_) : k(k_), m(m_), rho(rho_) {
    if (k < 1 || m < 1) throw std::invalid_argument("k, m must be positive");
    if (gcd_int(k, m) != 1) throw std::invalid_argument("k, m must be coprime");
    if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("rho must lie in (0,1]");
}

PhaseGrid::PhaseGrid(double xm, double xim, int nx_, int nxi_)
    : x_max(xm), xi_max(xim), nx(nx_), nxi(nxi_) {
    if (!(x_max > 0.0) || !(xi_max > 0.0)) throw std::invalid_argument("grid extents must be positive");
    if (nx < 8 || nxi < 8) throw std::invalid_argument("grid needs at least 8 cells per axis");
}

int PhaseGrid::nearest_i(double xv) const {
    int i = static_cast<int>(std::lround((xv + x_max) / hx()));
    return std::clamp(i, 0, nx - 1);
}

int PhaseGrid::nearest_j(double xiv) const {
    int j = static_cast<int>(std::lround((xiv + xi_max) / hxi()));
    return std::clamp(j, 0, nxi - 1);
}

bool PhaseGrid::contains(const PhasePoint& z) const {
    return std::abs(z.x) <= x_max && std::abs(z.xi) <= xi_max;
}

bool PhaseGrid::operator==(const PhaseGrid& o) const {
    return x_max == o.x_max && xi_max == o.xi_max && nx == o.nx && nxi == o.nxi;
}

bool RegionMask::raster_at(const PhasePoint& z) const {
    return cell(grid.nearest_i(z.x), grid.nearest_j(z.xi));
}

std::size_t RegionMask::count_true() const {
    return static_cast<std::size_t>(
        std::accumulate(raster->begin(), raster->end(), std::size_t{0}));
}

RegionMask rasterize(const PhaseGrid& grid, std::function<bool(PhasePoint)> pred) {
    RegionMask r;
    r.grid = grid;
    r.predicate = std::move(pred);
    r.raster = std::make_shared<std::vector<std::uint8_t>>(grid.cells(), 0);
    auto& cells = *r.raster;
    const auto& p = r.predicate;
    parallel_for(grid.nxi, [&](std::size_t j) {
        for (int i = 0; i < grid.nx; ++i)
            cells[grid.index(i, static_cast<int>(j))] =
                p(grid.point(i, static_cast<int>(j))) ? 1 : 0;
    });
    return r;
}

RegionMask complement(const RegionMask& r) {
    RegionMask out;
    out.grid = r.grid;
    auto pred = r.predicate;
    out.predicate = [pred](PhasePoint z) { return !pred(z); };
    out.raster = std::make_shared<std::vector<std::uint8_t>>(r.raster->size());
    for (std::size_t i = 0; i < r.raster->size(); ++i)
        (*out.raster)[i] = (*r.raster)[i] ? 0 : 1;
    return out;
}

RegionMask intersect(const RegionMask& a, const RegionMask& b) {
    if (!(a.grid == b.grid)) throw std::invalid_argument("region grids differ");
    RegionMask out;
    out.grid = a.grid;
    auto pa = a.predicate, pb = b.predicate;
    out.predicate = [pa, pb](PhasePoint z) { return pa(z) && pb(z); };
    out.raster = std::make_shared<std::vector<std::uint8_t>>(a.raster->size());
    for (std::size_t i = 0; i < a.raster->size(); ++i)
        (*out.raster)[i] = ((*a.raster)[i] && (*b.raster)[i]) ? 1 : 0;
    return out;
}

RegionMask unite(const RegionMask& a, const RegionMask& b) {
    if (!(a.grid == b.grid)) throw std::invalid_argument("region grids differ");
    RegionMask out;
    out.grid = a.grid;
    auto pa = a.predicate, pb = b.predicate;
    out.predicate = [pa, pb](PhasePoint z) { return pa(z) || pb(z); };
    out.raster = std::make_shared<std::vector<std::uint8_t>>(a.raster->size());
    for (std::size_t i = 0; i < a.raster->size(); ++i)
        (*out.raster)[i] = ((*a.raster)[i] || (*b.raster)[i]) ? 1 : 0;
    return out;
}

bool raster_subset(const RegionMask& a, const RegionMask& b) {
    if (!(a.grid == b.grid)) throw std::invalid_argument("region grids differ");
    for (std::size_t i = 0; i < a.raster->size(); ++i)
        if ((*a.raster)[i] && !(*b.raster)[i]) return false;
    return true;
}

bool raster_disjoint(const RegionMask& a, const RegionMask& b) {
    if (!(a.grid == b.grid)) throw std::invalid_argument("region grids differ");
    for (std::size_t i = 0; i < a.raster->size(); ++i)
        if ((*a.raster)[i] && (*b.raster)[i]) return false;
    return true;
}

double theta_weight(const AnisoParams& p, const PhasePoint& z) {
    return 1.0 + std::abs(z.x) + std::pow(std::abs(z.xi), p.inv_sigma());
}

double wkm_weight(const AnisoParams& p, const PhasePoint& z) {
    return std::sqrt(1.0 + ipow(z.x, 2 * p.k) + ipow(z.xi, 2 * p.m));
}

StructuralConstants structural_constants(const AnisoParams& p) {
    const double sigma = p.sigma();
    StructuralConstants c{};
    c.C_sigma = sigma >= 1.0 ? 1.0 : std::exp2(1.0 / sigma - 1.0);
    c.B_sigma = std::exp2(std::max(0.0, 1.0 / sigma - 1.0));
    c.c_k = std::exp2(2.0 * p.k - 1.0);
    return c;
}

namespace {

double quasi_triangle_const(double sigma) {
    return sigma >= 1.0 ? 1.0 : std::exp2(1.0 / sigma - 1.0);
}

bool epsilon_feasible(double sigma, double eps) {
    const double C_sigma = quasi_triangle_const(sigma);
    const double C_inv = quasi_triangle_const(1.0 / sigma);
    const bool c1 = eps + std::pow(eps, 1.0 / sigma) * C_sigma < 1.0;
    const bool c2 = eps * std::pow(1.0 - eps, -sigma) * C_inv * C_inv < 1.0;
    return c1 && c2;
}

} // namespace

double feasible_epsilon_bound(const AnisoParams& p) {
    const double sigma = p.sigma();
    double lo = 0.0, hi = 1.0;
    // Both conditions are strictly monotone in eps, so the feasible set is an
    // interval (0, eps*) and bisection converges to its supremum.
    while ((hi - lo) > 1e-12 * hi) {
        double mid = 0.5 * (lo + hi);
        if (epsilon_feasible(sigma, mid))
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

PhasePoint sigma_dilate(const AnisoParams& p, const PhasePoint& z, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    return {lambda * z.x, std::pow(lambda, p.sigma()) * z.xi};
}

RegionMask aniso_neighborhood(const AnisoParams& p, const RegionMask& omega, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (omega.empty()) throw std::invalid_argument("empty region");

    const PhaseGrid& g = omega.grid;
    const double sigma = p.sigma();

    // Each source cell contributes an axis box; accumulate boxes with a 2-D
    // difference array and prefix-sum, which keeps the dilation O(cells).
    std::vector<std::int32_t> diff((g.nx + 1) * (g.nxi + 1), 0);
    auto bump = [&](int i0, int i1, int j0, int j1) {
        diff[static_cast<std::size_t>(j0) * (g.nx + 1) + i0] += 1;
        diff[static_cast<std::size_t>(j0) * (g.nx + 1) + i1 + 1] -= 1;
        diff[static_cast<std::size_t>(j1 + 1) * (g.nx + 1) + i0] -= 1;
        diff[static_cast<std::size_t>(j1 + 1) * (g.nx + 1) + i1 + 1] += 1;
    };

    for (int j = 0; j < g.nxi; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            if (!omega.cell(i, j)) continue;
            const PhasePoint y = g.point(i, j);
            const double th = theta_weight(p, y);
            const double rx = eps * std::pow(th, p.rho);
            const double rxi = eps * std::pow(th, p.rho * sigma);
            // Round radii up to whole cells: rasterized neighborhood is a
            // superset of the true one on the grid.
            const int ci = static_cast<int>(std::ceil(rx / g.hx() - 1e-12));
            const int cj = static_cast<int>(std::ceil(rxi / g.hxi() - 1e-12));
            bump(std::max(0, i - ci), std::min(g.nx - 1, i + ci),
                 std::max(0, j - cj), std::min(g.nxi - 1, j + cj));
        }
    }

    RegionMask out;
    out.grid = g;
    out.raster = std::make_shared<std::vector<std::uint8_t>>(g.cells(), 0);
    std::vector<std::int64_t> row(g.nx + 1, 0);
    for (int j = 0; j < g.nxi; ++j) {
        for (int i = 0; i <= g.nx; ++i) row[i] += diff[static_cast<std::size_t>(j) * (g.nx + 1) + i];
        std::int64_t run = 0;
        for (int i = 0; i < g.nx; ++i) {
            run += row[i];
            (*out.raster)[g.index(i, j)] = run > 0 ? 1 : 0;
        }
    }

    // Derived predicate is the conservative raster itself.
    auto raster = out.raster;
    PhaseGrid grid = g;
    out.predicate = [raster, grid](PhasePoint z) {
        if (!grid.contains(z)) return false;
        return (*raster)[grid.index(grid.nearest_i(z.x), grid.nearest_j(z.xi))] != 0;
    };
    return out;
}

double separation_mu(const AnisoParams& p, const RegionMask& omega, double eps, double delta) {
    if (!(0.0 < eps && eps < delta && delta < 1.0))
        throw std::invalid_argument("need 0 < eps < delta < 1");
    const RegionMask omega_eps = aniso_neighborhood(p, omega, eps);
    const RegionMask omega_delta = aniso_neighborhood(p, omega, delta);
    const RegionMask comp = complement(omega_delta);

    double mu = std::min(1.0, delta - eps);
    while (mu >= 1e-6) {
        const RegionMask a = aniso_neighborhood(p, omega_eps, mu);
        if (comp.empty()) return mu; // region fills the grid: nothing to separate
        const RegionMask b = aniso_neighborhood(p, comp, mu);
        if (raster_disjoint(a, b)) return mu;
        mu *= 0.5;
    }
    throw std::runtime_error("no separating mu at this resolution");
}

// ---------------------------------------------------------------------------
// serialization

void save_region_csv(const RegionMask& r, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "x,xi,inside\n";
    char buf[96];
    for (int j = 0; j < r.grid.nxi; ++j)
        for (int i = 0; i < r.grid.nx; ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%d\n", r.grid.x(i), r.grid.xi(j),
                          r.cell(i, j) ? 1 : 0);
            out << buf;
        }
}

std::string region_json_string(const RegionMask& r) {
    nlohmann::json j;
    j["grid"] = {{"x_max", r.grid.x_max}, {"xi_max", r.grid.xi_max},
                 {"nx", r.grid.nx}, {"nxi", r.grid.nxi}};
    // Run lengths of alternating values starting from start_value.
    std::vector<std::size_t> runs;
    const auto& cells = *r.raster;
    std::uint8_t cur = cells.empty() ? 0 : cells[0];
    j["start_value"] = static_cast<int>(cur);
    std::size_t len = 0;
    for (std::uint8_t c : cells) {
        if (c == cur) {
            ++len;
        } else {
            runs.push_back(len);
            cur = c;
            len = 1;
        }
    }
    if (len > 0) runs.push_back(len);
    j["rle"] = runs;
    return j.dump();
}

RegionMask region_from_json_string(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    PhaseGrid g(j.at("grid").at("x_max").get<double>(), j.at("grid").at("xi_max").get<double>(),
                j.at("grid").at("nx").get<int>(), j.at("grid").at("nxi").get<int>());
    RegionMask r;
    r.grid = g;
    r.raster = std::make_shared<std::vector<std::uint8_t>>();
    r.raster->reserve(g.cells());
    std::uint8_t cur = static_cast<std::uint8_t>(j.at("start_value").get<int>());
    for (std::size_t len : j.at("rle").get<std::vector<std::size_t>>()) {
        r.raster->insert(r.raster->end(), len, cur);
        cur = cur ? 0 : 1;
    }
    if (r.raster->size() != g.cells()) throw std::runtime_error("region rle length mismatch");
    auto raster = r.raster;
    r.predicate = [raster, g](PhasePoint z) {
        if (!g.contains(z)) return false;
        return (*raster)[g.index(g.nearest_i(z.x), g.nearest_j(z.xi))] != 0;
    };
    return r;
}

void save_region_json(const RegionMask& r, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << region_json_string(r) << "\n";
}

RegionMask load_region_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return region_from_json_string(text);
}

} // namespace aniso

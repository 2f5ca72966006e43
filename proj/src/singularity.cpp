#include "aniso/singularity.hpp"

#include "aniso/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace aniso {

namespace {

constexpr double two_pi = 6.283185307179586476925286766559;

// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) return 0.0;
    return (n * sxy - sx * sy) / denom;
}

// Exponent from per-shell maxima: negative regression slope over the top half
// of the occupied shells, clamped to [-16, cap].
double exponent_from_shells(const std::vector<double>& log_radius,
                            const std::vector<double>& log_max, double cap) {
    const std::size_t s = log_radius.size();
    if (s < 2) return 0.0;
    const std::size_t take = std::max<std::size_t>(2, (s + 1) / 2);
    std::vector<double> xs(log_radius.end() - take, log_radius.end());
    std::vector<double> ys(log_max.end() - take, log_max.end());
    const double slope = fit_slope(xs, ys);
    return std::clamp(-slope, -16.0, cap);
}

// Boundary-curve point for parameter phi on {x^{2k} + xi^{2m} = 1}.
PhasePoint curve_point(const AnisoParams& p, double phi) {
    const double c = std::cos(phi), s = std::sin(phi);
    const double x = std::copysign(std::pow(std::abs(c), 1.0 / p.k), c);
    const double xi = std::copysign(std::pow(std::abs(s), 1.0 / p.m), s);
    return {x, xi};
}

// Values below this count as fully decayed at double precision.
constexpr double kAbsFloor = 1e-290;

} // namespace

DecayMap decay_map(const STFTField& F, const AnisoParams& p, const DecayOptions& opts) {
    const PhaseGrid& g = F.grid;
    const double corner = std::hypot(g.x_max, g.xi_max);
    if (corner / opts.r_min < 8.0) throw std::runtime_error("insufficient radial range");

    DecayMap d;
    d.grid = g;
    d.opts = opts;
    d.ray_params.resize(opts.n_rays);
    d.ray_exponents.assign(opts.n_rays, 0.0);

    const double sigma = p.sigma();

    parallel_for(opts.n_rays, [&](std::size_t r) {
        const double phi = two_pi * static_cast<double>(r) / opts.n_rays;
        d.ray_params[r] = phi;
        const PhasePoint b = curve_point(p, phi);

        // lambda range: from |z(lambda)| ~ r_min to grid exit
        auto radius = [&](double lam) {
            return std::hypot(lam * b.x, std::pow(lam, sigma) * b.xi);
        };
        double lam_max = std::numeric_limits<double>::infinity();
        if (std::abs(b.x) > 1e-300) lam_max = g.x_max / std::abs(b.x);
        if (std::abs(b.xi) > 1e-300)
            lam_max = std::min(lam_max, std::pow(g.xi_max / std::abs(b.xi), 1.0 / sigma));
        double lo = 1e-6, hi = lam_max;
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (lo + hi);
            (radius(mid) < opts.r_min ? lo : hi) = mid;
        }
        const double lam_min = hi;
        if (!(lam_max > lam_min * 1.5)) {
            d.ray_exponents[r] = opts.n_cap; // ray leaves the grid immediately
            return;
        }

        // geometric ladder, dyadic shell maxima in theta
        std::vector<double> shell_logr, shell_logv;
        int cur_shell = std::numeric_limits<int>::min();
        double cur_max = 0.0, cur_theta = 0.0;
        const double ratio = std::pow(lam_max / lam_min, 1.0 / (opts.ladder - 1));
        for (int step = 0; step < opts.ladder; ++step) {
            const double lam = lam_min * std::pow(ratio, step);
            const PhasePoint z{lam * b.x, std::pow(lam, sigma) * b.xi};
            const double th = theta_weight(p, z);
            const int shell = static_cast<int>(std::floor(std::log2(th)));
            const double v = F.abs_interp(z);
            if (shell != cur_shell) {
                if (cur_shell != std::numeric_limits<int>::min()) {
                    shell_logr.push_back(std::log(cur_theta));
                    shell_logv.push_back(std::log(std::max(cur_max, kAbsFloor)));
                }
                cur_shell = shell;
                cur_max = v;
                cur_theta = th;
            } else {
                cur_max = std::max(cur_max, v);
            }
        }
        if (cur_shell != std::numeric_limits<int>::min()) {
            shell_logr.push_back(std::log(cur_theta));
            shell_logv.push_back(std::log(std::max(cur_max, kAbsFloor)));
        }
        d.ray_exponents[r] = exponent_from_shells(shell_logr, shell_logv, opts.n_cap);
    });

    // Rasterize exponents back to cells by nearest ray.
    d.exponents.assign(g.cells(), 0.0);
    d.unresolved.assign(g.cells(), 0);
    for (int j = 0; j < g.nxi; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const PhasePoint z = g.point(i, j);
            const std::size_t idx = g.index(i, j);
            if (std::hypot(z.x, z.xi) < opts.r_min) {
                d.unresolved[idx] = 1;
                continue;
            }
            // Curve parameter of the ray through z: lambda = (x^{2k}+xi^{2m})^{1/2k},
            // boundary point (x/lam, xi/lam^sigma).
            const double energy =
                std::pow(std::abs(z.x), 2.0 * p.k) + std::pow(std::abs(z.xi), 2.0 * p.m);
            const double lam = std::pow(energy, 1.0 / (2.0 * p.k));
            const double xb = z.x / lam;
            const double xib = z.xi / std::pow(lam, sigma);
            const double phi = std::atan2(std::copysign(std::pow(std::abs(xib), p.m), xib),
                                          std::copysign(std::pow(std::abs(xb), p.k), xb));
            int r = static_cast<int>(std::lround(phi / two_pi * opts.n_rays));
            r = ((r % opts.n_rays) + opts.n_rays) % opts.n_rays;
            d.exponents[idx] = d.ray_exponents[r];
        }
    return d;
}

void save_decay_csv(const DecayMap& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "x,xi,exponent\n";
    char buf[128];
    for (int j = 0; j < d.grid.nxi; ++j)
        for (int i = 0; i < d.grid.nx; ++i) {
            const double e = d.unresolved[d.grid.index(i, j)] ? std::nan("") : d.exponent_at(i, j);
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", d.grid.x(i), d.grid.xi(j), e);
            out << buf;
        }
}

FilterReport filter_membership(const STFTField& F, const AnisoParams& p, const RegionMask& omega,
                               double eps, double n_threshold, double r_min) {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    const RegionMask omega_eps = aniso_neighborhood(p, omega, eps);
    const PhaseGrid& g = F.grid;
    if (!(omega_eps.grid == g)) throw std::invalid_argument("region grid differs from field grid");

    // Shell maxima of |V| over the dilated raster, dyadic in |z|.
    std::vector<ShellEntry> shells;
    const int jmin = static_cast<int>(std::floor(std::log2(r_min)));
    const int jmax = static_cast<int>(std::floor(std::log2(std::hypot(g.x_max, g.xi_max))));
    std::vector<double> maxima(static_cast<std::size_t>(jmax - jmin + 1), -1.0);
    for (int j = 0; j < g.nxi; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!omega_eps.cell(i, j)) continue;
            const PhasePoint z = g.point(i, j);
            const double r = std::hypot(z.x, z.xi);
            if (r < r_min) continue;
            const int sh = static_cast<int>(std::floor(std::log2(r))) - jmin;
            if (sh < 0 || sh >= static_cast<int>(maxima.size())) continue;
            maxima[sh] = std::max(maxima[sh], F.abs_at(i, j));
        }

    std::vector<double> logr, logv;
    for (std::size_t s = 0; s < maxima.size(); ++s) {
        if (maxima[s] < 0.0) continue;
        const int jj = jmin + static_cast<int>(s);
        ShellEntry e;
        e.j = jj;
        e.radius = std::exp2(jj + 0.5);
        e.max_abs = maxima[s];
        shells.push_back(e);
        logr.push_back(std::log(e.radius));
        logv.push_back(std::log(std::max(e.max_abs, kAbsFloor)));
    }
    if (shells.size() < 2) throw std::runtime_error("region empty beyond R_min");

    FilterReport rep;
    rep.eps = eps;
    rep.rho = p.rho;
    rep.n_threshold = n_threshold;
    rep.shell_table = shells;
    rep.estimated_exponent = exponent_from_shells(logr, logv, 16.0);
    rep.member = rep.estimated_exponent >= n_threshold;
    return rep;
}

std::string filter_report_json(const FilterReport& r) {
    nlohmann::json j;
    j["eps"] = r.eps;
    j["rho"] = r.rho;
    j["member"] = r.member;
    j["estimated_exponent"] = r.estimated_exponent;
    j["n_threshold"] = r.n_threshold;
    j["caveat"] = r.caveat;
    nlohmann::json table = nlohmann::json::array();
    for (const ShellEntry& e : r.shell_table)
        table.push_back({{"j", e.j}, {"radius", e.radius}, {"max_abs", e.max_abs}});
    j["shell_table"] = table;
    return j.dump();
}

void save_filter_report(const FilterReport& r, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << filter_report_json(r) << "\n";
}

WavefrontResult wavefront_extract(const STFTField& F, const AnisoParams& p, double n_threshold,
                                  const DecayOptions& opts) {
    DecayMap d = decay_map(F, p, opts);
    WavefrontResult w;
    w.ray_params = d.ray_params;
    w.ray_exponents = d.ray_exponents;
    const int n = static_cast<int>(d.ray_params.size());
    std::vector<char> below(n, 0);
    for (int r = 0; r < n; ++r) {
        if (d.ray_exponents[r] < n_threshold) {
            below[r] = 1;
            w.raw_rays.push_back(d.ray_params[r]);
        }
    }
    // Contiguous sub-threshold bundles (cyclic); representative = argmin.
    std::vector<char> seen(n, 0);
    for (int r = 0; r < n; ++r) {
        if (!below[r] || seen[r]) continue;
        // walk back to bundle start
        int start = r;
        while (below[(start - 1 + n) % n] && (start - 1 + n) % n != r) start = (start - 1 + n) % n;
        int best = start;
        int cur = start;
        while (true) {
            seen[cur] = 1;
            if (d.ray_exponents[cur] < d.ray_exponents[best]) best = cur;
            const int nxt = (cur + 1) % n;
            if (!below[nxt] || nxt == start) break;
            cur = nxt;
        }
        w.directions.push_back(d.ray_params[best]);
    }
    std::sort(w.directions.begin(), w.directions.end());
    return w;
}

double direction_set_distance(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() && b.empty()) return 0.0;
    if (a.empty() || b.empty()) return two_pi;
    auto one_sided = [](const std::vector<double>& from, const std::vector<double>& to) {
        double worst = 0.0;
        for (double x : from) {
            double best = two_pi;
            for (double y : to) {
                double dphi = std::abs(std::fmod(std::abs(x - y), two_pi));
                dphi = std::min(dphi, two_pi - dphi);
                best = std::min(best, dphi);
            }
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(one_sided(a, b), one_sided(b, a));
}

bool filter_member(const STFTField& F, const AnisoParams& p, const RegionMask& region, double eps,
                   double n_threshold) {
    const RegionMask comp = complement(region);
    if (comp.empty()) return true; // whole plane belongs to every filter
    return filter_membership(F, p, comp, eps, n_threshold).member;
}

bool filter_axioms_check(const STFTField& F, const AnisoParams& p,
                         const std::vector<RegionMask>& regions, double eps, double n_threshold) {
    if (regions.size() < 2) throw std::invalid_argument("need at least 2 regions");
    std::vector<bool> member(regions.size());
    for (std::size_t i = 0; i < regions.size(); ++i)
        member[i] = filter_member(F, p, regions[i], eps, n_threshold);

    bool ok = true;
    for (std::size_t i = 0; i < regions.size() && ok; ++i)
        for (std::size_t j = 0; j < regions.size() && ok; ++j) {
            if (i == j) continue;
            // upward closure on nested pairs
            if (raster_subset(regions[i], regions[j]) && member[i] && !member[j]) ok = false;
        }
    for (std::size_t i = 0; i < regions.size() && ok; ++i)
        for (std::size_t j = i + 1; j < regions.size() && ok; ++j) {
            if (!(member[i] && member[j])) continue;
            if (!filter_member(F, p, intersect(regions[i], regions[j]), eps, n_threshold))
                ok = false;
        }
    return ok;
}

} // namespace aniso

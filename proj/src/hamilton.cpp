#include "aniso/hamilton.hpp"

#include "aniso/parallel.hpp"
#include "aniso/symbols.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

namespace aniso {

namespace {

constexpr double pi = 3.14159265358979323846;

double ipow(double base, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

// d/du of the smooth step used by excision_psi.
double smooth_step_deriv(double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    const double a = std::exp(-1.0 / u);
    const double b = std::exp(-1.0 / (1.0 - u));
    const double da = a / (u * u);
    const double db = -b / ((1.0 - u) * (1.0 - u));
    return (da * (a + b) - a * (da + db)) / ((a + b) * (a + b));
}

// psi_mu as a function of s = |z|^2 and its derivative in s.
double psi_of_s(double mu, double s) {
    const double lo = mu * mu / 4.0, hi = mu * mu;
    return smooth_step((s - lo) / (hi - lo));
}

double dpsi_ds(double mu, double s) {
    const double lo = mu * mu / 4.0, hi = mu * mu;
    return smooth_step_deriv((s - lo) / (hi - lo)) / (hi - lo);
}

} // namespace

HamiltonianSpec::HamiltonianSpec(int k_, int m_, double p_, double mu_)
    : k(k_), m(m_), p_exp(p_), mu(mu_) {
    if (k < 1 || m < 1) throw std::invalid_argument("k, m must be positive");
    if (p_exp == 0.0) throw std::invalid_argument("p must be nonzero");
    if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
}

bool HamiltonianSpec::supercritical_admissible() const {
    const double pc = p_c();
    return pc < p_exp && p_exp <= pc + 0.25 * std::min(1.0 / k, 1.0 / m);
}

double HamiltonianSpec::energy(const PhasePoint& z) const {
    return ipow(z.x, 2 * k) + ipow(z.xi, 2 * m);
}

double HamiltonianSpec::value(const PhasePoint& z) const {
    const double psi = excision_psi(mu, z);
    if (psi == 0.0) return 0.0;
    return psi * std::pow(energy(z), p_exp);
}

PhasePoint HamiltonianSpec::hamiltonian_field(const PhasePoint& z) const {
    const double s = z.x * z.x + z.xi * z.xi;
    const double psi = psi_of_s(mu, s);
    const double dpsi = dpsi_ds(mu, s);
    if (psi == 0.0 && dpsi == 0.0) return {0.0, 0.0};
    const double e = energy(z);
    const double ep = std::pow(e, p_exp);
    // grad a = psi' * 2z * e^p + psi * p e^{p-1} * (2k x^{2k-1}, 2m xi^{2m-1})
    const double common = psi * p_exp * std::pow(e, p_exp - 1.0);
    const double ax = dpsi * 2.0 * z.x * ep + common * 2.0 * k * ipow(z.x, 2 * k - 1);
    const double axi = dpsi * 2.0 * z.xi * ep + common * 2.0 * m * ipow(z.xi, 2 * m - 1);
    return {axi, -ax};
}

double Trajectory::max_energy_drift() const {
    if (energy.empty()) return 0.0;
    const double e0 = energy.front();
    const double scale = std::max(std::abs(e0), 1e-300);
    double worst = 0.0;
    for (double e : energy) worst = std::max(worst, std::abs(e - e0) / scale);
    return worst;
}

PhasePoint flow_closed_form(const HamiltonianSpec& h, const PhasePoint& z, double t) {
    if (h.k != 1 || h.m != 1) throw std::invalid_argument("closed form requires k = m = 1");
    const double r2 = z.x * z.x + z.xi * z.xi;
    if (r2 < h.mu * h.mu) throw std::runtime_error("inside excision ball");
    const double ang = 2.0 * h.p_exp * std::pow(r2, h.p_exp - 1.0) * t;
    const double c = std::cos(ang), s = std::sin(ang);
    return {c * z.x + s * z.xi, -s * z.x + c * z.xi};
}

PhasePoint rotation_flow_full(const HamiltonianSpec& h, const PhasePoint& z, double t) {
    if (h.k != 1 || h.m != 1) throw std::invalid_argument("rotation law requires k = m = 1");
    const double s = z.x * z.x + z.xi * z.xi;
    // a = A(s), field = 2 A'(s) (xi, -x): rotation at angular rate 2 A'(s).
    const double Aprime = dpsi_ds(h.mu, s) * std::pow(s, h.p_exp) +
                          psi_of_s(h.mu, s) * h.p_exp * std::pow(s, h.p_exp - 1.0);
    const double ang = 2.0 * Aprime * t;
    const double c = std::cos(ang), sn = std::sin(ang);
    return {c * z.x + sn * z.xi, -sn * z.x + c * z.xi};
}

double period(const HamiltonianSpec& h, const PhasePoint& z) {
    const double e = h.energy(z);
    const double g = std::tgamma(1.0 / (2.0 * h.k)) * std::tgamma(1.0 / (2.0 * h.m)) /
                     (h.k * h.m * std::abs(h.p_exp) *
                      std::tgamma(1.0 / (2.0 * h.k) + 1.0 / (2.0 * h.m)));
    return g * std::pow(e, h.p_c() - h.p_exp);
}

namespace {

PhasePoint rk4_step(const HamiltonianSpec& h, const PhasePoint& z, double dt) {
    const PhasePoint k1 = h.hamiltonian_field(z);
    const PhasePoint z2{z.x + 0.5 * dt * k1.x, z.xi + 0.5 * dt * k1.xi};
    const PhasePoint k2 = h.hamiltonian_field(z2);
    const PhasePoint z3{z.x + 0.5 * dt * k2.x, z.xi + 0.5 * dt * k2.xi};
    const PhasePoint k3 = h.hamiltonian_field(z3);
    const PhasePoint z4{z.x + dt * k3.x, z.xi + dt * k3.xi};
    const PhasePoint k4 = h.hamiltonian_field(z4);
    return {z.x + dt / 6.0 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x),
            z.xi + dt / 6.0 * (k1.xi + 2 * k2.xi + 2 * k3.xi + k4.xi)};
}

double period_estimate(const HamiltonianSpec& h, const PhasePoint& z) {
    // Step control only: floor the energy so points inside the excision ball
    // still get a finite estimate.
    const double e = std::max(h.energy(z), std::pow(h.mu / 2.0, 2.0 * std::max(h.k, h.m)));
    const double g = std::tgamma(1.0 / (2.0 * h.k)) * std::tgamma(1.0 / (2.0 * h.m)) /
                     (h.k * h.m * std::abs(h.p_exp) *
                      std::tgamma(1.0 / (2.0 * h.k) + 1.0 / (2.0 * h.m)));
    return g * std::pow(e, h.p_c() - h.p_exp);
}

} // namespace

Trajectory flow_rk4(const HamiltonianSpec& h, const PhasePoint& z, double t, double dt_max) {
    if (z.x == 0.0 && z.xi == 0.0) throw std::invalid_argument("initial point must be nonzero");
    const double dt_nominal = std::min(dt_max, period_estimate(h, z) / 2000.0);
    const long nsteps = std::max(1L, std::lround(std::ceil(std::abs(t) / dt_nominal)));
    const double dt = t / static_cast<double>(nsteps);

    Trajectory tr;
    tr.times.reserve(nsteps + 1);
    tr.points.reserve(nsteps + 1);
    tr.energy.reserve(nsteps + 1);
    PhasePoint cur = z;
    tr.times.push_back(0.0);
    tr.points.push_back(cur);
    tr.energy.push_back(h.value(cur));
    const double danger = h.mu / 4.0;
    for (long s = 1; s <= nsteps; ++s) {
        cur = rk4_step(h, cur, dt);
        if (cur.x * cur.x + cur.xi * cur.xi < danger * danger)
            throw std::runtime_error("flow enters degenerate region");
        tr.times.push_back(s * dt);
        tr.points.push_back(cur);
        tr.energy.push_back(h.value(cur));
    }
    return tr;
}

PhasePoint flow_map(const HamiltonianSpec& h, const PhasePoint& z, double t,
                    int steps_per_period) {
    if (t == 0.0) return z;
    if (z.x == 0.0 && z.xi == 0.0) return z;
    const double dt_nominal = period_estimate(h, z) / steps_per_period;
    const long nsteps = std::max(1L, std::lround(std::ceil(std::abs(t) / dt_nominal)));
    const double dt = t / static_cast<double>(nsteps);
    PhasePoint cur = z;
    for (long s = 0; s < nsteps; ++s) cur = rk4_step(h, cur, dt);
    return cur;
}

RegionMask transport_region(const HamiltonianSpec& h, const RegionMask& region, double t,
                            int steps_per_period) {
    if (t == 0.0) {
        RegionMask copy = region;
        return copy;
    }
    const PhaseGrid g = region.grid;
    RegionMask out;
    out.grid = g;
    out.raster = std::make_shared<std::vector<std::uint8_t>>(g.cells(), 0);
    auto pred_in = region.predicate;
    auto& cells = *out.raster;
    parallel_for(g.nxi, [&](std::size_t jj) {
        const int j = static_cast<int>(jj);
        for (int i = 0; i < g.nx; ++i) {
            const PhasePoint back = flow_map(h, g.point(i, j), -t, steps_per_period);
            cells[g.index(i, j)] = pred_in(back) ? 1 : 0;
        }
    });
    HamiltonianSpec hc = h;
    out.predicate = [hc, pred_in, t, steps_per_period](PhasePoint z) {
        return pred_in(flow_map(hc, z, -t, steps_per_period));
    };
    return out;
}

TransportConsistency transport_consistency(const HamiltonianSpec& h, const RegionMask& region,
                                           double t, const RegionMask& transported,
                                           int steps_per_period) {
    const PhaseGrid& g = region.grid;
    TransportConsistency c;
    std::vector<PhasePoint> boundary;
    for (int j = 1; j + 1 < g.nxi; ++j)
        for (int i = 1; i + 1 < g.nx; ++i) {
            if (!region.cell(i, j)) continue;
            const bool edge = !region.cell(i - 1, j) || !region.cell(i + 1, j) ||
                              !region.cell(i, j - 1) || !region.cell(i, j + 1);
            if (edge) boundary.push_back(g.point(i, j));
        }
    std::vector<std::uint8_t> hit(boundary.size(), 0);
    parallel_for(boundary.size(), [&](std::size_t s) {
        const PhasePoint fwd = flow_map(h, boundary[s], t, steps_per_period);
        if (!transported.grid.contains(fwd)) {
            hit[s] = 1; // left the raster window: nothing to compare against
            return;
        }
        const int ci = transported.grid.nearest_i(fwd.x);
        const int cj = transported.grid.nearest_j(fwd.xi);
        for (int dj = -1; dj <= 1 && !hit[s]; ++dj)
            for (int di = -1; di <= 1 && !hit[s]; ++di) {
                const int ii = std::clamp(ci + di, 0, transported.grid.nx - 1);
                const int jj = std::clamp(cj + dj, 0, transported.grid.nxi - 1);
                if (transported.cell(ii, jj)) hit[s] = 1;
            }
    });
    c.samples = static_cast<int>(boundary.size());
    for (std::uint8_t v : hit) c.consistent += v;
    return c;
}

HomogeneityReport homogeneity_check(const HamiltonianSpec& h, int samples, unsigned seed) {
    HomogeneityReport rep;
    const double sigma = h.sigma();
    const double pc = h.p_c();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coord(-10.0, 10.0);
    std::uniform_real_distribution<double> lam(0.1, 10.0);
    AnisoParams ap(h.k, h.m, 1.0);
    for (int s = 0; s < samples; ++s) {
        PhasePoint z{coord(rng), coord(rng)};
        if (h.energy(z) < 1e-6) continue;
        const double l = lam(rng);
        const PhasePoint zd = sigma_dilate(ap, z, l);
        const double a0 = std::pow(h.energy(z), pc);
        const double a0d = std::pow(h.energy(zd), pc);
        const double expected = std::pow(l, 1.0 + sigma) * a0;
        rep.max_rel_deviation =
            std::max(rep.max_rel_deviation, std::abs(a0d - expected) / std::abs(expected));
    }
    rep.rho_lo = 0.5;
    rep.rho_hi = 1.0 - 2.0 * std::max(h.k, h.m) * (h.p_exp - pc);
    rep.rho_interval_nonempty = rep.rho_lo <= rep.rho_hi;
    return rep;
}

void save_trajectory_csv(const Trajectory& tr, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "t,x,xi,energy\n";
    char buf[160];
    for (std::size_t s = 0; s < tr.times.size(); ++s) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", tr.times[s], tr.points[s].x,
                      tr.points[s].xi, tr.energy[s]);
        out << buf;
    }
}

} // namespace aniso

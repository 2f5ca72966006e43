#include "aniso/schrodinger.hpp"

#include "aniso/parallel.hpp"
#include "aniso/symbols.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace aniso {

namespace {

using Mat = Eigen::MatrixXd;

// x and d/dx in the orthonormal Hermite-function basis (tridiagonal ladder
// recursions, exact).
Mat position_matrix(int n) {
    Mat X = Mat::Zero(n, n);
    for (int j = 0; j + 1 < n; ++j) {
        const double v = std::sqrt((j + 1) / 2.0);
        X(j, j + 1) = v;
        X(j + 1, j) = v;
    }
    return X;
}

Mat derivative_matrix(int n) {
    Mat A = Mat::Zero(n, n);
    for (int j = 0; j + 1 < n; ++j) {
        const double v = std::sqrt((j + 1) / 2.0);
        A(j, j + 1) = v;   // d/dx h_{j+1} has +sqrt((j+1)/2) h_j
        A(j + 1, j) = -v;  // and a ladder-down term with opposite sign
    }
    return A;
}

Mat mat_power(const Mat& A, int e) {
    Mat R = Mat::Identity(A.rows(), A.cols());
    for (int i = 0; i < e; ++i) R = R * A;
    return R;
}

} // namespace

SpectralBasis build_operator(int k, int m, int basis_size) {
    if (basis_size < 32) throw std::invalid_argument("basis_size must be >= 32");
    if (k < 1 || m < 1) throw std::invalid_argument("k, m must be positive");
    const int M = basis_size;
    const int bw = 2 * std::max(k, m);
    const int Mbig = M + 2 * bw; // entries for rows/cols < M + bw are exact

    const Mat X = position_matrix(Mbig);
    const Mat A = derivative_matrix(Mbig);
    const Mat Hbig = mat_power(X, 2 * k) + mat_power(-(A * A), m);

    Mat H = Hbig.topLeftCorner(M, M);
    const double asym = (H - H.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * std::max(1.0, H.cwiseAbs().maxCoeff()))
        throw std::logic_error("non-symmetric assembly");
    H = 0.5 * (H + H.transpose());

    Eigen::SelfAdjointEigenSolver<Mat> solver(H);
    if (solver.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");

    SpectralBasis b;
    b.k = k;
    b.m = m;
    b.M = M;
    b.eigenvalues.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + M);
    b.vectors.resize(static_cast<std::size_t>(M) * M);
    Eigen::Map<Mat>(b.vectors.data(), M, M) = solver.eigenvectors();

    // Residual against the untruncated operator: only rows M..M+bw-1 of
    // Hbig * v can be nonzero beyond the eigen identity.
    const Mat tail = Hbig.block(M, 0, bw, M) * solver.eigenvectors();
    b.residuals.resize(M);
    b.certified = 0;
    bool gate_open = true;
    for (int j = 0; j < M; ++j) {
        b.residuals[j] = tail.col(j).norm();
        const bool ok = b.residuals[j] <= 1e-8 * std::max(1.0, std::abs(b.eigenvalues[j]));
        if (gate_open && ok)
            b.certified = j + 1;
        else
            gate_open = false;
    }

    const double lambda0 = b.eigenvalues.front();
    b.shift_C = lambda0 <= 0.0 ? -lambda0 + 1.0 : 0.0;
    return b;
}

std::vector<double> eigenfunction_on_grid(const SpectralBasis& b, int j, const SpatialGrid& grid) {
    std::vector<double> out(grid.n, 0.0);
    for (int l = 0; l < grid.n; ++l) {
        const std::vector<double> h = hermite_functions(grid.point(l), b.M);
        double s = 0.0;
        for (int r = 0; r < b.M; ++r) s += b.vec(r, j) * h[r];
        out[l] = s;
    }
    return out;
}

std::vector<cplx> expand_unchecked(const SpectralBasis& b, const SampledSignal& u) {
    // Hermite moments first, then rotate into the eigenbasis: avoids the
    // n x M x M table.
    std::vector<cplx> moments(b.M, cplx(0, 0));
    {
        const int workers = std::max(1, thread_count());
        std::vector<std::vector<cplx>> partial(workers, std::vector<cplx>(b.M, cplx(0, 0)));
        const int chunk = (u.grid.n + workers - 1) / workers;
        parallel_for(workers, [&](std::size_t wi) {
            const int lo = static_cast<int>(wi) * chunk;
            const int hi = std::min(u.grid.n, lo + chunk);
            auto& acc = partial[wi];
            for (int l = lo; l < hi; ++l) {
                const std::vector<double> h = hermite_functions(u.grid.point(l), b.M);
                const cplx uv = u.values[l];
                for (int r = 0; r < b.M; ++r) acc[r] += uv * h[r];
            }
        });
        for (const auto& acc : partial)
            for (int r = 0; r < b.M; ++r) moments[r] += acc[r];
        const double h = u.grid.h();
        for (cplx& v : moments) v *= h;
    }
    std::vector<cplx> c(b.certified, cplx(0, 0));
    for (int j = 0; j < b.certified; ++j) {
        cplx s(0, 0);
        for (int r = 0; r < b.M; ++r) s += b.vec(r, j) * moments[r];
        c[j] = s;
    }
    return c;
}

std::vector<cplx> expand(const SpectralBasis& b, const SampledSignal& u) {
    std::vector<cplx> c = expand_unchecked(b, u);
    SampledSignal recon = reconstruct(b, c, u.grid, "recon");
    const double res = subtract(u, recon).l2_norm();
    const double nrm = u.l2_norm();
    if (nrm > 0.0 && res / nrm > 1e-6) throw std::runtime_error("basis too small");
    return c;
}

std::vector<cplx> delta_coefficients(const SpectralBasis& b) {
    const std::vector<double> h0 = hermite_functions(0.0, b.M);
    std::vector<cplx> c(b.certified, cplx(0, 0));
    for (int j = 0; j < b.certified; ++j) {
        double s = 0.0;
        for (int r = 0; r < b.M; ++r) s += b.vec(r, j) * h0[r];
        c[j] = cplx(s, 0.0);
    }
    return c;
}

std::vector<cplx> tapered_delta_coefficients(const SpectralBasis& b) {
    std::vector<cplx> c = delta_coefficients(b);
    const double n = static_cast<double>(c.size());
    for (std::size_t j = 0; j < c.size(); ++j) {
        const double u = static_cast<double>(j) / n;
        if (u > 0.5) c[j] *= smooth_step(2.0 * (1.0 - u));
    }
    return c;
}

SampledSignal reconstruct(const SpectralBasis& b, const std::vector<cplx>& coeffs,
                          const SpatialGrid& grid, const std::string& label) {
    SampledSignal u = zero_signal(grid);
    u.label = label;
    const int nm = static_cast<int>(coeffs.size());
    // Rotate into Hermite coordinates once, then one pass over the grid.
    std::vector<cplx> hermite_coeffs(b.M, cplx(0, 0));
    for (int r = 0; r < b.M; ++r) {
        cplx s(0, 0);
        for (int j = 0; j < nm; ++j) s += b.vec(r, j) * coeffs[j];
        hermite_coeffs[r] = s;
    }
    parallel_for(grid.n, [&](std::size_t l) {
        const std::vector<double> h = hermite_functions(grid.point(static_cast<int>(l)), b.M);
        cplx s(0, 0);
        for (int r = 0; r < b.M; ++r) s += hermite_coeffs[r] * h[r];
        u.values[l] = s;
    });
    return u;
}

EvolutionResult propagate(const SpectralBasis& b, const std::vector<cplx>& c0, double p_exp,
                          const std::vector<double>& times, const SpatialGrid& grid,
                          const std::string& label, const std::optional<Forcing>& forcing) {
    if (static_cast<int>(c0.size()) > b.certified)
        throw std::invalid_argument("more coefficients than certified modes");
    const int nm = static_cast<int>(c0.size());
    const double C = b.shift_C;

    std::vector<double> lam_tilde(nm);
    for (int j = 0; j < nm; ++j)
        lam_tilde[j] = std::pow(b.eigenvalues[j] + C, p_exp) - std::pow(C, p_exp);

    EvolutionResult ev;
    ev.times = times;
    ev.truncation_level = nm;
    ev.coefficients.resize(times.size());
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
        const double t = times[ti];
        std::vector<cplx>& c = ev.coefficients[ti];
        c.resize(nm);
        for (int j = 0; j < nm; ++j) {
            cplx duhamel(0, 0);
            if (forcing) {
                // trapezoid of f_j(tau) e^{i lam tau} over forcing times in [0, t]
                const auto& ft = forcing->times;
                for (std::size_t s = 0; s + 1 < ft.size(); ++s) {
                    if (ft[s + 1] > t + 1e-15) break;
                    const double tau0 = ft[s], tau1 = ft[s + 1];
                    const cplx f0 = forcing->coefficients[s][j] *
                                    std::polar(1.0, lam_tilde[j] * tau0);
                    const cplx f1 = forcing->coefficients[s + 1][j] *
                                    std::polar(1.0, lam_tilde[j] * tau1);
                    duhamel += 0.5 * (tau1 - tau0) * (f0 + f1);
                }
            }
            c[j] = std::polar(1.0, -lam_tilde[j] * t) * (c0[j] + duhamel);
        }
    }
    ev.snapshots.reserve(times.size());
    for (std::size_t ti = 0; ti < times.size(); ++ti)
        ev.snapshots.push_back(
            reconstruct(b, ev.coefficients[ti], grid, label + "_t" + std::to_string(ti)));
    return ev;
}

EvolutionResult propagate(const SpectralBasis& b, const SampledSignal& u0, double p_exp,
                          const std::vector<double>& times, const std::optional<Forcing>& forcing) {
    const std::vector<cplx> c0 = expand(b, u0);
    return propagate(b, c0, p_exp, times, u0.grid, u0.label, forcing);
}

double modulation_norm_coeffs(const SpectralBasis& b, const std::vector<cplx>& coeffs, double s,
                              int k, double p_for_scaling) {
    double acc = 0.0;
    for (std::size_t j = 0; j < coeffs.size(); ++j)
        acc += std::pow(b.eigenvalues[j] + b.shift_C, s / (k * p_for_scaling)) *
               std::norm(coeffs[j]);
    return std::sqrt(acc);
}

double modulation_norm(const SpectralBasis& b, const SampledSignal& u, double s, int k,
                       double p_for_scaling) {
    return modulation_norm_coeffs(b, expand(b, u), s, k, p_for_scaling);
}

PropagationReport verify_propagation(const SpectralBasis& b, const HamiltonianSpec& h,
                                     const std::vector<cplx>& c0, const std::string& label,
                                     double t, const std::vector<RegionMask>& regions,
                                     const std::vector<std::string>& region_names,
                                     const Window& w, const PhaseGrid& grid,
                                     const SpatialGrid& sgrid, const VerifyConfig& cfg) {
    PropagationReport rep;
    rep.t = t;
    rep.truncation_level = static_cast<int>(c0.size());

    const double pc = h.p_c();
    const double sigma = h.sigma();
    if (std::abs(h.p_exp - pc) < 1e-12) {
        rep.regime = PropagationRegime::critical;
        rep.rho_source = rep.rho_target = 1.0;
        rep.note = "critical power: filter transported by the flow";
    } else if (h.supercritical_admissible()) {
        rep.regime = PropagationRegime::supercritical;
        rep.rho_source = 1.0;
        rep.rho_target = 1.0 - 2.0 * std::max(h.k, h.m) * (h.p_exp - pc);
        rep.inclusion_only = true;
        rep.note = "supercritical: inclusion only, source rho=1 vs target rho<1 "
                   "(parameter gap; equality not asserted)";
    } else if (2.0 * h.k * h.p_exp < 1.0 * (1.0 + sigma)) {
        rep.regime = PropagationRegime::subcritical;
        rep.rho_source = rep.rho_target = 1.0;
        rep.note = "subcritical: filter invariant, regions compared in place";
    } else {
        rep.regime = PropagationRegime::unclassified;
        rep.note = "power outside the validated regimes";
    }

    EvolutionResult ev = propagate(b, c0, h.p_exp, {0.0, t}, sgrid, label);

    // Mass must stay represented on the spatial grid.
    for (const SampledSignal& snap : ev.snapshots) {
        const double edge =
            std::max(std::abs(snap.values.front()), std::abs(snap.values.back()));
        if (edge * edge * 2.0 * sgrid.x_max > 1e-6) throw std::runtime_error("grid escape");
    }

    STFTField F0 = analyze(ev.snapshots[0], w, grid);
    STFTField Ft = analyze(ev.snapshots[1], w, grid);

    AnisoParams p_src(h.k, h.m, rep.rho_source);
    AnisoParams p_tgt(h.k, h.m, rep.rho_target > 0.0 ? rep.rho_target : rep.rho_source);

    rep.pass = true;
    for (std::size_t r = 0; r < regions.size(); ++r) {
        RegionVerdict v;
        v.name = r < region_names.size() ? region_names[r] : ("region" + std::to_string(r));
        v.member0 =
            filter_membership(F0, p_src, regions[r], cfg.eps, cfg.n_threshold, cfg.r_min).member;
        const RegionMask moved = rep.regime == PropagationRegime::subcritical
                                     ? regions[r]
                                     : transport_region(h, regions[r], t,
                                                        cfg.transport_steps_per_period);
        v.member_t =
            filter_membership(Ft, p_tgt, moved, cfg.eps, cfg.n_threshold, cfg.r_min).member;
        v.implication = !v.member0 || v.member_t;
        if (!v.implication) rep.pass = false;
        rep.regions.push_back(v);
    }
    return rep;
}

std::string propagation_report_json(const PropagationReport& r) {
    nlohmann::json j;
    const char* regime = "unclassified";
    switch (r.regime) {
        case PropagationRegime::critical: regime = "critical"; break;
        case PropagationRegime::subcritical: regime = "subcritical"; break;
        case PropagationRegime::supercritical: regime = "supercritical"; break;
        default: break;
    }
    j["regime"] = regime;
    j["rho_source"] = r.rho_source;
    j["rho_target"] = r.rho_target;
    j["inclusion_only"] = r.inclusion_only;
    j["t"] = r.t;
    j["truncation_level"] = r.truncation_level;
    j["note"] = r.note;
    j["pass"] = r.pass;
    nlohmann::json regions = nlohmann::json::array();
    for (const RegionVerdict& v : r.regions)
        regions.push_back({{"name", v.name},
                           {"member0", v.member0},
                           {"member_t", v.member_t},
                           {"implication", v.implication}});
    j["regions"] = regions;
    return j.dump(2);
}

void save_evolution_csv(const EvolutionResult& ev, const std::string& dir_prefix) {
    for (std::size_t ti = 0; ti < ev.times.size(); ++ti) {
        char name[64];
        std::snprintf(name, sizeof(name), "%s_t%03zu.csv", dir_prefix.c_str(), ti);
        save_signal_csv(ev.snapshots[ti], name);
    }
}

// ---------------------------------------------------------------------------
// persistence: little-endian float64 arrays + JSON header

void save_basis(const SpectralBasis& b, const std::string& data_path,
                const std::string& header_path) {
    std::ofstream out(data_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + data_path);
    auto write_vec = [&out](const std::vector<double>& v) {
        out.write(reinterpret_cast<const char*>(v.data()),
                  static_cast<std::streamsize>(v.size() * sizeof(double)));
    };
    write_vec(b.eigenvalues);
    write_vec(b.vectors);
    write_vec(b.residuals);

    nlohmann::json j;
    j["k"] = b.k;
    j["m"] = b.m;
    j["M"] = b.M;
    j["certified"] = b.certified;
    j["shift_C"] = b.shift_C;
    j["residuals"] = b.residuals;
    j["layout"] = "eigenvalues[M], vectors[M*M column-major], residuals[M]; float64 LE";
    std::ofstream hdr(header_path);
    if (!hdr) throw std::runtime_error("cannot open " + header_path);
    hdr << j.dump() << "\n";
}

SpectralBasis load_basis(const std::string& data_path, const std::string& header_path) {
    std::ifstream hdr(header_path);
    if (!hdr) throw std::runtime_error("cannot open " + header_path);
    nlohmann::json j;
    hdr >> j;
    SpectralBasis b;
    b.k = j.at("k").get<int>();
    b.m = j.at("m").get<int>();
    b.M = j.at("M").get<int>();
    b.certified = j.at("certified").get<int>();
    b.shift_C = j.at("shift_C").get<double>();
    b.eigenvalues.resize(b.M);
    b.vectors.resize(static_cast<std::size_t>(b.M) * b.M);
    b.residuals.resize(b.M);
    std::ifstream in(data_path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + data_path);
    auto read_vec = [&in](std::vector<double>& v) {
        in.read(reinterpret_cast<char*>(v.data()),
                static_cast<std::streamsize>(v.size() * sizeof(double)));
    };
    read_vec(b.eigenvalues);
    read_vec(b.vectors);
    read_vec(b.residuals);
    if (!in) throw std::runtime_error("basis binary truncated");
    return b;
}

} // namespace aniso

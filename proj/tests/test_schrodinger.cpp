#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "aniso/fft.hpp"
#include "aniso/schrodinger.hpp"

#include <cmath>
#include <complex>

using namespace aniso;

namespace {

const SpatialGrid sgrid(20.0, 4097);

// Test-only oracle: smallest eigenvalue of x^{2k} - d^2/dx^2-type operators on
// a uniform spatial grid with an FFT (spectral) Laplacian, via Lanczos with
// full reorthogonalization. Independent of the Hermite-basis route.
double spatial_ground_state(int k, int m, int n, double x_max, int iters) {
    const double L = 2.0 * x_max;
    std::vector<double> x(n), pot(n);
    for (int i = 0; i < n; ++i) {
        x[i] = -x_max + i * L / n; // periodic grid
        double p = 1.0;
        for (int q = 0; q < 2 * k; ++q) p *= x[i];
        pot[i] = p;
    }
    std::vector<double> ksq(n);
    for (int i = 0; i < n; ++i) {
        const double kk = 2.0 * M_PI / L * (i <= n / 2 ? i : i - n);
        ksq[i] = std::pow(kk * kk, m);
    }
    auto apply = [&](const std::vector<double>& v) {
        std::vector<cplx> f(v.begin(), v.end());
        fft_pow2(f, -1);
        for (int i = 0; i < n; ++i) f[i] *= ksq[i];
        fft_pow2(f, +1);
        std::vector<double> out(n);
        for (int i = 0; i < n; ++i) out[i] = f[i].real() / n + pot[i] * v[i];
        return out;
    };

    // Lanczos with full reorthogonalization
    std::vector<std::vector<double>> basis;
    std::vector<double> alpha, beta;
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = std::exp(-x[i] * x[i] / 2.0);
    auto nrm = [&](const std::vector<double>& a) {
        double s = 0;
        for (double t : a) s += t * t;
        return std::sqrt(s);
    };
    double nv = nrm(v);
    for (double& t : v) t /= nv;
    basis.push_back(v);
    std::vector<double> w_prev(n, 0.0);
    double beta_prev = 0.0;
    for (int it = 0; it < iters; ++it) {
        std::vector<double> w = apply(basis.back());
        double a = 0.0;
        for (int i = 0; i < n; ++i) a += w[i] * basis.back()[i];
        alpha.push_back(a);
        for (int i = 0; i < n; ++i) w[i] -= a * basis.back()[i] + beta_prev * w_prev[i];
        // full reorthogonalization
        for (const auto& b : basis) {
            double d = 0.0;
            for (int i = 0; i < n; ++i) d += w[i] * b[i];
            for (int i = 0; i < n; ++i) w[i] -= d * b[i];
        }
        const double bnorm = nrm(w);
        if (bnorm < 1e-12) break;
        beta.push_back(bnorm);
        for (double& t : w) t /= bnorm;
        w_prev = basis.back();
        beta_prev = bnorm;
        basis.push_back(w);
    }
    // smallest eigenvalue of the tridiagonal (Sturm bisection)
    const int mdim = static_cast<int>(alpha.size());
    auto count_below = [&](double lam) {
        int cnt = 0;
        double d = alpha[0] - lam;
        if (d < 0) ++cnt;
        for (int i = 1; i < mdim; ++i) {
            d = alpha[i] - lam - beta[i - 1] * beta[i - 1] / (d == 0.0 ? 1e-300 : d);
            if (d < 0) ++cnt;
        }
        return cnt;
    };
    double lo = -10.0, hi = 1e7;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (count_below(mid) >= 1 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

TEST_CASE("harmonic oscillator eigenvalues are 2j+1") {
    SpectralBasis b = build_operator(1, 1, 200);
    REQUIRE(b.certified >= 100);
    for (int j = 0; j <= 19; ++j)
        CHECK(std::abs(b.eigenvalues[j] - (2.0 * j + 1.0)) < 1e-8);
    for (double lam : b.eigenvalues) CHECK(lam >= -1e-10);
    CHECK(b.shift_C == 0.0);
}

TEST_CASE("quartic oscillator ground state matches the spatial-grid oracle") {
    SpectralBasis b = build_operator(2, 1, 200);
    const double oracle = spatial_ground_state(2, 1, 2048, 12.0, 260);
    CHECK(std::abs(b.eigenvalues[0] - oracle) < 1e-6);
    for (double lam : b.eigenvalues) CHECK(lam >= -1e-10);
}

TEST_CASE("eigenvector columns are orthonormal") {
    SpectralBasis b = build_operator(2, 1, 96);
    double worst = 0.0;
    for (int a = 0; a < b.M; ++a)
        for (int c = a; c < b.M; ++c) {
            double dot = 0.0;
            for (int r = 0; r < b.M; ++r) dot += b.vec(r, a) * b.vec(r, c);
            worst = std::max(worst, std::abs(dot - (a == c ? 1.0 : 0.0)));
        }
    CHECK(worst < 1e-10);
}

TEST_CASE("verify_propagation: regimes and the trivial t = 0 case") {
    SpectralBasis b = build_operator(1, 1, 200);
    Window w = make_window(WindowKind::gaussian, 0, sgrid);
    const PhaseGrid pg(20.0, 20.0, 129, 129);
    SampledSignal g = make_catalog_signal(GaussianSpec{1.0}, sgrid);
    std::vector<cplx> c0 = expand(b, g);
    std::vector<RegionMask> regions = {
        rasterize(pg, [](PhasePoint z) { return std::abs(z.xi) <= 0.5 * std::abs(z.x); })};
    std::vector<std::string> names = {"wedge"};
    VerifyConfig vc;

    // subcritical: 2kp = 1/2 < rho(1+sigma) = 2; regions compared in place
    HamiltonianSpec sub(1, 1, 0.25, 0.5);
    PropagationReport r1 =
        verify_propagation(b, sub, c0, "gaussian", 0.4, regions, names, w, pg, sgrid, vc);
    CHECK(r1.regime == PropagationRegime::subcritical);
    CHECK(r1.pass); // gaussian data: everything smooth at both times

    // critical at t = 0 passes trivially
    HamiltonianSpec crit(1, 1, 1.0, 0.5);
    PropagationReport r0 =
        verify_propagation(b, crit, c0, "gaussian", 0.0, regions, names, w, pg, sgrid, vc);
    CHECK(r0.regime == PropagationRegime::critical);
    CHECK(r0.pass);

    // supercritical labeling
    HamiltonianSpec sup(1, 1, 1.2, 0.5);
    PropagationReport r2 =
        verify_propagation(b, sup, c0, "gaussian", 0.1, regions, names, w, pg, sgrid, vc);
    CHECK(r2.regime == PropagationRegime::supercritical);
    CHECK(r2.inclusion_only);
    CHECK(r2.rho_target == doctest::Approx(0.6));
    const std::string js = propagation_report_json(r2);
    CHECK(js.find("supercritical") != std::string::npos);
}

TEST_CASE("basis persistence round trip") {
    SpectralBasis b = build_operator(1, 2, 64);
    save_basis(b, "/tmp/aniso_basis_test.bin", "/tmp/aniso_basis_test.json");
    SpectralBasis r = load_basis("/tmp/aniso_basis_test.bin", "/tmp/aniso_basis_test.json");
    CHECK(r.k == b.k);
    CHECK(r.m == b.m);
    CHECK(r.M == b.M);
    CHECK(r.certified == b.certified);
    for (int j = 0; j < b.M; ++j) CHECK(r.eigenvalues[j] == b.eigenvalues[j]);
    CHECK(r.vectors == b.vectors);
}

TEST_CASE("expansion of hermite signals hits unit vectors") {
    SpectralBasis b = build_operator(1, 1, 200);
    SampledSignal h3 = make_catalog_signal(HermiteSpec{3}, sgrid);
    std::vector<cplx> c = expand(b, h3);
    for (int j = 0; j < b.certified; ++j) {
        const double expect = j == 3 ? 1.0 : 0.0;
        CHECK(std::abs(std::abs(c[j]) - expect) < 1e-7);
    }
}

TEST_CASE("expansion residual gate") {
    SpectralBasis b = build_operator(1, 1, 64);
    // a narrow spike needs far more modes than certified at M = 64
    SampledSignal spike = make_catalog_signal(DeltaApproxSpec{0.05}, sgrid);
    CHECK_THROWS_WITH_AS(expand(b, spike), "basis too small", std::runtime_error);
}

TEST_CASE("ground-state evolution phase and unitarity") {
    SpectralBasis b = build_operator(1, 1, 200);
    SampledSignal u0 = make_catalog_signal(GaussianSpec{1.0}, sgrid); // = phi_0
    std::vector<double> times = {0.0, 0.5, 1.0};
    EvolutionResult ev = propagate(b, u0, 1.0, times);
    // u(t) = e^{-i t} phi_0 globally (eigenvalue 1)
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
        const cplx want = std::polar(1.0, -times[ti]);
        CHECK(std::abs(ev.coefficients[ti][0] - want) < 1e-9);
        double rest = 0.0;
        for (std::size_t j = 1; j < ev.coefficients[ti].size(); ++j)
            rest += std::norm(ev.coefficients[ti][j]);
        CHECK(rest < 1e-12);
        CHECK(ev.snapshots[ti].l2_norm() == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("unitarity, revival, group property") {
    SpectralBasis b = build_operator(1, 1, 200);
    SampledSignal u0 = make_catalog_signal(HermiteSpec{4}, sgrid);
    // mix a few modes
    std::vector<cplx> c0 = expand(b, u0);
    c0[0] += 0.5;
    c0[7] += cplx(0.0, 0.25);

    auto norm_of = [](const std::vector<cplx>& c) {
        double s = 0;
        for (const cplx& v : c) s += std::norm(v);
        return std::sqrt(s);
    };
    const double n0 = norm_of(c0);

    EvolutionResult ev = propagate(b, c0, 1.0, {0.0, 0.7, 2.0 * M_PI}, sgrid, "mix");
    CHECK(norm_of(ev.coefficients[1]) == doctest::Approx(n0).epsilon(1e-10));

    // harmonic revival at t = 2pi: e^{-i(2j+1)2pi} = 1 for every mode
    for (std::size_t j = 0; j < c0.size(); ++j)
        CHECK(std::abs(ev.coefficients[2][j] - c0[j]) < 1e-7 * std::max(1.0, std::abs(c0[j])));

    // group property: K_s K_t = K_{s+t}
    EvolutionResult to_t = propagate(b, c0, 1.0, {0.7}, sgrid, "a");
    EvolutionResult then_s = propagate(b, to_t.coefficients[0], 1.0, {0.9}, sgrid, "b");
    EvolutionResult direct = propagate(b, c0, 1.0, {1.6}, sgrid, "c");
    for (std::size_t j = 0; j < c0.size(); ++j)
        CHECK(std::abs(then_s.coefficients[0][j] - direct.coefficients[0][j]) < 1e-8);

    // eigenmode invariance
    std::vector<cplx> e5(b.certified, cplx(0, 0));
    e5[5] = 1.0;
    EvolutionResult mode_ev = propagate(b, e5, 1.2, {0.4}, sgrid, "mode");
    for (int j = 0; j < b.certified; ++j) {
        const double expect = j == 5 ? 1.0 : 0.0;
        CHECK(std::abs(std::abs(mode_ev.coefficients[0][j]) - expect) < 1e-12);
    }
}

TEST_CASE("forced evolution: trapezoid-exact duhamel term") {
    SpectralBasis b = build_operator(1, 1, 64);
    std::vector<cplx> c0(b.certified, cplx(0, 0));
    c0[0] = 1.0;
    // forcing f_0(t) = e^{-i lambda_0 t}: the rotated integrand is constant,
    // so the trapezoid rule is exact and c_0(t) = e^{-i lambda_0 t} (1 + t)
    const double lam0 = b.eigenvalues[0]; // shift_C = 0
    Forcing f;
    const int nt = 21;
    for (int s = 0; s < nt; ++s) {
        const double tau = s * 0.05;
        f.times.push_back(tau);
        std::vector<cplx> row(b.certified, cplx(0, 0));
        row[0] = std::polar(1.0, -lam0 * tau);
        f.coefficients.push_back(row);
    }
    EvolutionResult ev = propagate(b, c0, 1.0, {1.0}, sgrid, "forced", f);
    const cplx want = std::polar(1.0, -lam0 * 1.0) * (1.0 + 1.0);
    CHECK(std::abs(ev.coefficients[0][0] - want) < 1e-12);
}

TEST_CASE("modulation norms") {
    SpectralBasis b = build_operator(1, 1, 200);
    SampledSignal g = make_catalog_signal(GaussianSpec{1.0}, sgrid);
    // s = 0 reduces to the L2 norm
    CHECK(modulation_norm(b, g, 0.0, 1, 1.0) == doctest::Approx(g.l2_norm()).epsilon(1e-8));
    // finite for large s (Schwartz data)
    CHECK(std::isfinite(modulation_norm(b, g, 10.0, 1, 1.0)));

    // single-mode exactness of the monotonicity constant
    std::vector<cplx> e0(b.certified, cplx(0, 0));
    e0[0] = 1.0;
    const double s1 = 2.0, s2 = 0.5;
    const double n1 = modulation_norm_coeffs(b, e0, s1, 1, 1.0);
    const double n2 = modulation_norm_coeffs(b, e0, s2, 1, 1.0);
    const double K = std::pow(b.eigenvalues[0] + b.shift_C, (s2 - s1) / (1 * 1.0));
    CHECK(n2 == doctest::Approx(K * n1).epsilon(1e-12));

    // invariance along the free evolution, s in {0, 2}
    std::vector<cplx> c0 = expand(b, g);
    EvolutionResult ev = propagate(b, c0, 1.0, {0.0, 0.3, 1.1}, sgrid, "g");
    for (double s : {0.0, 2.0}) {
        const double base = modulation_norm_coeffs(b, c0, s, 1, 1.0);
        for (const auto& c : ev.coefficients) {
            const double nt2 = modulation_norm_coeffs(b, c, s, 1, 1.0);
            CHECK(nt2 / base <= 1.0 + 1e-6);
            CHECK(nt2 / base >= 1.0 - 1e-6);
        }
    }
}

TEST_CASE("delta coefficients and truncation label") {
    SpectralBasis b = build_operator(1, 1, 200);
    std::vector<cplx> cd = delta_coefficients(b);
    REQUIRE(static_cast<int>(cd.size()) == b.certified);
    // odd modes vanish at the origin
    for (int j = 1; j < b.certified; j += 2) CHECK(std::abs(cd[j]) < 1e-14);
    EvolutionResult ev = propagate(b, cd, 1.0, {0.0}, sgrid, "delta_trunc");
    CHECK(ev.truncation_level == b.certified);
}

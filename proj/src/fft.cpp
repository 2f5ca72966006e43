#include "aniso/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace aniso {

namespace {

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// Phase reduced mod 2*pi before polar() so large quadratic phases keep full
// precision.
cplx unit_phasor(double angle) {
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::polar(1.0, std::fmod(angle, two_pi));
}

} // namespace

void fft_pow2(std::vector<cplx>& a, int sign) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0) throw std::logic_error("fft size not a power of two");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * M_PI / static_cast<double>(len);
        const cplx wl = std::polar(1.0, ang);
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                cplx u = a[i + j];
                cplx v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

std::vector<cplx> czt_sum(const std::vector<cplx>& x, std::size_t n_out,
                          double alpha, double beta) {
    const std::size_t n = x.size();
    std::vector<cplx> out(n_out, cplx(0.0, 0.0));
    if (n == 0 || n_out == 0) return out;

    // S[j] = e^{i beta j^2/2} * sum_k (x[k] e^{i k alpha} e^{i beta k^2/2}) e^{-i beta (j-k)^2/2}
    const std::size_t nfft = next_pow2(n + n_out - 1);
    std::vector<cplx> u(nfft, cplx(0.0, 0.0));
    std::vector<cplx> v(nfft, cplx(0.0, 0.0));
    for (std::size_t k = 0; k < n; ++k) {
        double kk = static_cast<double>(k);
        u[k] = x[k] * unit_phasor(kk * alpha + 0.5 * beta * kk * kk);
    }
    const std::size_t lmax = std::max(n, n_out);
    for (std::size_t l = 0; l < lmax; ++l) {
        double ll = static_cast<double>(l);
        cplx q = unit_phasor(-0.5 * beta * ll * ll);
        if (l < n_out) v[l] = q;
        if (l > 0 && l < n) v[nfft - l] = q;
    }
    fft_pow2(u, -1);
    fft_pow2(v, -1);
    for (std::size_t i = 0; i < nfft; ++i) u[i] *= v[i];
    fft_pow2(u, +1);
    const double scale = 1.0 / static_cast<double>(nfft);
    for (std::size_t j = 0; j < n_out; ++j) {
        double jj = static_cast<double>(j);
        out[j] = u[j] * scale * unit_phasor(0.5 * beta * jj * jj);
    }
    return out;
}

} // namespace aniso

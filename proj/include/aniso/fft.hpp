#pragma once

#include <complex>
#include <vector>

namespace aniso {

using cplx = std::complex<double>;

// In-place radix-2 FFT, n must be a power of two. sign = -1 forward.
void fft_pow2(std::vector<cplx>& a, int sign);

// Chirp-Z sum: given x[0..n), returns S[j] = sum_k x[k] * exp(i*k*(alpha + beta*j))
// for j in [0, n_out). Evaluated by Bluestein's algorithm, exact up to
// rounding at arbitrary (alpha, beta), so frequency lattices never have to
// coincide with FFT bins.
std::vector<cplx> czt_sum(const std::vector<cplx>& x, std::size_t n_out,
                          double alpha, double beta);

} // namespace aniso

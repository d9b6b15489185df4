// Batched exponentials for the hot loops (Debye-Waller factors and
// response-function kernels).  The implementation file is compiled with
// vector-math flags; results are deterministic for a given build.

#pragma once

#include <complex>
#include <cstddef>

namespace polaring {

// out[i] = exp(re[i]) * (cos(im[i]) + i sin(im[i]))
void vexp_cis(std::size_t n, const double* re, const double* im, std::complex<double>* out);

// out[i] = exp(z[i]) for interleaved complex input
void vexp(std::size_t n, const std::complex<double>* z, std::complex<double>* out);

} // namespace polaring

#include "polaring/fastmath.hpp"

#include <cmath>

namespace polaring {

void vexp_cis(std::size_t n, const double* __restrict re, const double* __restrict im,
              std::complex<double>* __restrict out) {
    double* o = reinterpret_cast<double*>(out);
    for (std::size_t i = 0; i < n; ++i) {
        const double m = std::exp(re[i]);
        o[2 * i] = m * std::cos(im[i]);
        o[2 * i + 1] = m * std::sin(im[i]);
    }
}

void vexp(std::size_t n, const std::complex<double>* __restrict z,
          std::complex<double>* __restrict out) {
    const double* zi = reinterpret_cast<const double*>(z);
    double* o = reinterpret_cast<double*>(out);
    for (std::size_t i = 0; i < n; ++i) {
        const double m = std::exp(zi[2 * i]);
        o[2 * i] = m * std::cos(zi[2 * i + 1]);
        o[2 * i + 1] = m * std::sin(zi[2 * i + 1]);
    }
}

} // namespace polaring

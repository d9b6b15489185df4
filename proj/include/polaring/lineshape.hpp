// Drude-Lorentz line-broadening function and the four lineshape factors
// of the third-order response, evaluated from the closed form with a
// truncated Matsubara series.

#pragma once

#include <complex>

namespace polaring {

struct BathLineshapeParams {
    double lambda0_cm1 = 100.0;   // solvent reorganization energy
    double gamma0_cm1 = 35.0;     // inverse relaxation time
    double temperature_k = 77.0;
    double matsubara_tol = 1e-8;  // relative term cutoff
    int matsubara_max = 10000;
};

struct LineshapeG {
    std::complex<double> value;
    int terms_used = 0;
    bool converged = true;        // false when the cap was hit first
    double achieved_tol = 0.0;
};

LineshapeG lineshape_g_info(double t_fs, const BathLineshapeParams& p);
std::complex<double> lineshape_g(double t_fs, const BathLineshapeParams& p);

struct LineshapeFactors {
    std::complex<double> f1, f2, f3, f4;
};

LineshapeFactors lineshape_factors(double tau_fs, double t_w_fs, double t_fs,
                                   const BathLineshapeParams& p);

} // namespace polaring

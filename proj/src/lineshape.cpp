#include "polaring/lineshape.hpp"

#include <cmath>
#include <stdexcept>

#include "polaring/units.hpp"

namespace polaring {

LineshapeG lineshape_g_info(double t_fs, const BathLineshapeParams& p) {
    if (t_fs < 0.0) throw std::invalid_argument("lineshape_g: t must be >= 0");
    if (p.gamma0_cm1 <= 0.0 || p.temperature_k <= 0.0 || p.lambda0_cm1 < 0.0)
        throw std::invalid_argument("lineshape_g: invalid bath parameters");

    const double lam = p.lambda0_cm1 * units::cm1_to_radfs;
    const double gam = p.gamma0_cm1 * units::cm1_to_radfs;
    const double kbt = p.temperature_k * units::k_boltzmann_cm1 * units::cm1_to_radfs;

    LineshapeG out;
    if (lam == 0.0) {
        out.value = {0.0, 0.0};
        return out;
    }

    auto bracket = [t_fs](double rate) { return std::expm1(-rate * t_fs) + rate * t_fs; };

    const double b_gam = bracket(gam);
    const double cot_half = 1.0 / std::tan(0.5 * gam / kbt);
    double re = (lam / gam) * cot_half * b_gam;
    const double im = -(lam / gam) * b_gam;

    // Matsubara corrections, nu_n = 2 pi n k_B T
    const double scale = std::abs(re) + lam * t_fs + 1e-300;
    int n = 1;
    double last_rel = 0.0;
    for (; n <= p.matsubara_max; ++n) {
        const double nu = 2.0 * units::pi * n * kbt;
        const double term = 4.0 * lam * gam * kbt * bracket(nu) / (nu * (nu * nu - gam * gam));
        re += term;
        last_rel = std::abs(term) / scale;
        if (last_rel < p.matsubara_tol) break;
    }
    out.terms_used = std::min(n, p.matsubara_max);
    out.converged = n <= p.matsubara_max;
    out.achieved_tol = last_rel;
    out.value = {re, im};
    return out;
}

std::complex<double> lineshape_g(double t_fs, const BathLineshapeParams& p) {
    return lineshape_g_info(t_fs, p).value;
}

LineshapeFactors lineshape_factors(double tau_fs, double t_w_fs, double t_fs,
                                   const BathLineshapeParams& p) {
    using cd = std::complex<double>;
    const cd g_t = lineshape_g(t_fs, p);
    const cd g_tau = lineshape_g(tau_fs, p);
    const cd g_tw = lineshape_g(t_w_fs, p);
    const cd g_twt = lineshape_g(t_w_fs + t_fs, p);
    const cd g_tautw = lineshape_g(tau_fs + t_w_fs, p);
    const cd g_all = lineshape_g(tau_fs + t_w_fs + t_fs, p);

    LineshapeFactors f;
    f.f1 = std::exp(-std::conj(g_t) - g_tau - std::conj(g_tw) + std::conj(g_twt) + g_tautw - g_all);
    f.f2 = std::exp(-std::conj(g_t) - std::conj(g_tau) + g_tw - g_twt - std::conj(g_tautw) +
                    std::conj(g_all));
    f.f3 = std::exp(-g_t - std::conj(g_tau) + std::conj(g_tw) - std::conj(g_twt) -
                    std::conj(g_tautw) + std::conj(g_all));
    f.f4 = std::exp(-g_t - g_tau - g_tw + g_twt + g_tautw - g_all);
    return f;
}

} // namespace polaring

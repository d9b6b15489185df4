// Third-order photon-echo response of the one-exciton manifold in the
// impulsive limit, built from batch-propagated amplitudes, and its
// double-Fourier image.
//
// The quadruple site sum is reorganized over bra pairs u = (m, m1) and
// ket pairs v = (m3, m2): the orientation average and dipole products
// reduce to a fixed pair-pair weight matrix, the coherent-state overlap
// exponent to a rank-N_q product between stored displacement tables.

#pragma once

#include <utility>
#include <vector>

#include "polaring/dynamics.hpp"
#include "polaring/lineshape.hpp"
#include "polaring/model.hpp"

namespace polaring {

// isotropically averaged four-dipole factor, symmetric in its indices
double orientation_factor(const std::vector<Eigen::Vector3d>& dipoles, int m, int m1, int m2,
                          int m3);

struct AmplitudeTable {
    int n_sites = 0;
    int n_modes = 0;
    double dt_fs = 2.0;     // snapshot spacing
    double t_min_fs = 0.0;  // can be negative
    double t_max_fs = 0.0;
    int n_times = 0;
    std::vector<double> omega_rad; // mode frequencies, for the overlap phases

    // snapshot s, initial site m:
    //   alpha[s][m*N + n], lambda transposed as [s][q*P + p] with pair
    //   index p = m*N + n, and pair prefactor alpha * exp(-h) alongside
    std::vector<std::vector<cplx>> lambda_t;  // [s] -> [Nq * P]
    std::vector<std::vector<cplx>> pref;      // [s] -> [P], alpha * e^{-half norm}
    std::vector<std::vector<cplx>> alpha;     // [s] -> [P] raw amplitudes

    int index(double t_fs) const;
};

// Propagates one closed trajectory per initial site over
// [t_min, t_max]; throws when any trajectory loses norm conservation.
AmplitudeTable build_amplitude_table(const DynamicsModel& model, double t_min_fs,
                                     double t_max_fs, double snapshot_dt_fs,
                                     const IntegratorConfig& integ, int n_threads = 1);

struct ResponseGrid {
    std::vector<double> tau_fs;
    std::vector<double> t_fs;
    double t_w_fs = 0.0;
    // row-major [tau][t]
    std::vector<cplx> r1, r2, r3, r4;

    void accumulate(const ResponseGrid& other);
    void scale(double f);
};

struct ResponseGridSpec {
    double tau_max_fs = 400.0;
    double t_max_fs = 400.0;
    double step_fs = 2.0;
};

ResponseGrid response_functions(const AmplitudeTable& table, const RingGeometry& geom,
                                const BathLineshapeParams& lineshape, double t_w_fs,
                                const ResponseGridSpec& grid, int n_threads = 1);

enum class SpectrumKind { rephasing, nonrephasing, total };

struct Spectrum2D {
    std::vector<double> omega;      // shared axis, omega0 units, ascending
    std::vector<double> rephasing;  // row-major [w_tau][w_t], real part
    std::vector<double> nonrephasing;
    std::vector<double> total;
    double t_w_fs = 0.0;
};

// Rephasing pathways transform with e^{-i w tau} e^{+i w t}, the
// non-rephasing ones with e^{+i w tau} e^{+i w t}; both map a transition
// at energy E to the diagonal point (E, E).
Spectrum2D spectrum_2d(const ResponseGrid& grid, double omega0_rad, int pad_factor = 4);

// diagonal slice of the total 2D spectrum at T_w = 0, unit maximum
std::vector<std::pair<double, double>> linear_absorption(const Spectrum2D& spectrum);

// full width at half maximum of a sampled line, linear interpolation
double fwhm(const std::vector<std::pair<double, double>>& line);

} // namespace polaring

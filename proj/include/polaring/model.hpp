// Ring model: geometry, dipole orientations, disordered exciton matrix
// and the dispersive phonon bath.
//
// All constructors are pure; the returned objects are immutable value
// types and safe to share across trajectory workers.

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

namespace polaring {

struct RingGeometry {
    int n_sites = 16;
    double radius_angstrom = 23.0;
    double intra_dimer_angstrom = 9.1;
    double inter_dimer_angstrom = 8.9;
    double intra_dimer_angle_deg = 167.5;
    double inter_dimer_angle_deg = 147.5;
    std::vector<Eigen::Vector3d> positions; // angstrom, ring plane z=0
    std::vector<Eigen::Vector3d> dipoles;   // unit vectors, in plane
};

struct CouplingParams {
    double j1_intra_cm1 = 594.0;
    double j2_inter_cm1 = 491.0;
    double dipole_constant_c = 640725.0; // angstrom^3 cm^-1
    double site_energy_baseline_cm1 = 0.0;
};

struct DisorderSpec {
    double sigma_e_cm1 = 0.0;
    double sigma_j_cm1 = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t realization_index = 0;
};

struct DisorderShifts {
    std::vector<double> site_cm1; // one per site
    std::vector<double> bond_cm1; // one per nearest-neighbour bond (i, i+1 mod N)
};

struct ExcitonMatrix {
    Eigen::MatrixXd k; // symmetric, cm^-1
    int n() const { return static_cast<int>(k.rows()); }
};

struct PhononBath {
    int n_modes = 16;            // equals n_sites
    double omega0_cm1 = 1670.0;  // band centre
    double bandwidth_w = 0.5;    // dimensionless, in [0,1]
    double huang_rhys_s = 0.5;
    std::vector<double> q;            // momenta, (2pi/N)(-N/2 + i + 1)
    std::vector<double> omega_q_cm1;  // linear dispersion in |q|
    std::vector<double> g_q;          // dimensionless couplings, even in q
};

// Places n sites on a circle of the given radius with alternating
// intra/inter chord targets (least-squares split of the dimer arc when
// the published triple is over-determined) and winds the dipole
// directions by the two published angles so the pattern is covariant
// under rotation by one dimer.
RingGeometry build_geometry(int n_sites, double radius_angstrom,
                            std::pair<double, double> distances_angstrom,
                            std::pair<double, double> angles_deg);

inline RingGeometry build_geometry() {
    return build_geometry(16, 23.0, {9.1, 8.9}, {167.5, 147.5});
}

// Gaussian site and bond shifts; (seed, realization_index) fully
// determines the draws.
DisorderShifts sample_disorder(const DisorderSpec& spec, int n_sites);

// Frenkel matrix: diagonal = baseline + site shifts, nearest neighbours
// J1/J2 alternating (+ per-bond shifts), longer range from the clean
// dipole-dipole interaction.
ExcitonMatrix build_exciton_matrix(const RingGeometry& geom, const CouplingParams& params,
                                   const DisorderShifts& shifts);

ExcitonMatrix build_exciton_matrix(const RingGeometry& geom, const CouplingParams& params);

// Point-dipole coupling between two sites of the clean geometry, cm^-1.
double dipole_dipole_coupling(const RingGeometry& geom, int i, int j, double constant_c);

// Dispersive bath with elliptic coupling profile, rescaled so that
// (1/N) sum_q g_q^2 omega_q = S * omega0 holds exactly.  W = 0 falls
// back to Einstein phonons with equal couplings.
PhononBath build_phonon_bath(int n_modes, double omega0_cm1, double bandwidth_w,
                             double huang_rhys_s);

} // namespace polaring

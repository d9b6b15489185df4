#include "polaring/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "polaring/rng.hpp"
#include "polaring/units.hpp"

namespace polaring {

namespace {

// 1D golden-section minimum of f on [a,b]
template <typename F>
double golden_min(F f, double a, double b, double tol) {
    constexpr double inv_phi = 0.6180339887498949;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

} // namespace

RingGeometry build_geometry(int n_sites, double radius_angstrom,
                            std::pair<double, double> distances_angstrom,
                            std::pair<double, double> angles_deg) {
    if (n_sites < 4 || n_sites % 2 != 0)
        throw std::invalid_argument("build_geometry: n_sites must be even and >= 4");
    if (radius_angstrom <= 0.0)
        throw std::invalid_argument("build_geometry: radius must be positive");
    const auto [d_intra, d_inter] = distances_angstrom;
    if (d_intra <= 0.0 || d_inter <= 0.0)
        throw std::invalid_argument("build_geometry: distances must be positive");
    if (d_intra >= 2.0 * radius_angstrom || d_inter >= 2.0 * radius_angstrom)
        throw std::invalid_argument("build_geometry: chord exceeds diameter");

    const int n_dimers = n_sites / 2;
    const double dimer_arc = 2.0 * units::pi / n_dimers;
    // each chord must fit its arc share; reject impossible triples
    const double arc_needed =
        2.0 * std::asin(d_intra / (2.0 * radius_angstrom)) +
        2.0 * std::asin(d_inter / (2.0 * radius_angstrom));
    if (arc_needed > 1.5 * dimer_arc)
        throw std::invalid_argument("build_geometry: chord sum exceeds the circumference");

    // split the dimer arc so the two chords match the targets in least squares
    const double r = radius_angstrom;
    auto cost = [&](double delta) {
        const double t1 = 0.5 * dimer_arc + delta;
        const double t2 = 0.5 * dimer_arc - delta;
        const double c1 = 2.0 * r * std::sin(0.5 * t1) - d_intra;
        const double c2 = 2.0 * r * std::sin(0.5 * t2) - d_inter;
        return c1 * c1 + c2 * c2;
    };
    const double span = 0.45 * dimer_arc;
    const double delta = golden_min(cost, -span, span, 1e-14);
    const double theta_intra = 0.5 * dimer_arc + delta;
    const double theta_inter = 0.5 * dimer_arc - delta;

    RingGeometry g;
    g.n_sites = n_sites;
    g.radius_angstrom = radius_angstrom;
    g.intra_dimer_angstrom = d_intra;
    g.inter_dimer_angstrom = d_inter;
    g.intra_dimer_angle_deg = angles_deg.first;
    g.inter_dimer_angle_deg = angles_deg.second;
    g.positions.resize(n_sites);
    g.dipoles.resize(n_sites);

    std::vector<double> phi(n_sites, 0.0);
    for (int n = 1; n < n_sites; ++n)
        phi[n] = phi[n - 1] + ((n - 1) % 2 == 0 ? theta_intra : theta_inter);
    for (int n = 0; n < n_sites; ++n)
        g.positions[n] = {r * std::cos(phi[n]), r * std::sin(phi[n]), 0.0};

    // Dipole directions wind opposite to the site ordering
    // (advance -a_intra, -a_inter), which is the unique handedness that
    // keeps the pattern covariant under rotation by one dimer:
    // -(a_intra + a_inter) = -315 deg = +45 deg = one dimer arc.
    // The head-to-tail tilt is split evenly between the two sites of a
    // dimer, keeping the dipoles as close to tangential as the published
    // angles allow.
    const double a_intra = angles_deg.first * units::deg_to_rad;
    const double a_inter = angles_deg.second * units::deg_to_rad;
    const double tilt = 0.5 * (theta_intra - (units::pi - a_intra));
    std::vector<double> psi(n_sites, 0.0);
    psi[0] = phi[0] + 0.5 * units::pi + tilt;
    for (int n = 1; n < n_sites; ++n)
        psi[n] = psi[n - 1] - ((n - 1) % 2 == 0 ? a_intra : a_inter);
    for (int n = 0; n < n_sites; ++n)
        g.dipoles[n] = {std::cos(psi[n]), std::sin(psi[n]), 0.0};

    return g;
}

DisorderShifts sample_disorder(const DisorderSpec& spec, int n_sites) {
    if (spec.sigma_e_cm1 < 0.0 || spec.sigma_j_cm1 < 0.0)
        throw std::invalid_argument("sample_disorder: standard deviations must be >= 0");
    DisorderShifts out;
    out.site_cm1.resize(n_sites);
    out.bond_cm1.resize(n_sites);
    PhiloxRng site_rng(spec.seed, spec.realization_index, rng_stream::site_energy);
    PhiloxRng bond_rng(spec.seed, spec.realization_index, rng_stream::bond_coupling);
    for (int i = 0; i < n_sites; ++i)
        out.site_cm1[i] = spec.sigma_e_cm1 == 0.0 ? 0.0 : spec.sigma_e_cm1 * site_rng.normal();
    for (int i = 0; i < n_sites; ++i)
        out.bond_cm1[i] = spec.sigma_j_cm1 == 0.0 ? 0.0 : spec.sigma_j_cm1 * bond_rng.normal();
    return out;
}

double dipole_dipole_coupling(const RingGeometry& geom, int i, int j, double constant_c) {
    const Eigen::Vector3d rij = geom.positions[j] - geom.positions[i];
    const double dist = rij.norm();
    if (dist <= 0.0)
        throw std::invalid_argument("dipole_dipole_coupling: coincident sites");
    const Eigen::Vector3d& di = geom.dipoles[i];
    const Eigen::Vector3d& dj = geom.dipoles[j];
    const double r3 = dist * dist * dist;
    const double r5 = r3 * dist * dist;
    return constant_c * (di.dot(dj) / r3 - 3.0 * di.dot(rij) * dj.dot(rij) / r5);
}

ExcitonMatrix build_exciton_matrix(const RingGeometry& geom, const CouplingParams& params,
                                   const DisorderShifts& shifts) {
    const int n = geom.n_sites;
    if (static_cast<int>(shifts.site_cm1.size()) != n ||
        static_cast<int>(shifts.bond_cm1.size()) != n)
        throw std::invalid_argument("build_exciton_matrix: shift arrays must have one entry per site/bond");

    ExcitonMatrix m;
    m.k = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        m.k(i, i) = params.site_energy_baseline_cm1 + shifts.site_cm1[i];
    // bond i couples sites (i, i+1 mod n); even bonds are intra-dimer
    for (int i = 0; i < n; ++i) {
        const int j = (i + 1) % n;
        const double base = (i % 2 == 0) ? params.j1_intra_cm1 : params.j2_inter_cm1;
        m.k(i, j) = base + shifts.bond_cm1[i];
        m.k(j, i) = m.k(i, j);
    }
    // long-range terms from the clean geometry only
    for (int i = 0; i < n; ++i) {
        for (int j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue; // that pair is the wrap-around bond
            const double w = dipole_dipole_coupling(geom, i, j, params.dipole_constant_c);
            m.k(i, j) = w;
            m.k(j, i) = w;
        }
    }
    return m;
}

ExcitonMatrix build_exciton_matrix(const RingGeometry& geom, const CouplingParams& params) {
    DisorderShifts zero;
    zero.site_cm1.assign(geom.n_sites, 0.0);
    zero.bond_cm1.assign(geom.n_sites, 0.0);
    return build_exciton_matrix(geom, params, zero);
}

PhononBath build_phonon_bath(int n_modes, double omega0_cm1, double bandwidth_w,
                             double huang_rhys_s) {
    if (n_modes < 1)
        throw std::invalid_argument("build_phonon_bath: need at least one mode");
    if (bandwidth_w < 0.0 || bandwidth_w > 1.0)
        throw std::invalid_argument("build_phonon_bath: W must lie in [0,1]");
    if (huang_rhys_s < 0.0)
        throw std::invalid_argument("build_phonon_bath: S must be >= 0");
    if (omega0_cm1 <= 0.0)
        throw std::invalid_argument("build_phonon_bath: omega0 must be positive");

    PhononBath b;
    b.n_modes = n_modes;
    b.omega0_cm1 = omega0_cm1;
    b.bandwidth_w = bandwidth_w;
    b.huang_rhys_s = huang_rhys_s;
    b.q.resize(n_modes);
    b.omega_q_cm1.resize(n_modes);
    b.g_q.resize(n_modes);

    for (int i = 0; i < n_modes; ++i) {
        b.q[i] = (2.0 * units::pi / n_modes) * (-0.5 * n_modes + i + 1);
        b.omega_q_cm1[i] =
            omega0_cm1 + 2.0 * bandwidth_w * omega0_cm1 * (std::abs(b.q[i]) / units::pi - 0.5);
    }

    if (huang_rhys_s == 0.0) {
        for (auto& g : b.g_q) g = 0.0;
        return b;
    }

    const double half_band = bandwidth_w * omega0_cm1;
    if (bandwidth_w == 0.0) {
        // Einstein limit: the elliptic profile degenerates, so share the
        // coupling equally and apply the same sum rule.
        for (auto& g : b.g_q) g = 1.0;
    } else {
        for (int i = 0; i < n_modes; ++i) {
            const double d = b.omega_q_cm1[i] - omega0_cm1;
            const double under = half_band * half_band - d * d;
            b.g_q[i] = under > 0.0 ? std::sqrt(std::sqrt(under)) : 0.0; // g^2 ~ sqrt(...)
        }
    }

    // exact rescale to (1/N) sum g^2 omega = S omega0
    double sum = 0.0;
    for (int i = 0; i < n_modes; ++i) sum += b.g_q[i] * b.g_q[i] * b.omega_q_cm1[i];
    if (sum <= 0.0)
        throw std::runtime_error("build_phonon_bath: degenerate coupling profile");
    const double scale = std::sqrt(huang_rhys_s * omega0_cm1 * n_modes / sum);
    for (auto& g : b.g_q) g *= scale;
    return b;
}

} // namespace polaring

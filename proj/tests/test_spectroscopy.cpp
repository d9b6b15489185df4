#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "polaring/lineshape.hpp"
#include "polaring/rng.hpp"
#include "polaring/spectroscopy.hpp"
#include "polaring/units.hpp"
#include "support/fock_oracle.hpp"

using namespace polaring;
using polaring::testing::toy_ring;

namespace {

// adaptive Simpson quadrature of the integral definition of g(t):
// int_0^inf dw J(w)/w^2 [coth(w/2kT)(1-cos wt) + i(sin wt - wt)]
cplx g_quadrature(double t_fs, const BathLineshapeParams& p) {
    const double lam = p.lambda0_cm1 * units::cm1_to_radfs;
    const double gam = p.gamma0_cm1 * units::cm1_to_radfs;
    const double kbt = p.temperature_k * units::k_boltzmann_cm1 * units::cm1_to_radfs;
    auto integrand = [&](double w) -> cplx {
        const double j = 2.0 * lam * w * gam / (w * w + gam * gam);
        const double coth = 1.0 / std::tanh(0.5 * w / kbt);
        return j / (w * w) *
               cplx{coth * (1.0 - std::cos(w * t_fs)), std::sin(w * t_fs) - w * t_fs};
    };
    // composite Simpson on a dense grid; the integrand is smooth and
    // decays like 1/w^3
    const double w_max = 600.0 * gam + 50.0 / t_fs;
    const int n = 2000000;
    const double h = w_max / n;
    cplx acc = integrand(1e-9) + integrand(w_max);
    for (int i = 1; i < n; ++i) acc += integrand(i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return acc * (h / 3.0);
}

struct TwoLevel {
    DynamicsModel model;
    RingGeometry geom;
    AmplitudeTable table;
};

// single site with transition energy eps_cm1 and no phonon coupling
TwoLevel make_two_level(double eps_cm1, double span_fs, double step_fs) {
    ExcitonMatrix k;
    k.k = Eigen::MatrixXd::Constant(1, 1, eps_cm1);
    const PhononBath bath = build_phonon_bath(1, 1670.0, 0.0, 0.0);
    TwoLevel out{make_dynamics_model(k, bath), {}, {}};
    out.geom.n_sites = 1;
    out.geom.positions = {Eigen::Vector3d::Zero()};
    out.geom.dipoles = {Eigen::Vector3d(1, 0, 0)};
    IntegratorConfig integ;
    integ.dt_fs = 0.01;
    out.table = build_amplitude_table(out.model, -span_fs, 3.0 * span_fs, step_fs, integ);
    return out;
}

} // namespace

TEST_CASE("lineshape: g(0) = 0 and lambda0 = 0 shuts broadening off") {
    BathLineshapeParams p;
    const cplx g0 = lineshape_g(0.0, p);
    CHECK(std::abs(g0) < 1e-14);

    BathLineshapeParams off;
    off.lambda0_cm1 = 0.0;
    for (double t : {0.0, 10.0, 200.0}) CHECK(std::abs(lineshape_g(t, off)) == 0.0);
    const auto f = lineshape_factors(13.0, 7.0, 29.0, off);
    CHECK(std::abs(f.f1 - 1.0) < 1e-14);
    CHECK(std::abs(f.f2 - 1.0) < 1e-14);
    CHECK(std::abs(f.f3 - 1.0) < 1e-14);
    CHECK(std::abs(f.f4 - 1.0) < 1e-14);
}

TEST_CASE("lineshape: real part grows monotonically with a soft takeoff") {
    BathLineshapeParams p;
    double prev = 0.0;
    for (double t = 0.0; t <= 300.0; t += 1.0) {
        const cplx g = lineshape_g(t, p);
        CHECK(g.real() >= prev - 1e-12);
        prev = g.real();
    }
    // quadratic onset: the slope at 0+ vanishes
    const double d1 = lineshape_g(0.01, p).real() / 0.01;
    const double d2 = lineshape_g(1.0, p).real() / 1.0;
    CHECK(d1 < 0.1 * d2);
}

TEST_CASE("lineshape: long-time imaginary slope is the reorganization energy") {
    BathLineshapeParams p;
    const double lam_rad = p.lambda0_cm1 * units::cm1_to_radfs;
    const double slope =
        (lineshape_g(400.0, p).imag() - lineshape_g(380.0, p).imag()) / 20.0;
    CHECK(slope == doctest::Approx(-lam_rad).epsilon(1e-6));
}

TEST_CASE("lineshape matches the quadrature oracle at the published point") {
    BathLineshapeParams p; // 100 cm^-1, 35 cm^-1, 77 K
    const cplx closed = lineshape_g(100.0, p);
    const cplx quad = g_quadrature(100.0, p);
    CHECK(std::abs(closed - quad) / std::abs(quad) < 1e-6);
}

TEST_CASE("lineshape factors: unity at the origin, bounded modulus") {
    BathLineshapeParams p;
    const auto f0 = lineshape_factors(0.0, 0.0, 0.0, p);
    CHECK(std::abs(f0.f1 - 1.0) < 1e-12);
    CHECK(std::abs(f0.f4 - 1.0) < 1e-12);
    for (double tau : {5.0, 40.0}) {
        for (double tw : {0.0, 25.0}) {
            for (double t : {3.0, 60.0}) {
                const auto f = lineshape_factors(tau, tw, t, p);
                CHECK(std::abs(f.f1) <= 1.0 + 1e-12);
                CHECK(std::abs(f.f2) <= 1.0 + 1e-12);
                CHECK(std::abs(f.f3) <= 1.0 + 1e-12);
                CHECK(std::abs(f.f4) <= 1.0 + 1e-12);
            }
        }
    }
}

TEST_CASE("lineshape factors: F4 is the tau-conjugated mirror of F1") {
    BathLineshapeParams p;
    const double tau = 17.0, tw = 9.0, t = 23.0;
    const cplx g_t = lineshape_g(t, p);
    const cplx g_tau = lineshape_g(tau, p);
    const cplx g_tw = lineshape_g(tw, p);
    const cplx g_twt = lineshape_g(tw + t, p);
    const cplx g_tautw = lineshape_g(tau + tw, p);
    const cplx g_all = lineshape_g(tau + tw + t, p);
    // F1 with the tau-bearing arguments conjugated ...
    const cplx f1_tilde = std::exp(-std::conj(g_t) - std::conj(g_tau) - std::conj(g_tw) +
                                   std::conj(g_twt) + std::conj(g_tautw) - std::conj(g_all));
    // ... conjugates into the printed F4
    const auto f = lineshape_factors(tau, tw, t, p);
    CHECK(std::abs(std::conj(f1_tilde) - f.f4) < 1e-14);
}

TEST_CASE("orientation factor: parallel, orthogonal, and Monte-Carlo oracle") {
    std::vector<Eigen::Vector3d> same(4, Eigen::Vector3d(0, 0, 1));
    CHECK(orientation_factor(same, 0, 1, 2, 3) == doctest::Approx(0.2));

    // all three pairings vanish for mutually orthogonal pairs
    std::vector<Eigen::Vector3d> ortho{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 0}};
    CHECK(orientation_factor(ortho, 0, 1, 2, 0) == doctest::Approx(0.0));
    std::vector<Eigen::Vector3d> mixed{{1, 0, 0}, {0, 1, 0}, {0, 0, 1},
                                       Eigen::Vector3d(1, 1, 1).normalized()};
    const double direct = orientation_factor(mixed, 0, 1, 2, 3);

    // isotropic average of (e.mu_m)(e.mu_m1)(e.mu_m2)(e.mu_m3) over lab
    // orientations, same polarization for all four interactions
    PhiloxRng rng(999, 0, 0);
    double acc = 0.0;
    const int n_mc = 4000000;
    for (int i = 0; i < n_mc; ++i) {
        // uniform direction via normalized Gaussian triple
        Eigen::Vector3d e(rng.normal(), rng.normal(), rng.normal());
        e.normalize();
        acc += e.dot(mixed[0]) * e.dot(mixed[1]) * e.dot(mixed[2]) * e.dot(mixed[3]);
    }
    acc /= n_mc;
    CHECK(std::abs(direct - acc) < 1e-3);
}

TEST_CASE("amplitude table: identity at t = 0 and C8 covariance") {
    const RingGeometry g = build_geometry();
    const auto model = make_dynamics_model(build_exciton_matrix(g, CouplingParams{}),
                                           build_phonon_bath(16, 1670.0, 0.5, 0.5));
    IntegratorConfig integ;
    const AmplitudeTable table = build_amplitude_table(model, -8.0, 24.0, 4.0, integ);
    const int zero = table.index(0.0);
    for (int m = 0; m < 16; ++m)
        for (int n = 0; n < 16; ++n) {
            const cplx a = table.alpha[zero][m * 16 + n];
            CHECK(std::abs(a - (m == n ? cplx{1.0, 0.0} : cplx{0.0, 0.0})) < 1e-12);
        }
    // covariance: alpha_{m1,m}(t) = alpha_{m1+2,m+2}(t)
    const int snap = table.index(20.0);
    for (int m = 0; m < 16; ++m)
        for (int n = 0; n < 16; ++n) {
            const cplx a = table.alpha[snap][m * 16 + n];
            const cplx b = table.alpha[snap][((m + 2) % 16) * 16 + (n + 2) % 16];
            CHECK(std::abs(a - b) < 1e-9);
        }
    CHECK_THROWS(table.index(21.0));  // off the snapshot grid
    CHECK_THROWS(table.index(400.0)); // outside the span
}

TEST_CASE("amplitude table matches the matrix-exponential oracle at S = 0") {
    const RingGeometry g = build_geometry();
    const ExcitonMatrix k = build_exciton_matrix(g, CouplingParams{});
    const auto model = make_dynamics_model(k, build_phonon_bath(16, 1670.0, 0.5, 0.0));
    IntegratorConfig integ;
    const AmplitudeTable table = build_amplitude_table(model, -12.0, 24.0, 4.0, integ);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k.k * units::cm1_to_radfs);
    for (double t : {-12.0, 8.0, 24.0}) {
        Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(16, 16);
        for (int i = 0; i < 16; ++i)
            u += std::exp(cplx{0.0, -es.eigenvalues()(i) * t}) *
                 (es.eigenvectors().col(i) * es.eigenvectors().col(i).transpose()).cast<cplx>();
        const int snap = table.index(t);
        for (int m = 0; m < 16; ++m)
            for (int n = 0; n < 16; ++n)
                CHECK(std::abs(table.alpha[snap][m * 16 + n] - u(n, m)) < 1e-9);
    }
}

TEST_CASE("two-level response functions take the closed textbook form") {
    const double eps_cm1 = -1000.0;
    const double eps_rad = eps_cm1 * units::cm1_to_radfs;
    TwoLevel sys = make_two_level(eps_cm1, 40.0, 4.0);
    BathLineshapeParams off;
    off.lambda0_cm1 = 0.0;

    ResponseGridSpec grid;
    grid.tau_max_fs = 40.0;
    grid.t_max_fs = 40.0;
    grid.step_fs = 4.0;
    const ResponseGrid r = response_functions(sys.table, sys.geom, off, 0.0, grid);

    const int n_t = static_cast<int>(r.t_fs.size());
    for (std::size_t it = 0; it < r.tau_fs.size(); ++it) {
        for (int jt = 0; jt < n_t; ++jt) {
            const double tau = r.tau_fs[it], t = r.t_fs[jt];
            // C-bar = 1/5 for four identical unit dipoles
            const cplx r3_expected =
                0.2 * std::exp(cplx{0.0, eps_rad * tau}) * std::exp(cplx{0.0, -eps_rad * t});
            const cplx r1_expected =
                0.2 * std::exp(cplx{0.0, -eps_rad * tau}) * std::exp(cplx{0.0, -eps_rad * t});
            const std::size_t cell = it * n_t + jt;
            CHECK(std::abs(r.r3[cell] - r3_expected) < 1e-8);
            CHECK(std::abs(r.r2[cell] - r3_expected) < 1e-8);
            CHECK(std::abs(r.r1[cell] - r1_expected) < 1e-8);
            CHECK(std::abs(r.r4[cell] - r1_expected) < 1e-8);
        }
    }
}

TEST_CASE("bare-exciton trimer matches the sum-over-eigenstates oracle") {
    ExcitonMatrix k = toy_ring(3, 380.0);
    k.k(0, 0) = -120.0; // a little site-energy structure
    k.k(1, 1) = 45.0;
    const auto model = make_dynamics_model(k, build_phonon_bath(3, 1670.0, 0.5, 0.0));
    RingGeometry geom;
    geom.n_sites = 3;
    geom.positions = {Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(10, 0, 0),
                      Eigen::Vector3d(0, 10, 0)};
    geom.dipoles = {Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0.6, 0.8, 0),
                    Eigen::Vector3d(0, 0, 1)};

    IntegratorConfig integ;
    const AmplitudeTable table = build_amplitude_table(model, -30.0, 90.0, 3.0, integ);
    BathLineshapeParams off;
    off.lambda0_cm1 = 0.0;
    ResponseGridSpec grid;
    grid.tau_max_fs = 30.0;
    grid.t_max_fs = 30.0;
    grid.step_fs = 3.0;
    const double tw = 9.0;
    const ResponseGrid r = response_functions(table, geom, off, tw, grid);

    // oracle: alpha_{m1 m}(t) = sum_e psi_e(m1) psi_e(m) e^{-i E_e t}
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k.k * units::cm1_to_radfs);
    auto amp = [&](int m1, int m, double t) {
        cplx acc{0.0, 0.0};
        for (int e = 0; e < 3; ++e)
            acc += es.eigenvectors()(m1, e) * es.eigenvectors()(m, e) *
                   std::exp(cplx{0.0, -es.eigenvalues()(e) * t});
        return acc;
    };
    auto cbar = [&](int m, int m1, int m2, int m3) {
        return orientation_factor(geom.dipoles, m, m1, m2, m3);
    };
    const int n_t = static_cast<int>(r.t_fs.size());
    double worst = 0.0;
    for (std::size_t it = 0; it < r.tau_fs.size(); ++it) {
        for (int jt = 0; jt < n_t; ++jt) {
            const double tau = r.tau_fs[it], t = r.t_fs[jt];
            cplx o1{0, 0}, o2{0, 0}, o3{0, 0}, o4{0, 0};
            for (int m = 0; m < 3; ++m)
                for (int m1 = 0; m1 < 3; ++m1)
                    for (int m2 = 0; m2 < 3; ++m2)
                        for (int m3 = 0; m3 < 3; ++m3) {
                            const double c = cbar(m, m1, m2, m3);
                            o1 += c * std::conj(amp(m1, m, tw)) * amp(m2, m3, tau + tw + t);
                            o2 += c * std::conj(amp(m1, m, tau + tw)) * amp(m2, m3, tw + t);
                            o3 += c * std::conj(amp(m1, m, tau)) * amp(m2, m3, t);
                            o4 += c * std::conj(amp(m1, m, -t)) * amp(m2, m3, tau);
                        }
            const std::size_t cell = it * n_t + jt;
            worst = std::max(worst, std::abs(r.r1[cell] - o1));
            worst = std::max(worst, std::abs(r.r2[cell] - o2));
            worst = std::max(worst, std::abs(r.r3[cell] - o3));
            worst = std::max(worst, std::abs(r.r4[cell] - o4));
        }
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("two-level spectrum peaks on the diagonal at the transition energy") {
    const double eps_cm1 = -1000.0; // about -0.6 omega0
    TwoLevel sys = make_two_level(eps_cm1, 200.0, 2.0);
    BathLineshapeParams p; // physical broadening so the FT is well behaved

    ResponseGridSpec grid;
    grid.tau_max_fs = 200.0;
    grid.t_max_fs = 200.0;
    grid.step_fs = 2.0;
    const ResponseGrid r = response_functions(sys.table, sys.geom, p, 0.0, grid);
    const double omega0_rad = 1670.0 * units::cm1_to_radfs;
    const Spectrum2D spec = spectrum_2d(r, omega0_rad, 4);

    const int m = static_cast<int>(spec.omega.size());
    auto locate_peak = [&](const std::vector<double>& surf) {
        int bi = 0, bj = 0;
        double best = -1e300;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                if (surf[static_cast<std::size_t>(i) * m + j] > best) {
                    best = surf[static_cast<std::size_t>(i) * m + j];
                    bi = i;
                    bj = j;
                }
        return std::array<double, 3>{spec.omega[bi], spec.omega[bj], best};
    };
    const double expected = eps_cm1 / 1670.0;
    for (const auto* surf : {&spec.rephasing, &spec.nonrephasing, &spec.total}) {
        const auto [w_tau, w_t, peak] = locate_peak(*surf);
        CHECK(peak > 0.0);
        CHECK(w_tau == doctest::Approx(expected).epsilon(0.03));
        CHECK(w_t == doctest::Approx(expected).epsilon(0.03));
    }

    const auto line = linear_absorption(spec);
    double best_w = 0.0, best_v = -1e300;
    for (const auto& [w, v] : line)
        if (v > best_v) {
            best_v = v;
            best_w = w;
        }
    CHECK(best_v == doctest::Approx(1.0));
    CHECK(best_w == doctest::Approx(expected).epsilon(0.03));
    CHECK(fwhm(line) > 0.0);
}

TEST_CASE("zero-delay response dominates the clean-ring grid") {
    const RingGeometry g = build_geometry();
    const auto model = make_dynamics_model(build_exciton_matrix(g, CouplingParams{}),
                                           build_phonon_bath(16, 1670.0, 0.5, 0.5));
    IntegratorConfig integ;
    const AmplitudeTable table = build_amplitude_table(model, -48.0, 96.0, 8.0, integ);
    BathLineshapeParams p;
    ResponseGridSpec grid;
    grid.tau_max_fs = 48.0;
    grid.t_max_fs = 48.0;
    grid.step_fs = 8.0;
    const ResponseGrid r = response_functions(table, g, p, 0.0, grid);
    auto mag = [](const cplx& z) { return std::abs(z); };
    const double at_zero = mag(r.r1[0]) + mag(r.r2[0]) + mag(r.r3[0]) + mag(r.r4[0]);
    for (std::size_t i = 1; i < r.r1.size(); ++i)
        CHECK(at_zero >= mag(r.r1[i]) + mag(r.r2[i]) + mag(r.r3[i]) + mag(r.r4[i]) - 1e-9);
}

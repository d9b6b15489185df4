#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "polaring/observables.hpp"
#include "polaring/rng.hpp"
#include "polaring/statics.hpp"
#include "polaring/units.hpp"

using namespace polaring;

namespace {

D1State random_state(int n, int nq, double lambda_scale, std::uint64_t seed) {
    PhiloxRng rng(seed, 0, 0);
    D1State st;
    st.n_sites = n;
    st.n_modes = nq;
    st.alpha.resize(n);
    st.lambda.resize(static_cast<std::size_t>(n) * nq);
    double norm = 0.0;
    for (auto& a : st.alpha) {
        a = {rng.normal(), rng.normal()};
        norm += std::norm(a);
    }
    for (auto& a : st.alpha) a /= std::sqrt(norm);
    for (auto& l : st.lambda) l = {lambda_scale * rng.normal(), lambda_scale * rng.normal()};
    return st;
}

// smallest eigenvalue of a Hermitian matrix via the real 2N embedding
double min_eigenvalue(const Eigen::MatrixXcd& h) {
    const int n = static_cast<int>(h.rows());
    Eigen::MatrixXd big(2 * n, 2 * n);
    big << h.real(), -h.imag(), h.imag(), h.real();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(big);
    return es.eigenvalues()(0);
}

} // namespace

TEST_CASE("reduced density: undisplaced bath gives a rank-1 projector") {
    D1State st = random_state(8, 8, 0.0, 3);
    const auto rho = reduced_density(st);
    // rho = alpha^* alpha^T, pure state
    const Eigen::MatrixXcd sq = rho.rho * rho.rho;
    CHECK((sq - rho.rho).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(rho.trace() - 1.0) < 1e-12);
}

TEST_CASE("reduced density: hermitian, positive semidefinite, unit trace") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull}) {
        const D1State st = random_state(10, 6, 0.6, seed);
        const auto rho = reduced_density(st);
        CHECK((rho.rho - rho.rho.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(min_eigenvalue(rho.rho) > -1e-10);
        CHECK(rho.trace() <= 1.0 + 1e-9);
        for (int n = 0; n < 10; ++n)
            CHECK(rho.rho(n, n).real() == doctest::Approx(std::norm(st.alpha[n])));
    }
}

TEST_CASE("coherence size: the three textbook density matrices") {
    const int n = 16;
    ReducedDensityMatrix rho;
    rho.rho = Eigen::MatrixXcd::Zero(n, n);
    rho.rho(5, 5) = 1.0; // localized pure state
    CHECK(coherence_size(rho) == doctest::Approx(1.0 / n));

    rho.rho = Eigen::MatrixXcd::Identity(n, n) / static_cast<double>(n);
    CHECK(coherence_size(rho) == doctest::Approx(1.0));

    rho.rho = Eigen::MatrixXcd::Constant(n, n, 1.0 / n);
    CHECK(coherence_size(rho) == doctest::Approx(static_cast<double>(n)));
}

TEST_CASE("coherence size bounds hold for random states") {
    for (std::uint64_t seed : {7ull, 8ull, 9ull}) {
        const auto rho = reduced_density(random_state(16, 16, 0.5, seed));
        const double lc = coherence_size(rho);
        CHECK(lc >= 1.0 / 16 - 1e-12);
        CHECK(lc <= 16.0 + 1e-12);
    }
    ReducedDensityMatrix zero;
    zero.rho = Eigen::MatrixXcd::Zero(4, 4);
    CHECK_THROWS(coherence_size(zero));
}

TEST_CASE("inverse population ratio: both printed and squared variants") {
    const int n = 16;
    ReducedDensityMatrix rho;
    rho.rho = Eigen::MatrixXcd::Zero(n, n);
    rho.rho(2, 2) = 1.0;
    CHECK(inverse_population_ratio(rho, IprExponent::squared) == doctest::Approx(1.0));
    CHECK(inverse_population_ratio(rho, IprExponent::printed_fourth) == doctest::Approx(1.0));

    rho.rho = Eigen::MatrixXcd::Identity(n, n) / static_cast<double>(n);
    CHECK(inverse_population_ratio(rho, IprExponent::squared) == doctest::Approx(n));
    CHECK(inverse_population_ratio(rho, IprExponent::printed_fourth) ==
          doctest::Approx(std::pow(n, 3)));

    rho.rho = Eigen::MatrixXcd::Zero(n, n);
    rho.rho(0, 0) = 0.5;
    rho.rho(1, 1) = 0.5;
    CHECK(inverse_population_ratio(rho, IprExponent::squared) == doctest::Approx(2.0));

    // trace renormalization keeps the measure meaningful for open systems
    rho.rho *= 0.37;
    CHECK(inverse_population_ratio(rho, IprExponent::squared) == doctest::Approx(2.0));
}

TEST_CASE("superradiance: localized state decays like a single dipole") {
    const RingGeometry g = build_geometry();
    ReducedDensityMatrix rho;
    rho.rho = Eigen::MatrixXcd::Zero(16, 16);
    rho.rho(3, 3) = 1.0;
    CHECK(superradiance_factor(rho, g.dipoles) == doctest::Approx(1.0));
}

TEST_CASE("superradiance: dark ground state and bright doublet of the clean ring") {
    const RingGeometry g = build_geometry();
    const auto r = diagonalize(build_exciton_matrix(g, CouplingParams{}));
    auto state_ls = [&](const Eigen::VectorXd& v) {
        ReducedDensityMatrix rho;
        rho.rho = (v * v.transpose()).cast<cplx>();
        return superradiance_factor(rho, g.dipoles);
    };
    CHECK(state_ls(r.vectors.col(0)) < 0.01); // lowest state is dark
    // the degenerate doublet above it carries nearly the whole ring
    // oscillator strength
    CHECK(state_ls(r.vectors.col(1)) == doctest::Approx(7.966).epsilon(0.01));
    CHECK(state_ls(r.vectors.col(2)) == doctest::Approx(7.966).epsilon(0.01));

    // the optically prepared superradiant states (dipole-projected) carry
    // exactly N/2 by the ring's rotational symmetry
    for (const Eigen::Vector3d e :
         {Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 1, 0),
          Eigen::Vector3d(std::sqrt(0.5), std::sqrt(0.5), 0)}) {
        Eigen::VectorXd b(16);
        for (int n = 0; n < 16; ++n) b(n) = g.dipoles[n].dot(e);
        b.normalize();
        CHECK(state_ls(b) == doctest::Approx(8.0).epsilon(1e-10));
    }
}

TEST_CASE("momentum populations: point state, plane wave, and sum rule") {
    const PhononBath bath = build_phonon_bath(16, 1670.0, 0.5, 0.5);
    ReducedDensityMatrix rho;
    rho.rho = Eigen::MatrixXcd::Zero(16, 16);
    rho.rho(6, 6) = 1.0;
    auto nk = momentum_populations(rho, bath.q);
    for (double v : nk) CHECK(v == doctest::Approx(1.0 / 16));

    // plane wave at a grid momentum
    const double k0 = bath.q[3];
    Eigen::VectorXcd pw(16);
    for (int n = 0; n < 16; ++n) pw(n) = std::exp(cplx{0.0, k0 * n}) / 4.0;
    rho.rho = pw * pw.adjoint();
    nk = momentum_populations(rho, bath.q);
    for (int i = 0; i < 16; ++i)
        CHECK(nk[i] == doctest::Approx(i == 3 ? 1.0 : 0.0).epsilon(1e-10));

    const auto st = random_state(16, 16, 0.4, 12);
    const auto rho2 = reduced_density(st);
    nk = momentum_populations(rho2, bath.q);
    double sum = 0.0;
    for (double v : nk) {
        CHECK(v > -1e-10);
        sum += v;
    }
    CHECK(sum == doctest::Approx(rho2.trace()).epsilon(1e-9));
}

TEST_CASE("phonon displacement: zero field and the single-mode collapse") {
    const PhononBath bath16 = build_phonon_bath(16, 1670.0, 0.5, 0.5);
    D1State st = random_state(16, 16, 0.0, 5);
    auto xi = phonon_displacement(st, bath16.q);
    for (double v : xi) CHECK(v == 0.0);

    const PhononBath bath1 = build_phonon_bath(1, 1670.0, 0.0, 0.5);
    D1State one = make_localized_state(1, 1, 0);
    one.lambda[0] = {0.37, 0.0};
    xi = phonon_displacement(one, bath1.q);
    CHECK(xi[0] == doctest::Approx(0.37).epsilon(1e-12));
}

TEST_CASE("observables are invariant under a global phase") {
    const RingGeometry g = build_geometry();
    const PhononBath bath = build_phonon_bath(16, 1670.0, 0.5, 0.5);
    D1State st = random_state(16, 16, 0.5, 21);
    D1State rotated = st;
    const cplx phase = std::exp(cplx{0.0, 1.2345});
    for (auto& a : rotated.alpha) a *= phase;

    const auto rho_a = reduced_density(st);
    const auto rho_b = reduced_density(rotated);
    CHECK(std::abs(coherence_size(rho_a) - coherence_size(rho_b)) < 1e-12);
    CHECK(std::abs(inverse_population_ratio(rho_a) - inverse_population_ratio(rho_b)) < 1e-12);
    CHECK(std::abs(superradiance_factor(rho_a, g.dipoles) -
                   superradiance_factor(rho_b, g.dipoles)) < 1e-12);
    const auto nk_a = momentum_populations(rho_a, bath.q);
    const auto nk_b = momentum_populations(rho_b, bath.q);
    for (int i = 0; i < 16; ++i) CHECK(std::abs(nk_a[i] - nk_b[i]) < 1e-12);
    const auto xi_a = phonon_displacement(st, bath.q);
    const auto xi_b = phonon_displacement(rotated, bath.q);
    for (int i = 0; i < 16; ++i) CHECK(std::abs(xi_a[i] - xi_b[i]) < 1e-12);
}

TEST_CASE("msd: zero at the initial site and capped by the diameter") {
    const RingGeometry g = build_geometry();
    const auto d = chord_distances_nm(g, 8);
    CHECK(d[8] == 0.0);
    double dmax = 0.0;
    for (double v : d) dmax = std::max(dmax, v);
    CHECK(dmax <= 2.0 * 2.3 + 1e-12); // diameter in nm

    ReducedDensityMatrix rho;
    rho.rho = Eigen::MatrixXcd::Zero(16, 16);
    rho.rho(8, 8) = 1.0;
    CHECK(msd_nm2(rho, d) == 0.0);
}

TEST_CASE("msd power-law fit recovers synthetic exponents") {
    std::vector<double> t, m1, m2;
    for (double x = 0.2; x <= 40.0; x += 0.2) {
        t.push_back(x);
        m1.push_back(0.033 * std::pow(x, 2.0));
        m2.push_back(0.7 * std::pow(x, 0.62));
    }
    const auto f1 = fit_msd_power_law(t, m1);
    const auto f2 = fit_msd_power_law(t, m2);
    CHECK(f1.gamma_exponent == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(f1.mobility_d == doctest::Approx(0.033).epsilon(1e-10));
    CHECK(f2.gamma_exponent == doctest::Approx(0.62).epsilon(1e-10));

    std::vector<double> short_t{20.0, 30.0};
    std::vector<double> short_m{1.0, 2.0};
    CHECK_THROWS(fit_msd_power_law(short_t, short_m)); // window not covered
}

TEST_CASE("series recorder: sum rules along a real trajectory") {
    const RingGeometry g = build_geometry();
    DisorderSpec spec;
    spec.sigma_e_cm1 = 100.0;
    spec.seed = 77;
    const auto k = build_exciton_matrix(g, CouplingParams{}, sample_disorder(spec, 16));
    const auto model = make_dynamics_model(k, build_phonon_bath(16, 1670.0, 0.5, 0.5));

    D1State st = make_localized_state(16, 16, 8);
    IntegratorConfig cfg;
    cfg.t_max_fs = 50.0;
    cfg.record_stride = 50;
    SeriesRecorder rec(model, &g, 8);
    propagate(model, st, cfg, std::ref(rec));
    const ObservableSeries s = rec.series();

    REQUIRE(s.n_times() >= 10);
    CHECK(s.msd_nm2.front() == 0.0);
    CHECK(s.lc.front() == doctest::Approx(1.0 / 16));
    for (std::size_t ti = 0; ti < s.n_times(); ++ti) {
        double nk_sum = 0.0, pop_sum = 0.0;
        for (int i = 0; i < 16; ++i) {
            nk_sum += s.n_k[ti * 16 + i];
            pop_sum += s.population[ti * 16 + i];
        }
        CHECK(std::abs(nk_sum - pop_sum) < 1e-9);
        CHECK(std::abs(s.p_sink[ti] + pop_sum - 1.0) < 1e-6);
        // closed run: sink probability stays at numerical zero
        CHECK(std::abs(s.p_sink[ti]) < 1e-6);
        CHECK(std::abs(s.e_ex[ti] + s.e_bath[ti] + s.e_int[ti] - s.e_total[ti]) < 1e-9);
    }
}

TEST_CASE("steady-state summary averages the window and validates input") {
    ObservableSeries s;
    for (int i = 0; i <= 300; ++i) {
        s.times_fs.push_back(i);
        s.lc.push_back(i < 150 ? 10.0 : 4.0);
        s.ipr_rho.push_back(6.0);
    }
    const auto ss = steady_state_summary(s, 150.0, 300.0, 271.0);
    CHECK(ss.assc == doctest::Approx(4.0));
    CHECK(ss.ass_ipr == doctest::Approx(6.0));
    CHECK(ss.sigma_over_j == doctest::Approx(0.5));
    CHECK_THROWS(steady_state_summary(s, 150.0, 400.0, 100.0));
}

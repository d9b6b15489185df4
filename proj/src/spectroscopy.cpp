#include "polaring/spectroscopy.hpp"

#include <fftw3.h>

#include <atomic>
#include <cmath>
#include <cstring>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "polaring/fastmath.hpp"
#include "polaring/units.hpp"

namespace polaring {

double orientation_factor(const std::vector<Eigen::Vector3d>& dipoles, int m, int m1, int m2,
                          int m3) {
    const auto& d = dipoles;
    return (d[m].dot(d[m1]) * d[m2].dot(d[m3]) + d[m].dot(d[m2]) * d[m1].dot(d[m3]) +
            d[m].dot(d[m3]) * d[m1].dot(d[m2])) /
           15.0;
}

int AmplitudeTable::index(double t_fs) const {
    const double x = (t_fs - t_min_fs) / dt_fs;
    const int i = static_cast<int>(std::llround(x));
    if (i < 0 || i >= n_times || std::abs(x - i) > 1e-6)
        throw std::invalid_argument("AmplitudeTable: time off the snapshot grid");
    return i;
}

namespace {

// one RK4 trajectory, snapshots written straight into the table
void propagate_into_table(const DynamicsModel& model, int initial_site, double dt_fs,
                          int steps_per_snap, int snap_lo, int snap_hi, int snap_zero,
                          AmplitudeTable& table) {
    const int n = model.n_sites;
    const int nq = model.n_modes;
    const int p_count = n * n;
    const std::size_t dim = static_cast<std::size_t>(n) + static_cast<std::size_t>(n) * nq;

    std::vector<cplx> y(dim), k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
    EomWorkspace ws;

    auto store = [&](int snap, const std::vector<cplx>& state) {
        const cplx* alpha = state.data();
        const cplx* lambda = state.data() + n;
        double norm = 0.0;
        for (int i = 0; i < n; ++i) norm += std::norm(alpha[i]);
        if (std::abs(norm - 1.0) > 1e-6)
            throw std::runtime_error("build_amplitude_table: norm drift beyond 1e-6");
        auto& lam_t = table.lambda_t[snap];
        auto& pref = table.pref[snap];
        auto& alph = table.alpha[snap];
        for (int site = 0; site < n; ++site) {
            const int p = initial_site * n + site;
            alph[p] = alpha[site];
            const cplx* ls = lambda + static_cast<std::size_t>(site) * nq;
            double h = 0.0;
            for (int q = 0; q < nq; ++q) {
                lam_t[static_cast<std::size_t>(q) * p_count + p] = ls[q];
                h += std::norm(ls[q]);
            }
            pref[p] = alpha[site] * std::exp(-0.5 * h);
        }
    };

    auto rhs = [&](std::vector<cplx>& in, std::vector<cplx>& out) {
        eom_rhs(model, in.data(), in.data() + n, out.data(), out.data() + n, ws);
    };
    auto rk4_step = [&](double dt) {
        rhs(y, k1);
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
        rhs(tmp, k2);
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
        rhs(tmp, k3);
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + dt * k3[i];
        rhs(tmp, k4);
        for (std::size_t i = 0; i < dim; ++i)
            y[i] += (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    };

    auto reset = [&] {
        std::fill(y.begin(), y.end(), cplx{0.0, 0.0});
        y[initial_site] = {1.0, 0.0};
    };

    // forward sweep from t = 0
    reset();
    store(snap_zero, y);
    for (int snap = snap_zero + 1; snap <= snap_hi; ++snap) {
        for (int s = 0; s < steps_per_snap; ++s) rk4_step(dt_fs);
        store(snap, y);
    }
    // backward sweep for negative times
    reset();
    for (int snap = snap_zero - 1; snap >= snap_lo; --snap) {
        for (int s = 0; s < steps_per_snap; ++s) rk4_step(-dt_fs);
        store(snap, y);
    }
}

} // namespace

AmplitudeTable build_amplitude_table(const DynamicsModel& model, double t_min_fs,
                                     double t_max_fs, double snapshot_dt_fs,
                                     const IntegratorConfig& integ, int n_threads) {
    if (t_min_fs > 0.0 || t_max_fs <= 0.0)
        throw std::invalid_argument("build_amplitude_table: grid must bracket t = 0");
    const int steps_per_snap = static_cast<int>(std::llround(snapshot_dt_fs / integ.dt_fs));
    if (steps_per_snap < 1 ||
        std::abs(steps_per_snap * integ.dt_fs - snapshot_dt_fs) > 1e-9)
        throw std::invalid_argument("build_amplitude_table: dt must divide the snapshot spacing");

    AmplitudeTable t;
    t.n_sites = model.n_sites;
    t.n_modes = model.n_modes;
    t.omega_rad = model.omega_rad;
    t.dt_fs = snapshot_dt_fs;
    const int snaps_back = static_cast<int>(std::llround(-t_min_fs / snapshot_dt_fs));
    const int snaps_fwd = static_cast<int>(std::llround(t_max_fs / snapshot_dt_fs));
    t.t_min_fs = -snaps_back * snapshot_dt_fs;
    t.t_max_fs = snaps_fwd * snapshot_dt_fs;
    t.n_times = snaps_back + snaps_fwd + 1;

    const int p_count = model.n_sites * model.n_sites;
    t.lambda_t.assign(t.n_times, std::vector<cplx>(static_cast<std::size_t>(model.n_modes) * p_count));
    t.pref.assign(t.n_times, std::vector<cplx>(p_count));
    t.alpha.assign(t.n_times, std::vector<cplx>(p_count));

    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::string error_text;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const int site = next.fetch_add(1);
            if (site >= model.n_sites || failed.load()) break;
            try {
                propagate_into_table(model, site, integ.dt_fs, steps_per_snap, 0,
                                     t.n_times - 1, snaps_back, t);
            } catch (const std::exception& e) {
                std::scoped_lock lock(error_mutex);
                failed.store(true);
                error_text = e.what();
            }
        }
    };
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failed.load()) throw std::runtime_error(error_text);
    return t;
}

void ResponseGrid::accumulate(const ResponseGrid& other) {
    auto add = [](std::vector<cplx>& a, const std::vector<cplx>& b) {
        if (a.empty()) a.assign(b.size(), cplx{0.0, 0.0});
        for (std::size_t i = 0; i < b.size(); ++i) a[i] += b[i];
    };
    if (tau_fs.empty()) {
        tau_fs = other.tau_fs;
        t_fs = other.t_fs;
        t_w_fs = other.t_w_fs;
    }
    add(r1, other.r1);
    add(r2, other.r2);
    add(r3, other.r3);
    add(r4, other.r4);
}

void ResponseGrid::scale(double f) {
    for (auto* v : {&r1, &r2, &r3, &r4})
        for (auto& z : *v) z *= f;
}

namespace {

struct PairWeights {
    std::vector<double> w; // [P*P]
    int p = 0;
};

PairWeights make_pair_weights(const RingGeometry& geom) {
    const int n = geom.n_sites;
    PairWeights pw;
    pw.p = n * n;
    pw.w.resize(static_cast<std::size_t>(pw.p) * pw.p);
    Eigen::MatrixXd dot(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) dot(i, j) = geom.dipoles[i].dot(geom.dipoles[j]);
    // u = m*N + m1 (bra), v = m3*N + m2 (ket)
    for (int m = 0; m < n; ++m)
        for (int m1 = 0; m1 < n; ++m1)
            for (int m3 = 0; m3 < n; ++m3)
                for (int m2 = 0; m2 < n; ++m2) {
                    const double c = (dot(m, m1) * dot(m2, m3) + dot(m, m2) * dot(m1, m3) +
                                      dot(m, m3) * dot(m1, m2)) /
                                     15.0;
                    pw.w[static_cast<std::size_t>(m * n + m1) * pw.p + (m3 * n + m2)] = c;
                }
    return pw;
}

// Sum over bra/ket pairs of pref_u^* W_uv pref_v exp(sum_q conj(lamA) lamB phase).
// `bra_lam` already carries the phase factor and conjugation.
cplx contract_pairs(int p_count, int nq, const cplx* bra_lam, const cplx* bra_pref,
                    const cplx* ket_lam, const cplx* ket_pref, const double* w,
                    bool overlap_trivial) {
    thread_local std::vector<cplx> x_row, e_row;
    thread_local std::vector<double> xr, xi;
    x_row.resize(p_count);
    e_row.resize(p_count);
    xr.resize(p_count);
    xi.resize(p_count);

    cplx acc{0.0, 0.0};
    for (int u = 0; u < p_count; ++u) {
        const cplx pu = std::conj(bra_pref[u]);
        if (pu == cplx{0.0, 0.0}) continue;
        const double* wrow = w + static_cast<std::size_t>(u) * p_count;
        if (overlap_trivial) {
            cplx s{0.0, 0.0};
            for (int v = 0; v < p_count; ++v) s += wrow[v] * ket_pref[v];
            acc += pu * s;
            continue;
        }
        std::fill(x_row.begin(), x_row.end(), cplx{0.0, 0.0});
        for (int q = 0; q < nq; ++q) {
            const cplx a = std::conj(bra_lam[static_cast<std::size_t>(q) * p_count + u]);
            if (a == cplx{0.0, 0.0}) continue;
            const cplx* bl = ket_lam + static_cast<std::size_t>(q) * p_count;
            for (int v = 0; v < p_count; ++v) x_row[v] += a * bl[v];
        }
        for (int v = 0; v < p_count; ++v) {
            xr[v] = x_row[v].real();
            xi[v] = x_row[v].imag();
        }
        vexp_cis(p_count, xr.data(), xi.data(), e_row.data());
        cplx s{0.0, 0.0};
        for (int v = 0; v < p_count; ++v) s += wrow[v] * (ket_pref[v] * e_row[v]);
        acc += pu * s;
    }
    return acc;
}

// lamA scaled by per-mode phases; used to fold e^{i omega_q arg} into the bra side
void apply_mode_phase(int p_count, int nq, const std::vector<cplx>& lam_in,
                      const std::vector<cplx>& phase, std::vector<cplx>& lam_out) {
    lam_out.resize(lam_in.size());
    for (int q = 0; q < nq; ++q) {
        // bra entries are conjugated inside the contraction, so store
        // conj(phase) to end up with conj(lam) * phase
        const cplx ph = std::conj(phase[q]);
        const cplx* in = lam_in.data() + static_cast<std::size_t>(q) * p_count;
        cplx* out = lam_out.data() + static_cast<std::size_t>(q) * p_count;
        for (int v = 0; v < p_count; ++v) out[v] = in[v] * ph;
    }
}

} // namespace

ResponseGrid response_functions(const AmplitudeTable& table, const RingGeometry& geom,
                                const BathLineshapeParams& lineshape, double t_w_fs,
                                const ResponseGridSpec& grid, int n_threads) {
    if (geom.n_sites != table.n_sites)
        throw std::invalid_argument("response_functions: geometry does not match the table");
    const int n = table.n_sites;
    const int nq = table.n_modes;
    const int p_count = n * n;

    ResponseGrid out;
    out.t_w_fs = t_w_fs;
    const int n_tau = static_cast<int>(std::llround(grid.tau_max_fs / grid.step_fs)) + 1;
    const int n_t = static_cast<int>(std::llround(grid.t_max_fs / grid.step_fs)) + 1;
    out.tau_fs.resize(n_tau);
    out.t_fs.resize(n_t);
    for (int i = 0; i < n_tau; ++i) out.tau_fs[i] = i * grid.step_fs;
    for (int i = 0; i < n_t; ++i) out.t_fs[i] = i * grid.step_fs;
    // every needed lookup must sit on the table grid
    table.index(t_w_fs);
    table.index(-out.t_fs.back());
    table.index(out.tau_fs.back() + t_w_fs + out.t_fs.back());

    const std::size_t cells = static_cast<std::size_t>(n_tau) * n_t;
    out.r1.assign(cells, {});
    out.r2.assign(cells, {});
    out.r3.assign(cells, {});
    out.r4.assign(cells, {});

    const PairWeights pw = make_pair_weights(geom);
    const bool bath_off = [&] {
        for (const auto& snap : table.lambda_t)
            for (const auto& z : snap)
                if (z != cplx{0.0, 0.0}) return false;
        return true;
    }();

    const int s_tw = table.index(t_w_fs);

    // lineshape factors depend only on (tau, t); precompute the grid once
    std::vector<LineshapeFactors> lf(cells);
    for (int it_tau = 0; it_tau < n_tau; ++it_tau)
        for (int it_t = 0; it_t < n_t; ++it_t)
            lf[static_cast<std::size_t>(it_tau) * n_t + it_t] =
                lineshape_factors(out.tau_fs[it_tau], t_w_fs, out.t_fs[it_t], lineshape);

    auto mode_phase = [&](double sign_arg) {
        std::vector<cplx> ph(nq);
        for (int q = 0; q < nq; ++q) {
            const double a = table.omega_rad[q] * sign_arg;
            ph[q] = {std::cos(a), std::sin(a)};
        }
        return ph;
    };

    // threads sweep t columns; each prepares the phase-folded bra
    // operand once per column
    std::atomic<int> next_col{0};
    auto worker = [&] {
        std::vector<cplx> bra_lam;
        for (;;) {
            const int it_t = next_col.fetch_add(1);
            if (it_t >= n_t) break;
            const double t = out.t_fs[it_t];

            // R1: bra at T_w, ket at tau+T_w+t, phase e^{+i w_q t}
            {
                const auto ph = mode_phase(t);
                if (!bath_off) apply_mode_phase(p_count, nq, table.lambda_t[s_tw], ph, bra_lam);
                for (int it_tau = 0; it_tau < n_tau; ++it_tau) {
                    const int sb = table.index(out.tau_fs[it_tau] + t_w_fs + t);
                    const std::size_t cell = static_cast<std::size_t>(it_tau) * n_t + it_t;
                    out.r1[cell] = lf[cell].f1 *
                                   contract_pairs(p_count, nq, bra_lam.data(),
                                                  table.pref[s_tw].data(),
                                                  table.lambda_t[sb].data(),
                                                  table.pref[sb].data(), pw.w.data(), bath_off);
                }
            }
            // R2: bra at tau+T_w, ket at T_w+t, phase e^{+i w_q t}.
            // At T_w = 0 the amplitude arguments, overlap phase and
            // lineshape factor coincide with R3, which is copied after
            // the sweep instead.
            if (t_w_fs != 0.0) {
                const auto ph = mode_phase(t);
                const int sb = table.index(t_w_fs + t);
                for (int it_tau = 0; it_tau < n_tau; ++it_tau) {
                    const int sa = table.index(out.tau_fs[it_tau] + t_w_fs);
                    if (!bath_off) apply_mode_phase(p_count, nq, table.lambda_t[sa], ph, bra_lam);
                    const std::size_t cell = static_cast<std::size_t>(it_tau) * n_t + it_t;
                    out.r2[cell] = lf[cell].f2 *
                                   contract_pairs(p_count, nq, bra_lam.data(),
                                                  table.pref[sa].data(),
                                                  table.lambda_t[sb].data(),
                                                  table.pref[sb].data(), pw.w.data(), bath_off);
                }
            }
            // R3: bra at tau, ket at t, phase e^{+i w_q (T_w + t)}
            {
                const auto ph = mode_phase(t_w_fs + t);
                const int sb = table.index(t);
                for (int it_tau = 0; it_tau < n_tau; ++it_tau) {
                    const int sa = table.index(out.tau_fs[it_tau]);
                    if (!bath_off) apply_mode_phase(p_count, nq, table.lambda_t[sa], ph, bra_lam);
                    const std::size_t cell = static_cast<std::size_t>(it_tau) * n_t + it_t;
                    out.r3[cell] = lf[cell].f3 *
                                   contract_pairs(p_count, nq, bra_lam.data(),
                                                  table.pref[sa].data(),
                                                  table.lambda_t[sb].data(),
                                                  table.pref[sb].data(), pw.w.data(), bath_off);
                }
            }
            // R4: bra at -t, ket at tau, phase e^{-i w_q T_w}
            {
                const auto ph = mode_phase(-t_w_fs);
                const int sa = table.index(-t);
                if (!bath_off) apply_mode_phase(p_count, nq, table.lambda_t[sa], ph, bra_lam);
                for (int it_tau = 0; it_tau < n_tau; ++it_tau) {
                    const int sb = table.index(out.tau_fs[it_tau]);
                    const std::size_t cell = static_cast<std::size_t>(it_tau) * n_t + it_t;
                    out.r4[cell] = lf[cell].f4 *
                                   contract_pairs(p_count, nq, bra_lam.data(),
                                                  table.pref[sa].data(),
                                                  table.lambda_t[sb].data(),
                                                  table.pref[sb].data(), pw.w.data(), bath_off);
                }
            }
        }
    };
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (t_w_fs == 0.0) out.r2 = out.r3;
    return out;
}

namespace {

std::mutex fftw_mutex;

// 1D transforms along both axes with the requested kernel signs;
// sign = +1 applies e^{+i w x}
std::vector<cplx> fourier_2d(const std::vector<cplx>& data, int n_tau, int n_t, int m,
                             int sign_tau, int sign_t, double dx) {
    std::vector<cplx> padded(static_cast<std::size_t>(m) * m, cplx{0.0, 0.0});
    for (int i = 0; i < n_tau; ++i)
        for (int j = 0; j < n_t; ++j) {
            // trapezoid edge weight on the half-open time axes
            double w = 1.0;
            if (i == 0) w *= 0.5;
            if (j == 0) w *= 0.5;
            padded[static_cast<std::size_t>(i) * m + j] =
                w * data[static_cast<std::size_t>(i) * n_t + j];
        }

    fftw_plan plan_rows, plan_cols;
    {
        std::scoped_lock lock(fftw_mutex);
        const int rank_n[1] = {m};
        plan_rows = fftw_plan_many_dft(
            1, rank_n, m, reinterpret_cast<fftw_complex*>(padded.data()), nullptr, 1, m,
            reinterpret_cast<fftw_complex*>(padded.data()), nullptr, 1, m,
            sign_t > 0 ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE);
        plan_cols = fftw_plan_many_dft(
            1, rank_n, m, reinterpret_cast<fftw_complex*>(padded.data()), nullptr, m, 1,
            reinterpret_cast<fftw_complex*>(padded.data()), nullptr, m, 1,
            sign_tau > 0 ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan_rows);
    fftw_execute(plan_cols);
    {
        std::scoped_lock lock(fftw_mutex);
        fftw_destroy_plan(plan_rows);
        fftw_destroy_plan(plan_cols);
    }
    for (auto& z : padded) z *= dx * dx;
    return padded;
}

int fft_bin_shift(int idx, int m) { return (idx + m / 2) % m; }

} // namespace

Spectrum2D spectrum_2d(const ResponseGrid& grid, double omega0_rad, int pad_factor) {
    const int n_tau = static_cast<int>(grid.tau_fs.size());
    const int n_t = static_cast<int>(grid.t_fs.size());
    if (n_tau < 2 || n_t < 2) throw std::invalid_argument("spectrum_2d: need a 2D grid");
    const double step = grid.tau_fs[1] - grid.tau_fs[0];
    for (int i = 1; i < n_tau; ++i)
        if (std::abs(grid.tau_fs[i] - grid.tau_fs[i - 1] - step) > 1e-9)
            throw std::invalid_argument("spectrum_2d: non-uniform tau grid");
    for (int i = 1; i < n_t; ++i)
        if (std::abs(grid.t_fs[i] - grid.t_fs[i - 1] - step) > 1e-9)
            throw std::invalid_argument("spectrum_2d: non-uniform t grid");

    int m = 1;
    while (m < pad_factor * std::max(n_tau, n_t)) m *= 2;

    std::vector<cplx> reph(grid.r2.size()), nonreph(grid.r1.size());
    for (std::size_t i = 0; i < reph.size(); ++i) reph[i] = grid.r2[i] + grid.r3[i];
    for (std::size_t i = 0; i < nonreph.size(); ++i) nonreph[i] = grid.r1[i] + grid.r4[i];

    const auto sr = fourier_2d(reph, n_tau, n_t, m, -1, +1, step);
    const auto snr = fourier_2d(nonreph, n_tau, n_t, m, +1, +1, step);

    Spectrum2D out;
    out.t_w_fs = grid.t_w_fs;
    out.omega.resize(m);
    const double dw = 2.0 * units::pi / (m * step);
    for (int k = 0; k < m; ++k) out.omega[k] = (k - m / 2) * dw / omega0_rad;

    out.rephasing.resize(sr.size());
    out.nonrephasing.resize(sr.size());
    out.total.resize(sr.size());
    for (int i = 0; i < m; ++i) {
        const int si = fft_bin_shift(i, m);
        for (int j = 0; j < m; ++j) {
            const int sj = fft_bin_shift(j, m);
            const std::size_t dst = static_cast<std::size_t>(i) * m + j;
            const std::size_t src = static_cast<std::size_t>(si) * m + sj;
            out.rephasing[dst] = sr[src].real();
            out.nonrephasing[dst] = snr[src].real();
            out.total[dst] = out.rephasing[dst] + out.nonrephasing[dst];
        }
    }
    return out;
}

std::vector<std::pair<double, double>> linear_absorption(const Spectrum2D& spectrum) {
    const int m = static_cast<int>(spectrum.omega.size());
    std::vector<std::pair<double, double>> line(m);
    double peak = 0.0;
    for (int i = 0; i < m; ++i) {
        const double v = spectrum.total[static_cast<std::size_t>(i) * m + i];
        line[i] = {spectrum.omega[i], v};
        peak = std::max(peak, std::abs(v));
    }
    if (peak > 0.0)
        for (auto& [w, v] : line) v /= peak;
    return line;
}

double fwhm(const std::vector<std::pair<double, double>>& line) {
    int i_max = 0;
    for (std::size_t i = 0; i < line.size(); ++i)
        if (line[i].second > line[i_max].second) i_max = static_cast<int>(i);
    const double half = 0.5 * line[i_max].second;
    auto cross = [&](int from, int step) {
        int i = from;
        while (i + step >= 0 && i + step < static_cast<int>(line.size()) &&
               line[i + step].second > half)
            i += step;
        const int j = i + step;
        if (j < 0 || j >= static_cast<int>(line.size())) return line[i].first;
        const double f = (line[i].second - half) / (line[i].second - line[j].second);
        return line[i].first + f * (line[j].first - line[i].first);
    };
    return cross(i_max, +1) - cross(i_max, -1);
}

} // namespace polaring

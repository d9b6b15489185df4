#include "polaring/dynamics.hpp"

#include <cmath>
#include <stdexcept>

#include "polaring/fastmath.hpp"
#include "polaring/units.hpp"

namespace polaring {

DynamicsModel make_dynamics_model(const ExcitonMatrix& k, const PhononBath& bath) {
    const int n = k.n();
    if (bath.n_modes != n)
        throw std::invalid_argument("make_dynamics_model: bath must carry one mode per site");
    DynamicsModel m;
    m.n_sites = n;
    m.n_modes = bath.n_modes;
    m.k_rad = k.k * units::cm1_to_radfs;
    m.omega_rad.resize(n);
    m.g = bath.g_q;
    m.q = bath.q;
    m.omega0_rad = bath.omega0_cm1 * units::cm1_to_radfs;
    for (int i = 0; i < n; ++i) m.omega_rad[i] = bath.omega_q_cm1[i] * units::cm1_to_radfs;
    m.site_phase.resize(static_cast<std::size_t>(n) * n);
    m.drive.resize(static_cast<std::size_t>(n) * n);
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
    for (int site = 0; site < n; ++site) {
        for (int qi = 0; qi < n; ++qi) {
            const double ph = -bath.q[qi] * site;
            m.site_phase[site * n + qi] = {std::cos(ph), std::sin(ph)};
            m.drive[site * n + qi] = m.omega_rad[qi] * m.g[qi] * inv_sqrt_n;
        }
    }
    return m;
}

double D1State::norm2() const {
    double s = 0.0;
    for (const auto& a : alpha) s += std::norm(a);
    return s;
}

D1State make_localized_state(int n_sites, int n_modes, int site) {
    if (site < 0 || site >= n_sites)
        throw std::invalid_argument("make_localized_state: site out of range");
    D1State st;
    st.n_sites = n_sites;
    st.n_modes = n_modes;
    st.alpha.assign(n_sites, {0.0, 0.0});
    st.alpha[site] = {1.0, 0.0};
    st.lambda.assign(static_cast<std::size_t>(n_sites) * n_modes, {0.0, 0.0});
    return st;
}

SinkSpec make_site_sink(int n_sites, int site, double gamma_omega0) {
    SinkSpec s;
    s.gamma_omega0 = gamma_omega0;
    s.q_matrix = Eigen::MatrixXd::Zero(n_sites, n_sites);
    s.q_matrix(site, site) = 1.0;
    return s;
}

cplx debye_waller(const D1State& state, int n, int m) {
    const int nq = state.n_modes;
    const cplx* ln = state.lambda.data() + static_cast<std::size_t>(n) * nq;
    const cplx* lm = state.lambda.data() + static_cast<std::size_t>(m) * nq;
    cplx z{0.0, 0.0};
    for (int q = 0; q < nq; ++q)
        z += std::conj(ln[q]) * lm[q] - 0.5 * std::norm(ln[q]) - 0.5 * std::norm(lm[q]);
    return std::exp(z);
}

void debye_waller_matrix(int n_sites, int n_modes, const cplx* lambda, cplx* s) {
    const int n = n_sites;
    thread_local std::vector<double> h, zre, zim;
    thread_local std::vector<cplx> zout;
    h.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        const cplx* li = lambda + static_cast<std::size_t>(i) * n_modes;
        double acc = 0.0;
        for (int q = 0; q < n_modes; ++q) acc += std::norm(li[q]);
        h[i] = 0.5 * acc;
    }
    const int n_pairs = n * (n - 1) / 2;
    zre.resize(n_pairs);
    zim.resize(n_pairs);
    zout.resize(n_pairs);
    int p = 0;
    for (int i = 0; i < n; ++i) {
        const cplx* li = lambda + static_cast<std::size_t>(i) * n_modes;
        for (int j = i + 1; j < n; ++j, ++p) {
            const cplx* lj = lambda + static_cast<std::size_t>(j) * n_modes;
            cplx z{0.0, 0.0};
            for (int q = 0; q < n_modes; ++q) z += std::conj(li[q]) * lj[q];
            zre[p] = z.real() - h[i] - h[j];
            zim[p] = z.imag();
        }
    }
    vexp_cis(n_pairs, zre.data(), zim.data(), zout.data());
    p = 0;
    for (int i = 0; i < n; ++i) {
        s[i * n + i] = {1.0, 0.0};
        for (int j = i + 1; j < n; ++j, ++p) {
            s[i * n + j] = zout[p];
            s[j * n + i] = std::conj(zout[p]);
        }
    }
}

void EomWorkspace::resize(int n_sites, int n_modes) {
    s.resize(static_cast<std::size_t>(n_sites) * n_sites);
    m.resize(static_cast<std::size_t>(n_sites) * n_sites);
    t.resize(n_sites);
    quot.resize(static_cast<std::size_t>(n_sites) * n_modes);
}

void eom_rhs(const DynamicsModel& model, const cplx* alpha, const cplx* lambda,
             cplx* dalpha, cplx* dlambda, EomWorkspace& ws,
             const SinkSpec* sink, double regularization_eps) {
    const int n = model.n_sites;
    const int nq = model.n_modes;
    ws.resize(n, nq);
    const cplx iu{0.0, 1.0};

    debye_waller_matrix(n, nq, lambda, ws.s.data());

    // M_nm = K_nm S_nm alpha_m,  T_n = -sum_m M_nm
    for (int i = 0; i < n; ++i) {
        cplx acc{0.0, 0.0};
        const double* krow = model.k_rad.data() + i; // column-major stride n
        for (int j = 0; j < n; ++j) {
            const cplx mij = krow[static_cast<std::size_t>(j) * n] * ws.s[i * n + j] * alpha[j];
            ws.m[i * n + j] = mij;
            acc += mij;
        }
        ws.t[i] = -acc;
    }

    // Omega_nq = -(M lambda)_nq - lambda_nq T_n, regularized quotient by alpha_n
    for (int i = 0; i < n; ++i) {
        const cplx* li = lambda + static_cast<std::size_t>(i) * nq;
        cplx* qi = ws.quot.data() + static_cast<std::size_t>(i) * nq;
        for (int q = 0; q < nq; ++q) qi[q] = -ws.t[i] * li[q];
        for (int j = 0; j < n; ++j) {
            const cplx mij = ws.m[i * n + j];
            if (mij == cplx{0.0, 0.0}) continue;
            const cplx* lj = lambda + static_cast<std::size_t>(j) * nq;
            for (int q = 0; q < nq; ++q) qi[q] -= mij * lj[q];
        }
        const cplx a_conj = std::conj(alpha[i]);
        const double denom = std::norm(alpha[i]) + regularization_eps;
        for (int q = 0; q < nq; ++q) qi[q] *= a_conj / denom;
    }

    for (int i = 0; i < n; ++i) {
        const cplx* li = lambda + static_cast<std::size_t>(i) * nq;
        const cplx* qi = ws.quot.data() + static_cast<std::size_t>(i) * nq;
        const cplx* ph = model.site_phase.data() + static_cast<std::size_t>(i) * nq;
        const double* dr = model.drive.data() + static_cast<std::size_t>(i) * nq;
        cplx* dli = dlambda + static_cast<std::size_t>(i) * nq;
        double r = 0.0;
        for (int q = 0; q < nq; ++q) {
            const cplx c = dr[q] * ph[q];
            dli[q] = iu * (qi[q] + c - model.omega_rad[q] * li[q]);
            const cplx w = (c - qi[q]) * std::conj(li[q]);
            r += w.real();
        }
        dalpha[i] = iu * (ws.t[i] + alpha[i] * r);
    }

    if (sink != nullptr && sink->gamma_omega0 > 0.0) {
        const double half_gamma = 0.5 * sink->gamma_omega0 * model.omega0_rad;
        for (int i = 0; i < n; ++i) {
            cplx acc{0.0, 0.0};
            for (int j = 0; j < n; ++j) {
                const double qij = sink->q_matrix(i, j);
                if (qij != 0.0) acc += qij * ws.s[i * n + j] * alpha[j];
            }
            dalpha[i] -= half_gamma * acc;
        }
    }
}

EnergyComponents energy_components(const DynamicsModel& model, const D1State& state) {
    const int n = model.n_sites;
    const int nq = model.n_modes;
    std::vector<cplx> s(static_cast<std::size_t>(n) * n);
    debye_waller_matrix(n, nq, state.lambda.data(), s.data());
    EnergyComponents e;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            e.e_ex += (std::conj(state.alpha[i]) * state.alpha[j] * s[i * n + j]).real() *
                      model.k_rad(i, j);
    for (int i = 0; i < n; ++i) {
        const double pop = std::norm(state.alpha[i]);
        const cplx* li = state.lambda.data() + static_cast<std::size_t>(i) * nq;
        const cplx* ph = model.site_phase.data() + static_cast<std::size_t>(i) * nq;
        const double* dr = model.drive.data() + static_cast<std::size_t>(i) * nq;
        double bath = 0.0, inter = 0.0;
        for (int q = 0; q < nq; ++q) {
            bath += model.omega_rad[q] * std::norm(li[q]);
            inter += dr[q] * (ph[q] * std::conj(li[q])).real();
        }
        e.e_bath += pop * bath;
        e.e_int += -2.0 * pop * inter;
    }
    return e;
}

double deviation_amplitude(const DynamicsModel& model, const D1State& state,
                           const cplx* dalpha, const cplx* dlambda) {
    const int n = model.n_sites;
    const int nq = model.n_modes;
    const cplx iu{0.0, 1.0};

    std::vector<cplx> s(static_cast<std::size_t>(n) * n);
    debye_waller_matrix(n, nq, state.lambda.data(), s.data());

    std::vector<cplx> a_coef(n);
    std::vector<cplx> b_coef(static_cast<std::size_t>(n) * nq);
    for (int i = 0; i < n; ++i) {
        const cplx* li = state.lambda.data() + static_cast<std::size_t>(i) * nq;
        const cplx* dli = dlambda + static_cast<std::size_t>(i) * nq;
        const cplx* ph = model.site_phase.data() + static_cast<std::size_t>(i) * nq;
        const double* dr = model.drive.data() + static_cast<std::size_t>(i) * nq;
        double re_part = 0.0;
        cplx drive_scalar{0.0, 0.0};
        for (int q = 0; q < nq; ++q) {
            re_part += (dli[q] * std::conj(li[q])).real();
            drive_scalar += dr[q] * std::conj(ph[q]) * li[q]; // e^{+iqn} lambda
        }
        const cplx c_n = dalpha[i] - state.alpha[i] * re_part;
        const cplx e_n = -state.alpha[i] * drive_scalar;
        a_coef[i] = iu * c_n - e_n;
        cplx* bi = b_coef.data() + static_cast<std::size_t>(i) * nq;
        for (int q = 0; q < nq; ++q) {
            const cplx f_nq = state.alpha[i] * (model.omega_rad[q] * li[q] - dr[q] * ph[q]);
            bi[q] = iu * (state.alpha[i] * dli[q]) - f_nq;
        }
    }

    double delta2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const cplx* li = state.lambda.data() + static_cast<std::size_t>(i) * nq;
        const cplx* bi = b_coef.data() + static_cast<std::size_t>(i) * nq;
        cplx head = a_coef[i];
        double b2 = 0.0;
        for (int q = 0; q < nq; ++q) {
            head += bi[q] * std::conj(li[q]);
            b2 += std::norm(bi[q]);
        }
        delta2 += std::norm(head) + b2;

        cplx cross{0.0, 0.0};
        for (int j = 0; j < n; ++j) {
            const double kij = model.k_rad(i, j);
            if (kij == 0.0) continue;
            const cplx* lj = state.lambda.data() + static_cast<std::size_t>(j) * nq;
            cplx ov = std::conj(a_coef[i]);
            for (int q = 0; q < nq; ++q) ov += std::conj(bi[q]) * lj[q];
            cross += kij * state.alpha[j] * ov * s[i * n + j];
        }
        delta2 -= 2.0 * cross.real();

        for (int j = 0; j < n; ++j) {
            const double kij = model.k_rad(i, j);
            if (kij == 0.0) continue;
            for (int jp = 0; jp < n; ++jp) {
                const double kijp = model.k_rad(i, jp);
                if (kijp == 0.0) continue;
                delta2 += kij * kijp *
                          (std::conj(state.alpha[j]) * state.alpha[jp] * s[j * n + jp]).real();
            }
        }
    }
    // tiny negative residuals are roundoff
    return delta2 > 0.0 ? std::sqrt(delta2) : 0.0;
}

namespace {

bool state_finite(const D1State& st) {
    double acc = 0.0;
    for (const auto& a : st.alpha) acc += std::norm(a);
    for (const auto& l : st.lambda) acc += std::norm(l);
    return std::isfinite(acc);
}

} // namespace

PropagationResult propagate(const DynamicsModel& model, D1State& state,
                            const IntegratorConfig& cfg, const SnapshotObserver& observer,
                            const SinkSpec* sink) {
    const int n = model.n_sites;
    const int nq = model.n_modes;
    if (state.n_sites != n || state.n_modes != nq)
        throw std::invalid_argument("propagate: state does not match model");
    if (cfg.dt_fs <= 0.0) throw std::invalid_argument("propagate: dt must be positive");
    double omega_max = 0.0;
    for (double w : model.omega_rad) omega_max = std::max(omega_max, w);
    if (cfg.dt_fs * omega_max >= 0.3)
        throw std::invalid_argument("propagate: dt * omega_max exceeds the stability guard (0.3 rad)");
    if (cfg.record_stride < 1) throw std::invalid_argument("propagate: record_stride must be >= 1");

    const std::size_t dim = static_cast<std::size_t>(n) + static_cast<std::size_t>(n) * nq;
    auto alpha_of = [n](std::vector<cplx>& y) { return y.data(); };
    auto lambda_of = [n](std::vector<cplx>& y) { return y.data() + n; };

    std::vector<cplx> y(dim), k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
    std::copy(state.alpha.begin(), state.alpha.end(), y.begin());
    std::copy(state.lambda.begin(), state.lambda.end(), y.begin() + n);

    EomWorkspace ws;
    const int n_steps = static_cast<int>(std::llround(cfg.t_max_fs / cfg.dt_fs));
    const double dt = cfg.dt_fs;

    auto rhs = [&](std::vector<cplx>& in, std::vector<cplx>& out) {
        eom_rhs(model, alpha_of(in), lambda_of(in), alpha_of(out), lambda_of(out), ws, sink,
                cfg.regularization_eps);
    };

    auto sync_state = [&](double t) {
        std::copy(y.begin(), y.begin() + n, state.alpha.begin());
        std::copy(y.begin() + n, y.end(), state.lambda.begin());
        state.time_fs = t;
    };

    PropagationResult res;
    for (int step = 0; step <= n_steps; ++step) {
        const double t = step * dt;
        rhs(y, k1);
        if (step % cfg.record_stride == 0 || step == n_steps) {
            sync_state(t);
            if (!state_finite(state)) {
                res.aborted = true;
                res.abort_time_fs = t;
                res.steps = step;
                return res;
            }
            if (observer) {
                const double dev =
                    deviation_amplitude(model, state, alpha_of(k1), lambda_of(k1)) /
                    model.omega0_rad;
                observer(state, alpha_of(k1), lambda_of(k1), dev);
            }
        }
        if (step == n_steps) break;

        for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
        rhs(tmp, k2);
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
        rhs(tmp, k3);
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + dt * k3[i];
        rhs(tmp, k4);
        for (std::size_t i = 0; i < dim; ++i)
            y[i] += (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        res.steps = step + 1;
    }
    sync_state(n_steps * dt);
    return res;
}

std::vector<TrajectorySnapshot> propagate_recorded(const DynamicsModel& model, D1State state,
                                                   const IntegratorConfig& cfg,
                                                   const SinkSpec* sink,
                                                   PropagationResult* result) {
    std::vector<TrajectorySnapshot> snaps;
    auto obs = [&](const D1State& st, const cplx*, const cplx*, double dev) {
        TrajectorySnapshot s;
        s.time_fs = st.time_fs;
        s.alpha = st.alpha;
        s.lambda = st.lambda;
        s.deviation_amplitude = dev;
        snaps.push_back(std::move(s));
    };
    PropagationResult r = propagate(model, state, cfg, obs, sink);
    if (result) *result = r;
    return snaps;
}

std::optional<double> relative_deviation(const std::vector<double>& delta_omega0,
                                         const std::vector<double>& e_bath_omega0) {
    if (delta_omega0.size() < 2 || delta_omega0.size() != e_bath_omega0.size())
        throw std::invalid_argument("relative_deviation: need matching series with >= 2 points");
    double max_delta = 0.0, avg_eph = 0.0;
    for (std::size_t i = 0; i < delta_omega0.size(); ++i) {
        max_delta = std::max(max_delta, delta_omega0[i]);
        avg_eph += e_bath_omega0[i];
    }
    avg_eph /= static_cast<double>(e_bath_omega0.size());
    if (avg_eph <= 1e-300) return std::nullopt;
    return max_delta / avg_eph;
}

} // namespace polaring

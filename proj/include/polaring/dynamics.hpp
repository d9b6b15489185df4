// Dirac-Frenkel dynamics of the Davydov D1 trial state.
//
// State layout: alpha[n] are the complex site amplitudes, lambda[n*Nq+q]
// the coherent-state displacements.  Internally every energy is an
// angular frequency (rad/fs, hbar = 1); conversion from cm^-1 happens
// once when a DynamicsModel is assembled.

#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "polaring/model.hpp"

namespace polaring {

using cplx = std::complex<double>;

struct DynamicsModel {
    int n_sites = 0;
    int n_modes = 0;
    Eigen::MatrixXd k_rad;             // exciton matrix, rad/fs
    std::vector<double> omega_rad;     // mode frequencies, rad/fs
    std::vector<double> g;             // dimensionless couplings
    std::vector<double> q;             // mode momenta
    std::vector<cplx> site_phase;      // e^{-i q n}, [n*Nq+q]
    std::vector<double> drive;         // omega_q * g_q / sqrt(N)
    double omega0_rad = 0.0;
};

DynamicsModel make_dynamics_model(const ExcitonMatrix& k, const PhononBath& bath);

struct D1State {
    int n_sites = 0;
    int n_modes = 0;
    std::vector<cplx> alpha;
    std::vector<cplx> lambda;
    double time_fs = 0.0;

    double norm2() const;
};

// local excitation at one site, bath in its ground state
D1State make_localized_state(int n_sites, int n_modes, int site);

struct SinkSpec {
    double gamma_omega0 = 0.1;  // dissipation rate in units of omega0
    Eigen::MatrixXd q_matrix;   // coupling structure, default delta_{n,site}
};

SinkSpec make_site_sink(int n_sites, int site, double gamma_omega0 = 0.1);

struct IntegratorConfig {
    double dt_fs = 0.05;
    double t_max_fs = 300.0;
    int record_stride = 20;
    double regularization_eps = 1e-8;
};

// Debye-Waller overlap of the coherent states attached to two sites.
cplx debye_waller(const D1State& state, int n, int m);

// Full overlap matrix S_nm; `s` must hold n_sites^2 entries.
void debye_waller_matrix(int n_sites, int n_modes, const cplx* lambda, cplx* s);

class EomWorkspace {
public:
    void resize(int n_sites, int n_modes);
    std::vector<cplx> s;    // S_nm
    std::vector<cplx> m;    // K_nm S_nm alpha_m
    std::vector<cplx> t;    // T_n
    std::vector<cplx> quot; // regularized Omega_nq / alpha_n
};

// Right-hand side of the variational equations of motion; optional
// non-hermitian sink contribution on the amplitude equation.
void eom_rhs(const DynamicsModel& model, const cplx* alpha, const cplx* lambda,
             cplx* dalpha, cplx* dlambda, EomWorkspace& ws,
             const SinkSpec* sink = nullptr, double regularization_eps = 1e-8);

// Exciton / bath / interaction energy expectation values, rad/fs.
struct EnergyComponents {
    double e_ex = 0.0;
    double e_bath = 0.0;
    double e_int = 0.0;
    double total() const { return e_ex + e_bath + e_int; }
};

EnergyComponents energy_components(const DynamicsModel& model, const D1State& state);

// Norm of the residual i d/dt|D1> - H|D1> evaluated in the coherent
// state algebra, rad/fs; divide by omega0_rad for reporting.
double deviation_amplitude(const DynamicsModel& model, const D1State& state,
                           const cplx* dalpha, const cplx* dlambda);

struct TrajectorySnapshot {
    double time_fs = 0.0;
    std::vector<cplx> alpha;
    std::vector<cplx> lambda;
    double deviation_amplitude = 0.0; // omega0 units
};

// Called at every recorded step with the state and a fresh rhs.
using SnapshotObserver =
    std::function<void(const D1State&, const cplx* dalpha, const cplx* dlambda, double deviation_omega0)>;

struct PropagationResult {
    bool aborted = false;
    double abort_time_fs = 0.0;
    int steps = 0;
};

// Fixed-step RK4.  Throws on an unstable dt; NaN mid-run aborts the
// trajectory and reports it in the result instead of throwing.
PropagationResult propagate(const DynamicsModel& model, D1State& state,
                            const IntegratorConfig& cfg, const SnapshotObserver& observer,
                            const SinkSpec* sink = nullptr);

// Convenience wrapper that stores snapshots.
std::vector<TrajectorySnapshot> propagate_recorded(const DynamicsModel& model, D1State state,
                                                   const IntegratorConfig& cfg,
                                                   const SinkSpec* sink = nullptr,
                                                   PropagationResult* result = nullptr);

// max Delta / avg E_ph over a trajectory; empty optional when the bath
// never stores energy (S = 0).
std::optional<double> relative_deviation(const std::vector<double>& delta_omega0,
                                         const std::vector<double>& e_bath_omega0);

} // namespace polaring

// Physical measures derived from trajectory snapshots: reduced density
// matrix, coherence size, inverse population ratio, superradiance,
// momentum populations, phonon displacement field, MSD and sink
// probability, plus the per-trajectory series container the ensemble
// runner averages.

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "polaring/dynamics.hpp"
#include "polaring/model.hpp"

namespace polaring {

struct ReducedDensityMatrix {
    Eigen::MatrixXcd rho;
    double time_fs = 0.0;
    double trace() const { return rho.trace().real(); }
};

// rho_nm = alpha_n^* alpha_m S_nm
ReducedDensityMatrix reduced_density(const D1State& state);

// (sum |rho|)^2 / (N sum |rho|^2); 1/N for a localized pure state, N for
// the maximally coherent one.
double coherence_size(const ReducedDensityMatrix& rho);

// Inverse population ratio on trace-renormalized populations.  The
// fourth-power form is the printed definition; the squared form is the
// participation-ratio variant whose uniform-population value is N, and
// is the default used for the steady-state maps.
enum class IprExponent { printed_fourth = 4, squared = 2 };
double inverse_population_ratio(const ReducedDensityMatrix& rho,
                                IprExponent exponent = IprExponent::squared);

// L_s = Re sum_nm (mu_n . mu_m) rho_nm
double superradiance_factor(const ReducedDensityMatrix& rho,
                            const std::vector<Eigen::Vector3d>& dipoles);

// n_k = (1/N) sum_nm e^{ik(n-m)} rho_nm on the bath momentum grid
std::vector<double> momentum_populations(const ReducedDensityMatrix& rho,
                                         const std::vector<double>& q_grid);

// population-weighted displacement field xi_n
std::vector<double> phonon_displacement(const D1State& state, const std::vector<double>& q_grid);

// chord distances (nm) from one site to every other, in the ring plane
std::vector<double> chord_distances_nm(const RingGeometry& geom, int initial_site);

double msd_nm2(const ReducedDensityMatrix& rho, const std::vector<double>& distances_nm);

struct MsdFit {
    double mobility_d = 0.0;  // nm^2 / fs^gamma
    double gamma_exponent = 0.0;
};

// least-squares power law on log-log over [t_lo, t_hi]
MsdFit fit_msd_power_law(const std::vector<double>& times_fs, const std::vector<double>& msd,
                         double t_lo_fs = 1.6, double t_hi_fs = 16.0);

// Per-trajectory series on a shared time grid.
struct ObservableSeries {
    std::vector<double> times_fs;
    std::vector<double> lc;
    std::vector<double> ipr_rho;          // squared variant
    std::vector<double> ipr_rho_printed;  // fourth-power variant as printed
    std::vector<double> ls;
    std::vector<double> msd_nm2;
    std::vector<double> p_sink;
    std::vector<double> e_ex, e_bath, e_int, e_total; // omega0 units
    std::vector<double> delta_dev;                    // omega0 units
    std::vector<double> n_k;        // row-major [t][k]
    std::vector<double> xi_n;       // row-major [t][n]
    std::vector<double> population; // row-major [t][n]
    int n_sites = 0;

    std::size_t n_times() const { return times_fs.size(); }
    void accumulate(const ObservableSeries& other); // element-wise sum
    void scale(double factor);
};

// Observer bound to one trajectory; feeds propagate() and fills a series.
class SeriesRecorder {
public:
    SeriesRecorder(const DynamicsModel& model, const RingGeometry* geom, int initial_site);

    void operator()(const D1State& state, const cplx* dalpha, const cplx* dlambda,
                    double deviation_omega0);

    ObservableSeries take() { return std::move(series_); }
    const ObservableSeries& series() const { return series_; }

private:
    const DynamicsModel* model_;
    const RingGeometry* geom_;
    std::vector<double> distances_nm_;
    double e_baseline_rad_ = 0.0; // on-site energy of the initial site
    ObservableSeries series_;
};

struct SteadyStateSummary {
    double assc = 0.0;     // time-averaged coherence size
    double ass_ipr = 0.0;  // time-averaged inverse population ratio
    double window_lo_fs = 150.0;
    double window_hi_fs = 300.0;
    double sigma_over_j = 0.0;
};

// Mean of L_c and IPR(rho) over the window; sigma_over_j uses the mean
// nearest-neighbour coupling 542 cm^-1.
SteadyStateSummary steady_state_summary(const ObservableSeries& series, double window_lo_fs,
                                        double window_hi_fs, double sigma_cm1,
                                        double j_mean_cm1 = 542.0);

// P_sink(t) = 1 - sum_n |alpha_n|^2
std::vector<double> sink_probability(const ObservableSeries& series);

} // namespace polaring

#include "polaring/observables.hpp"

#include <cmath>
#include <stdexcept>

#include "polaring/units.hpp"

namespace polaring {

ReducedDensityMatrix reduced_density(const D1State& state) {
    const int n = state.n_sites;
    ReducedDensityMatrix out;
    out.time_fs = state.time_fs;
    out.rho.resize(n, n);
    std::vector<cplx> s(static_cast<std::size_t>(n) * n);
    debye_waller_matrix(n, state.n_modes, state.lambda.data(), s.data());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            out.rho(i, j) = std::conj(state.alpha[i]) * state.alpha[j] * s[i * n + j];
    return out;
}

double coherence_size(const ReducedDensityMatrix& rho) {
    const int n = static_cast<int>(rho.rho.rows());
    double sum_abs = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double a = std::abs(rho.rho(i, j));
            sum_abs += a;
            sum_sq += a * a;
        }
    if (sum_sq <= 0.0) throw std::invalid_argument("coherence_size: zero density matrix");
    return sum_abs * sum_abs / (n * sum_sq);
}

double inverse_population_ratio(const ReducedDensityMatrix& rho, IprExponent exponent) {
    const int n = static_cast<int>(rho.rho.rows());
    const double tr = rho.trace();
    if (tr <= 0.0) throw std::invalid_argument("inverse_population_ratio: zero trace");
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double p = rho.rho(i, i).real() / tr;
        acc += exponent == IprExponent::squared ? p * p : p * p * p * p;
    }
    return 1.0 / acc;
}

double superradiance_factor(const ReducedDensityMatrix& rho,
                            const std::vector<Eigen::Vector3d>& dipoles) {
    const int n = static_cast<int>(rho.rho.rows());
    if (static_cast<int>(dipoles.size()) != n)
        throw std::invalid_argument("superradiance_factor: dipole count mismatch");
    cplx acc{0.0, 0.0};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) acc += dipoles[i].dot(dipoles[j]) * rho.rho(i, j);
    return acc.real();
}

std::vector<double> momentum_populations(const ReducedDensityMatrix& rho,
                                         const std::vector<double>& q_grid) {
    const int n = static_cast<int>(rho.rho.rows());
    std::vector<double> nk(q_grid.size(), 0.0);
    for (std::size_t ki = 0; ki < q_grid.size(); ++ki) {
        const double k = q_grid[ki];
        // n_k = (1/N) f^dagger rho f with f_n = e^{-ikn}
        cplx acc{0.0, 0.0};
        for (int i = 0; i < n; ++i) {
            cplx row{0.0, 0.0};
            for (int j = 0; j < n; ++j) {
                const double ph = -k * j;
                row += rho.rho(i, j) * cplx{std::cos(ph), std::sin(ph)};
            }
            const double ph = k * i;
            acc += cplx{std::cos(ph), std::sin(ph)} * row;
        }
        nk[ki] = acc.real() / n;
    }
    return nk;
}

std::vector<double> phonon_displacement(const D1State& state, const std::vector<double>& q_grid) {
    const int n = state.n_sites;
    const int nq = state.n_modes;
    std::vector<cplx> w(nq, {0.0, 0.0});
    for (int i = 0; i < n; ++i) {
        const double pop = std::norm(state.alpha[i]);
        const cplx* li = state.lambda.data() + static_cast<std::size_t>(i) * nq;
        for (int q = 0; q < nq; ++q) w[q] += pop * li[q];
    }
    std::vector<double> xi(n, 0.0);
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
    for (int site = 0; site < n; ++site) {
        double acc = 0.0;
        for (int q = 0; q < nq; ++q) {
            const double ph = q_grid[q] * site;
            acc += (cplx{std::cos(ph), std::sin(ph)} * w[q]).real();
        }
        xi[site] = inv_sqrt_n * acc;
    }
    return xi;
}

std::vector<double> chord_distances_nm(const RingGeometry& geom, int initial_site) {
    if (initial_site < 0 || initial_site >= geom.n_sites)
        throw std::invalid_argument("chord_distances_nm: site out of range");
    std::vector<double> d(geom.n_sites, 0.0);
    for (int i = 0; i < geom.n_sites; ++i)
        d[i] = (geom.positions[i] - geom.positions[initial_site]).norm() * units::angstrom_to_nm;
    return d;
}

double msd_nm2(const ReducedDensityMatrix& rho, const std::vector<double>& distances_nm) {
    const int n = static_cast<int>(rho.rho.rows());
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += distances_nm[i] * distances_nm[i] * rho.rho(i, i).real();
    return acc;
}

MsdFit fit_msd_power_law(const std::vector<double>& times_fs, const std::vector<double>& msd,
                         double t_lo_fs, double t_hi_fs) {
    if (times_fs.size() != msd.size())
        throw std::invalid_argument("fit_msd_power_law: size mismatch");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < times_fs.size(); ++i) {
        const double t = times_fs[i];
        if (t < t_lo_fs || t > t_hi_fs || msd[i] <= 0.0) continue;
        const double x = std::log(t);
        const double y = std::log(msd[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++count;
    }
    if (count < 3)
        throw std::invalid_argument("fit_msd_power_law: fit window not covered by the time grid");
    const double denom = count * sxx - sx * sx;
    MsdFit fit;
    fit.gamma_exponent = (count * sxy - sx * sy) / denom;
    fit.mobility_d = std::exp((sy - fit.gamma_exponent * sx) / count);
    return fit;
}

void ObservableSeries::accumulate(const ObservableSeries& other) {
    auto add = [](std::vector<double>& a, const std::vector<double>& b) {
        if (a.empty()) a.assign(b.size(), 0.0);
        for (std::size_t i = 0; i < b.size(); ++i) a[i] += b[i];
    };
    if (times_fs.empty()) {
        times_fs = other.times_fs;
        n_sites = other.n_sites;
    }
    add(lc, other.lc);
    add(ipr_rho, other.ipr_rho);
    add(ipr_rho_printed, other.ipr_rho_printed);
    add(ls, other.ls);
    add(msd_nm2, other.msd_nm2);
    add(p_sink, other.p_sink);
    add(e_ex, other.e_ex);
    add(e_bath, other.e_bath);
    add(e_int, other.e_int);
    add(e_total, other.e_total);
    add(delta_dev, other.delta_dev);
    add(n_k, other.n_k);
    add(xi_n, other.xi_n);
    add(population, other.population);
}

void ObservableSeries::scale(double factor) {
    auto mul = [factor](std::vector<double>& a) {
        for (auto& v : a) v *= factor;
    };
    mul(lc);
    mul(ipr_rho);
    mul(ipr_rho_printed);
    mul(ls);
    mul(msd_nm2);
    mul(p_sink);
    mul(e_ex);
    mul(e_bath);
    mul(e_int);
    mul(e_total);
    mul(delta_dev);
    mul(n_k);
    mul(xi_n);
    mul(population);
}

SeriesRecorder::SeriesRecorder(const DynamicsModel& model, const RingGeometry* geom,
                               int initial_site)
    : model_(&model), geom_(geom) {
    if (geom != nullptr) distances_nm_ = chord_distances_nm(*geom, initial_site);
    e_baseline_rad_ = model.k_rad(initial_site, initial_site);
    series_.n_sites = model.n_sites;
}

void SeriesRecorder::operator()(const D1State& state, const cplx*, const cplx*,
                                double deviation_omega0) {
    const auto rho = reduced_density(state);
    const double tr = rho.trace();
    series_.times_fs.push_back(state.time_fs);
    series_.lc.push_back(coherence_size(rho));
    series_.ipr_rho.push_back(inverse_population_ratio(rho, IprExponent::squared));
    series_.ipr_rho_printed.push_back(inverse_population_ratio(rho, IprExponent::printed_fourth));
    series_.p_sink.push_back(1.0 - tr);
    series_.delta_dev.push_back(deviation_omega0);
    if (geom_ != nullptr) {
        series_.ls.push_back(superradiance_factor(rho, geom_->dipoles));
        series_.msd_nm2.push_back(msd_nm2(rho, distances_nm_));
    }
    const auto e = energy_components(*model_, state);
    const double w0 = model_->omega0_rad;
    // the initial on-site energy is subtracted from the exciton and total
    // energies (it only shifts the zero)
    const double shift = e_baseline_rad_ * tr;
    series_.e_ex.push_back((e.e_ex - shift) / w0);
    series_.e_bath.push_back(e.e_bath / w0);
    series_.e_int.push_back(e.e_int / w0);
    series_.e_total.push_back((e.total() - shift) / w0);

    const auto nk = momentum_populations(rho, model_->q);
    series_.n_k.insert(series_.n_k.end(), nk.begin(), nk.end());
    const auto xi = phonon_displacement(state, model_->q);
    series_.xi_n.insert(series_.xi_n.end(), xi.begin(), xi.end());
    for (int i = 0; i < state.n_sites; ++i)
        series_.population.push_back(std::norm(state.alpha[i]));
}

SteadyStateSummary steady_state_summary(const ObservableSeries& series, double window_lo_fs,
                                        double window_hi_fs, double sigma_cm1, double j_mean_cm1) {
    if (series.times_fs.empty() || series.times_fs.back() < window_hi_fs)
        throw std::invalid_argument("steady_state_summary: window exceeds the trajectory");
    SteadyStateSummary out;
    out.window_lo_fs = window_lo_fs;
    out.window_hi_fs = window_hi_fs;
    out.sigma_over_j = sigma_cm1 / j_mean_cm1;
    double acc_lc = 0.0, acc_ipr = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < series.times_fs.size(); ++i) {
        const double t = series.times_fs[i];
        if (t < window_lo_fs || t > window_hi_fs) continue;
        acc_lc += series.lc[i];
        acc_ipr += series.ipr_rho[i];
        ++count;
    }
    if (count == 0) throw std::invalid_argument("steady_state_summary: empty window");
    out.assc = acc_lc / count;
    out.ass_ipr = acc_ipr / count;
    return out;
}

std::vector<double> sink_probability(const ObservableSeries& series) {
    return series.p_sink;
}

} // namespace polaring

#include "polaring/statics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace polaring {

SpectralRealization diagonalize(const ExcitonMatrix& k) {
    const int n = k.n();
    if (n < 1) throw std::invalid_argument("diagonalize: empty matrix");
    const double asym = (k.k - k.k.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-9 * std::max(1.0, k.k.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("diagonalize: matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(k.k);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("diagonalize: eigensolver failed");
    SpectralRealization r;
    r.energies = solver.eigenvalues();
    r.vectors = solver.eigenvectors();
    return r;
}

std::vector<std::pair<double, double>> ipr_spectrum(const SpectralRealization& r) {
    const int n = static_cast<int>(r.energies.size());
    std::vector<std::pair<double, double>> out(n);
    for (int i = 0; i < n; ++i) {
        double p4 = 0.0;
        for (int s = 0; s < n; ++s) {
            const double w = r.vectors(s, i) * r.vectors(s, i);
            p4 += w * w;
        }
        out[i] = {r.energies(i), 1.0 / p4};
    }
    return out;
}

SpacingEnsemble unfold_ensemble(const std::vector<SpectralRealization>& realizations) {
    if (realizations.size() < 100)
        throw std::invalid_argument("unfold_ensemble: need at least 100 realizations");
    const int n = static_cast<int>(realizations.front().energies.size());
    if (n < 2) throw std::invalid_argument("unfold_ensemble: need at least 2 levels");
    for (const auto& r : realizations)
        if (r.energies.size() != n)
            throw std::invalid_argument("unfold_ensemble: mixed spectrum dimensions");

    SpacingEnsemble ens;
    ens.n_levels = n;
    ens.per_level_mean_cm1.assign(n - 1, 0.0);
    for (const auto& r : realizations)
        for (int i = 0; i + 1 < n; ++i)
            ens.per_level_mean_cm1[i] += r.energies(i + 1) - r.energies(i);
    for (auto& m : ens.per_level_mean_cm1) m /= static_cast<double>(realizations.size());

    ens.unfolded.reserve(realizations.size() * (n - 1));
    ens.spacing_energy_cm1.reserve(realizations.size() * (n - 1));
    for (const auto& r : realizations) {
        for (int i = 0; i + 1 < n; ++i) {
            const double raw = r.energies(i + 1) - r.energies(i);
            const double mean = ens.per_level_mean_cm1[i];
            ens.unfolded.push_back(mean > 0.0 ? raw / mean : 0.0);
            ens.spacing_energy_cm1.push_back(0.5 * (r.energies(i + 1) + r.energies(i)));
        }
    }
    return ens;
}

double brody_normalization(double beta) {
    return std::pow(std::tgamma((beta + 2.0) / (beta + 1.0)), beta + 1.0);
}

double brody_pdf(double s, double beta) {
    const double a = brody_normalization(beta);
    return a * (beta + 1.0) * std::pow(s, beta) * std::exp(-a * std::pow(s, beta + 1.0));
}

double brody_sample(double beta, double u) {
    const double a = brody_normalization(beta);
    return std::pow(-std::log1p(-u) / a, 1.0 / (beta + 1.0));
}

namespace {

double brody_log_likelihood(const std::vector<double>& s, double beta) {
    const double a = brody_normalization(beta);
    const double n = static_cast<double>(s.size());
    double sum_log = 0.0, sum_pow = 0.0;
    for (double v : s) {
        const double sv = std::max(v, 1e-12);
        sum_log += std::log(sv);
        sum_pow += std::pow(sv, beta + 1.0);
    }
    return n * std::log(a) + n * std::log(beta + 1.0) + beta * sum_log - a * sum_pow;
}

} // namespace

BrodyFit fit_brody(const std::vector<double>& spacings) {
    if (spacings.empty()) throw std::invalid_argument("fit_brody: empty sample");
    constexpr double inv_phi = 0.6180339887498949;
    double lo = 0.0, hi = 1.2;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = brody_log_likelihood(spacings, x1);
    double f2 = brody_log_likelihood(spacings, x2);
    while (hi - lo > 1e-4) {
        if (f1 > f2) { // maximize
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = brody_log_likelihood(spacings, x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = brody_log_likelihood(spacings, x2);
        }
    }
    BrodyFit fit;
    fit.beta = 0.5 * (lo + hi);
    // the likelihood flattens against the lower bound when exact
    // degeneracies dominate; snap to the boundary if it wins outright
    const double at_zero = brody_log_likelihood(spacings, 0.0);
    if (at_zero >= brody_log_likelihood(spacings, fit.beta)) fit.beta = 0.0;
    fit.normalization_a = brody_normalization(fit.beta);
    fit.log_likelihood = brody_log_likelihood(spacings, fit.beta);
    fit.n_samples = static_cast<int>(spacings.size());
    return fit;
}

SpectralClass classify_beta(double beta) {
    if (beta > 0.9) return SpectralClass::diffusive;
    if (beta >= 0.5) return SpectralClass::intermediate;
    return SpectralClass::localized;
}

std::string to_string(SpectralClass c) {
    switch (c) {
        case SpectralClass::diffusive: return "diffusive";
        case SpectralClass::intermediate: return "intermediate";
        case SpectralClass::localized: return "localized";
    }
    return "unknown";
}

std::vector<EnergyWindow> make_quantile_windows(const std::vector<SpectralRealization>& realizations,
                                                int n_windows) {
    if (n_windows < 1) throw std::invalid_argument("make_quantile_windows: need >= 1 window");
    std::vector<double> pool;
    for (const auto& r : realizations)
        for (int i = 0; i < r.energies.size(); ++i) pool.push_back(r.energies(i));
    if (pool.empty()) throw std::invalid_argument("make_quantile_windows: empty ensemble");
    std::sort(pool.begin(), pool.end());
    std::vector<EnergyWindow> windows(n_windows);
    const std::size_t n = pool.size();
    for (int w = 0; w < n_windows; ++w) {
        const std::size_t i_lo = (n * w) / n_windows;
        const std::size_t i_hi = (n * (w + 1)) / n_windows;
        windows[w].lo_cm1 = pool[i_lo];
        windows[w].hi_cm1 = (w == n_windows - 1) ? pool[n - 1] : pool[std::min(i_hi, n - 1)];
    }
    return windows;
}

std::vector<BetaWindowResult> beta_energy_map(const std::vector<SpectralRealization>& realizations,
                                              const std::vector<EnergyWindow>& windows) {
    const SpacingEnsemble ens = unfold_ensemble(realizations);
    std::vector<BetaWindowResult> out(windows.size());
    for (std::size_t w = 0; w < windows.size(); ++w) {
        out[w].window = windows[w];
        std::vector<double> sample;
        for (std::size_t i = 0; i < ens.unfolded.size(); ++i) {
            const double e = ens.spacing_energy_cm1[i];
            const bool last = (w == windows.size() - 1);
            if (e >= windows[w].lo_cm1 && (e < windows[w].hi_cm1 || (last && e <= windows[w].hi_cm1)))
                sample.push_back(ens.unfolded[i]);
        }
        out[w].n_spacings = static_cast<int>(sample.size());
        if (sample.size() < 500) {
            out[w].fitted = false;
            continue;
        }
        out[w].fit = fit_brody(sample);
        out[w].klass = classify_beta(out[w].fit.beta);
        out[w].fitted = true;
    }
    return out;
}

} // namespace polaring

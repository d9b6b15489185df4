// Spectral statistics of disordered exciton matrices: eigen-solutions,
// per-state inverse participation ratios, ensemble unfolding of level
// spacings, and maximum-likelihood Brody fits.

#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "polaring/model.hpp"

namespace polaring {

struct SpectralRealization {
    Eigen::VectorXd energies;  // ascending, cm^-1
    Eigen::MatrixXd vectors;   // orthonormal eigenvectors as columns
};

SpectralRealization diagonalize(const ExcitonMatrix& k);

// 1/sum_n |psi_n|^4 per eigenstate, paired with its energy.
std::vector<std::pair<double, double>> ipr_spectrum(const SpectralRealization& r);

struct SpacingEnsemble {
    std::vector<double> unfolded;           // pooled dimensionless spacings
    std::vector<double> spacing_energy_cm1; // midpoint energy of each spacing
    std::vector<double> per_level_mean_cm1; // ensemble mean spacing per level index
    int n_levels = 0;
};

// Divides each raw spacing by the ensemble-average spacing at its level
// index; degenerate indices with zero mean keep their raw (zero) value.
SpacingEnsemble unfold_ensemble(const std::vector<SpectralRealization>& realizations);

struct BrodyFit {
    double beta = 0.0;
    double normalization_a = 1.0; // Gamma[(beta+2)/(beta+1)]^(beta+1)
    double log_likelihood = 0.0;
    int n_samples = 0;
};

double brody_normalization(double beta);
double brody_pdf(double s, double beta);
// inverse-CDF sample, for calibration tests and synthetic ensembles
double brody_sample(double beta, double u);

// Maximum-likelihood fit of beta on [0, 1.2] by golden section; spacings
// are clamped at 1e-12 so exact degeneracies push beta to zero instead
// of breaking the likelihood.
BrodyFit fit_brody(const std::vector<double>& spacings);

enum class SpectralClass { diffusive, intermediate, localized };
SpectralClass classify_beta(double beta);
std::string to_string(SpectralClass c);

struct EnergyWindow {
    double lo_cm1 = 0.0;
    double hi_cm1 = 0.0;
};

// Equal-population quantile windows of the pooled spectrum.
std::vector<EnergyWindow> make_quantile_windows(const std::vector<SpectralRealization>& realizations,
                                                int n_windows);

struct BetaWindowResult {
    EnergyWindow window;
    BrodyFit fit;
    SpectralClass klass = SpectralClass::localized;
    bool fitted = false; // false when the window held < 500 spacings
    int n_spacings = 0;
};

// Brody fit per energy window, spacings assigned by midpoint energy.
std::vector<BetaWindowResult> beta_energy_map(const std::vector<SpectralRealization>& realizations,
                                              const std::vector<EnergyWindow>& windows);

} // namespace polaring

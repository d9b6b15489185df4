// Run configuration: INI-style file with [section] key = value lines,
// strict schema validation (unknown or duplicate keys are errors, every
// physical key carries its unit in its name), defaults taken from the
// published ring parameters.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "polaring/lineshape.hpp"
#include "polaring/model.hpp"

namespace polaring {

enum class Experiment { statics, dynamics, transfer, spectra, msd };

std::string to_string(Experiment e);

struct RunConfig {
    // [geometry]
    int n_sites = 16;
    double radius_angstrom = 23.0;
    double intra_dimer_angstrom = 9.1;
    double inter_dimer_angstrom = 8.9;
    double intra_dimer_angle_deg = 167.5;
    double inter_dimer_angle_deg = 147.5;
    // [coupling]
    double j1_intra_cm1 = 594.0;
    double j2_inter_cm1 = 491.0;
    double dipole_constant_a3cm1 = 640725.0;
    double site_energy_baseline_cm1 = 0.0;
    // [disorder]
    double sigma_e_cm1 = 0.0;
    double sigma_j_cm1 = 0.0;
    std::uint64_t seed = 12345;
    // [bath]
    double omega0_cm1 = 1670.0;
    double bandwidth_w = 0.5;
    double huang_rhys_s = 0.5;
    // [integrator]
    double dt_fs = 0.05;
    double t_max_fs = 300.0;
    int record_stride = 20;
    double regularization_eps = 1e-8;
    // [sink]
    double gamma_omega0 = 0.0; // 0 disables the sink
    int sink_site = 0;
    // [lineshape]
    BathLineshapeParams lineshape;
    // [spectra]
    double tw_fs = 0.0;
    double tau_max_fs = 400.0;
    double spectra_t_max_fs = 400.0;
    double spectra_step_fs = 2.0;
    int pad_factor = 4;
    // [statics]
    int n_windows = 8;
    // [msd]
    double msd_fit_lo_fs = 1.6;
    double msd_fit_hi_fs = 16.0;
    // [steady_state]
    double steady_window_lo_fs = 150.0;
    double steady_window_hi_fs = 300.0;
    // [run]
    Experiment experiment = Experiment::dynamics;
    int ensemble = 1;
    int initial_site = 8;
    std::string output_dir = "out";
    int threads = 0; // 0 = hardware
    bool plots = false;
    bool force = false;

    std::string canonical_dump() const;
    std::uint64_t config_hash() const;

    RingGeometry make_geometry() const;
    CouplingParams make_coupling() const;
    PhononBath make_bath() const;
    DisorderSpec make_disorder(std::uint64_t realization) const;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Parses and validates; error messages carry the offending key, its
// unit, and the line number.
RunConfig parse_config(const std::string& text, const std::string& origin = "<string>");
RunConfig load_config(const std::filesystem::path& path);

// Applies "section.key=value" after file parsing, same validation path.
void apply_override(RunConfig& cfg, const std::string& dotted_key, const std::string& value);

// Re-checks cross-field constraints; called by the parser and after
// overrides.
void validate(const RunConfig& cfg);

} // namespace polaring

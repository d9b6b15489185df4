// polaring: exciton-polaron dynamics in disordered molecular nanorings.
//
// Subcommands map onto the experiment drivers; every flag overrides the
// corresponding config key, so `polaring dynamics --config run.ini
// --sigma-e 300` is the same run as editing the file.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "polaring/csv.hpp"
#include "polaring/config.hpp"
#include "polaring/ensemble.hpp"
#include "polaring/figures.hpp"
#include "polaring/model.hpp"
#include "polaring/units.hpp"

namespace {

using polaring::RunConfig;

struct CommonFlags {
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> overrides;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "configuration file (INI sections)");
        auto opt = [this, cmd](const std::string& flag, const std::string& key,
                               const std::string& help) {
            cmd->add_option_function<std::string>(
                flag, [this, key](const std::string& v) { overrides.emplace_back(key, v); }, help);
        };
        opt("--sigma-e", "disorder.sigma_e_cm1", "diagonal disorder std (cm^-1)");
        opt("--sigma-j", "disorder.sigma_j_cm1", "off-diagonal disorder std (cm^-1)");
        opt("--seed", "disorder.seed", "RNG seed");
        opt("--huang-rhys", "bath.huang_rhys_s", "Huang-Rhys factor S");
        opt("--bandwidth", "bath.bandwidth_w", "phonon bandwidth W in [0,1]");
        opt("--gamma-sink", "sink.gamma_omega0", "sink rate in units of omega0 (0 = closed)");
        opt("--sink-site", "sink.sink_site", "site coupled to the sink");
        opt("--initial-site", "run.initial_site", "initially excited site");
        opt("--tmax", "integrator.t_max_fs", "propagation time (fs)");
        opt("--dt", "integrator.dt_fs", "integrator step (fs)");
        opt("--record-stride", "integrator.record_stride", "steps between snapshots");
        opt("--ensemble", "run.ensemble", "number of disorder realizations");
        opt("--threads", "run.threads", "worker threads (0 = hardware)");
        opt("--output", "run.output_dir", "output directory");
        opt("--tw", "spectra.tw_fs", "waiting time T_w (fs)");
        opt("--tau-max", "spectra.tau_max_fs", "coherence-time span (fs)");
        opt("--t-max", "spectra.t_max_fs", "detection-time span (fs)");
        opt("--step", "spectra.step_fs", "response grid step (fs)");
        opt("--windows", "statics.n_windows", "energy windows for the Brody map");
        cmd->add_flag_function(
            "--plots", [this](std::int64_t) { overrides.emplace_back("run.plots", "true"); },
            "emit quick-look PNGs next to the CSVs");
        cmd->add_flag_function(
            "--force", [this](std::int64_t) { overrides.emplace_back("run.force", "true"); },
            "overwrite an existing run directory");
    }

    RunConfig build(const std::string& experiment) const {
        RunConfig cfg = config_path.empty() ? RunConfig{} : polaring::load_config(config_path);
        polaring::apply_override(cfg, "run.experiment", experiment);
        for (const auto& [key, value] : overrides) polaring::apply_override(cfg, key, value);
        return cfg;
    }
};

int run_with(const CommonFlags& flags, const std::string& experiment) {
    const RunConfig cfg = flags.build(experiment);
    const auto outcome = polaring::run_experiment(cfg);
    if (outcome.excluded > 0)
        std::cerr << "warning: " << outcome.excluded << " realization(s) excluded\n";
    std::cout << "wrote " << outcome.files.size() << " file(s) + manifest to "
              << outcome.output_dir.string() << "\n";
    return outcome.exit_code;
}

int dump_model(const CommonFlags& flags) {
    const RunConfig cfg = flags.build("dynamics");
    const auto geom = cfg.make_geometry();
    const auto shifts =
        polaring::sample_disorder(cfg.make_disorder(0), cfg.n_sites);
    const auto k = polaring::build_exciton_matrix(geom, cfg.make_coupling(), shifts);
    const auto bath = cfg.make_bath();

    std::filesystem::create_directories(cfg.output_dir);
    const std::filesystem::path dir(cfg.output_dir);
    {
        std::vector<std::string> cols{"site"};
        for (int j = 0; j < cfg.n_sites; ++j) cols.push_back("k_" + std::to_string(j) + "_cm1");
        polaring::CsvWriter w(cols);
        for (int i = 0; i < cfg.n_sites; ++i) {
            std::vector<double> row{static_cast<double>(i)};
            for (int j = 0; j < cfg.n_sites; ++j) row.push_back(k.k(i, j));
            w.add_row(row);
        }
        w.write(dir / "exciton_matrix.csv");
    }
    {
        polaring::CsvWriter w({"q", "omega_q_cm1", "g_q"});
        for (int i = 0; i < bath.n_modes; ++i)
            w.add_row({bath.q[i], bath.omega_q_cm1[i], bath.g_q[i]});
        w.write(dir / "phonon_bath.csv");
    }
    std::cout << "wrote exciton_matrix.csv and phonon_bath.csv to " << cfg.output_dir << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"exciton-polaron dynamics in disordered nanorings"};
    app.require_subcommand(1);

    CommonFlags statics_flags, dynamics_flags, transfer_flags, spectra_flags, msd_flags,
        dump_flags, figure_flags;

    auto* statics_cmd =
        app.add_subcommand("statics", "disorder-ensemble spectral statistics (IPR, Brody map)");
    statics_flags.attach(statics_cmd);
    auto* dynamics_cmd =
        app.add_subcommand("dynamics", "D1 trajectory observables over a disorder ensemble");
    dynamics_flags.attach(dynamics_cmd);
    auto* transfer_cmd =
        app.add_subcommand("transfer", "dynamics with a dissipative sink (transfer efficiency)");
    transfer_flags.attach(transfer_cmd);
    auto* spectra_cmd =
        app.add_subcommand("spectra", "2D photon-echo and linear absorption spectra");
    spectra_flags.attach(spectra_cmd);
    auto* msd_cmd = app.add_subcommand("msd", "mean squared displacement and diffusion exponent");
    msd_flags.attach(msd_cmd);
    auto* dump_cmd = app.add_subcommand("dump-model", "write K_nm and (q, omega_q, g_q) as CSV");
    dump_flags.attach(dump_cmd);

    std::string figure_name;
    double figure_scale = 1.0;
    std::string figure_out = "figures";
    auto* figure_cmd = app.add_subcommand("figure", "reproduce a published figure's data tables");
    figure_cmd->add_option("name", figure_name, "figure name (fig2..fig10)")->required();
    figure_cmd->add_option("--scale", figure_scale, "ensemble scale factor (1.0 = published)");
    figure_cmd->add_option("--out", figure_out, "output root directory");
    figure_flags.attach(figure_cmd);

    CLI11_PARSE(app, argc, argv);

    try {
        if (statics_cmd->parsed()) return run_with(statics_flags, "statics");
        if (dynamics_cmd->parsed()) return run_with(dynamics_flags, "dynamics");
        if (transfer_cmd->parsed()) return run_with(transfer_flags, "transfer");
        if (spectra_cmd->parsed()) return run_with(spectra_flags, "spectra");
        if (msd_cmd->parsed()) return run_with(msd_flags, "msd");
        if (dump_cmd->parsed()) return dump_model(dump_flags);
        if (figure_cmd->parsed()) {
            const RunConfig base = figure_flags.build("dynamics");
            polaring::reproduce_figure(figure_name, base, figure_scale, figure_out);
            std::cout << "wrote " << figure_name << " tables under " << figure_out << "\n";
            return 0;
        }
    } catch (const polaring::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

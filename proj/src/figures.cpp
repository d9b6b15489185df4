#include "polaring/figures.hpp"

#include <cmath>
#include <stdexcept>

#include "polaring/csv.hpp"
#include "polaring/ensemble.hpp"
#include "polaring/observables.hpp"
#include "polaring/spectroscopy.hpp"
#include "polaring/units.hpp"

namespace polaring {

namespace fs = std::filesystem;

std::vector<std::string> figure_names() {
    return {"fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10"};
}

namespace {

int scaled(double reference, double scale) {
    return std::max(1, static_cast<int>(std::llround(reference * scale)));
}

RunConfig with_disorder(RunConfig cfg, const std::string& kind, double sigma) {
    cfg.sigma_e_cm1 = (kind == "diagonal" || kind == "both") ? sigma : 0.0;
    cfg.sigma_j_cm1 = (kind == "offdiagonal" || kind == "both") ? sigma : 0.0;
    return cfg;
}

void statics_panels(const RunConfig& base, double scale, const fs::path& dir) {
    const std::vector<double> sigmas{0,   50,  100, 200, 300, 400,
                                     500, 600, 700, 800, 900, 1000};
    for (const std::string kind : {"diagonal", "offdiagonal", "both"}) {
        for (double sigma : sigmas) {
            RunConfig cfg = with_disorder(base, kind, sigma);
            cfg.experiment = Experiment::statics;
            cfg.ensemble = scaled(10000, scale);
            cfg.output_dir =
                (dir / (kind + "_sigma" + CsvWriter::format(sigma, 6))).string();
            cfg.force = true;
            run_statics(cfg);
        }
    }
}

void dynamics_heatmaps(const RunConfig& base, double scale, const fs::path& dir) {
    const std::vector<double> s_values{0.0, 0.5, 1.0, 1.5};
    for (const std::string kind : {"clean", "diagonal", "offdiagonal"}) {
        for (double s : s_values) {
            RunConfig cfg = with_disorder(base, kind, kind == "clean" ? 0.0 : 100.0);
            cfg.experiment = Experiment::dynamics;
            cfg.huang_rhys_s = s;
            cfg.ensemble = kind == "clean" ? 1 : scaled(1000, scale);
            cfg.t_max_fs = 200.0;
            cfg.output_dir =
                (dir / (kind + "_S" + CsvWriter::format(s, 3))).string();
            cfg.force = true;
            run_dynamics(cfg);
        }
    }
}

void steady_state_grid(const RunConfig& base, double scale, const fs::path& dir) {
    const std::vector<double> s_values{0.0, 0.5, 1.0, 1.5};
    const std::vector<double> sigmas{100, 300, 500, 700};
    CsvWriter w({"disorder", "sigma_cm1", "sigma_over_j", "huang_rhys_s", "assc_sites",
                 "ass_ipr_sites"});
    for (const std::string kind : {"diagonal", "offdiagonal"}) {
        for (double sigma : sigmas) {
            for (double s : s_values) {
                RunConfig cfg = with_disorder(base, kind, sigma);
                cfg.huang_rhys_s = s;
                cfg.ensemble = scaled(1000, scale);
                cfg.t_max_fs = 300.0;
                const EnsembleSeries ens = average_dynamics(cfg, false);
                const auto ss = steady_state_summary(ens.mean, cfg.steady_window_lo_fs,
                                                     cfg.steady_window_hi_fs, sigma);
                w.add_raw_row(kind + ',' + CsvWriter::format(sigma) + ',' +
                              CsvWriter::format(ss.sigma_over_j) + ',' + CsvWriter::format(s) +
                              ',' + CsvWriter::format(ss.assc) + ',' +
                              CsvWriter::format(ss.ass_ipr));
            }
        }
    }
    fs::create_directories(dir);
    w.write(dir / "steady_state_grid.csv");
}

void sink_curves(const RunConfig& base, double scale, const fs::path& dir) {
    const std::vector<double> s_values{0.0, 0.5, 1.0, 1.5};
    for (const std::string kind : {"diagonal", "offdiagonal", "both"}) {
        for (double s : s_values) {
            RunConfig cfg = with_disorder(base, kind, 300.0);
            cfg.experiment = Experiment::transfer;
            cfg.huang_rhys_s = s;
            cfg.gamma_omega0 = 0.1;
            cfg.sink_site = 0;
            cfg.initial_site = 8;
            cfg.ensemble = scaled(1000, scale);
            cfg.t_max_fs = 1000.0;
            cfg.output_dir = (dir / (kind + "_S" + CsvWriter::format(s, 3))).string();
            cfg.force = true;
            run_dynamics(cfg);
        }
    }
}

void momentum_relaxation(const RunConfig& base, double scale, const fs::path& dir) {
    const std::vector<double> s_values{0.0, 0.5, 1.0, 1.5};
    for (double sigma : {100.0, 300.0}) {
        for (double s : s_values) {
            RunConfig cfg = with_disorder(base, "diagonal", sigma);
            cfg.experiment = Experiment::transfer;
            cfg.huang_rhys_s = s;
            cfg.gamma_omega0 = 0.1;
            cfg.sink_site = 0;
            cfg.initial_site = 8;
            cfg.ensemble = scaled(1000, scale);
            cfg.t_max_fs = 500.0;
            cfg.output_dir = (dir / ("sigmaE" + CsvWriter::format(sigma, 6) + "_S" +
                                     CsvWriter::format(s, 3)))
                                 .string();
            cfg.force = true;
            run_dynamics(cfg);
        }
    }
}

void energy_relaxation(const RunConfig& base, double scale, const fs::path& dir) {
    for (double s : {0.5, 1.0}) {
        RunConfig cfg = with_disorder(base, "diagonal", 100.0);
        cfg.experiment = Experiment::dynamics;
        cfg.huang_rhys_s = s;
        cfg.ensemble = scaled(1000, scale);
        cfg.t_max_fs = 300.0;
        cfg.output_dir = (dir / ("S" + CsvWriter::format(s, 3))).string();
        cfg.force = true;
        run_dynamics(cfg);
    }
}

void spectra_panels(const RunConfig& base, double scale, const fs::path& dir) {
    struct Panel {
        const char* name;
        const char* kind;
        double sigma;
        int ensemble;
    };
    for (const Panel p : {Panel{"clean", "clean", 0.0, 1}, Panel{"sigmaE100", "diagonal", 100.0, 200},
                          Panel{"sigmaJ100", "offdiagonal", 100.0, 200}}) {
        RunConfig cfg = with_disorder(base, p.kind, p.sigma);
        cfg.experiment = Experiment::spectra;
        cfg.ensemble = p.ensemble == 1 ? 1 : scaled(p.ensemble, scale);
        cfg.tw_fs = 0.0;
        cfg.output_dir = (dir / p.name).string();
        cfg.force = true;
        run_spectra(cfg);
    }
}

void msd_panels(const RunConfig& base, double scale, const fs::path& dir) {
    const std::vector<double> s_values{0.0, 0.5, 1.0, 1.5};
    CsvWriter fits({"disorder", "sigma_cm1", "huang_rhys_s", "mobility_d", "gamma_exponent"});
    for (const std::string kind : {"diagonal", "offdiagonal"}) {
        for (double sigma : {100.0, 300.0}) {
            for (double s : s_values) {
                RunConfig cfg = with_disorder(base, kind, sigma);
                cfg.experiment = Experiment::msd;
                cfg.huang_rhys_s = s;
                cfg.ensemble = scaled(1000, scale);
                cfg.t_max_fs = 50.0;
                cfg.record_stride = 4; // 0.2 fs sampling across the fit window
                const EnsembleSeries ens = average_dynamics(cfg, false);
                const fs::path cell = dir / (kind + "_sigma" + CsvWriter::format(sigma, 6) +
                                             "_S" + CsvWriter::format(s, 3));
                fs::create_directories(cell);
                CsvWriter curve({"time_fs", "msd_nm2"});
                for (std::size_t i = 0; i < ens.mean.times_fs.size(); ++i)
                    curve.add_row({ens.mean.times_fs[i], ens.mean.msd_nm2[i]});
                curve.write(cell / "trajectory_msd.csv");
                const auto fit = fit_msd_power_law(ens.mean.times_fs, ens.mean.msd_nm2,
                                                   cfg.msd_fit_lo_fs, cfg.msd_fit_hi_fs);
                fits.add_raw_row(kind + ',' + CsvWriter::format(sigma) + ',' +
                                 CsvWriter::format(s) + ',' + CsvWriter::format(fit.mobility_d) +
                                 ',' + CsvWriter::format(fit.gamma_exponent));
            }
        }
    }
    fs::create_directories(dir);
    fits.write(dir / "msd_fits.csv");
}

} // namespace

void reproduce_figure(const std::string& name, const RunConfig& base, double scale,
                      const fs::path& out_root) {
    const fs::path dir = out_root / name;
    fs::create_directories(dir);
    if (name == "fig2") statics_panels(base, scale, dir);
    else if (name == "fig3") dynamics_heatmaps(base, scale, dir);
    else if (name == "fig4" || name == "fig5") steady_state_grid(base, scale, dir);
    else if (name == "fig6") sink_curves(base, scale, dir);
    else if (name == "fig7") momentum_relaxation(base, scale, dir);
    else if (name == "fig8") energy_relaxation(base, scale, dir);
    else if (name == "fig9") spectra_panels(base, scale, dir);
    else if (name == "fig10") msd_panels(base, scale, dir);
    else {
        std::string valid;
        for (const auto& n : figure_names()) valid += n + " ";
        throw ConfigError("unknown figure '" + name + "'; valid names: " + valid);
    }
}

} // namespace polaring

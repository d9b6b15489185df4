#include "polaring/ensemble.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "polaring/csv.hpp"
#include "polaring/plots.hpp"
#include "polaring/statics.hpp"
#include "polaring/units.hpp"

namespace polaring {

namespace fs = std::filesystem;
using json = nlohmann::json;

int resolve_threads(int configured) {
    if (configured > 0) return configured;
    if (const char* env = std::getenv("POLARING_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

std::vector<std::optional<std::string>> parallel_realizations(
    int n, int threads, const std::function<void(int)>& fn) {
    std::vector<std::optional<std::string>> errors(n);
    std::atomic<int> next{0};
    auto worker = [&] {
        for (;;) {
            const int idx = next.fetch_add(1);
            if (idx >= n) break;
            try {
                fn(idx);
            } catch (const std::exception& e) {
                errors[idx] = e.what();
            } catch (...) {
                errors[idx] = "unknown error";
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        const int count = std::min(threads, std::max(1, n));
        for (int i = 0; i < count; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return errors;
}

namespace {

std::string iso_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
    return buf;
}

struct ManifestBuilder {
    json j;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    fs::path dir;
    std::vector<fs::path> files;

    ManifestBuilder(const RunConfig& cfg, const fs::path& out_dir) : dir(out_dir) {
        j["config_hash"] = hex64(cfg.config_hash());
        j["code_version"] = code_version;
        j["experiment"] = to_string(cfg.experiment);
        j["started_utc"] = iso_now();
        j["ensemble"] = cfg.ensemble;
        j["seed"] = cfg.seed;
        j["config"] = cfg.canonical_dump();
    }

    void add_file(const fs::path& p) { files.push_back(p); }

    void set_exclusions(const std::vector<int>& excluded, int ensemble) {
        j["excluded_indices"] = excluded;
        j["excluded"] = excluded.size();
        j["exclusion_fraction"] =
            ensemble > 0 ? static_cast<double>(excluded.size()) / ensemble : 0.0;
    }

    void set_sigma_dev(const std::vector<double>& vals) {
        double mn = 0.0, mx = 0.0, mean = 0.0;
        int n = 0;
        for (double v : vals) {
            if (!std::isfinite(v)) continue;
            if (n == 0) { mn = mx = v; }
            mn = std::min(mn, v);
            mx = std::max(mx, v);
            mean += v;
            ++n;
        }
        json d;
        d["applicable"] = n > 0;
        if (n > 0) {
            d["min"] = mn;
            d["max"] = mx;
            d["mean"] = mean / n;
            d["count"] = n;
        }
        j["sigma_dev"] = d;
    }

    // checksums every output, then writes atomically via rename
    fs::path finish() {
        json outputs = json::array();
        for (const auto& f : files)
            outputs.push_back({{"file", f.filename().string()}, {"fnv1a", hex64(fnv1a_file(f))}});
        j["outputs"] = outputs;
        j["finished_utc"] = iso_now();
        j["wall_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const fs::path tmp = dir / "run_manifest.json.tmp";
        const fs::path final_path = dir / "run_manifest.json";
        {
            std::ofstream out(tmp, std::ios::binary);
            out << j.dump(2) << '\n';
        }
        fs::rename(tmp, final_path);
        return final_path;
    }
};

fs::path prepare_output_dir(const RunConfig& cfg) {
    const fs::path dir(cfg.output_dir);
    if (fs::exists(dir / "run_manifest.json") && !cfg.force)
        throw ConfigError("output directory '" + dir.string() +
                          "' already holds a run; pass force to overwrite");
    fs::create_directories(dir);
    return dir;
}

void write_series_csvs(const RunConfig& cfg, const ObservableSeries& s, ManifestBuilder& mb,
                       bool with_sink) {
    const fs::path dir = mb.dir;
    auto emit = [&](const std::string& name, const std::vector<std::string>& cols,
                    const std::vector<const std::vector<double>*>& series) {
        CsvWriter w(cols);
        for (std::size_t i = 0; i < s.times_fs.size(); ++i) {
            std::vector<double> row{s.times_fs[i]};
            for (const auto* v : series) row.push_back((*v)[i]);
            w.add_row(row);
        }
        w.write(dir / name);
        mb.add_file(dir / name);
    };
    emit("trajectory_lc.csv", {"time_fs", "lc_sites"}, {&s.lc});
    emit("trajectory_ipr_rho.csv", {"time_fs", "ipr_rho_sites", "ipr_rho_printed"},
         {&s.ipr_rho, &s.ipr_rho_printed});
    if (!s.ls.empty()) emit("trajectory_ls.csv", {"time_fs", "ls_dipoles"}, {&s.ls});
    if (!s.msd_nm2.empty()) emit("trajectory_msd.csv", {"time_fs", "msd_nm2"}, {&s.msd_nm2});
    if (with_sink) emit("trajectory_psink.csv", {"time_fs", "p_sink"}, {&s.p_sink});
    emit("trajectory_energy.csv",
         {"time_fs", "e_ex_omega0", "e_bath_omega0", "e_int_omega0", "e_total_omega0"},
         {&s.e_ex, &s.e_bath, &s.e_int, &s.e_total});
    emit("trajectory_delta.csv", {"time_fs", "delta_omega0"}, {&s.delta_dev});

    auto emit_grid = [&](const std::string& name, const std::string& idx_col,
                         const std::vector<double>& grid) {
        CsvWriter w({"time_fs", idx_col, "value"});
        const int n = s.n_sites;
        for (std::size_t ti = 0; ti < s.times_fs.size(); ++ti)
            for (int i = 0; i < n; ++i)
                w.add_row({s.times_fs[ti], static_cast<double>(i), grid[ti * n + i]});
        w.write(dir / name);
        mb.add_file(dir / name);
    };
    emit_grid("trajectory_nk.csv", "k_index", s.n_k);
    emit_grid("trajectory_xi.csv", "site", s.xi_n);
    emit_grid("trajectory_population.csv", "site", s.population);

    if (cfg.plots) {
        const int n = s.n_sites;
        const int nt = static_cast<int>(s.times_fs.size());
        std::vector<fs::path> made;
        made.push_back(plot_heatmap(dir / "population.png", s.population, nt, n, 0.0, 0.15));
        made.push_back(plot_heatmap(dir / "xi.png", s.xi_n, nt, n, -0.5, 0.5));
        made.push_back(plot_line(dir / "lc.png", s.times_fs, s.lc));
        for (const auto& p : made) mb.add_file(p);
    }
}

} // namespace

EnsembleSeries average_dynamics(const RunConfig& cfg, bool with_sink) {
    const RingGeometry geom = cfg.make_geometry();
    const CouplingParams coupling = cfg.make_coupling();
    const PhononBath bath = cfg.make_bath();
    const int threads = resolve_threads(cfg.threads);

    const SinkSpec sink = with_sink
        ? make_site_sink(cfg.n_sites, cfg.sink_site,
                         cfg.gamma_omega0 > 0.0 ? cfg.gamma_omega0 : 0.1)
        : SinkSpec{};

    IntegratorConfig integ;
    integ.dt_fs = cfg.dt_fs;
    integ.t_max_fs = cfg.t_max_fs;
    integ.record_stride = cfg.record_stride;
    integ.regularization_eps = cfg.regularization_eps;

    EnsembleSeries out;
    out.sigma_dev.assign(cfg.ensemble, std::numeric_limits<double>::quiet_NaN());
    std::vector<char> aborted(cfg.ensemble, 0);

    OrderedReducer<ObservableSeries> reducer([&](int, ObservableSeries&& s) {
        if (s.times_fs.empty()) return; // excluded realization
        out.mean.accumulate(s);
        ++out.included;
    });

    auto errors = parallel_realizations(cfg.ensemble, threads, [&](int idx) {
        const DisorderShifts shifts = sample_disorder(cfg.make_disorder(idx), cfg.n_sites);
        const ExcitonMatrix k = build_exciton_matrix(geom, coupling, shifts);
        const DynamicsModel model = make_dynamics_model(k, bath);
        D1State state = make_localized_state(cfg.n_sites, cfg.n_sites, cfg.initial_site);
        SeriesRecorder rec(model, &geom, cfg.initial_site);
        const PropagationResult res =
            propagate(model, state, integ, std::ref(rec), with_sink ? &sink : nullptr);
        if (res.aborted) {
            aborted[idx] = 1;
            reducer.skip(idx);
            return;
        }
        ObservableSeries s = rec.take();
        const auto sd = relative_deviation(s.delta_dev, s.e_bath);
        out.sigma_dev[idx] = sd.has_value() ? *sd : std::numeric_limits<double>::quiet_NaN();
        reducer.deposit(idx, std::move(s));
    });

    for (int i = 0; i < cfg.ensemble; ++i)
        if (errors[i].has_value() || aborted[i]) out.excluded_indices.push_back(i);
    if (out.included > 0) out.mean.scale(1.0 / out.included);
    return out;
}

EnsembleResponse average_response(const RunConfig& cfg) {
    const RingGeometry geom = cfg.make_geometry();
    const CouplingParams coupling = cfg.make_coupling();
    const PhononBath bath = cfg.make_bath();
    const int threads = resolve_threads(cfg.threads);
    // one realization parallelizes inside; many parallelize across
    const bool inner = cfg.ensemble < 2 * threads;
    const int inner_threads = inner ? threads : 1;
    const int outer_threads = inner ? 1 : threads;

    IntegratorConfig integ;
    integ.dt_fs = cfg.dt_fs;
    integ.regularization_eps = cfg.regularization_eps;

    ResponseGridSpec grid;
    grid.tau_max_fs = cfg.tau_max_fs;
    grid.t_max_fs = cfg.spectra_t_max_fs;
    grid.step_fs = cfg.spectra_step_fs;

    EnsembleResponse out;
    OrderedReducer<ResponseGrid> reducer([&](int, ResponseGrid&& g) {
        if (g.tau_fs.empty()) return;
        out.mean.accumulate(g);
        ++out.included;
    });

    auto errors = parallel_realizations(cfg.ensemble, outer_threads, [&](int idx) {
        const DisorderShifts shifts = sample_disorder(cfg.make_disorder(idx), cfg.n_sites);
        const ExcitonMatrix k = build_exciton_matrix(geom, coupling, shifts);
        const DynamicsModel model = make_dynamics_model(k, bath);
        const AmplitudeTable table = build_amplitude_table(
            model, -cfg.spectra_t_max_fs, cfg.tau_max_fs + cfg.tw_fs + cfg.spectra_t_max_fs,
            cfg.spectra_step_fs, integ, inner_threads);
        ResponseGrid g =
            response_functions(table, geom, cfg.lineshape, cfg.tw_fs, grid, inner_threads);
        reducer.deposit(idx, std::move(g));
    });

    for (int i = 0; i < cfg.ensemble; ++i)
        if (errors[i].has_value()) out.excluded_indices.push_back(i);
    if (out.included > 0) out.mean.scale(1.0 / out.included);
    return out;
}

RunOutcome run_statics(const RunConfig& cfg) {
    const fs::path dir = prepare_output_dir(cfg);
    ManifestBuilder mb(cfg, dir);
    const RingGeometry geom = cfg.make_geometry();
    const CouplingParams coupling = cfg.make_coupling();
    const int threads = resolve_threads(cfg.threads);

    std::vector<SpectralRealization> reals(cfg.ensemble);
    auto errors = parallel_realizations(cfg.ensemble, threads, [&](int idx) {
        const DisorderShifts shifts = sample_disorder(cfg.make_disorder(idx), cfg.n_sites);
        reals[idx] = diagonalize(build_exciton_matrix(geom, coupling, shifts));
    });
    std::vector<int> excluded;
    std::vector<SpectralRealization> kept;
    kept.reserve(reals.size());
    for (int i = 0; i < cfg.ensemble; ++i) {
        if (errors[i].has_value()) excluded.push_back(i);
        else kept.push_back(std::move(reals[i]));
    }

    const double sigma = std::max(cfg.sigma_e_cm1, cfg.sigma_j_cm1);
    {
        CsvWriter w({"sigma", "energy_cm1", "ipr"});
        for (const auto& r : kept)
            for (const auto& [e, ipr] : ipr_spectrum(r)) w.add_row({sigma, e, ipr});
        w.write(dir / "ipr_vs_energy.csv");
        mb.add_file(dir / "ipr_vs_energy.csv");
    }
    {
        // sigma and the window bounds are cm^-1
        CsvWriter w({"sigma", "window_lo", "window_hi", "beta", "class"});
        const auto windows = make_quantile_windows(kept, cfg.n_windows);
        for (const auto& res : beta_energy_map(kept, windows)) {
            w.add_raw_row(CsvWriter::format(sigma) + ',' + CsvWriter::format(res.window.lo_cm1) +
                          ',' + CsvWriter::format(res.window.hi_cm1) + ',' +
                          (res.fitted ? CsvWriter::format(res.fit.beta) : "nan") + ',' +
                          (res.fitted ? to_string(res.klass) : "unfit"));
        }
        w.write(dir / "brody_map.csv");
        mb.add_file(dir / "brody_map.csv");
    }

    mb.set_exclusions(excluded, cfg.ensemble);
    mb.set_sigma_dev({});
    mb.finish();

    RunOutcome out;
    out.output_dir = dir;
    out.excluded = static_cast<int>(excluded.size());
    out.files = mb.files;
    out.exit_code = (excluded.size() * 100 > static_cast<std::size_t>(cfg.ensemble)) ? 3 : 0;
    return out;
}

RunOutcome run_dynamics(const RunConfig& cfg) {
    const fs::path dir = prepare_output_dir(cfg);
    ManifestBuilder mb(cfg, dir);
    const bool with_sink =
        cfg.experiment == Experiment::transfer || cfg.gamma_omega0 > 0.0;

    EnsembleSeries ens = average_dynamics(cfg, with_sink);
    write_series_csvs(cfg, ens.mean, mb, with_sink);

    if (!with_sink && ens.mean.times_fs.back() >= cfg.steady_window_hi_fs) {
        const auto ss = steady_state_summary(ens.mean, cfg.steady_window_lo_fs,
                                             cfg.steady_window_hi_fs,
                                             std::max(cfg.sigma_e_cm1, cfg.sigma_j_cm1));
        CsvWriter w({"assc_sites", "ass_ipr_sites", "window_lo_fs", "window_hi_fs", "sigma_over_j"});
        w.add_row({ss.assc, ss.ass_ipr, ss.window_lo_fs, ss.window_hi_fs, ss.sigma_over_j});
        w.write(dir / "steady_state.csv");
        mb.add_file(dir / "steady_state.csv");
    }
    if (cfg.experiment == Experiment::msd && !ens.mean.msd_nm2.empty()) {
        const auto fit = fit_msd_power_law(ens.mean.times_fs, ens.mean.msd_nm2, cfg.msd_fit_lo_fs,
                                           cfg.msd_fit_hi_fs);
        CsvWriter w({"mobility_d", "gamma_exponent", "fit_lo_fs", "fit_hi_fs"});
        w.add_row({fit.mobility_d, fit.gamma_exponent, cfg.msd_fit_lo_fs, cfg.msd_fit_hi_fs});
        w.write(dir / "msd_fit.csv");
        mb.add_file(dir / "msd_fit.csv");
    }

    mb.set_exclusions(ens.excluded_indices, cfg.ensemble);
    mb.set_sigma_dev(ens.sigma_dev);
    mb.finish();

    RunOutcome out;
    out.output_dir = dir;
    out.excluded = static_cast<int>(ens.excluded_indices.size());
    out.files = mb.files;
    out.exit_code =
        (ens.excluded_indices.size() * 100 > static_cast<std::size_t>(cfg.ensemble)) ? 3 : 0;
    return out;
}

RunOutcome run_spectra(const RunConfig& cfg) {
    const fs::path dir = prepare_output_dir(cfg);
    ManifestBuilder mb(cfg, dir);

    EnsembleResponse ens = average_response(cfg);
    const double omega0_rad = cfg.omega0_cm1 * units::cm1_to_radfs;
    const Spectrum2D spec = spectrum_2d(ens.mean, omega0_rad, cfg.pad_factor);

    {
        CsvWriter w({"omega_tau_omega0", "omega_t_omega0", "intensity"});
        const int m = static_cast<int>(spec.omega.size());
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                w.add_row({spec.omega[i], spec.omega[j],
                           spec.total[static_cast<std::size_t>(i) * m + j]});
        w.write(dir / "spectrum2d.csv");
        mb.add_file(dir / "spectrum2d.csv");
    }
    if (cfg.tw_fs == 0.0) {
        CsvWriter w({"omega_omega0", "intensity"});
        for (const auto& [omega, value] : linear_absorption(spec)) w.add_row({omega, value});
        w.write(dir / "absorption.csv");
        mb.add_file(dir / "absorption.csv");
    }
    if (cfg.plots) {
        const int m = static_cast<int>(spec.omega.size());
        double peak = 0.0;
        for (double v : spec.total) peak = std::max(peak, std::abs(v));
        mb.add_file(plot_heatmap(dir / "spectrum2d.png", spec.total, m, m, -peak, peak));
    }

    mb.set_exclusions(ens.excluded_indices, cfg.ensemble);
    mb.set_sigma_dev({});
    mb.finish();

    RunOutcome out;
    out.output_dir = dir;
    out.excluded = static_cast<int>(ens.excluded_indices.size());
    out.files = mb.files;
    out.exit_code =
        (ens.excluded_indices.size() * 100 > static_cast<std::size_t>(cfg.ensemble)) ? 3 : 0;
    return out;
}

RunOutcome run_experiment(const RunConfig& cfg) {
    switch (cfg.experiment) {
        case Experiment::statics: return run_statics(cfg);
        case Experiment::dynamics:
        case Experiment::transfer:
        case Experiment::msd: return run_dynamics(cfg);
        case Experiment::spectra: return run_spectra(cfg);
    }
    throw ConfigError("unknown experiment");
}

} // namespace polaring

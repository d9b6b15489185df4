#include "polaring/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "polaring/csv.hpp"
#include "polaring/units.hpp"

namespace polaring {

std::string to_string(Experiment e) {
    switch (e) {
        case Experiment::statics: return "statics";
        case Experiment::dynamics: return "dynamics";
        case Experiment::transfer: return "transfer";
        case Experiment::spectra: return "spectra";
        case Experiment::msd: return "msd";
    }
    return "unknown";
}

namespace {

struct KeySpec {
    std::string section;
    std::string key;
    std::function<void(RunConfig&, const std::string&, const std::string&)> apply;
    std::function<std::string(const RunConfig&)> dump;
};

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ConfigError(where + ": " + what);
}

double parse_double(const std::string& where, const std::string& raw) {
    try {
        std::size_t used = 0;
        const double v = std::stod(raw, &used);
        if (used != raw.size()) fail(where, "trailing characters in numeric value '" + raw + "'");
        if (!std::isfinite(v)) fail(where, "value must be finite");
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        fail(where, "cannot parse '" + raw + "' as a number");
    }
}

long long parse_int(const std::string& where, const std::string& raw) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(raw, &used);
        if (used != raw.size()) fail(where, "trailing characters in integer value '" + raw + "'");
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        fail(where, "cannot parse '" + raw + "' as an integer");
    }
}

bool parse_bool(const std::string& where, const std::string& raw) {
    if (raw == "true" || raw == "1") return true;
    if (raw == "false" || raw == "0") return false;
    fail(where, "expected true/false, got '" + raw + "'");
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// declarative schema: every key names its unit; ranges enforced here
std::vector<KeySpec> make_schema() {
    std::vector<KeySpec> ks;
    auto num = [&](const std::string& sec, const std::string& key, auto getter, double lo,
                   double hi, const std::string& unit_note) {
        ks.push_back(
            {sec, key,
             [getter, lo, hi, unit_note, key](RunConfig& c, const std::string& w,
                                              const std::string& raw) {
                 const double v = parse_double(w, raw);
                 if (v < lo || v > hi)
                     fail(w, key + " (" + unit_note + ") must lie in [" +
                                 CsvWriter::format(lo, 6) + ", " + CsvWriter::format(hi, 6) + "]");
                 c.*getter = v;
             },
             [getter](const RunConfig& c) { return CsvWriter::format(c.*getter, 17); }});
    };
    auto integer = [&](const std::string& sec, const std::string& key, auto getter, long long lo,
                       long long hi) {
        ks.push_back({sec, key,
                      [getter, lo, hi, key](RunConfig& c, const std::string& w,
                                            const std::string& raw) {
                          const long long v = parse_int(w, raw);
                          if (v < lo || v > hi)
                              fail(w, key + " must lie in [" + std::to_string(lo) + ", " +
                                          std::to_string(hi) + "]");
                          c.*getter = static_cast<std::remove_reference_t<decltype(c.*getter)>>(v);
                      },
                      [getter](const RunConfig& c) { return std::to_string(c.*getter); }});
    };
    auto boolean = [&](const std::string& sec, const std::string& key, auto getter) {
        ks.push_back({sec, key,
                      [getter](RunConfig& c, const std::string& w, const std::string& raw) {
                          c.*getter = parse_bool(w, raw);
                      },
                      [getter](const RunConfig& c) { return c.*getter ? "true" : "false"; }});
    };

    integer("geometry", "n_sites", &RunConfig::n_sites, 4, 1024);
    num("geometry", "radius_angstrom", &RunConfig::radius_angstrom, 1e-6, 1e6, "angstrom");
    num("geometry", "intra_dimer_angstrom", &RunConfig::intra_dimer_angstrom, 1e-6, 1e6, "angstrom");
    num("geometry", "inter_dimer_angstrom", &RunConfig::inter_dimer_angstrom, 1e-6, 1e6, "angstrom");
    num("geometry", "intra_dimer_angle_deg", &RunConfig::intra_dimer_angle_deg, 0.0, 360.0, "degree");
    num("geometry", "inter_dimer_angle_deg", &RunConfig::inter_dimer_angle_deg, 0.0, 360.0, "degree");

    num("coupling", "j1_intra_cm1", &RunConfig::j1_intra_cm1, -1e6, 1e6, "cm^-1");
    num("coupling", "j2_inter_cm1", &RunConfig::j2_inter_cm1, -1e6, 1e6, "cm^-1");
    num("coupling", "dipole_constant_a3cm1", &RunConfig::dipole_constant_a3cm1, 1e-12, 1e12,
        "angstrom^3 cm^-1");
    num("coupling", "site_energy_baseline_cm1", &RunConfig::site_energy_baseline_cm1, -1e6, 1e6,
        "cm^-1");

    num("disorder", "sigma_e_cm1", &RunConfig::sigma_e_cm1, 0.0, 1e6, "cm^-1");
    num("disorder", "sigma_j_cm1", &RunConfig::sigma_j_cm1, 0.0, 1e6, "cm^-1");
    ks.push_back({"disorder", "seed",
                  [](RunConfig& c, const std::string& w, const std::string& raw) {
                      const long long v = parse_int(w, raw);
                      if (v < 0) fail(w, "seed must be non-negative");
                      c.seed = static_cast<std::uint64_t>(v);
                  },
                  [](const RunConfig& c) { return std::to_string(c.seed); }});

    num("bath", "omega0_cm1", &RunConfig::omega0_cm1, 1e-6, 1e6, "cm^-1");
    num("bath", "bandwidth_w", &RunConfig::bandwidth_w, 0.0, 1.0, "dimensionless");
    num("bath", "huang_rhys_s", &RunConfig::huang_rhys_s, 0.0, 100.0, "dimensionless");

    num("integrator", "dt_fs", &RunConfig::dt_fs, 1e-6, 10.0, "fs");
    num("integrator", "t_max_fs", &RunConfig::t_max_fs, 0.0, 1e7, "fs");
    integer("integrator", "record_stride", &RunConfig::record_stride, 1, 1000000);
    num("integrator", "regularization_eps", &RunConfig::regularization_eps, 1e-14, 1e-2,
        "dimensionless");

    num("sink", "gamma_omega0", &RunConfig::gamma_omega0, 0.0, 100.0, "units of omega0");
    integer("sink", "sink_site", &RunConfig::sink_site, 0, 1023);

    ks.push_back({"lineshape", "lambda0_cm1",
                  [](RunConfig& c, const std::string& w, const std::string& raw) {
                      const double v = parse_double(w, raw);
                      if (v < 0.0) fail(w, "lambda0_cm1 (cm^-1) must be >= 0");
                      c.lineshape.lambda0_cm1 = v;
                  },
                  [](const RunConfig& c) { return CsvWriter::format(c.lineshape.lambda0_cm1, 17); }});
    ks.push_back({"lineshape", "gamma0_cm1",
                  [](RunConfig& c, const std::string& w, const std::string& raw) {
                      const double v = parse_double(w, raw);
                      if (v <= 0.0) fail(w, "gamma0_cm1 (cm^-1) must be > 0");
                      c.lineshape.gamma0_cm1 = v;
                  },
                  [](const RunConfig& c) { return CsvWriter::format(c.lineshape.gamma0_cm1, 17); }});
    ks.push_back({"lineshape", "temperature_k",
                  [](RunConfig& c, const std::string& w, const std::string& raw) {
                      const double v = parse_double(w, raw);
                      if (v <= 0.0) fail(w, "temperature_k (kelvin) must be > 0");
                      c.lineshape.temperature_k = v;
                  },
                  [](const RunConfig& c) {
                      return CsvWriter::format(c.lineshape.temperature_k, 17);
                  }});
    ks.push_back({"lineshape", "matsubara_tol",
                  [](RunConfig& c, const std::string& w, const std::string& raw) {
                      const double v = parse_double(w, raw);
                      if (v <= 0.0 || v > 1.0) fail(w, "matsubara_tol must lie in (0, 1]");
                      c.lineshape.matsubara_tol = v;
                  },
                  [](const RunConfig& c) {
                      return CsvWriter::format(c.lineshape.matsubara_tol, 17);
                  }});
    ks.push_back({"lineshape", "matsubara_max",
                  [](RunConfig& c, const std::string& w, const std::string& raw) {
                      const long long v = parse_int(w, raw);
                      if (v < 1 || v > 100000000) fail(w, "matsubara_max must lie in [1, 1e8]");
                      c.lineshape.matsubara_max = static_cast<int>(v);
                  },
                  [](const RunConfig& c) { return std::to_string(c.lineshape.matsubara_max); }});

    num("spectra", "tw_fs", &RunConfig::tw_fs, 0.0, 1e6, "fs");
    num("spectra", "tau_max_fs", &RunConfig::tau_max_fs, 1.0, 1e6, "fs");
    num("spectra", "t_max_fs", &RunConfig::spectra_t_max_fs, 1.0, 1e6, "fs");
    num("spectra", "step_fs", &RunConfig::spectra_step_fs, 1e-3, 1e3, "fs");
    integer("spectra", "pad_factor", &RunConfig::pad_factor, 1, 64);

    integer("statics", "n_windows", &RunConfig::n_windows, 1, 64);

    num("msd", "fit_lo_fs", &RunConfig::msd_fit_lo_fs, 0.0, 1e6, "fs");
    num("msd", "fit_hi_fs", &RunConfig::msd_fit_hi_fs, 0.0, 1e6, "fs");

    num("steady_state", "window_lo_fs", &RunConfig::steady_window_lo_fs, 0.0, 1e7, "fs");
    num("steady_state", "window_hi_fs", &RunConfig::steady_window_hi_fs, 0.0, 1e7, "fs");

    ks.push_back({"run", "experiment",
                  [](RunConfig& c, const std::string& w, const std::string& raw) {
                      if (raw == "statics") c.experiment = Experiment::statics;
                      else if (raw == "dynamics") c.experiment = Experiment::dynamics;
                      else if (raw == "transfer") c.experiment = Experiment::transfer;
                      else if (raw == "spectra") c.experiment = Experiment::spectra;
                      else if (raw == "msd") c.experiment = Experiment::msd;
                      else fail(w, "experiment must be one of statics|dynamics|transfer|spectra|msd");
                  },
                  [](const RunConfig& c) { return to_string(c.experiment); }});
    integer("run", "ensemble", &RunConfig::ensemble, 1, 100000000);
    integer("run", "initial_site", &RunConfig::initial_site, 0, 1023);
    ks.push_back({"run", "output_dir",
                  [](RunConfig& c, const std::string&, const std::string& raw) {
                      c.output_dir = raw;
                  },
                  [](const RunConfig& c) { return c.output_dir; }});
    integer("run", "threads", &RunConfig::threads, 0, 4096);
    boolean("run", "plots", &RunConfig::plots);
    boolean("run", "force", &RunConfig::force);
    return ks;
}

const std::vector<KeySpec>& schema() {
    static const std::vector<KeySpec> s = make_schema();
    return s;
}

const KeySpec* find_key(const std::string& section, const std::string& key) {
    for (const auto& ks : schema())
        if (ks.section == section && ks.key == key) return &ks;
    return nullptr;
}

} // namespace

void validate(const RunConfig& cfg) {
    if (cfg.n_sites % 2 != 0) throw ConfigError("geometry.n_sites must be even");
    if (cfg.initial_site >= cfg.n_sites)
        throw ConfigError("run.initial_site must be smaller than geometry.n_sites");
    if (cfg.sink_site >= cfg.n_sites)
        throw ConfigError("sink.sink_site must be smaller than geometry.n_sites");
    const double omega_max_rad =
        cfg.omega0_cm1 * (1.0 + cfg.bandwidth_w) * units::cm1_to_radfs;
    if (cfg.dt_fs * omega_max_rad >= 0.3)
        throw ConfigError("integrator.dt_fs violates the stability guard dt * omega_max < 0.3 rad");
    if (cfg.steady_window_hi_fs <= cfg.steady_window_lo_fs)
        throw ConfigError("steady_state window must have positive width");
    if (cfg.msd_fit_hi_fs <= cfg.msd_fit_lo_fs)
        throw ConfigError("msd fit window must have positive width");
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    std::set<std::string> seen;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string where = origin + ":" + std::to_string(line_no);
        std::string s = trim(line);
        if (s.empty() || s[0] == '#' || s[0] == ';') continue;
        if (s.front() == '[') {
            if (s.back() != ']') fail(where, "malformed section header");
            section = trim(s.substr(1, s.size() - 2));
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) fail(where, "expected key = value");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (section.empty()) fail(where, "key '" + key + "' appears before any [section]");
        const KeySpec* ks = find_key(section, key);
        if (ks == nullptr) fail(where, "unknown key [" + section + "] " + key);
        const std::string id = section + "." + key;
        if (!seen.insert(id).second) fail(where, "duplicate key [" + section + "] " + key);
        ks->apply(cfg, where, value);
    }
    validate(cfg);
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config(text, path.string());
}

void apply_override(RunConfig& cfg, const std::string& dotted_key, const std::string& value) {
    const auto dot = dotted_key.find('.');
    if (dot == std::string::npos)
        throw ConfigError("override '" + dotted_key + "' must be section.key");
    const std::string section = dotted_key.substr(0, dot);
    const std::string key = dotted_key.substr(dot + 1);
    const KeySpec* ks = find_key(section, key);
    if (ks == nullptr) throw ConfigError("unknown key [" + section + "] " + key);
    ks->apply(cfg, "<override " + dotted_key + ">", value);
    validate(cfg);
}

std::string RunConfig::canonical_dump() const {
    std::map<std::string, std::string> lines;
    for (const auto& ks : schema()) lines[ks.section + "." + ks.key] = ks.dump(*this);
    std::string out;
    for (const auto& [k, v] : lines) {
        out += k;
        out += '=';
        out += v;
        out += '\n';
    }
    return out;
}

std::uint64_t RunConfig::config_hash() const { return fnv1a_hash(canonical_dump()); }

RingGeometry RunConfig::make_geometry() const {
    return build_geometry(n_sites, radius_angstrom, {intra_dimer_angstrom, inter_dimer_angstrom},
                          {intra_dimer_angle_deg, inter_dimer_angle_deg});
}

CouplingParams RunConfig::make_coupling() const {
    CouplingParams p;
    p.j1_intra_cm1 = j1_intra_cm1;
    p.j2_inter_cm1 = j2_inter_cm1;
    p.dipole_constant_c = dipole_constant_a3cm1;
    p.site_energy_baseline_cm1 = site_energy_baseline_cm1;
    return p;
}

PhononBath RunConfig::make_bath() const {
    return build_phonon_bath(n_sites, omega0_cm1, bandwidth_w, huang_rhys_s);
}

DisorderSpec RunConfig::make_disorder(std::uint64_t realization) const {
    DisorderSpec d;
    d.sigma_e_cm1 = sigma_e_cm1;
    d.sigma_j_cm1 = sigma_j_cm1;
    d.seed = seed;
    d.realization_index = realization;
    return d;
}

} // namespace polaring

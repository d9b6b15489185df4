// Ensemble orchestration: a bounded worker pool over disorder
// realizations with strictly ordered reduction, flat-file outputs and a
// JSON run manifest.  Identical (config, seed) produce byte-identical
// CSV files at any thread count.

#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "polaring/config.hpp"
#include "polaring/observables.hpp"
#include "polaring/spectroscopy.hpp"

namespace polaring {

inline constexpr const char* code_version = "polaring 0.1.0";

// Merges deposited items in ascending index order no matter the arrival
// order; the consumer runs under the lock and must stay cheap.
template <typename T>
class OrderedReducer {
public:
    explicit OrderedReducer(std::function<void(int, T&&)> consume)
        : consume_(std::move(consume)) {}

    void deposit(int index, T&& value) {
        std::scoped_lock lock(mutex_);
        buffer_.emplace(index, std::move(value));
        while (!buffer_.empty() && buffer_.begin()->first == next_) {
            auto node = buffer_.extract(buffer_.begin());
            consume_(node.key(), std::move(node.mapped()));
            ++next_;
        }
    }

    void skip(int index) { deposit(index, T{}); }

private:
    std::function<void(int, T&&)> consume_;
    std::map<int, T> buffer_;
    std::mutex mutex_;
    int next_ = 0;
};

// Runs fn(index) for index in [0, n) on `threads` workers; exceptions
// are collected per index instead of propagating.
std::vector<std::optional<std::string>> parallel_realizations(
    int n, int threads, const std::function<void(int)>& fn);

int resolve_threads(int configured);

struct RunOutcome {
    int exit_code = 0; // 0 ok, 2 config error, 3 exclusion budget exceeded
    int excluded = 0;
    std::filesystem::path output_dir;
    std::vector<std::filesystem::path> files;
};

// Dispatches on cfg.experiment, writes outputs and run_manifest.json.
RunOutcome run_experiment(const RunConfig& cfg);

// Individual experiment drivers (used by run_experiment and the figure
// scripts).
RunOutcome run_statics(const RunConfig& cfg);
RunOutcome run_dynamics(const RunConfig& cfg);
RunOutcome run_spectra(const RunConfig& cfg);

// Ensemble-averaged series plus bookkeeping, for callers that need the
// numbers rather than files.
struct EnsembleSeries {
    ObservableSeries mean;
    int included = 0;
    std::vector<int> excluded_indices;
    std::vector<double> sigma_dev; // per included realization, NaN when n/a
};

EnsembleSeries average_dynamics(const RunConfig& cfg, bool with_sink);

// Ensemble-averaged response grid for the spectra experiment.
struct EnsembleResponse {
    ResponseGrid mean;
    int included = 0;
    std::vector<int> excluded_indices;
};

EnsembleResponse average_response(const RunConfig& cfg);

} // namespace polaring

#pragma once
#include "sja/dynamics.hpp"
#include "sja/flow.hpp"
#include "sja/io.hpp"
#include "sja/models.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sja {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    std::string model = "rmt-gaussian";  // rmt-gaussian | rmt-bimodal | ising
    int n = 256;                         // matrix dimension (rmt)
    int l = 12;                          // chain length (ising)
    double j = 0.5;
    double sigma_omega = 1.5;
    double omega0 = 0.7;
    double band = 2.5;
    double g = 0.9045;
    double h = 0.809;
    // quench window half-width: |E| <= e_cut for rmt, |E| <= e_cut * L for the chain
    double e_cut = 0.5;
    int realizations = 1;
    uint64_t base_seed = 1;
    double w_min = 1e-6;
    int n_bin = 4;       // consecutive-eigenstate coarse graining for diagnostics
    int n_slices = 32;
    int e_bins = 65;
    int omega_bins = 0;  // informational; must equal 2*e_bins - 1 when nonzero
    int k_max = 2;
    double t_max = 0.0;  // 0 -> 40 / J
    int samples = 512;
    std::vector<int> sizes;          // finite-size study: N or L list
    std::vector<std::string> emit;   // series labels to write; empty -> all
    std::string out_dir = "out";

    static ExperimentConfig from_json_text(const std::string& text);
    static ExperimentConfig from_file(const std::string& path);
    std::string to_json_text() const;  // resolved values, stable key order

    double horizon() const { return t_max > 0 ? t_max : 40.0 / j; }
    bool is_ising() const { return model == "ising"; }
    bool wants(const std::string& label) const;
};

// One seeded pass of the full pipeline: model build, instrumented decimation
// with co-rotating rho and A, kernel assembly, iterative flow solve, and all
// benchmark series on one shared time grid.
struct RealizationOutput {
    uint64_t seed = 0;
    std::vector<TimeSeries> series;  // exact, tdpt, sja-1..k, empirical
    KernelTable kernel;
    FlowState flow;
    std::vector<FormFactorSet> snapshots;  // w0 down to w_min
    Field2 fjac2;
    double value_t0 = 0.0;
    double epsilon = 0.0;  // J over the perturbation's spectral width
    int64_t tdpt_degenerate = 0;
    std::vector<double> eigenvalues;  // of H, ascending
    // initial diagonals coarse-grained over n_bin consecutive levels
    std::vector<std::pair<double, double>> rho_coarse;
    std::vector<std::pair<double, double>> a_coarse;
};

QuenchProblem build_problem(const ExperimentConfig& cfg, uint64_t seed);
EnergyGrid experiment_grid(const ExperimentConfig& cfg, const QuenchProblem& prob);
std::vector<double> experiment_times(const ExperimentConfig& cfg, const EnergyGrid& grid);

RealizationOutput run_quench_realization(const ExperimentConfig& cfg, uint64_t seed);
RealizationOutput run_autocorr_realization(const ExperimentConfig& cfg, uint64_t seed);

TimeSeries average_series(const std::vector<TimeSeries>& parts);
TimeSeries abs_difference(const TimeSeries& a, const TimeSeries& ref);  // label err-<a.label>

struct RunSummary {
    int attempted = 0;
    int aborted = 0;
    std::vector<std::string> abort_messages;
    std::string manifest_path;

    bool failed() const { return attempted == 0 || 5 * aborted > attempted; }
};

RunSummary run_quench_experiment(const ExperimentConfig& cfg);
RunSummary run_autocorr_experiment(const ExperimentConfig& cfg);
// per-size intensive autocorrelators plus cross-size deviation table (ising),
// or decimation-density scaling comparison across sizes (rmt)
RunSummary run_finite_size_study(const ExperimentConfig& cfg);

} // namespace sja

#ifndef PQRLAB_SWEEP_HPP
#define PQRLAB_SWEEP_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "pqrlab/continuum.hpp"
#include "pqrlab/density.hpp"
#include "pqrlab/kernel.hpp"
#include "pqrlab/spectral.hpp"

namespace pqrlab {

inline constexpr const char* kVersionString = "pqrlab-0.1.0";

enum class SweepMode { EpsilonContinuum, EpsilonDiscrete, NDiscrete, OmegaDiscrete };

std::string to_string(SweepMode m);
SweepMode sweep_mode_from_string(const std::string& s);

struct SweepConfig {
    SweepMode mode = SweepMode::EpsilonContinuum;
    PQRParams params;
    DensityModel density_template = DensityModel::piecewise_constant(0.125);
    std::vector<double> sweep_values; ///< strictly monotone; eps/omega or N
    int n_vertices = 4096;            ///< discrete modes
    int n_cells = 200;                ///< continuum mesh resolution
    int trials = 5;
    int k_eigen = 4;
    std::uint64_t base_seed = 42;
    double fit_window_max = 0.025; ///< eps/omega sweeps fit values <= this
    KernelProfile kernel_profile = KernelProfile::Indicator;
    int jobs = 1;
    double solver_tol = 1e-8;

    void validate() const;
    int target_clusters() const; ///< K from the density template

    static SweepConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

struct SweepCell {
    double value = 0.0;
    int trial = 0;
    bool ok = false;
    std::string error;
    std::vector<double> sigmas; ///< ascending, continuum-scaled in discrete modes
};

struct SlopeFit {
    bool valid = false;
    double slope = 0.0;
    double intercept = 0.0;
    double stderr_slope = 0.0;
    int points = 0;
    std::string note;
};

struct SweepResult {
    SweepConfig config;
    int K = 2;
    std::vector<double> values;
    std::vector<std::vector<SweepCell>> cells; ///< [value_index][trial]
    std::vector<std::vector<double>> means;    ///< [value_index][eigen_index], NaN on failure
    SlopeFit sigma_K_slope;                    ///< log sigma_K vs log value over the window
    SlopeFit ratio_slope;                      ///< log (sigma_K / sigma_{K+1})
    std::vector<SlopeFit> eigen_slopes;        ///< per eigen index

    /// Trial-mean of eigenvalue `index` (1-based) at value position vi.
    double mean_sigma(std::size_t vi, int index) const { return means[vi][index - 1]; }
};

/// Ordinary least squares of log ys on log xs.
SlopeFit fit_slope(const std::vector<double>& xs, const std::vector<double>& ys);

SweepResult run_sweep(const SweepConfig& config);

struct GapRow {
    double value = 0.0;
    double sigma_K = 0.0;
    double sigma_K1 = 0.0;
    double ratio = 0.0;
};

struct GapDiagnostics {
    int K = 2;
    std::vector<GapRow> rows;
    SlopeFit sigma_K1_slope;
    bool uniform_gap_flag = false; ///< |slope of sigma_{K+1}| < 0.2 over the window
};

GapDiagnostics gap_diagnostics(const SweepResult& result, int K);

struct FiedlerLabels {
    std::vector<int> labels; ///< 0/1 per vertex
    int zero_entries = 0;    ///< exactly-zero Fiedler components, assigned 0
};

/// Binary partition from the sign of the second eigenvector; the component
/// of largest magnitude fixes the sign convention.
FiedlerLabels fiedler_labels(const Spectrum& spectrum);

/// Best agreement over the two label assignments, restricted to points with
/// ground truth != -1.
double clustering_accuracy(const std::vector<int>& predicted, const std::vector<int>& truth);

/// Writes results.csv, summary.json and plot.svg under out_dir.
void emit_report(const SweepResult& result, const std::string& out_dir);

} // namespace pqrlab

#endif

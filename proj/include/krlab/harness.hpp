#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "krlab/eigenlearning.hpp"

// Experiment orchestration: grids over (method, n, noise, seed) producing one
// CurveRecord per measurement, CSV persistence, noise-profile assembly with
// asymptote estimates, empirical regime labeling, and theory/experiment
// overlays.  Runs are bit-stable: identical config and root seed give a
// byte-identical CSV regardless of worker count (records are sorted before
// persistence and every cell derives its own seed).

namespace krlab::harness {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IncompleteGrid : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NoSpectrum : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Metric { MSE, ExcessMSE, ClassificationError, NoisyClassificationError };

std::string metric_name(Metric m);
Metric metric_from_name(const std::string& s);
bool metric_is_classification(Metric m);

struct CurveRecord {
    std::string experiment_id;
    std::string method;
    std::size_t n = 0;
    std::string noise_kind;    // "gaussian_additive" | "label_flip" | "none"
    double noise_level = 0.0;  // sigma^2 or p
    std::uint64_t seed = 0;    // derived per-cell stream seed
    Metric metric = Metric::MSE;
    double risk = 0.0;         // +inf for recorded overflow cells
    double condition = 0.0;    // solve diagnostic; 0 when not applicable
    double wall_ms = 0.0;      // 0 unless record_timing is enabled
    std::string error;         // nonempty for failed cells (risk is then nan)
};

// deterministic total order used before persistence
void sort_records(std::vector<CurveRecord>& records);

void write_csv(const std::string& path, const std::vector<CurveRecord>& records);
std::string to_csv(const std::vector<CurveRecord>& records);
std::vector<CurveRecord> read_csv(const std::string& path);

// ---------------------------------------------------------------------------

struct ProfileCell {
    double noise_level = 0.0;
    std::size_t n = 0;
    double median = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
    std::size_t count = 0;      // successful trials
    std::size_t failures = 0;   // error-marker rows
};

struct Asymptote {
    double value = 0.0;    // mean of the last two n medians
    bool converged = false;  // last two medians agree within 15%
    double rel_gap = 0.0;
};

struct NoiseProfile {
    std::string method;
    Metric metric = Metric::MSE;
    std::vector<double> noise_levels;     // ascending
    std::vector<std::size_t> n_grid;      // ascending
    std::vector<ProfileCell> cells;       // row-major: noise major, n minor
    std::map<double, Asymptote> asymptotes;

    const ProfileCell& cell(double noise, std::size_t n) const;
    std::vector<std::pair<std::size_t, double>> medians_at(double noise) const;
};

// Records must cover one (method, metric) rectangular grid; missing cells
// raise IncompleteGrid naming them.  Rows with error markers count as
// explicit holes only if a cell has no successful trial at all.
NoiseProfile build_noise_profile(const std::vector<CurveRecord>& records);

// ---------------------------------------------------------------------------

enum class EmpiricalKind { Benign, Tempered, Catastrophic, Inconclusive };

std::string empirical_kind_name(EmpiricalKind k);

struct RegimeEvidence {
    double tail = 0.0;       // median at the largest n
    double prev = 0.0;       // one doubling earlier
    double prev2 = 0.0;      // two doublings earlier
    double net_ratio = 0.0;  // tail / prev2
    double stab_rel = 0.0;   // |tail - prev| / prev
    double benign_cut = 0.0;
    double catastrophic_cut = 0.0;
};

struct EmpiricalRegime {
    EmpiricalKind kind = EmpiricalKind::Inconclusive;
    double tempered_level = 0.0;  // set when kind == Tempered
    RegimeEvidence evidence;
};

// Thresholds, with risk floor f and tolerance tol (0.02 for classification,
// 0.1 * noise_scale for regression):
//   benign        tail <= f + tol
//   catastrophic  classification: tail >= (1 - 1/K) - tol
//                 regression: net growth tail/prev2 >= 1.5, or the tail
//                 already exceeds f + 10 * noise_scale (a curve saturated far
//                 above any stable level is divergent, not "stabilized")
//   tempered      last two doublings agree within 15% at a level above f + tol
//   otherwise     inconclusive
// medians_by_n must hold >= 3 points in ascending n.
EmpiricalRegime label_regime(const std::vector<std::pair<std::size_t, double>>& medians_by_n,
                             double bayes_floor, Metric metric, int K = 2,
                             double noise_scale = 1.0, double tol_cls = 0.02,
                             double tol_reg_factor = 0.1);

// ---------------------------------------------------------------------------

struct KrConfig {
    std::string kernel = "gaussian";
    double bandwidth = 1.0;
    int d = 4;
    double delta = 0.0;
    double sigma2 = 1.0;
    std::vector<std::size_t> n_grid = {64, 128, 256, 512, 1024, 2048, 4096};
    std::size_t n_test = 2000;
    std::string expect_regime;  // optional gate for --check
};

struct SyntheticConfig {
    std::vector<double> alphas = {2.0};
    std::size_t M = 10000;
    double coeff_exponent = 2.0;
    double budget = 10.0;
    double sigma2 = 1.0;
    std::vector<std::size_t> n_grid = {32, 64, 128, 256, 512};
    std::size_t n_test = 3000;
};

struct Toy1dConfig {
    std::vector<std::string> methods = {"singular_smoother", "piecewise_linear", "polynomial_interp"};
    double singular_exponent = 2.0;
    double sigma2 = 1.0;
    std::vector<std::size_t> n_grid = {64, 256, 1024, 2048};
    std::size_t n_test = 1000;
};

struct KnnConfig {
    std::vector<std::string> methods = {"one_nn", "knn_logn"};
    std::vector<double> p_grid = {0.1, 0.2, 0.3};
    std::vector<std::size_t> n_grid = {2048, 4096, 8192};
    std::size_t n_test = 2000;
    // optional real-data mode (IDX paths); synthetic 1-D task when empty
    std::string images, labels;
    std::size_t subsample = 4096;
    double bandwidth = 5.0;  // kernel bandwidth for the real-data KR baseline
};

struct TheoryConfig {
    std::string family = "powerlaw";
    double alpha = 2.0;
    std::size_t M = 100000;
    double delta = 0.0;
    double delta_prime = 0.0;
    double sigma2 = 1.0;
    double coeff_exponent = 2.0;
    double budget = 0.0;  // 0: zero target (pure-noise theory)
    std::vector<std::size_t> n_grid = {64, 128, 256, 512, 1024, 2048, 4096};
};

struct Config {
    std::string experiment = "theory";
    std::string id;  // defaults to the experiment name
    std::uint64_t root_seed = 1;
    std::size_t trials = 25;
    bool record_timing = false;
    KrConfig kr;
    SyntheticConfig synthetic;
    Toy1dConfig toy1d;
    KnnConfig knn;
    TheoryConfig theory;
};

Config config_from_json_text(const std::string& text);
Config load_config(const std::string& path);
std::string config_to_json_text(const Config& c);  // fully resolved, for provenance

// Executes every cell of the configured experiment.  Honors the
// KRLAB_WORKERS environment variable for the worker count; the output is
// independent of it.  Per-cell failures are recorded in-row; config errors
// throw before anything runs.
std::vector<CurveRecord> run_experiment(const Config& config);

// ---------------------------------------------------------------------------

struct OverlayRow {
    double alpha = 0.0;
    std::size_t n = 0;
    double empirical_median = 0.0;
    double predicted_mse = 0.0;
    double rel_gap = 0.0;  // |empirical - predicted| / predicted
};

// Joins closed-form risk predictions to empirical synthetic medians.
// Only synthetic experiments carry a spectral description; anything else
// raises NoSpectrum.
std::vector<OverlayRow> theory_overlay(const Config& config,
                                       const std::vector<CurveRecord>& records);

}  // namespace krlab::harness

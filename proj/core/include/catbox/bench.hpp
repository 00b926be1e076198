#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "catbox/domain.hpp"
#include "catbox/optimizer.hpp"

namespace catbox::bench {

enum class FnKind { Ackley, Griewank, Rosenbrock, Schwefel };

std::string to_string(FnKind kind);
FnKind fn_kind_from_string(const std::string& s);

/// Standard minimization test function over `dim` coordinates. Ackley
/// constants default to a = 20, b = 0.2, c = 2 pi.
struct SyntheticFn {
  FnKind kind = FnKind::Ackley;
  std::size_t dim = 2;
  double a = 20.0;
  double b = 0.2;
  double c = 6.283185307179586;

  /// Per-coordinate box of the function's conventional domain.
  std::pair<double, double> domain() const;
  /// Known global minimizer (each coordinate) and minimum value.
  double optimizer_coordinate() const;
  double optimum_value() const { return 0.0; }
};

/// Exact function value (minimization form). Throws catbox::Error when a
/// coordinate leaves the domain or the dimension does not match.
double eval_synthetic(const SyntheticFn& fn, std::span<const double> z);

/// A synthetic function exposed over a mixed space: the first `n_cat`
/// coordinates come from evenly spaced categorical levels over the domain,
/// the rest are continuous. The engine-facing value is negated so that the
/// search maximizes.
struct MixedObjective {
  SearchSpace space;
  SyntheticFn fn;

  std::vector<double> encode(const MixedPoint& p) const;
  double operator()(const MixedPoint& p) const { return -eval_synthetic(fn, encode(p)); }
};

MixedObjective mixed_wrap(const SyntheticFn& fn, std::size_t n_cat, std::size_t levels_per_cat,
                          std::size_t n_con);

enum class NoiseKind { None, Gaussian };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::None;
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

/// y + sigma * g, g the standard normal draw at `draw_index` of the stream
/// keyed by spec.seed.
double add_noise(double y, const NoiseSpec& spec, std::uint64_t draw_index);

struct RunStep {
  int iteration = 0;
  MixedPoint point;
  double raw_y = 0.0;       // noise-free value
  double observed_y = 0.0;  // value reported to the method
  double incumbent_y = 0.0; // best observed_y so far
};

struct RunRecord {
  std::string method;
  std::uint64_t seed = 0;
  std::vector<RunStep> steps;
  double wall_seconds = 0.0;
};

/// Uniform sampling baseline. The first draws coincide with the engine's
/// initial design for the same seed.
RunRecord random_search(const SearchSpace& space, const Objective& objective, int budget,
                        std::uint64_t seed, const NoiseSpec& noise = {});

/// Runs the engine on `objective` for n_init + iters evaluations and records
/// every step. `config.suggest.seed` is overwritten with `seed`.
RunRecord run_engine(const SearchSpace& space, const Objective& objective, CampaignConfig config,
                     std::uint64_t seed, const NoiseSpec& noise = {});

enum class CurveColumn { Observed, True };
/// Lower anchor of the AF threshold: the worst incumbent across all records
/// at `MetricsOptions::reference_step`, or the literal zero.
enum class AfReference { WorstAtStep, Zero };

struct MethodMetrics {
  std::string method;
  std::vector<double> mean_curve;
  std::vector<double> std_curve;
  double final_mean = 0.0;
  double final_std = 0.0;
  double mean_iters_to_threshold = 0.0;
  double ef = 0.0;
  double af = 1.0;
};

struct MetricsTable {
  std::vector<MethodMetrics> methods;  // sorted by method name
  double threshold = 0.0;
  double best_known = 0.0;
  double reference = 0.0;
  std::size_t reference_step = 1;
  std::string baseline;
  nlohmann::json to_json() const;
};

struct MetricsOptions {
  std::optional<double> optimum;
  double threshold_frac = 0.95;
  std::string baseline = "random";
  CurveColumn column = CurveColumn::Observed;
  AfReference reference = AfReference::WorstAtStep;
  std::size_t reference_step = 1;  // 1-based; clamped to the record length
};

/// Mean/std incumbent curves, enhancement factor and acceleration factor of
/// every method against the baseline. Independent of record order. Throws
/// catbox::Error when no baseline record is present.
MetricsTable compute_metrics(std::span<const RunRecord> records, const MetricsOptions& options = {});

/// Incumbent curve of a record under the chosen column (running max).
std::vector<double> incumbent_curve(const RunRecord& record, CurveColumn column);

struct StudyConfig {
  SyntheticFn fn;
  std::size_t n_cat = 2;
  std::size_t levels = 5;
  std::size_t n_con = 2;
  std::vector<std::string> methods{"catbox", "random"};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  int n_init = 20;
  int iters = 80;
  NoiseSpec noise;
  MetricsOptions metrics;
  // "initial_design": AF threshold anchored at the worst incumbent after the
  // shared initial design; "worst_start": after the first evaluation; "zero".
  std::string af_reference = "initial_design";
  CampaignConfig engine;
};

StudyConfig study_from_json(const nlohmann::json& j);
nlohmann::json study_to_json(const StudyConfig& s);

/// A method runner: (objective, config, seed) -> record. Built-in names are
/// "catbox" and "random"; others can be registered by callers.
using MethodRunner = std::function<RunRecord(const MixedObjective&, const StudyConfig&, std::uint64_t)>;
using MethodRegistry = std::map<std::string, MethodRunner>;
MethodRegistry builtin_methods();

struct StudyResult {
  std::vector<RunRecord> records;
  MetricsTable metrics;
  std::optional<MetricsTable> true_metrics;  // noise-free column, when noise is on
};

/// Runs every (method, seed) pair and writes under `out_dir`:
///   runs/<method>_seed<k>.csv          iteration,point_json,raw_y,observed_y,incumbent_y
///   aggregate.csv                      iteration,<method>_mean,<method>_std,...
///   aggregate_true.csv                 same, noise-free incumbents (noisy studies only)
///   decision_path/<method>_seed<k>.csv iteration,<catvar...>,incumbent_y
///   metrics.json                       EF/AF table with its definition metadata
StudyResult run_study(const StudyConfig& config, const std::filesystem::path& out_dir,
                      const MethodRegistry& registry = builtin_methods());

// CSV writers, shared with the service export.
std::string csv_escape(const std::string& field);
std::string format_double(double v);
std::string run_csv(const RunRecord& record);
std::string aggregate_csv(const MetricsTable& table);
std::string decision_path_csv(const SearchSpace& space, const RunRecord& record);

}  // namespace catbox::bench

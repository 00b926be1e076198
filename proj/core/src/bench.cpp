#include "catbox/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <map>
#include <sstream>
#include <tuple>

#include "catbox/errors.hpp"
#include "catbox/rng.hpp"

namespace catbox::bench {

std::string to_string(FnKind kind) {
  switch (kind) {
    case FnKind::Ackley: return "ackley";
    case FnKind::Griewank: return "griewank";
    case FnKind::Rosenbrock: return "rosenbrock";
    case FnKind::Schwefel: return "schwefel";
  }
  return "ackley";
}

FnKind fn_kind_from_string(const std::string& s) {
  if (s == "ackley") return FnKind::Ackley;
  if (s == "griewank") return FnKind::Griewank;
  if (s == "rosenbrock") return FnKind::Rosenbrock;
  if (s == "schwefel") return FnKind::Schwefel;
  throw Error("unknown synthetic function '" + s + "'");
}

std::pair<double, double> SyntheticFn::domain() const {
  switch (kind) {
    case FnKind::Ackley: return {-32.768, 32.768};
    case FnKind::Griewank: return {-600.0, 600.0};
    case FnKind::Rosenbrock: return {-5.0, 10.0};
    case FnKind::Schwefel: return {-500.0, 500.0};
  }
  return {0.0, 1.0};
}

double SyntheticFn::optimizer_coordinate() const {
  switch (kind) {
    case FnKind::Rosenbrock: return 1.0;
    case FnKind::Schwefel: return 420.9687;
    default: return 0.0;
  }
}

double eval_synthetic(const SyntheticFn& fn, std::span<const double> z) {
  if (z.size() != fn.dim) {
    throw Error("synthetic function expects " + std::to_string(fn.dim) + " inputs, got " +
                std::to_string(z.size()));
  }
  const auto [lo, hi] = fn.domain();
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!(z[i] >= lo && z[i] <= hi)) {
      throw Error("input " + std::to_string(i) + " outside the domain of " + to_string(fn.kind));
    }
  }
  const double d = static_cast<double>(z.size());
  switch (fn.kind) {
    case FnKind::Ackley: {
      double sq = 0.0, cs = 0.0;
      for (double x : z) {
        sq += x * x;
        cs += std::cos(fn.c * x);
      }
      return -fn.a * std::exp(-fn.b * std::sqrt(sq / d)) - std::exp(cs / d) + fn.a + std::numbers::e;
    }
    case FnKind::Griewank: {
      double sum = 0.0, prod = 1.0;
      for (std::size_t i = 0; i < z.size(); ++i) {
        sum += z[i] * z[i] / 4000.0;
        prod *= std::cos(z[i] / std::sqrt(static_cast<double>(i + 1)));
      }
      return 1.0 + sum - prod;
    }
    case FnKind::Rosenbrock: {
      double f = 0.0;
      for (std::size_t i = 0; i + 1 < z.size(); ++i) {
        const double t = z[i + 1] - z[i] * z[i];
        f += 100.0 * t * t + (1.0 - z[i]) * (1.0 - z[i]);
      }
      return f;
    }
    case FnKind::Schwefel: {
      double f = 418.9829 * d;
      for (double x : z) f -= x * std::sin(std::sqrt(std::abs(x)));
      return f;
    }
  }
  return 0.0;
}

std::vector<double> MixedObjective::encode(const MixedPoint& p) const {
  const auto [lo, hi] = fn.domain();
  std::vector<double> z = encode_categorical_for_benchmark(space, p, lo, hi);
  z.insert(z.end(), p.con.begin(), p.con.end());
  return z;
}

MixedObjective mixed_wrap(const SyntheticFn& fn, std::size_t n_cat, std::size_t levels_per_cat,
                          std::size_t n_con) {
  if (n_cat + n_con != fn.dim) throw Error("mixed_wrap: n_cat + n_con must equal the function dimension");
  const auto [lo, hi] = fn.domain();
  std::vector<CategoricalVar> cats;
  for (std::size_t i = 0; i < n_cat; ++i) {
    CategoricalVar var{"c" + std::to_string(i), {}};
    for (std::size_t k = 0; k < levels_per_cat; ++k) var.levels.push_back("L" + std::to_string(k));
    cats.push_back(std::move(var));
  }
  std::vector<ContinuousVar> cons;
  for (std::size_t j = 0; j < n_con; ++j) cons.push_back({"x" + std::to_string(j), lo, hi});
  return {SearchSpace(std::move(cats), std::move(cons)), fn};
}

double add_noise(double y, const NoiseSpec& spec, std::uint64_t draw_index) {
  if (spec.kind == NoiseKind::None || spec.sigma == 0.0) return y;
  return y + spec.sigma * counter_normal(spec.seed, draw_index);
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void append_step(RunRecord& rec, MixedPoint point, double raw, double observed) {
  const double inc = rec.steps.empty() ? observed : std::max(rec.steps.back().incumbent_y, observed);
  rec.steps.push_back({static_cast<int>(rec.steps.size()) + 1, std::move(point), raw, observed, inc});
}

// Pairs noise draws across methods for the same run seed.
NoiseSpec run_noise(const NoiseSpec& noise, std::uint64_t seed) {
  NoiseSpec n = noise;
  n.seed = derive_seed(noise.seed, seed);
  return n;
}

double sample_std(std::span<const double> v, double mean) {
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

RunRecord random_search(const SearchSpace& space, const Objective& objective, int budget,
                        std::uint64_t seed, const NoiseSpec& noise) {
  if (budget < 1) throw Error("random_search: budget must be >= 1");
  const auto t0 = std::chrono::steady_clock::now();
  const NoiseSpec ns = run_noise(noise, seed);
  RunRecord rec{"random", seed, {}, 0.0};
  for (auto& p : initial_design(space, budget, seed)) {
    const double raw = objective(p);
    const double obs = add_noise(raw, ns, rec.steps.size());
    append_step(rec, std::move(p), raw, obs);
  }
  rec.wall_seconds = seconds_since(t0);
  return rec;
}

RunRecord run_engine(const SearchSpace& space, const Objective& objective, CampaignConfig config,
                     std::uint64_t seed, const NoiseSpec& noise) {
  const auto t0 = std::chrono::steady_clock::now();
  config.suggest.seed = seed;
  const NoiseSpec ns = run_noise(noise, seed);
  Campaign campaign(space, config, Direction::Maximize);
  RunRecord rec{"catbox", seed, {}, 0.0};
  auto evaluate = [&](MixedPoint p) {
    const double raw = objective(p);
    const double obs = add_noise(raw, ns, rec.steps.size());
    campaign.tell(p, obs);
    append_step(rec, p, raw, obs);
  };
  while (!campaign.pending_initial().empty()) evaluate(campaign.pending_initial().front());
  for (int i = 0; i < config.suggest.iters; ++i) evaluate(campaign.suggest());
  rec.wall_seconds = seconds_since(t0);
  return rec;
}

std::vector<double> incumbent_curve(const RunRecord& record, CurveColumn column) {
  std::vector<double> curve;
  curve.reserve(record.steps.size());
  for (const auto& s : record.steps) {
    if (column == CurveColumn::Observed) {
      curve.push_back(s.incumbent_y);
    } else {
      curve.push_back(curve.empty() ? s.raw_y : std::max(curve.back(), s.raw_y));
    }
  }
  return curve;
}

MetricsTable compute_metrics(std::span<const RunRecord> records, const MetricsOptions& options) {
  std::vector<const RunRecord*> sorted;
  for (const auto& r : records) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](const RunRecord* a, const RunRecord* b) {
    return std::tie(a->method, a->seed) < std::tie(b->method, b->seed);
  });
  std::map<std::string, std::vector<std::vector<double>>> curves;
  std::size_t budget = 0;
  for (const RunRecord* r : sorted) {
    if (r->steps.empty()) throw Error("compute_metrics: empty record for " + r->method);
    curves[r->method].push_back(incumbent_curve(*r, options.column));
    budget = std::max(budget, r->steps.size());
  }
  if (!curves.contains(options.baseline)) {
    throw Error("compute_metrics: missing baseline records '" + options.baseline + "'");
  }
  for (auto& [name, cs] : curves) {
    for (auto& c : cs) c.resize(budget, c.back());
  }

  MetricsTable table;
  table.baseline = options.baseline;
  double best = -std::numeric_limits<double>::infinity();
  double worst_at_step = std::numeric_limits<double>::infinity();
  const std::size_t ref_index = std::clamp<std::size_t>(options.reference_step, 1, budget) - 1;
  for (const auto& [name, cs] : curves) {
    for (const auto& c : cs) {
      best = std::max(best, c.back());
      worst_at_step = std::min(worst_at_step, c[ref_index]);
    }
  }
  table.best_known = options.optimum.value_or(best);
  table.reference = options.reference == AfReference::WorstAtStep ? worst_at_step : 0.0;
  table.reference_step = ref_index + 1;
  table.threshold = table.reference + options.threshold_frac * (table.best_known - table.reference);

  for (const auto& [name, cs] : curves) {
    MethodMetrics m;
    m.method = name;
    m.mean_curve.resize(budget);
    m.std_curve.resize(budget);
    std::vector<double> column(cs.size());
    for (std::size_t t = 0; t < budget; ++t) {
      for (std::size_t k = 0; k < cs.size(); ++k) column[k] = cs[k][t];
      double sum = 0.0;
      for (double v : column) sum += v;
      m.mean_curve[t] = sum / static_cast<double>(column.size());
      m.std_curve[t] = sample_std(column, m.mean_curve[t]);
    }
    m.final_mean = m.mean_curve.back();
    m.final_std = m.std_curve.back();
    double t_sum = 0.0;
    for (const auto& c : cs) {
      std::size_t t = budget + 1;
      for (std::size_t i = 0; i < c.size(); ++i) {
        if (c[i] >= table.threshold) {
          t = i + 1;
          break;
        }
      }
      t_sum += static_cast<double>(t);
    }
    m.mean_iters_to_threshold = t_sum / static_cast<double>(cs.size());
    table.methods.push_back(std::move(m));
  }
  const auto base = std::find_if(table.methods.begin(), table.methods.end(),
                                 [&](const MethodMetrics& m) { return m.method == options.baseline; });
  const double base_final = base->final_mean;
  const double base_t = base->mean_iters_to_threshold;
  for (auto& m : table.methods) {
    m.ef = (m.final_mean - base_final) / std::abs(base_final);
    m.af = base_t / m.mean_iters_to_threshold;
  }
  return table;
}

nlohmann::json MetricsTable::to_json() const {
  nlohmann::json methods_json = nlohmann::json::array();
  for (const auto& m : methods) {
    methods_json.push_back({{"method", m.method},
                            {"final_mean", m.final_mean},
                            {"final_std", m.final_std},
                            {"mean_iters_to_threshold", m.mean_iters_to_threshold},
                            {"ef", m.ef},
                            {"af", m.af}});
  }
  return {{"baseline", baseline},
          {"best_known", best_known},
          {"reference", reference},
          {"reference_step", reference_step},
          {"threshold", threshold},
          {"methods", methods_json},
          {"definitions",
           {{"status", "nonstandard - local definition"},
            {"ef", "(mean final incumbent - baseline mean final incumbent) / |baseline mean final incumbent|"},
            {"af", "baseline mean iterations to threshold / method mean iterations to threshold; "
                   "budget + 1 when never reached"},
            {"threshold", "reference + threshold_frac * (best_known - reference)"},
            {"reference", "worst incumbent across all records at reference_step, or 0"}}}};
}

// ---------------------------------------------------------------------------

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string run_csv(const RunRecord& record) {
  std::ostringstream os;
  os << "iteration,point_json,raw_y,observed_y,incumbent_y\n";
  for (const auto& s : record.steps) {
    os << s.iteration << ',' << csv_escape(point_to_json(s.point).dump()) << ','
       << format_double(s.raw_y) << ',' << format_double(s.observed_y) << ','
       << format_double(s.incumbent_y) << '\n';
  }
  return os.str();
}

std::string aggregate_csv(const MetricsTable& table) {
  std::ostringstream os;
  os << "iteration";
  for (const auto& m : table.methods) os << ',' << csv_escape(m.method + "_mean") << ',' << csv_escape(m.method + "_std");
  os << '\n';
  const std::size_t rows = table.methods.empty() ? 0 : table.methods.front().mean_curve.size();
  for (std::size_t t = 0; t < rows; ++t) {
    os << t + 1;
    for (const auto& m : table.methods) {
      os << ',' << format_double(m.mean_curve[t]) << ',' << format_double(m.std_curve[t]);
    }
    os << '\n';
  }
  return os.str();
}

std::string decision_path_csv(const SearchSpace& space, const RunRecord& record) {
  std::ostringstream os;
  os << "iteration";
  for (const auto& c : space.categoricals()) os << ',' << csv_escape(c.name);
  os << ",incumbent_y\n";
  for (const auto& s : record.steps) {
    os << s.iteration;
    for (std::size_t i = 0; i < s.point.cat.size(); ++i) {
      os << ',' << csv_escape(space.categoricals()[i].levels[static_cast<std::size_t>(s.point.cat[i])]);
    }
    os << ',' << format_double(s.incumbent_y) << '\n';
  }
  return os.str();
}

}  // namespace catbox::bench

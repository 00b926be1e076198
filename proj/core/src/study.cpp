#include <fstream>
#include <string>

#include "catbox/bench.hpp"
#include "catbox/errors.hpp"

namespace catbox::bench {

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << content;
  if (!out.flush()) throw Error("failed writing " + path.string());
}

std::string run_name(const RunRecord& r) { return r.method + "_seed" + std::to_string(r.seed); }

}  // namespace

StudyConfig study_from_json(const nlohmann::json& j) {
  StudyConfig s;
  try {
    s.fn.kind = fn_kind_from_string(j.value("function", std::string("ackley")));
    if (j.contains("ackley")) {
      const auto& a = j.at("ackley");
      s.fn.a = a.value("a", s.fn.a);
      s.fn.b = a.value("b", s.fn.b);
      s.fn.c = a.value("c", s.fn.c);
    }
    s.n_cat = j.value("n_cat", s.n_cat);
    s.levels = j.value("levels", s.levels);
    s.n_con = j.value("n_con", s.n_con);
    s.fn.dim = s.n_cat + s.n_con;
    if (j.contains("methods")) s.methods = j.at("methods").get<std::vector<std::string>>();
    if (j.contains("seeds")) s.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    s.n_init = j.value("n_init", s.n_init);
    s.iters = j.value("iters", s.iters);
    if (j.contains("noise")) {
      const auto& n = j.at("noise");
      const std::string kind = n.value("kind", std::string("none"));
      if (kind == "gaussian") {
        s.noise.kind = NoiseKind::Gaussian;
      } else if (kind != "none") {
        throw Error("study: unknown noise kind '" + kind + "'");
      }
      s.noise.sigma = n.value("sigma", 0.0);
      s.noise.seed = n.value("seed", std::uint64_t{0});
      if (!(s.noise.sigma >= 0.0)) throw Error("study: noise sigma must be >= 0");
    }
    s.metrics.threshold_frac = j.value("threshold_frac", s.metrics.threshold_frac);
    if (j.contains("optimum") && !j.at("optimum").is_null()) s.metrics.optimum = j.at("optimum").get<double>();
    s.af_reference = j.value("af_reference", s.af_reference);
    if (s.af_reference == "zero") {
      s.metrics.reference = AfReference::Zero;
    } else if (s.af_reference != "initial_design" && s.af_reference != "worst_start") {
      throw Error("study: af_reference must be initial_design, worst_start or zero");
    }
    s.engine = config_from_json(j.value("engine", nlohmann::json::object()));
    s.engine.suggest.n_init = s.n_init;
    s.engine.suggest.iters = s.iters;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("study config: ") + e.what());
  }
  if (s.methods.empty() || s.seeds.empty()) throw Error("study: methods and seeds must be non-empty");
  if (s.n_init < 1 || s.iters < 0) throw Error("study: n_init >= 1 and iters >= 0 required");
  s.metrics.reference_step = s.af_reference == "initial_design" ? static_cast<std::size_t>(s.n_init) : 1;
  validate_config(s.engine);
  return s;
}

nlohmann::json study_to_json(const StudyConfig& s) {
  return {{"function", to_string(s.fn.kind)},
          {"ackley", {{"a", s.fn.a}, {"b", s.fn.b}, {"c", s.fn.c}}},
          {"n_cat", s.n_cat},
          {"levels", s.levels},
          {"n_con", s.n_con},
          {"methods", s.methods},
          {"seeds", s.seeds},
          {"n_init", s.n_init},
          {"iters", s.iters},
          {"noise",
           {{"kind", s.noise.kind == NoiseKind::Gaussian ? "gaussian" : "none"},
            {"sigma", s.noise.sigma},
            {"seed", s.noise.seed}}},
          {"threshold_frac", s.metrics.threshold_frac},
          {"optimum", s.metrics.optimum ? nlohmann::json(*s.metrics.optimum) : nlohmann::json(nullptr)},
          {"af_reference", s.af_reference},
          {"engine", config_to_json(s.engine)}};
}

MethodRegistry builtin_methods() {
  MethodRegistry reg;
  reg["catbox"] = [](const MixedObjective& obj, const StudyConfig& cfg, std::uint64_t seed) {
    return run_engine(obj.space, obj, cfg.engine, seed, cfg.noise);
  };
  reg["random"] = [](const MixedObjective& obj, const StudyConfig& cfg, std::uint64_t seed) {
    return random_search(obj.space, obj, cfg.n_init + cfg.iters, seed, cfg.noise);
  };
  return reg;
}

StudyResult run_study(const StudyConfig& config, const std::filesystem::path& out_dir,
                      const MethodRegistry& registry) {
  const MixedObjective objective = mixed_wrap(config.fn, config.n_cat, config.levels, config.n_con);
  StudyResult result;
  for (const auto& method : config.methods) {
    const auto it = registry.find(method);
    if (it == registry.end()) throw Error("study: unknown method '" + method + "'");
    for (const auto seed : config.seeds) {
      RunRecord rec = it->second(objective, config, seed);
      rec.method = method;
      rec.seed = seed;
      result.records.push_back(std::move(rec));
    }
  }
  result.metrics = compute_metrics(result.records, config.metrics);
  if (config.noise.kind != NoiseKind::None) {
    MetricsOptions opts = config.metrics;
    opts.column = CurveColumn::True;
    result.true_metrics = compute_metrics(result.records, opts);
  }

  for (const auto& rec : result.records) {
    write_file(out_dir / "runs" / (run_name(rec) + ".csv"), run_csv(rec));
    write_file(out_dir / "decision_path" / (run_name(rec) + ".csv"), decision_path_csv(objective.space, rec));
  }
  write_file(out_dir / "aggregate.csv", aggregate_csv(result.metrics));
  nlohmann::json metrics = {{"study", study_to_json(config)}, {"observed", result.metrics.to_json()}};
  if (result.true_metrics) {
    write_file(out_dir / "aggregate_true.csv", aggregate_csv(*result.true_metrics));
    metrics["noise_free"] = result.true_metrics->to_json();
  }
  write_file(out_dir / "metrics.json", metrics.dump(2) + "\n");
  return result;
}

}  // namespace catbox::bench

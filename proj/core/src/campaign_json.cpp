#include <string>

#include "catbox/errors.hpp"
#include "catbox/optimizer.hpp"

namespace catbox {

namespace {

constexpr int kSchemaVersion = 1;

template <class T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

}  // namespace

nlohmann::json config_to_json(const CampaignConfig& c) {
  const auto& s = c.suggest;
  return {{"n_init", s.n_init},
          {"iters", s.iters},
          {"alt_rounds", s.alt_rounds},
          {"cont_restarts", s.cont_restarts},
          {"cont_steps", s.cont_steps},
          {"cat_neighbor_cap", s.cat_neighbor_cap},
          {"succ_tol", s.succ_tol},
          {"fail_tol", s.fail_tol},
          {"expand", s.expand},
          {"shrink", s.shrink},
          {"r_init", s.r_init},
          {"r_min", s.r_min},
          {"seed", s.seed},
          {"hyper_restarts", s.hyper_restarts},
          {"hyper_max_iters", s.hyper_max_iters},
          {"refit_thin_above", s.refit_thin_above},
          {"refit_every", s.refit_every},
          {"acq", to_string(c.acq.kind)},
          {"xi", c.acq.xi},
          {"beta", c.acq.beta},
          {"kernel",
           {{"q_gsm", c.kernel.q_gsm},
            {"q_csm", c.kernel.q_csm},
            {"hamming_unit_diagonal", c.kernel.hamming_unit_diagonal}}}};
}

CampaignConfig config_from_json(const nlohmann::json& j, CampaignConfig c) {
  if (j.is_null()) return c;
  if (!j.is_object()) throw Error("config: expected an object");
  try {
    auto& s = c.suggest;
    read_opt(j, "n_init", s.n_init);
    read_opt(j, "iters", s.iters);
    read_opt(j, "alt_rounds", s.alt_rounds);
    read_opt(j, "cont_restarts", s.cont_restarts);
    read_opt(j, "cont_steps", s.cont_steps);
    read_opt(j, "cat_neighbor_cap", s.cat_neighbor_cap);
    read_opt(j, "succ_tol", s.succ_tol);
    read_opt(j, "fail_tol", s.fail_tol);
    read_opt(j, "expand", s.expand);
    read_opt(j, "shrink", s.shrink);
    read_opt(j, "r_init", s.r_init);
    read_opt(j, "r_min", s.r_min);
    read_opt(j, "seed", s.seed);
    read_opt(j, "hyper_restarts", s.hyper_restarts);
    read_opt(j, "hyper_max_iters", s.hyper_max_iters);
    read_opt(j, "refit_thin_above", s.refit_thin_above);
    read_opt(j, "refit_every", s.refit_every);
    if (j.contains("acq")) c.acq.kind = acq_kind_from_string(j.at("acq").get<std::string>());
    read_opt(j, "xi", c.acq.xi);
    read_opt(j, "beta", c.acq.beta);
    if (j.contains("kernel")) {
      const auto& k = j.at("kernel");
      read_opt(k, "q_gsm", c.kernel.q_gsm);
      read_opt(k, "q_csm", c.kernel.q_csm);
      read_opt(k, "hamming_unit_diagonal", c.kernel.hamming_unit_diagonal);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  validate_config(c);
  return c;
}

nlohmann::json Campaign::to_json() const {
  nlohmann::json history = nlohmann::json::array();
  for (const auto& h : history_) {
    history.push_back({{"iteration", h.iteration},
                       {"point", point_to_json(h.point)},
                       {"y", h.y},
                       {"tag", to_string(h.tag)}});
  }
  nlohmann::json pending_initial = nlohmann::json::array();
  for (const auto& p : pending_initial_) pending_initial.push_back(point_to_json(p));

  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["space"] = space_to_json(space_);
  j["direction"] = to_string(direction_);
  j["config"] = config_to_json(config_);
  j["history"] = std::move(history);
  j["incumbent"] = incumbent_ ? nlohmann::json{{"point", point_to_json(incumbent_->point)},
                                               {"y", incumbent_->y},
                                               {"iteration", incumbent_->iteration}}
                              : nlohmann::json(nullptr);
  j["trust_region"] = {{"r_cont", tr_.r_cont},
                       {"r_cat", tr_.r_cat},
                       {"succ_count", tr_.succ_count},
                       {"fail_count", tr_.fail_count},
                       {"restarts", tr_.restarts}};
  j["rng"] = {{"seed", config_.suggest.seed}, {"suggest_count", suggest_count_}};
  j["pending_initial"] = std::move(pending_initial);
  j["pending_suggestion"] =
      pending_ ? nlohmann::json{{"point", point_to_json(pending_->point)},
                                {"tag", to_string(pending_->tag)},
                                {"acquisition", pending_->acquisition}}
               : nlohmann::json(nullptr);
  j["kernel_params"] = params_ ? params_to_json(*params_) : nlohmann::json(nullptr);
  return j;
}

Campaign Campaign::from_json(const nlohmann::json& j) {
  try {
    if (j.value("schema_version", 0) != kSchemaVersion) {
      throw Error("campaign: unsupported schema_version");
    }
    Campaign c(Restore{}, space_from_json(j.at("space")), config_from_json(j.at("config")),
               direction_from_string(j.at("direction").get<std::string>()));
    for (const auto& h : j.at("history")) {
      c.history_.push_back({point_from_json(c.space_, h.at("point")), h.at("y").get<double>(),
                            h.at("iteration").get<int>(), tag_from_string(h.at("tag").get<std::string>())});
    }
    if (!j.at("incumbent").is_null()) {
      const auto& inc = j.at("incumbent");
      c.incumbent_ = Incumbent{point_from_json(c.space_, inc.at("point")), inc.at("y").get<double>(),
                               inc.at("iteration").get<int>()};
    }
    const auto& tr = j.at("trust_region");
    c.tr_.r_cont = tr.at("r_cont").get<double>();
    c.tr_.r_cat = tr.at("r_cat").get<int>();
    c.tr_.succ_count = tr.at("succ_count").get<int>();
    c.tr_.fail_count = tr.at("fail_count").get<int>();
    c.tr_.restarts = tr.at("restarts").get<int>();
    c.suggest_count_ = j.at("rng").at("suggest_count").get<std::uint64_t>();
    for (const auto& p : j.at("pending_initial")) c.pending_initial_.push_back(point_from_json(c.space_, p));
    if (!j.at("pending_suggestion").is_null()) {
      const auto& ps = j.at("pending_suggestion");
      Proposal p;
      p.point = point_from_json(c.space_, ps.at("point"));
      p.tag = tag_from_string(ps.at("tag").get<std::string>());
      p.acquisition = ps.value("acquisition", 0.0);
      c.pending_ = std::move(p);
    }
    if (!j.at("kernel_params").is_null()) c.params_ = params_from_json(j.at("kernel_params"));
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("campaign json: ") + e.what());
  }
}

}  // namespace catbox

#include "catbox/domain.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "catbox/errors.hpp"

namespace catbox {

SearchSpace::SearchSpace(std::vector<CategoricalVar> categoricals,
                         std::vector<ContinuousVar> continuous)
    : categoricals_(std::move(categoricals)), continuous_(std::move(continuous)) {
  if (categoricals_.empty() && continuous_.empty()) {
    throw SpaceError("space", "at least one variable is required");
  }
  std::set<std::string> names;
  for (std::size_t i = 0; i < categoricals_.size(); ++i) {
    const auto& var = categoricals_[i];
    const std::string field = "categoricals[" + std::to_string(i) + "]";
    if (var.name.empty()) throw SpaceError(field + ".name", "empty variable name");
    if (!names.insert(var.name).second) {
      throw SpaceError(field + ".name", "duplicate variable name '" + var.name + "'");
    }
    if (var.levels.size() < 2) {
      throw SpaceError(field + ".levels", "variable '" + var.name + "' needs at least 2 levels");
    }
    std::set<std::string> labels(var.levels.begin(), var.levels.end());
    if (labels.size() != var.levels.size()) {
      throw SpaceError(field + ".levels", "duplicate level label in '" + var.name + "'");
    }
  }
  for (std::size_t j = 0; j < continuous_.size(); ++j) {
    const auto& var = continuous_[j];
    const std::string field = "continuous[" + std::to_string(j) + "]";
    if (var.name.empty()) throw SpaceError(field + ".name", "empty variable name");
    if (!names.insert(var.name).second) {
      throw SpaceError(field + ".name", "duplicate variable name '" + var.name + "'");
    }
    if (!std::isfinite(var.lower) || !std::isfinite(var.upper)) {
      throw SpaceError(field, "bounds of '" + var.name + "' must be finite");
    }
    if (!(var.lower < var.upper)) {
      throw SpaceError(field + ".lower", "lower must be < upper for '" + var.name + "'");
    }
  }
}

std::optional<int> SearchSpace::level_index(std::size_t var, const std::string& label) const {
  const auto& levels = categoricals_.at(var).levels;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    if (levels[k] == label) return static_cast<int>(k);
  }
  return std::nullopt;
}

std::optional<std::string> validate_point(const SearchSpace& space, const MixedPoint& p) {
  if (p.cat.size() != space.num_categorical()) {
    return "cat has " + std::to_string(p.cat.size()) + " entries, expected " +
           std::to_string(space.num_categorical());
  }
  if (p.con.size() != space.num_continuous()) {
    return "con has " + std::to_string(p.con.size()) + " entries, expected " +
           std::to_string(space.num_continuous());
  }
  for (std::size_t i = 0; i < p.cat.size(); ++i) {
    if (p.cat[i] < 0 || static_cast<std::size_t>(p.cat[i]) >= space.level_count(i)) {
      return "cat[" + std::to_string(i) + "] out of range";
    }
  }
  for (std::size_t j = 0; j < p.con.size(); ++j) {
    const auto& var = space.continuous()[j];
    const std::string field = "con[" + std::to_string(j) + "]";
    if (!std::isfinite(p.con[j])) return field + " not finite";
    if (p.con[j] < var.lower) return field + " below lower";
    if (p.con[j] > var.upper) return field + " above upper";
  }
  return std::nullopt;
}

NormalizedPoint normalize(const SearchSpace& space, const MixedPoint& p) {
  NormalizedPoint q{p.cat, Eigen::VectorXd(static_cast<Eigen::Index>(p.con.size()))};
  for (std::size_t j = 0; j < p.con.size(); ++j) {
    const auto& var = space.continuous()[j];
    q.con01[static_cast<Eigen::Index>(j)] = (p.con[j] - var.lower) / (var.upper - var.lower);
  }
  return q;
}

MixedPoint denormalize(const SearchSpace& space, const NormalizedPoint& q) {
  MixedPoint p{q.cat, std::vector<double>(static_cast<std::size_t>(q.con01.size()))};
  for (std::size_t j = 0; j < p.con.size(); ++j) {
    const auto& var = space.continuous()[j];
    const double v = var.lower + q.con01[static_cast<Eigen::Index>(j)] * (var.upper - var.lower);
    p.con[j] = std::clamp(v, var.lower, var.upper);
  }
  return p;
}

double encode_level(int level, std::size_t level_count, double lo, double hi) {
  return lo + static_cast<double>(level) * (hi - lo) / static_cast<double>(level_count - 1);
}

std::vector<double> encode_categorical_for_benchmark(const SearchSpace& space, const MixedPoint& p,
                                                     double lo, double hi) {
  std::vector<double> out(p.cat.size());
  for (std::size_t i = 0; i < p.cat.size(); ++i) {
    out[i] = encode_level(p.cat[i], space.level_count(i), lo, hi);
  }
  return out;
}

MixedPoint sample_point(const SearchSpace& space, Rng& rng) {
  MixedPoint p;
  p.cat.reserve(space.num_categorical());
  for (std::size_t i = 0; i < space.num_categorical(); ++i) {
    std::uniform_int_distribution<int> dist(0, static_cast<int>(space.level_count(i)) - 1);
    p.cat.push_back(dist(rng));
  }
  p.con.reserve(space.num_continuous());
  for (const auto& var : space.continuous()) {
    std::uniform_real_distribution<double> dist(var.lower, var.upper);
    p.con.push_back(dist(rng));
  }
  return p;
}

nlohmann::json space_to_json(const SearchSpace& space) {
  nlohmann::json cats = nlohmann::json::array();
  for (const auto& c : space.categoricals()) {
    cats.push_back({{"name", c.name}, {"levels", c.levels}});
  }
  nlohmann::json cons = nlohmann::json::array();
  for (const auto& c : space.continuous()) {
    cons.push_back({{"name", c.name}, {"lower", c.lower}, {"upper", c.upper}});
  }
  return {{"categoricals", cats}, {"continuous", cons}};
}

namespace {

const nlohmann::json& require(const nlohmann::json& obj, const char* key, const std::string& field) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw SpaceError(field + "." + key, "missing field");
  }
  return obj.at(key);
}

std::string require_string(const nlohmann::json& obj, const char* key, const std::string& field) {
  const auto& v = require(obj, key, field);
  if (!v.is_string()) throw SpaceError(field + "." + key, "expected a string");
  return v.get<std::string>();
}

double require_number(const nlohmann::json& obj, const char* key, const std::string& field) {
  const auto& v = require(obj, key, field);
  if (!v.is_number()) throw SpaceError(field + "." + key, "expected a number");
  return v.get<double>();
}

}  // namespace

SearchSpace space_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SpaceError("space", "expected an object");
  std::vector<CategoricalVar> cats;
  std::vector<ContinuousVar> cons;
  if (j.contains("categoricals")) {
    const auto& arr = j.at("categoricals");
    if (!arr.is_array()) throw SpaceError("categoricals", "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string field = "categoricals[" + std::to_string(i) + "]";
      CategoricalVar var;
      var.name = require_string(arr[i], "name", field);
      const auto& levels = require(arr[i], "levels", field);
      if (!levels.is_array()) throw SpaceError(field + ".levels", "expected an array");
      for (const auto& level : levels) {
        if (level.is_string()) {
          var.levels.push_back(level.get<std::string>());
        } else if (level.is_number()) {
          var.levels.push_back(level.dump());
        } else {
          throw SpaceError(field + ".levels", "level labels must be strings or numbers");
        }
      }
      cats.push_back(std::move(var));
    }
  }
  if (j.contains("continuous")) {
    const auto& arr = j.at("continuous");
    if (!arr.is_array()) throw SpaceError("continuous", "expected an array");
    for (std::size_t k = 0; k < arr.size(); ++k) {
      const std::string field = "continuous[" + std::to_string(k) + "]";
      ContinuousVar var;
      var.name = require_string(arr[k], "name", field);
      var.lower = require_number(arr[k], "lower", field);
      var.upper = require_number(arr[k], "upper", field);
      cons.push_back(std::move(var));
    }
  }
  return SearchSpace(std::move(cats), std::move(cons));
}

nlohmann::json point_to_json(const MixedPoint& p) {
  return {{"cat", p.cat}, {"con", p.con}};
}

MixedPoint point_from_json(const SearchSpace& space, const nlohmann::json& j) {
  if (!j.is_object()) throw PointError("point must be an object");
  MixedPoint p;
  if (j.contains("cat")) {
    const auto& cat = j.at("cat");
    if (!cat.is_array()) throw PointError("point.cat must be an array");
    for (std::size_t i = 0; i < cat.size(); ++i) {
      if (cat[i].is_number_integer()) {
        p.cat.push_back(cat[i].get<int>());
      } else if (cat[i].is_string() && i < space.num_categorical()) {
        auto idx = space.level_index(i, cat[i].get<std::string>());
        if (!idx) throw PointError("cat[" + std::to_string(i) + "] unknown level label");
        p.cat.push_back(*idx);
      } else {
        throw PointError("cat[" + std::to_string(i) + "] must be a level index or label");
      }
    }
  }
  if (j.contains("con")) {
    const auto& con = j.at("con");
    if (!con.is_array()) throw PointError("point.con must be an array");
    for (std::size_t k = 0; k < con.size(); ++k) {
      if (!con[k].is_number()) throw PointError("con[" + std::to_string(k) + "] must be a number");
      p.con.push_back(con[k].get<double>());
    }
  }
  if (auto violation = validate_point(space, p)) throw PointError(*violation);
  return p;
}

}  // namespace catbox

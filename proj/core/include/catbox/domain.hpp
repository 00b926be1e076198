#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "catbox/rng.hpp"

namespace catbox {

struct ContinuousVar {
  std::string name;
  double lower = 0.0;
  double upper = 1.0;

  friend bool operator==(const ContinuousVar&, const ContinuousVar&) = default;
};

struct CategoricalVar {
  std::string name;
  std::vector<std::string> levels;

  friend bool operator==(const CategoricalVar&, const CategoricalVar&) = default;
};

/// Mixed design space: U categorical variables followed by d continuous ones.
/// Construction validates every invariant and throws SpaceError naming the
/// offending field; a constructed space is immutable.
class SearchSpace {
 public:
  SearchSpace(std::vector<CategoricalVar> categoricals, std::vector<ContinuousVar> continuous);

  const std::vector<CategoricalVar>& categoricals() const noexcept { return categoricals_; }
  const std::vector<ContinuousVar>& continuous() const noexcept { return continuous_; }

  std::size_t num_categorical() const noexcept { return categoricals_.size(); }
  std::size_t num_continuous() const noexcept { return continuous_.size(); }
  std::size_t level_count(std::size_t i) const { return categoricals_.at(i).levels.size(); }

  std::optional<int> level_index(std::size_t var, const std::string& label) const;

  friend bool operator==(const SearchSpace&, const SearchSpace&) = default;

 private:
  std::vector<CategoricalVar> categoricals_;
  std::vector<ContinuousVar> continuous_;
};

/// A candidate in raw units. `cat[i]` indexes into the level list of
/// categorical variable i.
struct MixedPoint {
  std::vector<int> cat;
  std::vector<double> con;

  friend bool operator==(const MixedPoint&, const MixedPoint&) = default;
};

/// Continuous coordinates mapped onto [0,1]^d; categorical part unchanged.
struct NormalizedPoint {
  std::vector<int> cat;
  Eigen::VectorXd con01;
};

/// Returns std::nullopt when `p` lies in `space`, otherwise a short message
/// naming the first offending field.
std::optional<std::string> validate_point(const SearchSpace& space, const MixedPoint& p);

NormalizedPoint normalize(const SearchSpace& space, const MixedPoint& p);
MixedPoint denormalize(const SearchSpace& space, const NormalizedPoint& q);

/// Evenly spaced grid value of level `level` among `level_count` levels over
/// [lo, hi].
double encode_level(int level, std::size_t level_count, double lo, double hi);

/// Maps every categorical coordinate of `p` onto [lo, hi] with encode_level.
std::vector<double> encode_categorical_for_benchmark(const SearchSpace& space, const MixedPoint& p,
                                                     double lo, double hi);

/// Uniform draw: continuous coordinates uniform within bounds, levels uniform.
MixedPoint sample_point(const SearchSpace& space, Rng& rng);

// JSON. The space schema is
//   {"categoricals":[{"name","levels":[...]}], "continuous":[{"name","lower","upper"}]}
// and a point is {"cat":[indices], "con":[reals]}. On input, "cat" entries may
// also be level labels.
nlohmann::json space_to_json(const SearchSpace& space);
SearchSpace space_from_json(const nlohmann::json& j);
nlohmann::json point_to_json(const MixedPoint& p);
/// Throws PointError when the document is malformed or the point is outside
/// `space`.
MixedPoint point_from_json(const SearchSpace& space, const nlohmann::json& j);

}  // namespace catbox

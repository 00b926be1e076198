#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "catbox/acquisition.hpp"
#include "catbox/domain.hpp"
#include "catbox/gp.hpp"
#include "catbox/kernels.hpp"

namespace catbox {

/// Local search region around the incumbent: an L-infinity box of radius
/// `r_cont` in normalized continuous units and a Hamming ball of radius
/// `r_cat` over the categorical part.
struct TrustRegionState {
  double r_cont = 0.2;
  int r_cat = 1;
  int succ_count = 0;
  int fail_count = 0;
  int restarts = 0;

  friend bool operator==(const TrustRegionState&, const TrustRegionState&) = default;
};

struct SuggestConfig {
  int n_init = 20;
  int iters = 80;
  int alt_rounds = 3;
  int cont_restarts = 5;
  int cont_steps = 64;
  int cat_neighbor_cap = 2000;
  int succ_tol = 3;
  int fail_tol = 3;
  double expand = 2.0;
  double shrink = 0.5;
  double r_init = 0.2;
  double r_min = 1.0 / 64.0;
  std::uint64_t seed = 0;
  // Hyperparameter search per refit.
  int hyper_restarts = 3;
  int hyper_max_iters = 40;
  // Above this many observations the hyperparameters are re-optimized only
  // every `refit_every` suggestions; the GP itself is always refit.
  int refit_thin_above = 200;
  int refit_every = 5;
};

struct CampaignConfig {
  SuggestConfig suggest;
  AcqSpec acq;  // best_y is ignored; it is derived from the history
  KernelConfig kernel;
};

/// Throws catbox::Error when a constant is out of its admissible range.
void validate_config(const CampaignConfig& config);

enum class Direction { Maximize, Minimize };
enum class Tag { Init, Suggested, Manual, Exploration };

std::string to_string(Direction d);
std::string to_string(Tag t);
Direction direction_from_string(const std::string& s);
Tag tag_from_string(const std::string& s);

struct HistoryEntry {
  MixedPoint point;
  double y = 0.0;
  int iteration = 0;
  Tag tag = Tag::Manual;
};

struct Incumbent {
  MixedPoint point;
  double y = 0.0;
  int iteration = 0;
};

/// Uniform random design, deterministic per seed.
std::vector<MixedPoint> initial_design(const SearchSpace& space, int n_init, std::uint64_t seed);

/// Number of categorical configurations within Hamming distance `radius` of
/// any center, for variables with the given level counts.
double hamming_ball_size(std::span<const std::size_t> levels, int radius);

/// Every configuration within `radius` of `center`, center first, then by
/// increasing distance; deterministic order.
std::vector<std::vector<int>> hamming_ball(std::span<const std::size_t> levels,
                                           std::span<const int> center, int radius);

/// `count` distinct members of the ball drawn uniformly (center always first).
/// Requires count <= hamming_ball_size.
std::vector<std::vector<int>> sample_hamming_ball(std::span<const std::size_t> levels,
                                                  std::span<const int> center, int radius,
                                                  std::size_t count, Rng& rng);

/// What the alternating search produced for one suggestion.
struct Proposal {
  MixedPoint point;
  Tag tag = Tag::Suggested;
  double acquisition = 0.0;
  KernelParams params;   // hyperparameters used for the GP
  bool hyperopt_failed = false;
  std::size_t candidates_scored = 0;
};

/// Persistent ask/tell state. Single writer; suggest and tell mutate.
class Campaign {
 public:
  Campaign(SearchSpace space, CampaignConfig config, Direction direction = Direction::Maximize);

  const SearchSpace& space() const noexcept { return space_; }
  const CampaignConfig& config() const noexcept { return config_; }
  Direction direction() const noexcept { return direction_; }
  const std::vector<HistoryEntry>& history() const noexcept { return history_; }
  const std::optional<Incumbent>& incumbent() const noexcept { return incumbent_; }
  const TrustRegionState& trust_region() const noexcept { return tr_; }
  const std::vector<MixedPoint>& pending_initial() const noexcept { return pending_initial_; }
  const std::optional<Proposal>& pending_suggestion() const noexcept { return pending_; }
  const std::optional<KernelParams>& kernel_params() const noexcept { return params_; }
  std::uint64_t suggest_count() const noexcept { return suggest_count_; }

  /// True when `a` is strictly better than `b` under the campaign direction.
  bool better(double a, double b) const noexcept {
    return direction_ == Direction::Maximize ? a > b : a < b;
  }

  /// Runs the alternating trust-region search without touching the campaign.
  Proposal propose() const;

  /// Returns the pending suggestion if one exists, otherwise computes, stores
  /// and returns a new one. Throws StateError on an empty history.
  MixedPoint suggest();

  /// Records an observation. The tag is inferred: a pending initial-design
  /// point is `init`, the pending suggestion keeps its tag, anything else is
  /// `manual`. An explicit `iteration` must exceed every recorded index.
  const HistoryEntry& tell(const MixedPoint& point, double y, std::optional<int> iteration = {});

  nlohmann::json to_json() const;
  static Campaign from_json(const nlohmann::json& j);

 private:
  struct Restore {};
  Campaign(Restore, SearchSpace space, CampaignConfig config, Direction direction);
  void update_trust_region(bool improved);

  SearchSpace space_;
  CampaignConfig config_;
  Direction direction_ = Direction::Maximize;
  std::vector<HistoryEntry> history_;
  std::optional<Incumbent> incumbent_;
  TrustRegionState tr_;
  std::vector<MixedPoint> pending_initial_;
  std::optional<Proposal> pending_;
  std::optional<KernelParams> params_;
  std::uint64_t suggest_count_ = 0;
};

inline MixedPoint suggest(Campaign& campaign) { return campaign.suggest(); }

using Objective = std::function<double(const MixedPoint&)>;

/// Drains the pending initial design, then runs `iters` suggest/evaluate/tell
/// rounds. An objective exception propagates with `campaign` holding every
/// observation told so far.
void run_loop(Campaign& campaign, const Objective& objective, int iters);
Campaign run_loop(const SearchSpace& space, const Objective& objective,
                  const CampaignConfig& config, Direction direction = Direction::Maximize);

nlohmann::json config_to_json(const CampaignConfig& config);
/// Missing keys keep their defaults; accepts the flat CLI/service form
/// {"acq": "ei", "xi": ..., "beta": ..., "n_init": ..., "kernel": {...}}.
CampaignConfig config_from_json(const nlohmann::json& j, CampaignConfig base = {});

}  // namespace catbox

#include "catbox/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "catbox/errors.hpp"

namespace catbox {

namespace {

constexpr std::uint64_t kInitStream = 0x696e6974ULL;     // "init"
constexpr std::uint64_t kSuggestStream = 0x73756767ULL;  // "sugg"

std::vector<std::size_t> level_counts(const SearchSpace& space) {
  std::vector<std::size_t> out(space.num_categorical());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = space.level_count(i);
  return out;
}

// e_k of the (L_i - 1) over variables [from, U), for k = 0..radius.
std::vector<std::vector<double>> suffix_counts(std::span<const std::size_t> levels, int radius) {
  const std::size_t u = levels.size();
  const auto r = static_cast<std::size_t>(std::max(radius, 0));
  std::vector<std::vector<double>> e(u + 1, std::vector<double>(r + 1, 0.0));
  e[u][0] = 1.0;
  for (std::size_t i = u; i-- > 0;) {
    const double alt = static_cast<double>(levels[i]) - 1.0;
    for (std::size_t k = 0; k <= r; ++k) {
      e[i][k] = e[i + 1][k] + (k > 0 ? alt * e[i + 1][k - 1] : 0.0);
    }
  }
  return e;
}

struct Candidate {
  NormalizedPoint point;
  double score;
  std::size_t order;
};

// Acquisition bookkeeping for one proposal: every scored point is logged in
// generation order so ties resolve to the earliest candidate.
class CandidateLog {
 public:
  CandidateLog(const GpModel& model, const AcqSpec& acq) : model_(model), acq_(acq) {}

  double score(const NormalizedPoint& x) {
    const double s = catbox::score(acq_, model_.predict(x));
    log_.push_back({x, s, log_.size()});
    return s;
  }

  const std::vector<Candidate>& entries() const { return log_; }

 private:
  const GpModel& model_;
  AcqSpec acq_;
  std::vector<Candidate> log_;
};

struct Box {
  Eigen::VectorXd lo, hi;
};

// Coordinate pattern search on the continuous part with `cat` frozen. Tries
// +/- step along each axis, keeps the first improvement, halves the step when
// a full sweep fails. Stops after `budget` evaluations.
std::pair<Eigen::VectorXd, double> pattern_search(CandidateLog& log, const std::vector<int>& cat,
                                                  Eigen::VectorXd x, const Box& box, int budget) {
  const Eigen::Index d = x.size();
  NormalizedPoint probe{cat, x};
  double best = log.score(probe);
  int evals = 1;
  double step = 0.5 * (box.hi - box.lo).maxCoeff();
  while (evals < budget && step > 1e-9) {
    bool improved = false;
    for (Eigen::Index j = 0; j < d && evals < budget; ++j) {
      for (const double sign : {1.0, -1.0}) {
        if (evals >= budget) break;
        probe.con01 = x;
        probe.con01[j] = std::clamp(x[j] + sign * step, box.lo[j], box.hi[j]);
        if (probe.con01[j] == x[j]) continue;
        const double s = log.score(probe);
        ++evals;
        if (s > best) {
          best = s;
          x = probe.con01;
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return {x, best};
}

}  // namespace

// ---------------------------------------------------------------------------

void validate_config(const CampaignConfig& c) {
  const auto& s = c.suggest;
  if (s.n_init < 1) throw Error("config: n_init must be >= 1");
  if (s.iters < 0) throw Error("config: iters must be >= 0");
  if (s.alt_rounds < 1) throw Error("config: alt_rounds must be >= 1");
  if (s.cont_restarts < 1 || s.cont_steps < 1) throw Error("config: continuous search budget must be >= 1");
  if (s.cat_neighbor_cap < 1) throw Error("config: cat_neighbor_cap must be >= 1");
  if (s.succ_tol < 1 || s.fail_tol < 1) throw Error("config: succ_tol and fail_tol must be >= 1");
  if (!(s.expand > 1.0 && s.shrink > 0.0 && s.shrink < 1.0)) {
    throw Error("config: require expand > 1 > shrink > 0");
  }
  if (!(s.r_min > 0.0 && s.r_min <= s.r_init && s.r_init <= 1.0)) {
    throw Error("config: require 0 < r_min <= r_init <= 1");
  }
  if (s.hyper_restarts < 1) throw Error("config: hyper_restarts must be >= 1");
  if (!(c.acq.xi >= 0.0) || !(c.acq.beta >= 0.0)) throw Error("config: xi and beta must be >= 0");
  if (c.kernel.q_gsm < 1 || c.kernel.q_csm < 1) throw Error("config: q_gsm and q_csm must be >= 1");
}

std::string to_string(Direction d) { return d == Direction::Maximize ? "maximize" : "minimize"; }

std::string to_string(Tag t) {
  switch (t) {
    case Tag::Init: return "init";
    case Tag::Suggested: return "suggested";
    case Tag::Manual: return "manual";
    case Tag::Exploration: return "exploration";
  }
  return "manual";
}

Direction direction_from_string(const std::string& s) {
  if (s == "maximize" || s == "max") return Direction::Maximize;
  if (s == "minimize" || s == "min") return Direction::Minimize;
  throw Error("unknown direction '" + s + "'");
}

Tag tag_from_string(const std::string& s) {
  if (s == "init") return Tag::Init;
  if (s == "suggested") return Tag::Suggested;
  if (s == "manual") return Tag::Manual;
  if (s == "exploration") return Tag::Exploration;
  throw Error("unknown history tag '" + s + "'");
}

std::vector<MixedPoint> initial_design(const SearchSpace& space, int n_init, std::uint64_t seed) {
  if (n_init < 1) throw Error("initial design needs n_init >= 1");
  Rng rng(derive_seed(seed, kInitStream));
  std::vector<MixedPoint> out;
  out.reserve(static_cast<std::size_t>(n_init));
  for (int i = 0; i < n_init; ++i) out.push_back(sample_point(space, rng));
  return out;
}

double hamming_ball_size(std::span<const std::size_t> levels, int radius) {
  const auto e = suffix_counts(levels, radius);
  double total = 0.0;
  for (double v : e[0]) total += v;
  return total;
}

std::vector<std::vector<int>> hamming_ball(std::span<const std::size_t> levels,
                                           std::span<const int> center, int radius) {
  const std::size_t u = levels.size();
  std::vector<std::vector<int>> out;
  out.emplace_back(center.begin(), center.end());
  const std::size_t rmax = std::min<std::size_t>(u, static_cast<std::size_t>(std::max(radius, 0)));
  for (std::size_t k = 1; k <= rmax; ++k) {
    // Lexicographic k-subsets of variables.
    std::vector<std::size_t> subset(k);
    for (std::size_t i = 0; i < k; ++i) subset[i] = i;
    while (true) {
      // Odometer over the non-center levels of the chosen variables.
      std::vector<std::size_t> digit(k, 0);
      while (true) {
        std::vector<int> cfg(center.begin(), center.end());
        for (std::size_t m = 0; m < k; ++m) {
          const std::size_t var = subset[m];
          int level = static_cast<int>(digit[m]);
          if (level >= center[var]) ++level;  // skip the center level
          cfg[var] = level;
        }
        out.push_back(std::move(cfg));
        std::size_t m = k;
        while (m-- > 0) {
          if (++digit[m] < levels[subset[m]] - 1) break;
          digit[m] = 0;
        }
        if (m == static_cast<std::size_t>(-1)) break;
      }
      std::size_t i = k;
      while (i-- > 0) {
        if (subset[i] < u - k + i) break;
      }
      if (i == static_cast<std::size_t>(-1)) break;
      ++subset[i];
      for (std::size_t j = i + 1; j < k; ++j) subset[j] = subset[j - 1] + 1;
    }
  }
  return out;
}

std::vector<std::vector<int>> sample_hamming_ball(std::span<const std::size_t> levels,
                                                  std::span<const int> center, int radius,
                                                  std::size_t count, Rng& rng) {
  const std::size_t u = levels.size();
  const int r = std::min(radius, static_cast<int>(u));
  const auto e = suffix_counts(levels, r);
  const double total = hamming_ball_size(levels, r);
  if (static_cast<double>(count) > total) throw Error("sample_hamming_ball: count exceeds ball size");

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::set<std::vector<int>> seen;
  std::vector<std::vector<int>> out;
  out.emplace_back(center.begin(), center.end());
  seen.insert(out.back());
  const std::size_t max_attempts = 1000 * count + 10000;
  for (std::size_t attempt = 0; out.size() < count && attempt < max_attempts; ++attempt) {
    // Distance k with probability proportional to the number of members at k.
    double pick = unit(rng) * total;
    int k = 0;
    while (k < r && pick >= e[0][static_cast<std::size_t>(k)]) {
      pick -= e[0][static_cast<std::size_t>(k)];
      ++k;
    }
    std::vector<int> cfg(center.begin(), center.end());
    int remaining = k;
    for (std::size_t i = 0; i < u && remaining > 0; ++i) {
      const double alt = static_cast<double>(levels[i]) - 1.0;
      const double take = alt * e[i + 1][static_cast<std::size_t>(remaining - 1)];
      const double all = e[i][static_cast<std::size_t>(remaining)];
      if (unit(rng) * all < take) {
        std::uniform_int_distribution<int> lv(0, static_cast<int>(levels[i]) - 2);
        int level = lv(rng);
        if (level >= center[i]) ++level;
        cfg[i] = level;
        --remaining;
      }
    }
    if (seen.insert(cfg).second) out.push_back(std::move(cfg));
  }
  return out;
}

// ---------------------------------------------------------------------------

Campaign::Campaign(SearchSpace space, CampaignConfig config, Direction direction)
    : space_(std::move(space)), config_(std::move(config)), direction_(direction) {
  validate_config(config_);
  tr_.r_cont = config_.suggest.r_init;
  tr_.r_cat = std::max<int>(static_cast<int>(space_.num_categorical()), 1);
  pending_initial_ = initial_design(space_, config_.suggest.n_init, config_.suggest.seed);
}

Campaign::Campaign(Restore, SearchSpace space, CampaignConfig config, Direction direction)
    : space_(std::move(space)), config_(std::move(config)), direction_(direction) {
  validate_config(config_);
}

Proposal Campaign::propose() const {
  if (history_.empty()) throw StateError("suggest requires at least one observation");
  const auto& sc = config_.suggest;
  const std::size_t d = space_.num_continuous();
  const std::size_t u = space_.num_categorical();

  // Engine-side values are maximized.
  std::vector<Observation> obs;
  obs.reserve(history_.size());
  for (const auto& h : history_) {
    obs.push_back({h.point, direction_ == Direction::Maximize ? h.y : -h.y});
  }
  const TrainingSet train = make_training_set(space_, obs);
  Rng rng(derive_seed(sc.seed, kSuggestStream + suggest_count_));

  Proposal proposal;
  KernelParams init;
  if (params_) {
    init = *params_;
  } else {
    init = initial_params(space_, train, config_.kernel, rng);
  }
  const bool thin = static_cast<int>(history_.size()) > sc.refit_thin_above &&
                    params_.has_value() && suggest_count_ % static_cast<std::uint64_t>(sc.refit_every) != 0;
  if (thin) {
    proposal.params = init;
  } else {
    HyperOptConfig hc;
    hc.restarts = sc.hyper_restarts;
    hc.max_iters = sc.hyper_max_iters;
    hc.seed = derive_seed(sc.seed, suggest_count_);
    const HyperOptResult hr = optimize_hyperparams(space_, obs, init, hc);
    proposal.params = hr.params;
    proposal.hyperopt_failed = hr.failed;
  }
  const GpModel model(train, proposal.params);

  AcqSpec acq = config_.acq;
  acq.best_y = (train.y.maxCoeff());  // standardized incumbent
  CandidateLog log(model, acq);

  const NormalizedPoint anchor = normalize(space_, incumbent_->point);
  Box box;
  if (d > 0) {
    box.lo = (anchor.con01.array() - tr_.r_cont).max(0.0).matrix();
    box.hi = (anchor.con01.array() + tr_.r_cont).min(1.0).matrix();
  }
  const auto levels = level_counts(space_);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  NormalizedPoint current = anchor;
  double current_score = log.score(current);
  for (int round = 0; round < sc.alt_rounds; ++round) {
    const double round_start = current_score;
    if (d > 0) {
      for (int s = 0; s < sc.cont_restarts; ++s) {
        Eigen::VectorXd start = current.con01;
        if (s > 0) {
          for (std::size_t j = 0; j < d; ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            start[jj] = box.lo[jj] + unit(rng) * (box.hi[jj] - box.lo[jj]);
          }
        }
        auto [x, value] = pattern_search(log, current.cat, start, box, sc.cont_steps);
        if (value > current_score) {
          current_score = value;
          current.con01 = x;
        }
      }
    }
    if (u > 0) {
      const double ball = hamming_ball_size(levels, tr_.r_cat);
      const auto cap = static_cast<std::size_t>(sc.cat_neighbor_cap);
      const auto configs = ball <= static_cast<double>(cap)
                               ? hamming_ball(levels, anchor.cat, tr_.r_cat)
                               : sample_hamming_ball(levels, anchor.cat, tr_.r_cat, cap, rng);
      NormalizedPoint probe = current;
      for (const auto& cfg : configs) {
        probe.cat = cfg;
        const double value = log.score(probe);
        if (value > current_score) {
          current_score = value;
          current.cat = cfg;
        }
      }
    }
    if (current_score < round_start + 1e-12) break;
  }

  // Rank by score, earliest candidate first on ties.
  std::vector<const Candidate*> ranked;
  ranked.reserve(log.entries().size());
  for (const auto& c : log.entries()) ranked.push_back(&c);
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const Candidate* a, const Candidate* b) { return a->score > b->score; });
  proposal.candidates_scored = ranked.size();

  std::set<std::pair<std::vector<int>, std::vector<double>>> seen;
  for (const auto& h : history_) seen.insert({h.point.cat, h.point.con});
  for (const Candidate* c : ranked) {
    MixedPoint p = denormalize(space_, c->point);
    if (!seen.contains({p.cat, p.con})) {
      proposal.point = std::move(p);
      proposal.acquisition = c->score;
      proposal.tag = Tag::Suggested;
      return proposal;
    }
  }
  // Every scored candidate was already observed: explore.
  for (int attempt = 0; attempt < 1000; ++attempt) {
    MixedPoint p = sample_point(space_, rng);
    if (!seen.contains({p.cat, p.con}) || attempt == 999) {
      proposal.point = std::move(p);
      break;
    }
  }
  proposal.tag = Tag::Exploration;
  proposal.acquisition = score(acq, model.predict(normalize(space_, proposal.point)));
  return proposal;
}

MixedPoint Campaign::suggest() {
  if (pending_) return pending_->point;
  Proposal p = propose();
  params_ = p.params;
  ++suggest_count_;
  pending_ = std::move(p);
  return pending_->point;
}

void Campaign::update_trust_region(bool improved) {
  const auto& sc = config_.suggest;
  if (improved) {
    ++tr_.succ_count;
    tr_.fail_count = 0;
  } else {
    ++tr_.fail_count;
    tr_.succ_count = 0;
  }
  if (tr_.succ_count >= sc.succ_tol) {
    tr_.r_cont = std::min(sc.expand * tr_.r_cont, 1.0);
    tr_.succ_count = 0;
  }
  if (tr_.fail_count >= sc.fail_tol) {
    tr_.r_cont *= sc.shrink;
    tr_.r_cat = std::max(tr_.r_cat - 1, 1);
    tr_.fail_count = 0;
  }
  if (tr_.r_cont < sc.r_min) {
    tr_.r_cont = sc.r_init;
    tr_.r_cat = std::max<int>(static_cast<int>(space_.num_categorical()), 1);
    ++tr_.restarts;
  }
}

const HistoryEntry& Campaign::tell(const MixedPoint& point_in, double y, std::optional<int> iteration) {
  // Copy first: the argument may alias an element of pending_initial_.
  const MixedPoint point = point_in;
  if (auto violation = validate_point(space_, point)) throw PointError(*violation);
  if (!std::isfinite(y)) throw PointError("observation y must be finite");
  const int last = history_.empty() ? 0 : history_.back().iteration;
  if (iteration && *iteration <= last) {
    throw PointError("iteration " + std::to_string(*iteration) +
                     " already recorded or not increasing (last " + std::to_string(last) + ")");
  }

  Tag tag = Tag::Manual;
  if (pending_ && pending_->point == point) {
    tag = pending_->tag;
  } else if (auto it = std::find(pending_initial_.begin(), pending_initial_.end(), point);
             it != pending_initial_.end()) {
    tag = Tag::Init;
    pending_initial_.erase(it);
  }
  pending_.reset();

  HistoryEntry entry{point, y, iteration.value_or(last + 1), tag};
  const bool improved = !incumbent_ || better(y, incumbent_->y);
  const bool had_incumbent = incumbent_.has_value();
  if (improved) incumbent_ = Incumbent{point, y, entry.iteration};
  if (tag != Tag::Init && had_incumbent) update_trust_region(improved);
  history_.push_back(std::move(entry));
  return history_.back();
}

// ---------------------------------------------------------------------------

void run_loop(Campaign& campaign, const Objective& objective, int iters) {
  while (!campaign.pending_initial().empty()) {
    const MixedPoint p = campaign.pending_initial().front();
    campaign.tell(p, objective(p));
  }
  for (int i = 0; i < iters; ++i) {
    const MixedPoint p = campaign.suggest();
    campaign.tell(p, objective(p));
  }
}

Campaign run_loop(const SearchSpace& space, const Objective& objective,
                  const CampaignConfig& config, Direction direction) {
  Campaign campaign(space, config, direction);
  run_loop(campaign, objective, config.suggest.iters);
  return campaign;
}

}  // namespace catbox

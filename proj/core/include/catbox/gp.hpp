#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "catbox/domain.hpp"
#include "catbox/kernels.hpp"
#include "catbox/rng.hpp"

namespace catbox {

struct Observation {
  MixedPoint point;
  double y = 0.0;
};

/// Normalized inputs and standardized targets. `y_std` is forced to 1 when all
/// raw targets are equal.
struct TrainingSet {
  std::vector<NormalizedPoint> points;
  Eigen::VectorXd y;
  double y_mean = 0.0;
  double y_std = 1.0;
};

TrainingSet make_training_set(const SearchSpace& space, std::span<const Observation> observations);

/// Posterior at one point, in standardized units.
struct Posterior {
  double mean = 0.0;
  double var = 0.0;
  double y_mean = 0.0;
  double y_std = 1.0;

  double std() const;
  double raw_mean() const { return y_mean + y_std * mean; }
  double raw_std() const { return y_std * std(); }
};

/// Lower Cholesky factor of the jittered Gram matrix together with the
/// jitter that made it succeed.
struct GramFactor {
  Eigen::MatrixXd chol;
  double jitter = 0.0;
};

/// Factorizes gram(params, points) with adaptive jitter: starts at
/// 1e-8 * trace(K) / n, multiplied by 10 on failure, at most 6 escalations.
/// Throws GramNotPd carrying the final jitter.
GramFactor factorize(const KernelParams& params, std::span<const NormalizedPoint> points);

/// Exact GP regression model; immutable after fit.
class GpModel {
 public:
  GpModel(TrainingSet train, KernelParams params);

  const TrainingSet& train() const noexcept { return train_; }
  const KernelParams& params() const noexcept { return params_; }
  const Eigen::MatrixXd& chol() const noexcept { return factor_.chol; }
  const Eigen::VectorXd& alpha() const noexcept { return alpha_; }
  double jitter() const noexcept { return factor_.jitter; }

  Posterior predict(const NormalizedPoint& x) const;

 private:
  TrainingSet train_;
  KernelParams params_;
  GramFactor factor_;
  Eigen::VectorXd alpha_;
};

GpModel fit(const SearchSpace& space, std::span<const Observation> observations,
            const KernelParams& params);

Posterior predict(const SearchSpace& space, const GpModel& model, const MixedPoint& x);

/// Marginal log likelihood of the standardized targets.
double mll(const SearchSpace& space, std::span<const Observation> observations,
           const KernelParams& params);
double mll(const TrainingSet& train, const KernelParams& params);

/// MLL and its analytic gradient with respect to the unconstrained vector of
/// `layout`.
struct MllGradient {
  double value = 0.0;
  Eigen::VectorXd grad;
};
MllGradient mll_with_grad(const TrainingSet& train, const KernelParams& params,
                          const HyperLayout& layout);

struct KernelConfig {
  std::size_t q_gsm = 2;
  std::size_t q_csm = 2;
  bool hamming_unit_diagonal = false;
};

/// Data-driven starting point: frequencies uniform in [0, n / (2 range)] per
/// dimension, bandwidths from the median pairwise distance, lambda = 0.5,
/// Hamming lengthscales 1.
KernelParams initial_params(const SearchSpace& space, const TrainingSet& train,
                            const KernelConfig& config, Rng& rng);

struct HyperOptConfig {
  int restarts = 8;
  int max_iters = 60;
  double perturb_scale = 0.5;
  std::uint64_t seed = 0;
};

struct HyperOptResult {
  KernelParams params;
  double mll = 0.0;
  double init_mll = 0.0;
  bool failed = false;  // every start failed to factorize; params == init
};

/// Box on the unconstrained hyperparameter vector used by the optimizer.
struct HyperBounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};
HyperBounds hyper_bounds(const HyperLayout& layout, const TrainingSet& train);

/// Multi-start L-BFGS ascent of the MLL in the unconstrained parameterization.
/// Start 0 is `init` itself; the remaining starts perturb it. The result never
/// has lower MLL than `init`.
HyperOptResult optimize_hyperparams(const SearchSpace& space,
                                    std::span<const Observation> observations,
                                    const KernelParams& init, const HyperOptConfig& config);

}  // namespace catbox

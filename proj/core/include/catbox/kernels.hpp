#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "catbox/domain.hpp"

namespace catbox {

/// One Gaussian spectral component with diagonal covariance. `mean` is the
/// frequency in cycles per unit of normalized input.
struct GsmComponent {
  double weight = 1.0;
  Eigen::VectorXd mean;
  Eigen::VectorXd var;
};

/// One Cauchy spectral component: central frequency `eta`, scale `gamma`.
struct CsmComponent {
  double weight = 1.0;
  Eigen::VectorXd eta;
  Eigen::VectorXd gamma;
};

struct KernelParams {
  std::vector<GsmComponent> gsm;
  std::vector<CsmComponent> csm;
  Eigen::VectorXd hamming;  // one lengthscale per categorical variable
  double lambda = 0.5;
  double noise_var = 1e-6;
  // Divide the Hamming kernel by its diagonal value so that k_u(a, a) = 1.
  // Off by default: the kernel is used in its exponentiated-match form.
  bool hamming_unit_diagonal = false;
};

/// Throws catbox::Error when `p` violates a KernelParams invariant for a
/// space with `num_cat` categorical and `num_con` continuous variables.
void validate_params(const KernelParams& p, std::size_t num_cat, std::size_t num_con);

/// Gaussian spectral mixture:
///   sum_q w_q exp(-2 pi^2 sum_j var_qj tau_j^2) cos(2 pi tau . mean_q)
double k_gsm(const KernelParams& p, const Eigen::Ref<const Eigen::VectorXd>& tau);

/// Cauchy spectral mixture:
///   sum_q w_q exp(-2 pi gamma_q . |tau|) cos(2 pi tau . eta_q)
double k_csm(const KernelParams& p, const Eigen::Ref<const Eigen::VectorXd>& tau);

inline double k_gc(const KernelParams& p, const Eigen::Ref<const Eigen::VectorXd>& tau) {
  return k_gsm(p, tau) + k_csm(p, tau);
}

/// Weighted exponentiated Hamming similarity exp((1/U) sum_i l_i [a_i == b_i]).
double k_hamming(const KernelParams& p, std::span<const int> a, std::span<const int> b);

/// Combines the continuous and categorical values. With both parts present
/// this is lambda*kc*ku + (1-lambda)*(kc + ku); a missing part collapses the
/// combination onto the other kernel.
double combine_composite(double lambda, double kc, double ku, bool has_con, bool has_cat);

double k_composite(const KernelParams& p, const NormalizedPoint& x, const NormalizedPoint& y);

/// K[i][j] = k(x_i, x_j) + (noise_var + jitter) [i == j]. The upper triangle is
/// computed and mirrored. Throws catbox::Error naming the pair on a
/// non-finite entry.
Eigen::MatrixXd gram(const KernelParams& p, std::span<const NormalizedPoint> points, double jitter);

/// Cross-covariance vector k(x, points[i]).
Eigen::VectorXd cross_cov(const KernelParams& p, std::span<const NormalizedPoint> points,
                          const NormalizedPoint& x);

/// Maps KernelParams to and from an unconstrained real vector: log for
/// positive quantities, identity for frequencies, logit for lambda.
///
/// Layout: per Gaussian component [log w, mean(d), log var(d)], per Cauchy
/// component [log w, eta(d), log gamma(d)], then log l (U), logit lambda,
/// log noise_var.
class HyperLayout {
 public:
  HyperLayout(std::size_t num_cat, std::size_t num_con, std::size_t q_gsm, std::size_t q_csm);
  explicit HyperLayout(const KernelParams& shape);

  std::size_t size() const noexcept { return noise_index() + 1; }
  std::size_t num_cat() const noexcept { return num_cat_; }
  std::size_t num_con() const noexcept { return num_con_; }
  std::size_t q_gsm() const noexcept { return q_gsm_; }
  std::size_t q_csm() const noexcept { return q_csm_; }

  std::size_t gsm_offset(std::size_t q) const noexcept { return q * (1 + 2 * num_con_); }
  std::size_t csm_offset(std::size_t q) const noexcept {
    return q_gsm_ * (1 + 2 * num_con_) + q * (1 + 2 * num_con_);
  }
  std::size_t hamming_offset() const noexcept { return (q_gsm_ + q_csm_) * (1 + 2 * num_con_); }
  std::size_t lambda_index() const noexcept { return hamming_offset() + num_cat_; }
  std::size_t noise_index() const noexcept { return lambda_index() + 1; }

  Eigen::VectorXd pack(const KernelParams& p) const;
  /// `flags` supplies non-optimized settings (hamming_unit_diagonal).
  KernelParams unpack(const Eigen::VectorXd& theta, const KernelParams& flags = {}) const;

 private:
  std::size_t num_cat_, num_con_, q_gsm_, q_csm_;
};

/// Kernel value plus its gradient with respect to every kernel entry of the
/// unconstrained vector (the noise slot is left at zero). `grad` must have
/// layout.size() entries and is overwritten.
double k_composite_with_grad(const KernelParams& p, const HyperLayout& layout,
                             const NormalizedPoint& x, const NormalizedPoint& y,
                             Eigen::Ref<Eigen::VectorXd> grad);

nlohmann::json params_to_json(const KernelParams& p);
KernelParams params_from_json(const nlohmann::json& j);

}  // namespace catbox

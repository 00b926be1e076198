#pragma once

#include <string>

#include "catbox/gp.hpp"

namespace catbox {

enum class AcqKind { EI, UCB, PI };

std::string to_string(AcqKind kind);
/// Accepts "ei", "ucb", "pi" (case-insensitive); throws catbox::Error otherwise.
AcqKind acq_kind_from_string(const std::string& s);

/// Acquisition settings. `best_y` is the incumbent in standardized units; the
/// engine always maximizes.
struct AcqSpec {
  AcqKind kind = AcqKind::EI;
  double xi = 0.01;
  double beta = 2.0;
  double best_y = 0.0;
};

double gaussian_pdf(double z);
/// Standard normal CDF through erfc; absolute error well below 1e-7.
double gaussian_cdf(double z);

/// EI: (mu - f* - xi) Phi(z) + sigma phi(z); UCB: mu + beta sigma; PI: Phi(z),
/// with z = (mu - f* - xi) / sigma and the sigma -> 0 limits at sigma == 0.
double score(const AcqSpec& acq, const Posterior& post);

}  // namespace catbox

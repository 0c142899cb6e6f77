#pragma once

#include <cstdint>
#include <span>

namespace binflux {

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  int cells = 0; ///< cells after pooling
};

/// Pearson goodness of fit of observed counts against model probabilities.
/// Adjacent cells are pooled left to right until each pooled cell expects at
/// least min_expected counts; a short remainder joins the last pooled cell.
ChiSquareResult chi_square_gof(std::span<const std::uint64_t> observed,
                               std::span<const double> expected_probs,
                               double min_expected = 5.0);

} // namespace binflux

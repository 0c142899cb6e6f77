#include "binflux/stats.hpp"

#include "binflux/errors.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <numeric>
#include <vector>

namespace binflux {

ChiSquareResult chi_square_gof(std::span<const std::uint64_t> observed,
                               std::span<const double> expected_probs, double min_expected) {
  if (observed.size() != expected_probs.size() || observed.empty())
    throw InputError("chi_square_gof: observed and expected must have the same non-zero length");
  const double total = double(std::accumulate(observed.begin(), observed.end(), std::uint64_t{0}));
  const double mass = std::accumulate(expected_probs.begin(), expected_probs.end(), 0.0);

  std::vector<double> obs_cells, exp_cells;
  double o = 0.0, e = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    o += double(observed[i]);
    e += total * expected_probs[i] / mass;
    if (e >= min_expected) {
      obs_cells.push_back(o);
      exp_cells.push_back(e);
      o = e = 0.0;
    }
  }
  if (e > 0.0 || o > 0.0) {
    if (exp_cells.empty()) {
      obs_cells.push_back(o);
      exp_cells.push_back(e);
    } else {
      obs_cells.back() += o;
      exp_cells.back() += e;
    }
  }

  ChiSquareResult r;
  r.cells = int(exp_cells.size());
  for (std::size_t i = 0; i < exp_cells.size(); ++i) {
    const double d = obs_cells[i] - exp_cells[i];
    r.statistic += d * d / exp_cells[i];
  }
  r.dof = r.cells - 1;
  if (r.dof < 1) {
    r.p_value = 1.0;
    return r;
  }
  const boost::math::chi_squared dist(r.dof);
  r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
  return r;
}

} // namespace binflux

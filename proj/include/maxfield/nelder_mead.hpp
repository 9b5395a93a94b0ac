#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace maxfield {

struct NelderMeadOptions {
  double initial_step = 0.15;  ///< simplex edge in the unit box
  double tolerance = 1e-3;     ///< stop when every vertex is within this distance of the best
  std::size_t max_evaluations = 200;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

/// Minimizes f over the unit box [0, 1]^p. Trial points are projected onto
/// the box; +infinity marks an infeasible point. `on_eval` sees every
/// evaluated point.
NelderMeadResult nelder_mead_box(const std::function<double(const std::vector<double>&)>& f,
                                 std::vector<double> start, const NelderMeadOptions& options,
                                 const std::function<void(const std::vector<double>&, double)>& on_eval = {});

/// Point `index` (1-based) of the Halton sequence in [0, 1]^dim.
std::vector<double> halton_point(std::size_t index, std::size_t dim);

}  // namespace maxfield

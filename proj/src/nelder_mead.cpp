#include "maxfield/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace maxfield {
namespace {

void project(std::vector<double>& x) {
  for (double& v : x) v = std::clamp(v, 0.0, 1.0);
}

double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double ss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) ss += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(ss);
}

}  // namespace

NelderMeadResult nelder_mead_box(const std::function<double(const std::vector<double>&)>& f,
                                 std::vector<double> start, const NelderMeadOptions& options,
                                 const std::function<void(const std::vector<double>&, double)>& on_eval) {
  const std::size_t p = start.size();
  if (p == 0) throw std::invalid_argument("nelder_mead_box: empty start point");
  if (options.max_evaluations < p + 1) {
    throw std::invalid_argument("nelder_mead_box: max_evaluations must be at least p + 1");
  }
  if (!(options.initial_step > 0.0) || !(options.tolerance > 0.0)) {
    throw std::invalid_argument("nelder_mead_box: initial_step and tolerance must be > 0");
  }
  project(start);

  std::size_t evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    double v = f(x);
    if (std::isnan(v)) v = std::numeric_limits<double>::infinity();
    if (on_eval) on_eval(x, v);
    return v;
  };

  // initial simplex: steps inward from the start so vertices stay distinct
  std::vector<std::vector<double>> simplex(p + 1, start);
  for (std::size_t i = 0; i < p; ++i) {
    const double step = start[i] + options.initial_step <= 1.0 ? options.initial_step : -options.initial_step;
    simplex[i + 1][i] += step;
    project(simplex[i + 1]);
  }
  std::vector<double> values(p + 1);
  for (std::size_t i = 0; i <= p && evals < options.max_evaluations; ++i) values[i] = eval(simplex[i]);

  std::vector<std::size_t> order(p + 1);
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<std::vector<double>> s2(p + 1);
    std::vector<double> v2(p + 1);
    for (std::size_t i = 0; i <= p; ++i) {
      s2[i] = simplex[order[i]];
      v2[i] = values[order[i]];
    }
    simplex.swap(s2);
    values.swap(v2);
  };

  bool converged = false;
  while (true) {
    sort_simplex();
    double diameter = 0.0;
    for (std::size_t i = 1; i <= p; ++i) diameter = std::max(diameter, distance(simplex[i], simplex[0]));
    if (diameter < options.tolerance) {
      converged = true;
      break;
    }
    if (evals >= options.max_evaluations) break;

    std::vector<double> centroid(p, 0.0);
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t c = 0; c < p; ++c) centroid[c] += simplex[i][c] / static_cast<double>(p);

    auto along = [&](double t) {
      std::vector<double> x(p);
      for (std::size_t c = 0; c < p; ++c) x[c] = centroid[c] + t * (simplex[p][c] - centroid[c]);
      project(x);
      return x;
    };

    const auto xr = along(-1.0);
    const double fr = eval(xr);
    if (fr < values[0]) {
      const auto xe = along(-2.0);
      const double fe = evals < options.max_evaluations ? eval(xe) : std::numeric_limits<double>::infinity();
      if (fe < fr) {
        simplex[p] = xe;
        values[p] = fe;
      } else {
        simplex[p] = xr;
        values[p] = fr;
      }
      continue;
    }
    if (fr < values[p - 1]) {
      simplex[p] = xr;
      values[p] = fr;
      continue;
    }
    if (evals >= options.max_evaluations) break;
    const bool outside = fr < values[p];
    const auto xc = along(outside ? -0.5 : 0.5);
    const double fc = eval(xc);
    if (fc < (outside ? fr : values[p])) {
      simplex[p] = xc;
      values[p] = fc;
      continue;
    }
    // shrink toward the best vertex
    for (std::size_t i = 1; i <= p && evals < options.max_evaluations; ++i) {
      for (std::size_t c = 0; c < p; ++c) simplex[i][c] = simplex[0][c] + 0.5 * (simplex[i][c] - simplex[0][c]);
      values[i] = eval(simplex[i]);
    }
  }

  sort_simplex();
  return {simplex[0], values[0], evals, converged};
}

std::vector<double> halton_point(std::size_t index, std::size_t dim) {
  static constexpr unsigned kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  if (dim > std::size(kPrimes)) throw std::invalid_argument("halton_point: dimension too large");
  std::vector<double> x(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    double f = 1.0, r = 0.0;
    for (std::size_t i = index; i > 0; i /= kPrimes[d]) {
      f /= kPrimes[d];
      r += f * static_cast<double>(i % kPrimes[d]);
    }
    x[d] = r;
  }
  return x;
}

}  // namespace maxfield

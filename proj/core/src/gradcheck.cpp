#include "weseg/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "weseg/rng.hpp"

namespace weseg {

GradCheckResult finite_diff_check(
    const std::function<double(const ModelParams&)>& loss_fn,
    const ModelParams& params, const ModelParams& analytic, double step,
    std::size_t max_coords, std::uint64_t seed) {
  ModelParams work = params;
  auto tensors = param_tensors(work);
  auto grads = param_tensors(analytic);

  const std::size_t total = param_count(params);
  std::vector<std::size_t> coords(total);
  std::iota(coords.begin(), coords.end(), std::size_t{0});
  if (max_coords > 0 && max_coords < total) {
    Rng rng(seed);
    rng.shuffle(coords);
    coords.resize(max_coords);
    std::sort(coords.begin(), coords.end());
  }

  // Flat coordinate -> (tensor, offset) lookup.
  std::vector<std::size_t> starts(tensors.size() + 1, 0);
  for (std::size_t t = 0; t < tensors.size(); ++t) {
    starts[t + 1] = starts[t] + tensors[t].size();
  }

  double scale = 1e-12;
  std::vector<double> numeric(coords.size(), 0.0);
  std::vector<double> exact(coords.size(), 0.0);
  for (std::size_t c = 0; c < coords.size(); ++c) {
    const std::size_t flat = coords[c];
    const std::size_t t =
        static_cast<std::size_t>(std::upper_bound(starts.begin(), starts.end(), flat) -
                                 starts.begin()) - 1;
    const std::size_t off = flat - starts[t];
    double& x = tensors[t][off];
    const double saved = x;
    x = saved + step;
    const double up = loss_fn(work);
    x = saved - step;
    const double down = loss_fn(work);
    x = saved;
    numeric[c] = (up - down) / (2.0 * step);
    exact[c] = grads[t][off];
    scale = std::max({scale, std::fabs(numeric[c]), std::fabs(exact[c])});
  }

  GradCheckResult res;
  res.coords_checked = coords.size();
  for (std::size_t c = 0; c < coords.size(); ++c) {
    res.max_rel_err = std::max(res.max_rel_err, std::fabs(exact[c] - numeric[c]) / scale);
  }
  return res;
}

}  // namespace weseg

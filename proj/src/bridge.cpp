#include "inch/bridge.hpp"

#include <algorithm>
#include <cmath>

#include "inch/errors.hpp"

namespace inch {

GaussianMoments bridge_moments(const std::vector<double>& pin_times,
                               const std::vector<Vec>& pin_locations,
                               const std::vector<double>& eval_times,
                               double omega) {
  if (pin_times.size() < 2 || pin_times.size() != pin_locations.size())
    throw PreconditionViolation("bridge needs >= 2 pins with locations");
  if (!(omega > 0.0)) throw PreconditionViolation("omega must be > 0");
  for (std::size_t k = 1; k < pin_times.size(); ++k)
    if (!(pin_times[k - 1] < pin_times[k]))
      throw PreconditionViolation("pin times must be strictly increasing");

  const int m = static_cast<int>(eval_times.size());
  const int dim = static_cast<int>(pin_locations.front().size());
  GaussianMoments out;
  out.mean = Mat::Zero(m, dim);
  out.cov = Mat::Zero(m, m);

  // Segment index of each eval time; ties to a pin are exact hits.
  std::vector<int> seg(m);
  for (int a = 0; a < m; ++a) {
    const double t = eval_times[a];
    if (!(t >= pin_times.front() && t <= pin_times.back()))
      throw PreconditionViolation("eval time outside the pinned span");
    const auto it =
        std::upper_bound(pin_times.begin(), pin_times.end(), t);
    seg[a] = static_cast<int>(it - pin_times.begin()) - 1;
    if (seg[a] == static_cast<int>(pin_times.size()) - 1) --seg[a];

    const double lo = pin_times[seg[a]];
    const double hi = pin_times[seg[a] + 1];
    const double w = (t - lo) / (hi - lo);
    out.mean.row(a) = ((1.0 - w) * pin_locations[seg[a]] +
                       w * pin_locations[seg[a] + 1])
                          .transpose();
  }

  // Bridge covariance within a segment; independent across segments.
  for (int a = 0; a < m; ++a) {
    for (int b = a; b < m; ++b) {
      if (seg[a] != seg[b]) continue;
      const double lo = pin_times[seg[a]];
      const double hi = pin_times[seg[a] + 1];
      const double s = std::min(eval_times[a], eval_times[b]) - lo;
      const double u = std::max(eval_times[a], eval_times[b]) - lo;
      const double len = hi - lo;
      const double c = omega * s * (len - u) / len;
      out.cov(a, b) = c;
      out.cov(b, a) = c;
    }
  }
  return out;
}

}  // namespace inch

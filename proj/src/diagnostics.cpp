#include "inch/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "inch/errors.hpp"

namespace inch {

double ess(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 10) throw PreconditionViolation("ess needs at least 10 samples");

  double mean = 0.0;
  for (double x : series) mean += x;
  mean /= static_cast<double>(n);
  double c0 = 0.0;
  for (double x : series) c0 += (x - mean) * (x - mean);
  c0 /= static_cast<double>(n);
  if (!(c0 > 0.0)) return 1.0;  // constant series

  auto autocov = [&](std::size_t lag) {
    double c = 0.0;
    for (std::size_t t = 0; t + lag < n; ++t)
      c += (series[t] - mean) * (series[t + lag] - mean);
    return c / static_cast<double>(n);
  };

  // Geyer initial positive sequence: accumulate Gamma_m = rho_2m + rho_2m+1
  // while positive.  tau = 2 * sum Gamma_m - 1 (rho_0 enters Gamma_0).
  double tau = -1.0;
  for (std::size_t m = 0; 2 * m + 1 < n; ++m) {
    const double pair = (autocov(2 * m) + autocov(2 * m + 1)) / c0;
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  if (tau <= 0.0) return static_cast<double>(n);  // antithetic; clamp at N

  const double out = static_cast<double>(n) / tau;
  return std::clamp(out, 1.0, static_cast<double>(n));
}

EfficiencyReport efficiency_report(
    const std::map<std::string, std::vector<double>>& series,
    double wall_time_s, long iterations, long thinning) {
  if (!(wall_time_s > 0.0))
    throw PreconditionViolation("wall time must be positive");
  EfficiencyReport report;
  report.wall_time_s = wall_time_s;
  report.iterations = iterations;
  report.thinning = thinning;
  double min_ess = std::numeric_limits<double>::infinity();
  for (const auto& [name, values] : series) {
    const double e = ess(values);
    report.ess_per_quantity[name] = e;
    min_ess = std::min(min_ess, e);
  }
  report.min_ess = std::isfinite(min_ess) ? min_ess : 0.0;
  report.ess_per_second = report.min_ess / wall_time_s;
  return report;
}

std::string to_json(const EfficiencyReport& report) {
  nlohmann::json j;
  j["ess"] = report.ess_per_quantity;
  j["min_ess"] = report.min_ess;
  j["wall_time_s"] = report.wall_time_s;
  j["ess_per_second"] = report.ess_per_second;
  j["iterations"] = report.iterations;
  j["thinning"] = report.thinning;
  return j.dump(2);
}

std::string to_table(const EfficiencyReport& report) {
  std::ostringstream out;
  out << "quantity            ESS\n";
  for (const auto& [name, value] : report.ess_per_quantity) {
    out << name;
    for (std::size_t pad = name.size(); pad < 20; ++pad) out << ' ';
    out << value << '\n';
  }
  out << "min ESS             " << report.min_ess << '\n'
      << "wall time (s)       " << report.wall_time_s << '\n'
      << "ESS per second      " << report.ess_per_second << '\n'
      << "iterations          " << report.iterations << '\n'
      << "thinning            " << report.thinning << '\n';
  return out.str();
}

}  // namespace inch

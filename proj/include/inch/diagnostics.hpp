#ifndef INCH_DIAGNOSTICS_HPP
#define INCH_DIAGNOSTICS_HPP

#include <map>
#include <span>
#include <string>
#include <vector>

namespace inch {

/// Effective sample size N / (1 + 2 sum rho_k) with the initial-positive-
/// sequence truncation of the autocorrelations; clamped to [1, N].
/// A constant series has ESS 1 by convention.
double ess(std::span<const double> series);

struct EfficiencyReport {
  std::map<std::string, double> ess_per_quantity;
  double min_ess = 0.0;
  double wall_time_s = 0.0;
  double ess_per_second = 0.0;
  long iterations = 0;
  long thinning = 1;
};

EfficiencyReport efficiency_report(
    const std::map<std::string, std::vector<double>>& series,
    double wall_time_s, long iterations, long thinning);

std::string to_json(const EfficiencyReport& report);
std::string to_table(const EfficiencyReport& report);

}  // namespace inch

#endif

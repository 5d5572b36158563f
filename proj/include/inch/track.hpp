#ifndef INCH_TRACK_HPP
#define INCH_TRACK_HPP

#include <string>
#include <vector>

#include "inch/types.hpp"

namespace inch {

/// Observed locations at strictly increasing times; irregular spacing is
/// allowed (dropped fixes simply widen the containing interval).
struct ObservationTrack {
  std::vector<double> times;
  std::vector<Vec> locations;
  int dim = 2;
  std::string time_unit = "minutes";

  int n_obs() const { return static_cast<int>(times.size()); }
  int n_intervals() const { return n_obs() - 1; }
  double interval_length(int c) const { return times[c + 1] - times[c]; }
};

void validate_track(const ObservationTrack& track);

/// Reads a track from CSV with header `time,x,y` (or `time,x1,..,xd`).
/// An optional leading comment `# time_unit: <unit>` declares the unit.
/// Rows with blank coordinates are dropped with a warning (the surrounding
/// interval widens); duplicate or decreasing timestamps are errors.
ObservationTrack ingest_csv(const std::string& path,
                            std::vector<std::string>* warnings = nullptr);

void write_track_csv(const std::string& path, const ObservationTrack& track);

}  // namespace inch

#endif

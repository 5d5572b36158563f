#include "inch/track.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "inch/errors.hpp"

namespace inch {

void validate_track(const ObservationTrack& track) {
  if (track.n_obs() < 2)
    throw PreconditionViolation("track needs at least two observations");
  if (track.locations.size() != track.times.size())
    throw PreconditionViolation("track times/locations length mismatch");
  for (int c = 0; c < track.n_obs(); ++c) {
    if (track.locations[c].size() != track.dim)
      throw PreconditionViolation("track location has wrong dimension");
    if (c > 0 && !(track.times[c - 1] < track.times[c]))
      throw NonMonotoneTime("track times must be strictly increasing");
  }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

std::string strip(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

ObservationTrack ingest_csv(const std::string& path,
                            std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);

  ObservationTrack track;
  std::string line;
  long row = 0;
  bool have_header = false;

  while (std::getline(in, line)) {
    ++row;
    const std::string s = strip(line);
    if (s.empty()) continue;
    if (s[0] == '#') {
      const auto pos = s.find("time_unit:");
      if (pos != std::string::npos)
        track.time_unit = strip(s.substr(pos + 10));
      continue;
    }
    auto fields = split_csv(s);
    if (!have_header) {
      if (fields.size() < 2 || strip(fields[0]) != "time")
        throw ParseError("row " + std::to_string(row) +
                         ": expected header time,x,y (or time,x1,..,xd)");
      track.dim = static_cast<int>(fields.size()) - 1;
      have_header = true;
      continue;
    }
    if (static_cast<int>(fields.size()) != track.dim + 1)
      throw ParseError("row " + std::to_string(row) +
                       ": expected " + std::to_string(track.dim + 1) +
                       " fields");

    bool blank = false;
    for (const auto& f : fields)
      if (strip(f).empty()) blank = true;
    if (blank) {
      if (warnings)
        warnings->push_back("row " + std::to_string(row) +
                            ": blank coordinate, fix dropped (interval "
                            "widened)");
      continue;
    }

    double t;
    Vec x(track.dim);
    try {
      std::size_t used = 0;
      t = std::stod(strip(fields[0]), &used);
      for (int k = 0; k < track.dim; ++k)
        x[k] = std::stod(strip(fields[k + 1]));
    } catch (const std::exception&) {
      throw ParseError("row " + std::to_string(row) + ": non-numeric field");
    }
    if (!track.times.empty() && !(track.times.back() < t))
      throw NonMonotoneTime("row " + std::to_string(row) +
                            ": time does not increase");
    track.times.push_back(t);
    track.locations.push_back(std::move(x));
  }
  if (!have_header) throw ParseError("missing header row");
  validate_track(track);
  return track;
}

void write_track_csv(const std::string& path, const ObservationTrack& track) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  out << "# time_unit: " << track.time_unit << '\n';
  out << "time";
  if (track.dim == 2) {
    out << ",x,y";
  } else {
    for (int k = 0; k < track.dim; ++k) out << ",x" << k + 1;
  }
  out << '\n';
  char buf[32];
  for (int c = 0; c < track.n_obs(); ++c) {
    std::snprintf(buf, sizeof buf, "%.17g", track.times[c]);
    out << buf;
    for (int k = 0; k < track.dim; ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", track.locations[c][k]);
      out << ',' << buf;
    }
    out << '\n';
  }
}

}  // namespace inch

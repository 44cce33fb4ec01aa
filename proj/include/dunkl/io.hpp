#ifndef DUNKL_IO_HPP
#define DUNKL_IO_HPP

#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>

#include "dunkl/integrator.hpp"

namespace dunkl {

/// Seventeen significant digits, enough to read back the same double.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Header and rows `path_id,t,x_1,...,x_n,min_margin`.
inline void write_trajectories_csv(std::ostream& os, std::span<const Trajectory> paths) {
  const std::size_t dim = paths.empty() ? 0 : paths.front().dim;
  os << "path_id,t";
  for (std::size_t i = 1; i <= dim; ++i) os << ",x_" << i;
  os << ",min_margin\n";
  for (const auto& p : paths)
    for (std::size_t r = 0; r < p.size(); ++r) {
      os << p.path_id << ',' << format_double(p.times[r]);
      for (double x : p.state(r)) os << ',' << format_double(x);
      os << ',' << format_double(p.min_margin[r]) << '\n';
    }
}

/// Header and rows `path_id,t_hit,simple_root_index` for paths with a hit.
inline void write_hits_csv(std::ostream& os, std::span<const Trajectory> paths) {
  os << "path_id,t_hit,simple_root_index\n";
  for (const auto& p : paths)
    if (p.hit) os << p.path_id << ',' << format_double(p.hit->time) << ',' << p.hit->wall << '\n';
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open output file " + path);
  return os;
}

}  // namespace dunkl

#endif  // DUNKL_IO_HPP

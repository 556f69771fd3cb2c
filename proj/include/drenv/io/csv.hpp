#pragma once

#include <drenv/drs/solver.hpp>
#include <drenv/testbed/sweep.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <locale>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>

namespace drenv::io {

inline constexpr const char* kTraceHeader = "k,residual,merit,gamma,elapsed_ns";
inline constexpr const char* kSweepHeader =
    "sigma_over_L,lambda,gamma_sup_certified,gamma_transition_empirical,"
    "admm_inv_beta_certified";

/// Shortest round-trip decimal form, "C" locale; NaN as "nan", infinities as
/// "inf" / "-inf".
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(17);
  os << x;
  // prefer the shortest representation that parses back identically
  for (int p = 1; p < 17; ++p) {
    std::ostringstream t;
    t.imbue(std::locale::classic());
    t.precision(p);
    t << x;
    const std::string str = t.str();
    double back = 0.0;
    const auto [end, ec] = std::from_chars(str.data(), str.data() + str.size(), back);
    if (ec == std::errc() && end == str.data() + str.size() && back == x) return str;
  }
  return os.str();
}

inline void write_trace_csv(std::ostream& os, const IterationTrace& tr) {
  os << kTraceHeader << '\n';
  for (const auto& r : tr.records)
    os << std::to_string(r.k) << ',' << format_double(r.residual) << ','
       << format_double(r.merit) << ',' << format_double(r.gamma) << ','
       << std::to_string(r.elapsed_ns) << '\n';
}

inline void write_sweep_csv(std::ostream& os, const std::vector<BoundRow>& rows) {
  os << kSweepHeader << '\n';
  for (const auto& r : rows)
    os << format_double(r.sigma_over_L) << ',' << format_double(r.lambda) << ','
       << format_double(r.gamma_sup_certified) << ','
       << format_double(r.gamma_transition_empirical) << ','
       << format_double(r.admm_inv_beta_certified) << '\n';
}

template <class Writer>
void write_file(const std::string& path, Writer&& w) {
  std::ofstream f(path);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  w(f);
  if (!f) throw Error("write to '" + path + "' failed");
}

}  // namespace drenv::io

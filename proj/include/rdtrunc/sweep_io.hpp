// Sweep artifacts: the results CSV (one row per truncation level and one
// limit row per budget) and the sidecar argmin dump that lets every printed
// value be re-verified after a reload.  Numbers are written in shortest
// round-trip form, so parsing an artifact recovers the exact doubles and the
// whole file is byte-deterministic for a fixed config and seed.

#ifndef RDTRUNC_SWEEP_IO_HPP
#define RDTRUNC_SWEEP_IO_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rdtrunc/scenarios.hpp"

namespace rdtrunc {

uint64_t fnv1a64(std::string_view bytes);

// Shortest decimal string that parses back to exactly v.
std::string format_double(double v);

struct SweepRow {
  int level = 0;  // 1-based; 0 encodes the untruncated limit row
  double cap = 0.0;
  double D = 0.0;
  double psi = 0.0;
  double psi_inf = 0.0;
  double gap = 0.0;
  std::string status;
  double residual = 0.0;
  uint64_t seed = 0;
};

struct SweepArtifacts {
  std::string csv;      // main table
  std::string argmins;  // sidecar, one row per (D, level, cell)
};

// Rows come out sorted by (D, level) with the limit row closing each budget
// block; both files end in a '# fnv1a64 ...' checksum over all prior bytes.
SweepArtifacts render_sweep(std::vector<std::pair<double, ConvergenceReport>> reports,
                            uint64_t seed, const std::string& problem_name);

struct ParsedSweep {
  std::vector<SweepRow> rows;
};

// Validates the trailing checksum and the header before reading rows.
ParsedSweep parse_sweep_csv(const std::string& text);

struct ArgminDump {
  int level = 0;  // 0 encodes the limit argmin
  double D = 0.0;
  std::vector<double> mass;
};

std::vector<ArgminDump> parse_argmins_csv(const std::string& text);

struct SweepVerification {
  bool ok = true;
  std::string detail;  // first failure, empty when ok
};

// Re-solves nothing: rebuilds each level's problem, evaluates the dumped
// argmin, and checks it reproduces the CSV's psi, residual, and budget.
SweepVerification verify_sweep_artifacts(const std::string& csv_text,
                                         const std::string& argmins_text,
                                         const ScenarioConfig& cfg);

}  // namespace rdtrunc

#endif  // RDTRUNC_SWEEP_IO_HPP

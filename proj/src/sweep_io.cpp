// Sweep artifact rendering and reloading.  The CSV and its sidecar use
// shortest round-trip decimal formatting, so a reload recovers bit-identical
// doubles and verification can hold reloaded values to solver tolerances
// instead of print precision.

#include "rdtrunc/sweep_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "rdtrunc/truncation.hpp"
#include "rdtrunc/version.hpp"

namespace rdtrunc {

namespace {

constexpr const char* kSweepHeader = "n,M_n,D,psi_n,psi_inf,gap,status,residual,seed";
constexpr const char* kArgminHeader = "n,D,cell,mass";

std::string hex16(uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

void append_checksum(std::string& out) {
  out += "# fnv1a64 " + hex16(fnv1a64(out)) + "\n";
}

double parse_field_double(std::string_view field, const char* what) {
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size())
    throw std::invalid_argument(std::string("bad numeric field in ") + what + ": '" +
                                std::string(field) + "'");
  return v;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

// Strips and validates the trailing checksum line, returning the body.
std::string_view checked_body(const std::string& text, const char* what) {
  const size_t pos = text.rfind("# fnv1a64 ");
  if (pos == std::string::npos || (pos != 0 && text[pos - 1] != '\n'))
    throw std::invalid_argument(std::string(what) + " is missing its checksum line");
  const std::string_view body(text.data(), pos);
  std::string_view hex(text.data() + pos + 10, text.size() - pos - 10);
  while (!hex.empty() && (hex.back() == '\n' || hex.back() == '\r'))
    hex.remove_suffix(1);
  uint64_t recorded = 0;
  const auto res = std::from_chars(hex.data(), hex.data() + hex.size(), recorded, 16);
  if (res.ec != std::errc() || res.ptr != hex.data() + hex.size())
    throw std::invalid_argument(std::string(what) + " has a malformed checksum line");
  if (recorded != fnv1a64(body))
    throw std::invalid_argument(std::string(what) + " checksum mismatch");
  return body;
}

// Data lines of the body after the mandatory header; comments are skipped.
std::vector<std::string_view> data_lines(std::string_view body, const char* header,
                                         const char* what) {
  std::vector<std::string_view> rows;
  bool header_seen = false;
  size_t start = 0;
  while (start < body.size()) {
    size_t end = body.find('\n', start);
    if (end == std::string_view::npos) end = body.size();
    std::string_view line = body.substr(start, end - start);
    start = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line != header)
        throw std::invalid_argument(std::string(what) + " is missing its header row");
      header_seen = true;
      continue;
    }
    rows.push_back(line);
  }
  if (!header_seen)
    throw std::invalid_argument(std::string(what) + " is missing its header row");
  return rows;
}

}  // namespace

uint64_t fnv1a64(std::string_view bytes) {
  uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

SweepArtifacts render_sweep(std::vector<std::pair<double, ConvergenceReport>> reports,
                            uint64_t seed, const std::string& problem_name) {
  std::stable_sort(reports.begin(), reports.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  SweepArtifacts art;
  const std::string seed_str = std::to_string(seed);
  std::string& csv = art.csv;
  csv += std::string("# rdtrunc sweep v") + kVersion + "\n";
  csv += "# problem " + problem_name + "; rates in bits; M_n and D in distortion units\n";
  csv += "# seed " + seed_str + "\n";
  csv += std::string(kSweepHeader) + "\n";

  std::string& arg = art.argmins;
  arg += std::string("# rdtrunc argmins v") + kVersion + "\n";
  arg += "# raw argmin mass per (n, D) row of the sweep csv; cells in layout order\n";
  arg += "# seed " + seed_str + "\n";
  arg += std::string(kArgminHeader) + "\n";

  size_t csv_rows = 0, arg_rows = 0;
  auto emit_argmin = [&](const std::string& n_str, const std::string& d_str,
                         const std::vector<double>& mass) {
    for (size_t cell = 0; cell < mass.size(); ++cell) {
      arg += n_str + "," + d_str + "," + std::to_string(cell) + "," +
             format_double(mass[cell]) + "\n";
      ++arg_rows;
    }
  };

  for (const auto& [budget, report] : reports) {
    const std::string d_str = format_double(budget);
    const std::string psi_inf_str = format_double(report.psi_limit);
    for (const ConvergenceEntry& e : report.entries) {
      const std::string n_str = std::to_string(e.level);
      csv += n_str + "," + format_double(e.cap) + "," + d_str + "," +
             format_double(e.psi) + "," + psi_inf_str + "," + format_double(e.gap) +
             "," + status_name(e.status) + "," + format_double(e.residual) + "," +
             seed_str + "\n";
      ++csv_rows;
      emit_argmin(n_str, d_str, e.argmin);
    }
    csv += "inf,inf," + d_str + "," + psi_inf_str + "," + psi_inf_str + ",0," +
           status_name(report.limit_status) + "," + format_double(report.limit_residual) +
           "," + seed_str + "\n";
    ++csv_rows;
    emit_argmin("inf", d_str, report.limit_argmin);
  }

  csv += "# rows " + std::to_string(csv_rows) + "\n";
  append_checksum(csv);
  arg += "# rows " + std::to_string(arg_rows) + "\n";
  append_checksum(arg);
  return art;
}

ParsedSweep parse_sweep_csv(const std::string& text) {
  const std::string_view body = checked_body(text, "sweep csv");
  ParsedSweep out;
  for (std::string_view line : data_lines(body, kSweepHeader, "sweep csv")) {
    const auto f = split_fields(line);
    if (f.size() != 9)
      throw std::invalid_argument("sweep csv row has the wrong field count: '" +
                                  std::string(line) + "'");
    SweepRow row;
    if (f[0] == "inf") {
      row.level = 0;
      row.cap = std::numeric_limits<double>::infinity();
    } else {
      row.level = static_cast<int>(parse_field_double(f[0], "sweep csv"));
      row.cap = parse_field_double(f[1], "sweep csv");
    }
    row.D = parse_field_double(f[2], "sweep csv");
    row.psi = parse_field_double(f[3], "sweep csv");
    row.psi_inf = parse_field_double(f[4], "sweep csv");
    row.gap = parse_field_double(f[5], "sweep csv");
    row.status = std::string(f[6]);
    row.residual = parse_field_double(f[7], "sweep csv");
    row.seed = static_cast<uint64_t>(parse_field_double(f[8], "sweep csv"));
    out.rows.push_back(std::move(row));
  }
  return out;
}

std::vector<ArgminDump> parse_argmins_csv(const std::string& text) {
  const std::string_view body = checked_body(text, "argmin dump");
  std::vector<ArgminDump> out;
  for (std::string_view line : data_lines(body, kArgminHeader, "argmin dump")) {
    const auto f = split_fields(line);
    if (f.size() != 4)
      throw std::invalid_argument("argmin dump row has the wrong field count: '" +
                                  std::string(line) + "'");
    const int level = f[0] == "inf"
                          ? 0
                          : static_cast<int>(parse_field_double(f[0], "argmin dump"));
    const double D = parse_field_double(f[1], "argmin dump");
    const size_t cell = static_cast<size_t>(parse_field_double(f[2], "argmin dump"));
    const double mass = parse_field_double(f[3], "argmin dump");
    if (out.empty() || out.back().level != level || out.back().D != D) {
      out.push_back(ArgminDump{level, D, {}});
    }
    if (cell != out.back().mass.size())
      throw std::invalid_argument("argmin dump cells are out of order");
    out.back().mass.push_back(mass);
  }
  return out;
}

SweepVerification verify_sweep_artifacts(const std::string& csv_text,
                                         const std::string& argmins_text,
                                         const ScenarioConfig& cfg) {
  SweepVerification v;
  auto fail = [&v](std::string detail) {
    v.ok = false;
    v.detail = std::move(detail);
    return v;
  };
  try {
    const ParsedSweep sweep = parse_sweep_csv(csv_text);
    const std::vector<ArgminDump> dumps = parse_argmins_csv(argmins_text);
    const BuiltScenario built = build_problem(cfg);

    std::map<std::pair<double, int>, const SweepRow*> by_key;
    for (const SweepRow& row : sweep.rows) by_key[{row.D, row.level}] = &row;
    if (by_key.size() != sweep.rows.size()) return fail("duplicate (D, n) rows in sweep csv");
    if (dumps.size() != sweep.rows.size())
      return fail("argmin dump count does not match sweep row count");

    for (const ArgminDump& dump : dumps) {
      const auto it = by_key.find({dump.D, dump.level});
      const std::string where =
          "(n=" + (dump.level == 0 ? std::string("inf") : std::to_string(dump.level)) +
          ", D=" + format_double(dump.D) + ")";
      if (it == by_key.end()) return fail("argmin dump without a sweep row at " + where);
      const SweepRow& row = *it->second;

      ExtendedDistortionVector d = built.problem.distortion;
      if (dump.level > 0) {
        const auto& caps = built.schedule.caps();
        if (dump.level > static_cast<int>(caps.size()))
          return fail("argmin dump level outside the schedule at " + where);
        if (caps[static_cast<size_t>(dump.level) - 1] != row.cap)
          return fail("csv cap disagrees with the schedule at " + where);
        d = make_truncated(d, row.cap);
      }
      const JointPmf p(built.problem.layout, dump.mass);
      const double value = evaluate(built.problem.objective, p);
      if (std::abs(value - row.psi) > 1e-9)
        return fail("psi does not re-evaluate from its argmin at " + where);
      const MembershipVerdict member = check_membership(p, built.problem.constraints);
      if (member.max_residual > row.residual + 1e-12)
        return fail("constraint residual grew on reload at " + where);
      const ExtendedReal cost = expected_distortion(p, d);
      if (cost.is_infinite() ||
          cost.finite_value() > row.D + cfg.solver.distortion_tol)
        return fail("argmin leaves the distortion ball at " + where);
    }
  } catch (const std::exception& e) {
    return fail(e.what());
  }
  return v;
}

}  // namespace rdtrunc

// Config parsing.  The file format is line-oriented: '[section]' headers,
// 'key = value' pairs, '#' comments.  Every key is checked against the schema
// so typos fail loudly instead of silently running defaults.

#include "rdtrunc/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rdtrunc {

namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string strip_ws(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) out += c;
  return out;
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

double parse_real(const std::string& value, const std::string& where) {
  try {
    size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos == value.size()) return v;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("expected a real number for " + where + ", got '" + value + "'");
}

long long parse_integer(const std::string& value, const std::string& where) {
  try {
    size_t pos = 0;
    const long long v = std::stoll(value, &pos);
    if (pos == value.size()) return v;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("expected an integer for " + where + ", got '" + value + "'");
}

// Values are lists of tokens separated by spaces and/or commas.
std::vector<std::string> split_tokens(const std::string& value) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : value) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<double> parse_real_list(const std::string& value, const std::string& where) {
  std::vector<double> out;
  for (const std::string& tok : split_tokens(value)) out.push_back(parse_real(tok, where));
  if (out.empty())
    throw std::invalid_argument("expected at least one value for " + where);
  return out;
}

std::vector<ExtendedReal> parse_cost_list(const std::string& value, const std::string& where) {
  std::vector<ExtendedReal> out;
  for (const std::string& tok : split_tokens(value)) {
    if (lower(tok) == "inf")
      out.push_back(ExtendedReal::infinity());
    else
      out.push_back(ExtendedReal::finite(parse_real(tok, where)));
  }
  if (out.empty())
    throw std::invalid_argument("expected at least one value for " + where);
  return out;
}

Factor parse_factor_name(const std::string& name) {
  if (name == "X") return Factor::X;
  if (name == "Y") return Factor::Y;
  if (name == "U") return Factor::U;
  if (name == "Xhat") return Factor::Xhat;
  throw std::invalid_argument("unknown factor name: '" + name + "'");
}

// Comma-separated factor names, optionally wrapped in {} or (); empty means
// the empty set.
FactorSet parse_group(std::string text) {
  if (text.size() >= 2 && ((text.front() == '{' && text.back() == '}') ||
                           (text.front() == '(' && text.back() == ')')))
    text = text.substr(1, text.size() - 2);
  std::vector<Factor> fs;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      fs.push_back(parse_factor_name(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) fs.push_back(parse_factor_name(cur));
  return FactorSet::all_of(fs);
}

}  // namespace

ObjectiveSpec parse_objective(const std::string& text) {
  const std::string s = strip_ws(text);
  if (s.empty()) throw std::invalid_argument("objective expression is empty");
  std::vector<MITerm> terms;
  size_t pos = 0;
  while (pos < s.size()) {
    if (!terms.empty()) {
      if (s[pos] != '+')
        throw std::invalid_argument("expected '+' between objective terms near '" +
                                    s.substr(pos) + "'");
      ++pos;
    }
    double coeff = 1.0;
    size_t ipos = pos;
    if (s.compare(pos, 2, "I(") != 0) {
      // A leading coefficient ends at the '*' that introduces the I(...) term,
      // so a '+' inside an exponent like 1e+3 never splits a term.
      const size_t star = s.find("*I(", pos);
      if (star == std::string::npos)
        throw std::invalid_argument("malformed objective term near '" + s.substr(pos) + "'");
      coeff = parse_real(s.substr(pos, star - pos), "an objective coefficient");
      ipos = star + 1;
    }
    const size_t close = s.find(')', ipos);
    if (close == std::string::npos)
      throw std::invalid_argument("missing ')' in objective term");
    const std::string inner = s.substr(ipos + 2, close - ipos - 2);
    const size_t semi = inner.find(';');
    if (semi == std::string::npos)
      throw std::invalid_argument("objective terms have the form I(A;B|C)");
    std::string rest = inner.substr(semi + 1);
    std::string cond;
    const size_t bar = rest.find('|');
    if (bar != std::string::npos) {
      cond = rest.substr(bar + 1);
      rest = rest.substr(0, bar);
    }
    terms.emplace_back(coeff, parse_group(inner.substr(0, semi)), parse_group(rest),
                       parse_group(cond));
    pos = close + 1;
  }
  return ObjectiveSpec(std::move(terms));
}

std::vector<MarkovChainSpec> parse_chains(const std::string& text) {
  const std::string s = strip_ws(text);
  if (s.empty()) throw std::invalid_argument("chain list is empty");
  // Split on commas and dashes at brace depth zero; groups keep theirs.
  std::vector<MarkovChainSpec> chains;
  std::vector<std::string> parts(1);
  std::vector<std::vector<std::string>> chain_parts;
  int depth = 0;
  for (char c : s) {
    if (c == '{' || c == '(') ++depth;
    if (c == '}' || c == ')') --depth;
    if (depth == 0 && c == ',') {
      chain_parts.push_back(std::move(parts));
      parts = {std::string()};
    } else if (depth == 0 && c == '-') {
      parts.emplace_back();
    } else {
      parts.back() += c;
    }
  }
  chain_parts.push_back(std::move(parts));
  for (const auto& p : chain_parts) {
    if (p.size() != 3)
      throw std::invalid_argument("each chain has the form A-B-C");
    chains.emplace_back(parse_group(p[0]), parse_group(p[1]), parse_group(p[2]));
  }
  return chains;
}

namespace {

struct RawEntry {
  std::string section, key, value;
};

std::vector<RawEntry> tokenize(const std::string& text) {
  std::vector<RawEntry> entries;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("malformed section header on line " +
                                    std::to_string(lineno) + ": '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "source" && section != "distortion" && section != "problem" &&
          section != "sweep" && section != "solver")
        throw std::invalid_argument("unknown config section: [" + section + "]");
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("malformed config line " + std::to_string(lineno) +
                                  ": '" + line + "'");
    if (section.empty())
      throw std::invalid_argument("config key outside any section on line " +
                                  std::to_string(lineno));
    RawEntry e;
    e.section = section;
    e.key = trim(line.substr(0, eq));
    e.value = trim(line.substr(eq + 1));
    if (e.key.empty())
      throw std::invalid_argument("empty key on config line " + std::to_string(lineno));
    for (const RawEntry& prev : entries)
      if (prev.section == e.section && prev.key == e.key)
        throw std::invalid_argument("duplicate config key: " + e.section + "." + e.key);
    entries.push_back(std::move(e));
  }
  return entries;
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
  ScenarioConfig cfg;
  bool saw_caps = false, saw_levels = false;
  bool saw_objective = false, saw_chains = false;

  for (const RawEntry& e : tokenize(text)) {
    const std::string where = e.section + "." + e.key;
    if (e.section == "source") {
      if (e.key == "kind") {
        if (e.value == "dsbs")
          cfg.source_kind = SourceKind::dsbs;
        else if (e.value == "table")
          cfg.source_kind = SourceKind::table;
        else
          throw std::invalid_argument("unknown source kind: '" + e.value + "'");
      } else if (e.key == "crossover") {
        cfg.crossover = parse_real(e.value, where);
      } else if (e.key == "nx") {
        cfg.nx = static_cast<int>(parse_integer(e.value, where));
      } else if (e.key == "ny") {
        cfg.ny = static_cast<int>(parse_integer(e.value, where));
      } else if (e.key == "table") {
        cfg.source_table = parse_real_list(e.value, where);
      } else {
        throw std::invalid_argument("unknown config key: " + where);
      }
    } else if (e.section == "distortion") {
      if (e.key == "kind") {
        if (e.value == "erasure")
          cfg.distortion_kind = DistortionKind::erasure;
        else if (e.value == "hamming")
          cfg.distortion_kind = DistortionKind::hamming;
        else if (e.value == "table")
          cfg.distortion_kind = DistortionKind::table;
        else
          throw std::invalid_argument("unknown distortion kind: '" + e.value + "'");
      } else if (e.key == "nhat") {
        cfg.nhat = static_cast<int>(parse_integer(e.value, where));
      } else if (e.key == "table") {
        cfg.distortion_table = parse_cost_list(e.value, where);
      } else {
        throw std::invalid_argument("unknown config key: " + where);
      }
    } else if (e.section == "problem") {
      if (e.key == "kind") {
        if (e.value == "shannon")
          cfg.kind = ProblemKind::shannon;
        else if (e.value == "conditional")
          cfg.kind = ProblemKind::conditional;
        else if (e.value == "wyner-ziv" || e.value == "wyner_ziv")
          cfg.kind = ProblemKind::wyner_ziv;
        else if (e.value == "generic")
          cfg.kind = ProblemKind::generic;
        else
          throw std::invalid_argument("unknown problem kind: '" + e.value + "'");
      } else if (e.key == "u_card") {
        cfg.u_card = static_cast<int>(parse_integer(e.value, where));
      } else if (e.key == "objective") {
        cfg.objective = parse_objective(e.value);
        saw_objective = true;
      } else if (e.key == "chains") {
        cfg.chains = parse_chains(e.value);
        saw_chains = true;
      } else if (e.key == "budgets") {
        cfg.budgets = parse_real_list(e.value, where);
      } else {
        throw std::invalid_argument("unknown config key: " + where);
      }
    } else if (e.section == "sweep") {
      if (e.key == "caps") {
        cfg.schedule = TruncationSchedule(parse_real_list(e.value, where));
        saw_caps = true;
      } else if (e.key == "levels") {
        cfg.schedule = TruncationSchedule::geometric(
            static_cast<int>(parse_integer(e.value, where)));
        saw_levels = true;
      } else if (e.key == "tol") {
        cfg.tol = parse_real(e.value, where);
      } else {
        throw std::invalid_argument("unknown config key: " + where);
      }
    } else {  // solver
      if (e.key == "seed") {
        try {
          size_t pos = 0;
          cfg.solver.seed = std::stoull(e.value, &pos);
          if (pos != e.value.size()) throw std::invalid_argument("");
        } catch (const std::exception&) {
          throw std::invalid_argument("expected an integer for " + where + ", got '" +
                                      e.value + "'");
        }
      } else if (e.key == "restarts") {
        cfg.solver.restarts = static_cast<int>(parse_integer(e.value, where));
      } else if (e.key == "max_iterations") {
        cfg.solver.max_iterations = static_cast<int>(parse_integer(e.value, where));
      } else if (e.key == "policy") {
        if (e.value == "serial")
          cfg.solver.policy = ExecPolicy::serial;
        else if (e.value == "parallel")
          cfg.solver.policy = ExecPolicy::parallel;
        else
          throw std::invalid_argument("unknown solver policy: '" + e.value + "'");
      } else {
        throw std::invalid_argument("unknown config key: " + where);
      }
    }
  }

  if (saw_caps && saw_levels)
    throw std::invalid_argument("sweep.caps and sweep.levels are mutually exclusive");
  if (cfg.kind != ProblemKind::generic && (saw_objective || saw_chains))
    throw std::invalid_argument("objective and chains apply to the generic kind only");
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace rdtrunc

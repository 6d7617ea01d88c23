// Flat key-value configuration files (sections: source, distortion, problem,
// sweep, solver).  Parsing is strict: unknown sections or keys are errors,
// not warnings, so a config documents exactly what runs.

#ifndef RDTRUNC_CONFIG_HPP
#define RDTRUNC_CONFIG_HPP

#include <string>

#include "rdtrunc/scenarios.hpp"

namespace rdtrunc {

// Objective syntax: terms joined by '+', each [coeff*]I(A;B[|C]) with factor
// groups comma-separated, e.g. "1*I(X;U|Y) + -0.5*I(U;Y)".
ObjectiveSpec parse_objective(const std::string& text);

// Chain-list syntax: comma-separated A-B-C with parenthesized multi-factor
// groups, e.g. "U-X-Y, X-(U,Y)-Xhat"; an empty middle part means plain
// independence.
std::vector<MarkovChainSpec> parse_chains(const std::string& text);

ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);

}  // namespace rdtrunc

#endif  // RDTRUNC_CONFIG_HPP

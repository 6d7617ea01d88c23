// Generic constrained minimizer for CMI objectives: a quadratic/hinge penalty
// homotopy over projected gradient descent, restarted from many seeded
// initial points.  Used for every problem shape the closed-form machinery
// does not cover (extra Markov chains, multi-term objectives, side
// information at several terminals).
//
// Restarts are independent and deterministically seeded, results fold in
// restart order, so serial and parallel runs return identical bits.

#ifndef RDTRUNC_PENALTY_SOLVER_HPP
#define RDTRUNC_PENALTY_SOLVER_HPP

#include "rdtrunc/problem.hpp"

namespace rdtrunc {

// Truncated / all-finite problems.  Throws std::invalid_argument when the
// distortion vector has infinite entries.
SolveResult solve_psi(const ProblemSpec& problem, const SolveOptions& options);

// Limit problems: mass is confined to the finite-cost support and the
// objective is minimized there.  Also accepts all-finite problems (the mask
// is then trivial).
SolveResult solve_psi_limit(const ProblemSpec& problem, const SolveOptions& options);

// Dispatch: classical rate-distortion shapes go to Blahut-Arimoto (certified
// optimum), everything else to the penalty solver above.
SolveResult solve_auto(const ProblemSpec& problem, const SolveOptions& options);

// True when the problem has the exact classical shape solve_auto hands to
// Blahut-Arimoto: factors {X, Xhat}, objective I(X;Xhat), one consistency
// constraint on X and no chains.
bool ba_dispatchable(const ProblemSpec& problem);

// True when the problem is the side-information shape solve_auto hands to the
// dedicated channel/decoder engine: all four factors, objective I(X;U|Y),
// consistency on {X, Y}, the encoder and decoder chains, and a distortion
// depending on (x, xhat) only.
bool wz_dispatchable(const ProblemSpec& problem);

}  // namespace rdtrunc

#endif  // RDTRUNC_PENALTY_SOLVER_HPP

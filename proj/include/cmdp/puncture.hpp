#pragma once

#include <set>

#include "cmdp/composition.hpp"
#include "cmdp/morphism.hpp"

namespace cmdp {

/// Removes `obstacles`, every action anchored on them, and every action with
/// mass > eps into them. Entries of at most eps into the obstacles are
/// dropped from the surviving actions.
Subprocess puncture(const MdpPtr& m, const std::set<StateId>& obstacles, double eps = kEps);

/// Puncture of `m2` along the state image of `sub`.
Subprocess puncture_along(const MdpPtr& m2, const MdpMorphism& sub, double eps = kEps);

/// With M_i = M punctured along O_i and M_12 along O_1 u O_2, checks
/// M_1 x_M M_2 ~= M_12 and M_1 u_{M_12} M_2 ~= M. The second holds only when
/// no action touches both O_1 and O_2 (anchor or mass in one, mass in the
/// other). Throws Error(SizeExceeded) from isomorphic().
bool check_static_obstacles(const MdpPtr& m, const std::set<StateId>& o1,
                            const std::set<StateId>& o2, double eps = kEps);

/// Span of subprocesses M1 <- M3 -> M2: puncturing the glue along the states
/// of M2 outside M3 gives M1 back. Throws Error(PreconditionFailed) naming an
/// action of M2 outside M3 that is supported on M3.
bool check_disjoint_recovery(const Span& s, double eps = kEps);

/// Product of `n_agents` copies of m (left-nested Pair labels) punctured
/// along the big diagonal. Throws Error(BudgetExceeded) when |S|^n exceeds
/// `budget`.
MdpPtr collision_free_product(const MdpPtr& m, std::size_t n_agents, std::size_t budget = 1000000);

/// Components of a left-nested Pair label of depth n - 1.
std::vector<Label> unnest_pair(const Label& label, std::size_t n);

}  // namespace cmdp

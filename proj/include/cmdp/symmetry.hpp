#pragma once

#include <string>
#include <vector>

#include "cmdp/composition.hpp"
#include "cmdp/morphism.hpp"

namespace cmdp {

/// One group element acting on M: permutations of state and action indices.
struct Permutation {
  std::vector<std::size_t> states;
  std::vector<std::size_t> actions;

  auto operator<=>(const Permutation&) const = default;
};

Permutation identity_permutation(const FiniteMdp& m);
/// (p o q)(x) = p(q(x)).
Permutation compose(const Permutation& p, const Permutation& q);
/// Label-level form; throws Error(Mismatch) on unknown labels.
Permutation permutation_from_maps(const FiniteMdp& m, const StateMap& states, const ActionMap& actions);

/// Finite group of automorphisms generated by `generators`. elements[0] is
/// the identity; the rest follow in breadth-first order over the generators.
class GroupAction {
 public:
  GroupAction(MdpPtr m, std::vector<Permutation> generators, std::vector<Permutation> elements);

  const MdpPtr& mdp() const noexcept { return mdp_; }
  std::size_t size() const noexcept { return elements_.size(); }
  const std::vector<Permutation>& generators() const noexcept { return generators_; }
  const std::vector<Permutation>& elements() const noexcept { return elements_; }
  const Permutation& element(std::size_t g) const { return elements_.at(g); }
  /// "g0" for the identity, then "g1", "g2", ...
  std::string element_name(std::size_t g) const;
  /// rho_g as a morphism M -> M.
  MdpMorphism rho(std::size_t g) const;

 private:
  MdpPtr mdp_;
  std::vector<Permutation> generators_;
  std::vector<Permutation> elements_;
};

/// Checks each generator is an automorphism and enumerates the closure.
/// Throws Error(NotAutomorphism) naming the generator and the failed
/// diagram, Error(BudgetExceeded) past `budget` elements.
GroupAction close_group(const MdpPtr& m, std::vector<Permutation> generators,
                        std::size_t budget = 10000, double eps = kEps);

/// M x G: states Pair(s, g), actions Pair(a, g) anchored at Pair(psi(a), g),
/// T(a, g) puts mass T(a)(s') on Pair(s', g).
MdpPtr product_with_group(const GroupAction& group);

struct Quotient {
  MdpPtr mdp;
  MdpMorphism q;
};

/// Orbit quotient M/G with Orbit labels. Throws Error(InconsistentOrbit) if
/// representatives of an action orbit push forward differently, and
/// Error(RewardClash) if a rewarded M has rewards varying on an action orbit.
Quotient quotient(const GroupAction& group, double eps = kEps);

/// M u_{M x G} M along pr1 and the action map (s, g) -> rho_g(s).
PushoutResult quotient_via_pushout(const GroupAction& group, double eps = kEps);

/// Unique u : M/G -> N with u o q = h. Throws Error(NotInvariant) naming the
/// element and state where h o rho_g != h.
MdpMorphism check_quotient_universal(const GroupAction& group, const Quotient& quot,
                                     const MdpMorphism& h);

/// Lifts a policy on M/G (action index per quotient state, npos for none)
/// to M: at each state the smallest action in the chosen orbit.
std::vector<std::size_t> lift_policy(const Quotient& quot, const std::vector<std::size_t>& policy);

}  // namespace cmdp

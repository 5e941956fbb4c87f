#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <vector>

#include "cmdp/mdp.hpp"

namespace cmdp {

using StateMap = std::map<StateId, StateId>;
using ActionMap = std::map<ActionId, ActionId>;

/// Morphism (f, g) : M1 -> M2, stored as explicit index tables.
///
/// Construction only checks that the tables are total and land inside the
/// target; the two compatibility diagrams are checked by check_morphism().
/// `reward_compatible` selects the category with rewards: when set, the
/// check also demands R1 = R2 o g.
class MdpMorphism {
 public:
  MdpMorphism(MdpPtr source, MdpPtr target, std::vector<std::size_t> state_map,
              std::vector<std::size_t> action_map, bool reward_compatible = false);

  /// Label-level constructor; throws Error(Mismatch) on missing or unknown
  /// entries.
  static MdpMorphism from_tables(MdpPtr source, MdpPtr target, const StateMap& f,
                                 const ActionMap& g, bool reward_compatible = false);

  const FiniteMdp& source() const noexcept { return *source_; }
  const FiniteMdp& target() const noexcept { return *target_; }
  const MdpPtr& source_ptr() const noexcept { return source_; }
  const MdpPtr& target_ptr() const noexcept { return target_; }

  std::size_t f(std::size_t s) const { return f_.at(s); }
  std::size_t g(std::size_t a) const { return g_.at(a); }
  std::span<const std::size_t> state_table() const noexcept { return f_; }
  std::span<const std::size_t> action_table() const noexcept { return g_; }

  const StateId& map_state(const StateId& s) const;
  const ActionId& map_action(const ActionId& a) const;
  StateMap state_map() const;
  ActionMap action_map() const;

  bool reward_compatible() const noexcept { return reward_compatible_; }
  MdpMorphism with_reward_compatible(bool flag) const;
  MdpMorphism retarget(MdpPtr target) const;

  /// Same endpoints (structurally) and the same tables.
  bool operator==(const MdpMorphism& other) const;

 private:
  MdpPtr source_;
  MdpPtr target_;
  std::vector<std::size_t> f_;
  std::vector<std::size_t> g_;
  bool reward_compatible_ = false;
};

/// Pointer-equal or label-identical.
bool same_mdp(const FiniteMdp& a, const FiniteMdp& b);
inline bool same_mdp(const MdpPtr& a, const MdpPtr& b) { return a == b || same_mdp(*a, *b); }

/// f_* mu. Throws Error(DanglingState) if the support escapes f's domain.
Dist pushforward(const StateMap& f, const Dist& mu);
/// Index form used internally: entries of `m.action(a).to` mapped along `f`.
Dist pushforward(const FiniteMdp& source, const FiniteMdp& target,
                 std::span<const std::size_t> f, std::size_t action);

ValidationReport check_morphism(const MdpMorphism& m, double eps = kEps);
inline bool is_valid(const MdpMorphism& m, double eps = kEps) { return check_morphism(m, eps).ok(); }

MdpMorphism identity(const MdpPtr& m);
/// The unique morphism M -> pt.
MdpMorphism to_point(const MdpPtr& m);
/// second o first. Throws Error(Mismatch) if first.target != second.source.
MdpMorphism compose(const MdpMorphism& second, const MdpMorphism& first);

bool is_subprocess(const MdpMorphism& m);
/// Injective, and every target action anchored at an image state comes from
/// the source.
bool is_full_subprocess(const MdpMorphism& m);

struct Subprocess {
  MdpPtr mdp;
  MdpMorphism inclusion;
};

/// Maximal subprocess on `keep`: actions anchored in keep whose transitions
/// are supported in keep. Labels are preserved.
Subprocess canonical_subprocess(const MdpPtr& m, const std::set<StateId>& keep);

/// The unique u with canonical_inclusion o u = sub, where the canonical
/// subprocess is taken on the image of sub. Throws Error(NotASubprocess).
MdpMorphism factor_through_canonical(const MdpMorphism& sub, double eps = kEps);

/// Restrictions for enumerate_morphisms. Empty vectors mean "unrestricted";
/// otherwise entry i lists the admissible images of state/action i.
struct MorphismConstraints {
  std::vector<std::vector<std::size_t>> state_candidates;
  std::vector<std::vector<std::size_t>> action_candidates;
  bool reward_compatible = false;
};

/// Every morphism source -> target satisfying the constraints, in
/// lexicographic order of their tables. Throws Error(BudgetExceeded) if more
/// than `limit` exist.
std::vector<MdpMorphism> enumerate_morphisms(const MdpPtr& source, const MdpPtr& target,
                                             const MorphismConstraints& constraints = {},
                                             std::size_t limit = 100000, double eps = kEps);

/// Bijective morphism witnessing M1 ~= M2 (reward-preserving when both carry
/// rewards), or nothing. Tries label identity and label-skeleton matching
/// first; the exhaustive search is limited to `max_states` states and throws
/// Error(SizeExceeded) beyond it.
std::optional<MdpMorphism> isomorphic(const MdpPtr& m1, const MdpPtr& m2, double eps = kEps,
                                      std::size_t max_states = 12);

/// Isomorphism with the given state bijection (index table), if one exists:
/// actions are matched per state. No search over state maps.
std::optional<MdpMorphism> extend_to_isomorphism(const MdpPtr& m1, const MdpPtr& m2,
                                                 const std::vector<std::size_t>& f,
                                                 double eps = kEps);

}  // namespace cmdp

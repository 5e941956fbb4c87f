#pragma once

#include "cmdp/mdp.hpp"
#include "cmdp/morphism.hpp"

namespace cmdp {

/// m1 : M1 -> M3 <- M2 : m2.
struct Cospan {
  MdpMorphism m1;
  MdpMorphism m2;

  const MdpPtr& apex() const noexcept { return m1.target_ptr(); }
};

/// m1 : M1 <- M3 -> M2 : m2.
struct Span {
  MdpMorphism m1;
  MdpMorphism m2;

  const MdpPtr& apex() const noexcept { return m1.source_ptr(); }
};

/// Shared apex plus both legs valid.
ValidationReport check_cospan(const Cospan& c, double eps = kEps);
ValidationReport check_span(const Span& s, double eps = kEps);

struct FiberProductResult {
  MdpPtr product;
  MdpMorphism proj1;
  MdpMorphism proj2;
  Cospan cospan;
};

/// Finite fiber product M1 x_{M3} M2.
///
/// States and actions are the matching pairs, labelled Pair(x1, x2). Each
/// product action (a1, a2) has density
///   nu(s1, s2) = mu1(s1) mu2(s2) / mu3(f1(s1)),  0 where mu3 vanishes,
/// with mu3 = T3(g1(a1)). If the apex carries rewards, the product gets
/// R3 o g1 o pr1.
FiberProductResult fiber_product(const Cospan& c);

/// Fiber product over pt.
FiberProductResult cartesian_product(const MdpPtr& m1, const MdpPtr& m2);

/// (pr_i)_* T(a) = T_i(pr_i(a)) for every product action.
bool check_pushforward_prop(const FiberProductResult& r, double eps = kEps);

/// Joint transitions of n agree with the nu density on every pair of
/// singletons. Throws Error(NonCommuting) if m1 o a1 != m2 o a2.
bool is_conditionally_independent(const MdpPtr& n, const MdpMorphism& a1, const MdpMorphism& a2,
                                  const Cospan& c, double eps = kEps);

/// The unique u : n -> product with pr1 o u = a1 and pr2 o u = a2.
/// Throws Error(NotIndependent).
MdpMorphism universal_map_into_fiber(const MdpPtr& n, const MdpMorphism& a1,
                                     const MdpMorphism& a2, const FiberProductResult& r,
                                     double eps = kEps);

struct PushoutResult {
  MdpPtr glued;
  MdpMorphism incl1;
  MdpMorphism incl2;
  Span span;
};

enum class RewardMode {
  /// Glue rewards when both legs carry them.
  IfPresent,
  /// Throw Error(RewardClash) unless both legs carry rewards.
  Require,
  Ignore,
};

/// M1 u_{M3} M2.
///
/// States are classes of S1 + S2 under f1(s3) ~ f2(s3): unglued states keep
/// their label under Left/Right, a glued class is Glued(s3) for the smallest
/// s3 mapping into it. Actions are glued the same way; a glued action takes
/// its transition from its smallest A1 member (A2 if none) pushed into the
/// glued space. Legs need not be injective. Throws Error(RewardClash) when
/// identified actions disagree on reward.
PushoutResult pushout(const Span& s, RewardMode mode = RewardMode::IfPresent, double eps = kEps);

/// Mediating morphism glued -> N for the cocone (h1, h2).
/// Throws Error(NonCommuting) if h1 o m1 != h2 o m2.
MdpMorphism check_pushout_universal(const PushoutResult& r, const MdpMorphism& h1,
                                    const MdpMorphism& h2);

/// Both inclusions are subprocesses.
bool check_subprocess_gluing(const Span& s, const PushoutResult& r);

}  // namespace cmdp

#pragma once

#include <optional>
#include <vector>

#include "cmdp/composition.hpp"
#include "cmdp/solver.hpp"

namespace cmdp {

/// N_i with its legs into M_i (left) and M_{i+1} (right).
struct Bridge {
  MdpMorphism left;
  MdpMorphism right;

  const MdpPtr& mdp() const noexcept { return left.source_ptr(); }
};

/// M_0 <- N_0 -> M_1 <- N_1 -> ... -> M_n.
struct ZigZagDiagram {
  std::vector<MdpPtr> environments;
  std::vector<Bridge> bridges;

  std::size_t length() const noexcept { return environments.empty() ? 0 : environments.size() - 1; }
};

/// Shapes, shared endpoints, legs valid and subprocesses, rewards present.
ValidationReport check_diagram(const ZigZagDiagram& z, double eps = kEps);

struct Composite {
  MdpPtr mdp;
  /// M_i -> C_n.
  std::vector<MdpMorphism> inclusions;
};

/// C_0 = M_0, C_{i+1} = C_i u_{N_i} M_{i+1}, glued with rewards.
/// Throws Error(RewardClash) from the pushouts.
Composite build_composite(const ZigZagDiagram& z, double eps = kEps);

/// Environments M_i..M_n and bridges N_i..N_{n-1}. Throws
/// Error(IndexOutOfRange).
ZigZagDiagram truncate(const ZigZagDiagram& z, std::size_t i);

/// Every left leg N_i -> M_i is a full subprocess.
bool is_forward_moving(const ZigZagDiagram& z);

/// Deletes the actions of M_i anchored on the image of N_i that do not come
/// from N_i; bridge actions whose right image disappears are dropped with
/// them, until nothing changes. Throws Error(EmptiedBridge).
ZigZagDiagram make_forward_moving(const ZigZagDiagram& z);

struct StitchedPolicy {
  /// Greedy policy of each M_i solved alone.
  std::vector<Solution> components;
  /// Action index of C_n per state of C_n; npos on terminal states.
  std::vector<std::size_t> global;
  /// Component whose policy decides each state of C_n; npos on terminal states.
  std::vector<std::size_t> owner;
};

/// Each state of C_n follows the highest-index component in which it is
/// non-terminal. Throws Error(SolverDiverged).
StitchedPolicy stitch_policies(const ZigZagDiagram& z, const Composite& c,
                               const SolverOptions& opts = {});

struct MonotonicityReport {
  bool monotonic = true;
  /// First disagreement, for diagnostics.
  std::string witness;
};

/// Argmax sets over (A_i)_s under v* of C_n and of C_[i,n] agree for every
/// i and every state of M_i; additionally, on the states where the stitched
/// policy follows pi_i, the argmax set under the local v* of M_i agrees with
/// the one under v* of C_n. Ties within `tie_tol`. Throws
/// Error(SolverDiverged).
MonotonicityReport check_monotonic(const ZigZagDiagram& z, const SolverOptions& opts = {},
                                   double tie_tol = 1e-6);
bool is_monotonic(const ZigZagDiagram& z, const SolverOptions& opts = {}, double tie_tol = 1e-6);

struct Theorem3Report {
  bool forward_moving = false;
  bool monotonic = false;
  std::string monotonic_witness;
  /// max |v_stitched - v*| on C_n, when the diagram is forward-moving.
  std::optional<double> gap;
  double tol = 0.0;
  std::size_t composite_states = 0;
  std::size_t composite_actions = 0;
  bool pass = false;
};

/// PASS iff forward-moving, monotonic and gap <= tol.
Theorem3Report verify_theorem3(const ZigZagDiagram& z, const SolverOptions& opts = {},
                               double tol = 1e-6);

}  // namespace cmdp

#pragma once

#include <array>
#include <set>
#include <string>
#include <vector>

#include "cmdp/composition.hpp"
#include "cmdp/symmetry.hpp"
#include "cmdp/zigzag.hpp"

namespace cmdp {

struct Cell {
  int x = 0;
  int y = 0;

  auto operator<=>(const Cell&) const = default;
};

enum class Direction { Down, Left, Right, Stay, Up };

inline constexpr std::array<Direction, 5> kDirections{Direction::Down, Direction::Left, Direction::Right,
                                                      Direction::Stay, Direction::Up};

std::string_view to_string(Direction d);

/// Cell x{x}y{y}; action x{x}y{y}:{dir}.
StateId cell_state(Cell c);
ActionId cell_action(Cell c, Direction d);

/// Width x height cells with lower-left corner at `origin`.
struct GridSpec {
  int width = 4;
  int height = 4;
  Cell origin{};
  double slip = 0.0;

  bool contains(Cell c) const {
    return c.x >= origin.x && c.y >= origin.y && c.x < origin.x + width && c.y < origin.y + height;
  }
  std::vector<Cell> cells() const;
};

/// Five actions per cell (down, left, right, stay, up). A move into a wall
/// leaves the agent in place but stays a distinct action; a cell with no
/// in-bounds neighbour has the stay action only. With slip > 0 the intended
/// move keeps 1 - slip and each lateral move gets slip / 2. Reward of an
/// action anchored outside the goal set is its mass on the goals; actions
/// anchored on a goal earn 0. Obstacles are only bounds-checked, never
/// removed. Throws Error(OutOfBounds).
FiniteMdp grid_world(const GridSpec& spec, const std::set<Cell>& obstacles, const std::set<Cell>& goals);
FiniteMdp grid_world(int width, int height, const std::set<Cell>& obstacles, Cell goal, double slip = 0.0);

/// Keeps only the stay action on each of `cells`.
FiniteMdp make_absorbing(const FiniteMdp& m, const std::set<StateId>& cells);

/// Reward replaced by the mass each action puts on `goals` (0 for actions
/// anchored on a goal).
FiniteMdp reward_entering(const FiniteMdp& m, const std::set<StateId>& goals);

std::set<StateId> cell_states(const std::set<Cell>& cells);

/// The running 4x4 example: start, goal and two groups of red cells that do
/// not touch each other.
struct Fig1Layout {
  GridSpec grid;
  Cell start;
  Cell goal;
  std::set<Cell> red1;
  std::set<Cell> red2;

  std::set<Cell> red() const;
};

Fig1Layout fig1_layout();

/// The 4x4 obstacle grid with the goal rewarded, obstacles still present.
FiniteMdp fig1_grid(double slip = 0.0);

/// Four punctured copies M_1..M_4 of the grid joined by point bridges at
/// R_1, R_2, R_3. M_i (i <= 3) pays for entering R_i, M_4 pays nothing.
/// Unless `raw`, R_i has only its stay action in M_i. Throws
/// Error(RegionOnObstacle), Error(OutOfBounds), Error(PreconditionFailed)
/// for repeated regions.
ZigZagDiagram sequential_regions(const GridSpec& grid, const std::array<Cell, 3>& regions,
                                 const std::set<Cell>& obstacles, bool raw = false);

/// The regions used by `demo regions` on the obstacle grid.
std::array<Cell, 3> fig1_regions();

struct FetchSpec {
  GridSpec box{2, 2, {0, 0}, 0.0};
  GridSpec outside{2, 3, {1, 1}, 0.0};
  std::set<Cell> overlap{{1, 1}};
  Cell shelf{2, 3};
};

struct FetchAndPlace {
  ZigZagDiagram diagram;
  /// States Pair(arm, object).
  MdpPtr box;
  Subprocess fetch;
  MdpPtr outside;
  Subprocess overlap;
  /// Overlap -> Fetch.
  MdpMorphism overlap_to_fetch;
  PushoutResult move;
};

/// Box on B x B with a stationary object: off the diagonal only (a, stay)
/// actions, on the diagonal only the pairs that keep arm and object
/// together, reward = mass entering the diagonal. Fetch is the canonical
/// subprocess on the diagonal, Move = Fetch u_Overlap Outside with reward for
/// entering the shelf (absorbing), Place = pt at the shelf. Diagram:
/// Box <- Fetch -> Move <- pt -> pt. Throws Error(EmptyOverlap),
/// Error(OutOfBounds).
FetchAndPlace fetch_and_place(const FetchSpec& spec = {});

/// Width x height grid (even width) with goals mirrored across the vertical
/// axis, and the reflection x -> width - 1 - x as a permutation.
struct MirrorGrid {
  MdpPtr mdp;
  Permutation reflection;
};

MirrorGrid mirror_grid(int width = 4, int height = 4);

/// `rings` concentric cycles of `size` cells each; left/right walk the
/// cycle, up/down change ring, reward for reaching the outer ring. The
/// rotation by one cell yields a permutation.
struct CycleWorld {
  MdpPtr mdp;
  Permutation rotation;
};

CycleWorld cycle_world(int rings = 3, int size = 4);

/// M_0 = {x, y1, y2} with a: x -> y1, b: x -> y2 (reward 1 each), M_1 adds
/// a move y2 -> y1 worth 10, bridge {y1, y2} with their stay actions.
/// Forward-moving but not monotonic; the composite has three states.
ZigZagDiagram monotonicity_counterexample();

}  // namespace cmdp

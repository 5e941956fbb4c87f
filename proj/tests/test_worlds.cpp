#include "doctest.h"

#include "cmdp/error.hpp"
#include "cmdp/worlds.hpp"

using namespace cmdp;

namespace {

MdpMorphism as_morphism(const MdpPtr& m, const Permutation& p) {
  return MdpMorphism(m, m, p.states, p.actions, true);
}

}  // namespace

TEST_CASE("obstacle grid shape") {
  auto grid = fig1_grid();
  CHECK(grid.num_states() == 16);
  CHECK(grid.num_actions() == 80);
  CHECK(validate(grid).ok());
  const auto goal = fig1_layout().goal;
  // Entering the goal pays 1, everything else 0.
  for (const auto& a : grid.actions()) {
    const double want = a.state != cell_state(goal) && a.to.mass(cell_state(goal)) > 0.0 ? 1.0 : 0.0;
    CHECK(*a.reward == want);
  }
  // Bumping into a wall is a distinct action that stays put.
  auto bump = grid.action(grid.action_index(cell_action({0, 0}, Direction::Left)));
  CHECK(bump.to == Dist::dirac(cell_state({0, 0})));
}

TEST_CASE("a 1x1 grid has only the stay action") {
  auto m = grid_world(1, 1, {}, {0, 0});
  CHECK(m.num_states() == 1);
  REQUIRE(m.num_actions() == 1);
  CHECK(m.action(0).id == cell_action({0, 0}, Direction::Stay));
}

TEST_CASE("slip spreads mass to the lateral moves") {
  auto m = grid_world(GridSpec{3, 3, {0, 0}, 0.2}, {}, {});
  auto up = m.action(m.action_index(cell_action({1, 1}, Direction::Up)));
  CHECK(up.to.size() == 3);
  CHECK(up.to.mass(cell_state({1, 2})) == doctest::Approx(0.8));
  CHECK(up.to.mass(cell_state({0, 1})) == doctest::Approx(0.1));
  CHECK(up.to.mass(cell_state({2, 1})) == doctest::Approx(0.1));
  // In a corner the slip into the wall stays in place.
  auto corner = m.action(m.action_index(cell_action({0, 0}, Direction::Up)));
  CHECK(corner.to.mass(cell_state({0, 0})) == doctest::Approx(0.1));
  auto stay = m.action(m.action_index(cell_action({1, 1}, Direction::Stay)));
  CHECK(stay.to == Dist::dirac(cell_state({1, 1})));
  CHECK(validate(m).ok());
}

TEST_CASE("grid errors") {
  CHECK_THROWS_AS(grid_world(4, 4, {{4, 0}}, {0, 0}), Error);
  CHECK_THROWS_AS(grid_world(4, 4, {}, {0, 7}), Error);
  CHECK_THROWS_AS(grid_world(0, 4, {}, {0, 0}), Error);
  CHECK_THROWS_AS(grid_world(GridSpec{2, 2, {0, 0}, 1.0}, {}, {}), Error);

  auto layout = fig1_layout();
  try {
    sequential_regions(layout.grid, {Cell{1, 1}, Cell{0, 3}, Cell{3, 3}}, layout.red());
    FAIL("expected RegionOnObstacle");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::RegionOnObstacle);
  }
  try {
    sequential_regions(layout.grid, {Cell{9, 0}, Cell{0, 3}, Cell{3, 3}}, layout.red());
    FAIL("expected OutOfBounds");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::OutOfBounds);
  }
  CHECK_THROWS_AS(sequential_regions(layout.grid, {Cell{0, 3}, Cell{0, 3}, Cell{3, 3}}, layout.red()), Error);
}

TEST_CASE("make_absorbing and reward_entering") {
  auto grid = fig1_grid();
  auto a = cell_state({0, 0});
  auto m = make_absorbing(grid, {a});
  CHECK(m.num_actions() == 76);
  REQUIRE(m.actions_at(m.state_index(a)).size() == 1);
  CHECK_THROWS_AS(make_absorbing(grid, {StateId::atom("nowhere")}), Error);

  auto r = reward_entering(grid, {cell_state({1, 0})});
  CHECK(r.reward(r.action_index(cell_action({0, 0}, Direction::Right))) == 1.0);
  CHECK(r.reward(r.action_index(cell_action({1, 0}, Direction::Stay))) == 0.0);
  CHECK(r.reward(r.action_index(cell_action({2, 3}, Direction::Right))) == 0.0);
}

TEST_CASE("sequential regions environments") {
  auto layout = fig1_layout();
  auto z = sequential_regions(layout.grid, fig1_regions(), layout.red());
  REQUIRE(z.environments.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(z.environments[i]->num_states() == 12);
    CHECK(validate(*z.environments[i]).ok());
  }
  for (const auto& a : z.environments[3]->actions()) CHECK(*a.reward == 0.0);
  auto r0 = cell_state(fig1_regions()[0]);
  CHECK(z.environments[0]->actions_at(z.environments[0]->state_index(r0)).size() == 1);
  auto raw = sequential_regions(layout.grid, fig1_regions(), layout.red(), true);
  CHECK(raw.environments[0]->actions_at(raw.environments[0]->state_index(r0)).size() > 1);
}

TEST_CASE("fetch and place") {
  auto fp = fetch_and_place();
  CHECK(fp.box->num_states() == 16);
  CHECK(fp.fetch.mdp->num_states() == 4);
  CHECK(validate(*fp.box).ok());
  CHECK(is_subprocess(fp.fetch.inclusion));
  CHECK(is_valid(fp.overlap_to_fetch));
  CHECK(fp.move.glued->num_states() == 9);
  CHECK(check_diagram(fp.diagram).ok());
  auto c = build_composite(fp.diagram);
  CHECK(c.mdp->num_states() == 21);
  CHECK(validate(*c.mdp).ok());
  // Off the diagonal the arm moves alone and the object stays.
  for (const auto& a : fp.box->actions()) {
    const Label& s = a.state.label();
    if (s.child(0) == s.child(1)) continue;
    for (const auto& [t, p] : a.to) CHECK(t.label().child(1) == s.child(1));
  }

  FetchSpec bad;
  bad.overlap = {};
  CHECK_THROWS_AS(fetch_and_place(bad), Error);
  FetchSpec inside;
  inside.shelf = {1, 1};
  CHECK_THROWS_AS(fetch_and_place(inside), Error);
}

TEST_CASE("mirror and rotation are automorphisms") {
  auto mg = mirror_grid(4, 3);
  CHECK(check_morphism(as_morphism(mg.mdp, mg.reflection)).ok());
  CHECK(compose(mg.reflection, mg.reflection) == identity_permutation(*mg.mdp));
  CHECK_THROWS_AS(mirror_grid(3, 3), Error);

  auto cw = cycle_world(3, 4);
  CHECK(cw.mdp->num_states() == 12);
  CHECK(validate(*cw.mdp).ok());
  CHECK(check_morphism(as_morphism(cw.mdp, cw.rotation)).ok());
  auto p = cw.rotation;
  for (int k = 1; k < 4; ++k) {
    CHECK(p != identity_permutation(*cw.mdp));
    p = compose(cw.rotation, p);
  }
  CHECK(p == identity_permutation(*cw.mdp));
}

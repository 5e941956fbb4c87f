#include "cmdp/worlds.hpp"

#include <map>

#include "cmdp/error.hpp"
#include "cmdp/puncture.hpp"
#include "detail.hpp"

namespace cmdp {

namespace {

Cell step(Cell c, Direction d) {
  switch (d) {
    case Direction::Down: return {c.x, c.y - 1};
    case Direction::Left: return {c.x - 1, c.y};
    case Direction::Right: return {c.x + 1, c.y};
    case Direction::Up: return {c.x, c.y + 1};
    case Direction::Stay: break;
  }
  return c;
}

std::array<Direction, 2> lateral(Direction d) {
  if (d == Direction::Up || d == Direction::Down) return {Direction::Left, Direction::Right};
  return {Direction::Down, Direction::Up};
}

Direction mirrored(Direction d) {
  if (d == Direction::Left) return Direction::Right;
  if (d == Direction::Right) return Direction::Left;
  return d;
}

void require_inside(const GridSpec& g, Cell c, const char* what) {
  if (!g.contains(c)) {
    throw Error(ErrorKind::OutOfBounds, std::string(what) + " " + cell_state(c).str() + " lies outside the grid");
  }
}

ActionId stay_of(const StateId& s) {
  if (s.label().kind() != Label::Kind::Atom) {
    throw Error(ErrorKind::Malformed, "stay actions exist only for atomic cell labels");
  }
  return ActionId::atom(s.label().name() + ":stay");
}

}  // namespace

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::Down: return "down";
    case Direction::Left: return "left";
    case Direction::Right: return "right";
    case Direction::Stay: return "stay";
    case Direction::Up: return "up";
  }
  return "?";
}

StateId cell_state(Cell c) { return StateId::atom("x" + std::to_string(c.x) + "y" + std::to_string(c.y)); }

ActionId cell_action(Cell c, Direction d) {
  return ActionId::atom("x" + std::to_string(c.x) + "y" + std::to_string(c.y) + ":" + std::string(to_string(d)));
}

std::vector<Cell> GridSpec::cells() const {
  std::vector<Cell> out;
  for (int x = origin.x; x < origin.x + width; ++x) {
    for (int y = origin.y; y < origin.y + height; ++y) out.push_back({x, y});
  }
  return out;
}

std::set<StateId> cell_states(const std::set<Cell>& cells) {
  std::set<StateId> out;
  for (auto c : cells) out.insert(cell_state(c));
  return out;
}

FiniteMdp grid_world(const GridSpec& spec, const std::set<Cell>& obstacles, const std::set<Cell>& goals) {
  if (spec.width <= 0 || spec.height <= 0) throw Error(ErrorKind::OutOfBounds, "grid must have at least one cell");
  if (!(spec.slip >= 0.0 && spec.slip < 1.0)) throw Error(ErrorKind::PreconditionFailed, "slip must lie in [0, 1)");
  for (auto c : obstacles) require_inside(spec, c, "obstacle");
  for (auto c : goals) require_inside(spec, c, "goal");

  auto land = [&](Cell c, Direction d) {
    Cell n = step(c, d);
    return spec.contains(n) ? n : c;
  };
  std::vector<StateId> states;
  std::vector<ActionSpec> actions;
  for (auto c : spec.cells()) {
    states.push_back(cell_state(c));
    bool open = false;
    for (auto d : kDirections) open = open || (d != Direction::Stay && spec.contains(step(c, d)));
    for (auto d : kDirections) {
      if (!open && d != Direction::Stay) continue;
      std::vector<Dist::Entry> to;
      if (d == Direction::Stay || spec.slip == 0.0) {
        to.emplace_back(cell_state(land(c, d)), 1.0);
      } else {
        to.emplace_back(cell_state(land(c, d)), 1.0 - spec.slip);
        for (auto l : lateral(d)) to.emplace_back(cell_state(land(c, l)), spec.slip / 2.0);
      }
      Dist dist(std::move(to));
      double r = 0.0;
      if (!goals.count(c)) {
        for (auto g : goals) r += dist.mass(cell_state(g));
      }
      actions.push_back(ActionSpec{cell_action(c, d), cell_state(c), std::move(dist), r});
    }
  }
  return FiniteMdp(std::move(states), std::move(actions), true);
}

FiniteMdp grid_world(int width, int height, const std::set<Cell>& obstacles, Cell goal, double slip) {
  return grid_world(GridSpec{width, height, {0, 0}, slip}, obstacles, {goal});
}

FiniteMdp make_absorbing(const FiniteMdp& m, const std::set<StateId>& cells) {
  std::set<ActionId> stays;
  for (const auto& s : cells) {
    m.state_index(s);
    stays.insert(stay_of(s));
  }
  std::vector<ActionSpec> actions;
  for (const auto& a : m.actions()) {
    if (!cells.count(a.state) || stays.count(a.id)) actions.push_back(a);
  }
  std::vector<StateId> states(m.states().begin(), m.states().end());
  return FiniteMdp(std::move(states), std::move(actions), m.has_reward());
}

FiniteMdp reward_entering(const FiniteMdp& m, const std::set<StateId>& goals) {
  std::vector<double> r(m.num_actions(), 0.0);
  for (std::size_t a = 0; a < m.num_actions(); ++a) {
    const auto& act = m.action(a);
    if (goals.count(act.state)) continue;
    for (const auto& g : goals) r[a] += act.to.mass(g);
  }
  return m.with_rewards(r);
}

std::set<Cell> Fig1Layout::red() const {
  std::set<Cell> out = red1;
  out.insert(red2.begin(), red2.end());
  return out;
}

Fig1Layout fig1_layout() {
  Fig1Layout f;
  f.grid = GridSpec{4, 4, {0, 0}, 0.0};
  f.start = {0, 0};
  f.goal = {3, 3};
  f.red1 = {{1, 1}, {1, 2}};
  f.red2 = {{3, 1}, {3, 2}};
  return f;
}

FiniteMdp fig1_grid(double slip) {
  auto f = fig1_layout();
  f.grid.slip = slip;
  return grid_world(f.grid, f.red(), {f.goal});
}

std::array<Cell, 3> fig1_regions() { return {Cell{2, 0}, Cell{0, 3}, Cell{3, 3}}; }

ZigZagDiagram sequential_regions(const GridSpec& grid, const std::array<Cell, 3>& regions,
                                 const std::set<Cell>& obstacles, bool raw) {
  for (std::size_t i = 0; i < regions.size(); ++i) {
    require_inside(grid, regions[i], "region");
    if (obstacles.count(regions[i])) {
      throw Error(ErrorKind::RegionOnObstacle, "region " + cell_state(regions[i]).str() + " is an obstacle");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (regions[j] == regions[i]) throw Error(ErrorKind::PreconditionFailed, "regions must be distinct cells");
    }
  }
  auto base = share(grid_world(grid, obstacles, {}));
  auto punctured = puncture(base, cell_states(obstacles)).mdp;

  ZigZagDiagram z;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const StateId r = cell_state(regions[i]);
    FiniteMdp env = reward_entering(*punctured, {r});
    if (!raw) env = make_absorbing(env, {r});
    z.environments.push_back(share(std::move(env)));
  }
  z.environments.push_back(share(punctured->with_rewards(std::vector<double>(punctured->num_actions(), 0.0))));

  const MdpPtr& pt = point_ptr();
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const StateId r = cell_state(regions[i]);
    auto leg = [&](const MdpPtr& env) {
      return MdpMorphism(pt, env, {env->state_index(r)}, {env->action_index(stay_of(r))});
    };
    z.bridges.push_back(Bridge{leg(z.environments[i]), leg(z.environments[i + 1])});
  }
  return z;
}

FetchAndPlace fetch_and_place(const FetchSpec& spec) {
  if (spec.overlap.empty()) throw Error(ErrorKind::EmptyOverlap, "overlap region is empty");
  for (auto c : spec.overlap) {
    require_inside(spec.box, c, "overlap cell");
    require_inside(spec.outside, c, "overlap cell");
  }
  require_inside(spec.outside, spec.shelf, "shelf");
  if (spec.box.contains(spec.shelf)) {
    throw Error(ErrorKind::PreconditionFailed, "the shelf must lie outside the box");
  }

  auto cells = share(grid_world(spec.box, {}, {}));
  auto product = cartesian_product(cells, cells).product;
  std::set<StateId> diagonal;
  for (const auto& s : product->states()) {
    if (s.label().child(0) == s.label().child(1)) diagonal.insert(s);
  }
  std::vector<ActionSpec> box_actions;
  for (const auto& a : product->actions()) {
    const Label& anchor = a.state.label();
    if (anchor.child(0) != anchor.child(1)) {
      if (ActionId(a.id.label().child(1)) == stay_of(StateId(anchor.child(1)))) box_actions.push_back(a);
      continue;
    }
    bool together = true;
    for (const auto& [t, p] : a.to) together = together && diagonal.count(t);
    if (together) box_actions.push_back(a);
  }
  std::vector<StateId> box_states(product->states().begin(), product->states().end());
  auto box = share(reward_entering(FiniteMdp(std::move(box_states), std::move(box_actions), true), diagonal));
  auto fetch = canonical_subprocess(box, diagonal);

  const StateId shelf = cell_state(spec.shelf);
  auto outside = share(make_absorbing(grid_world(spec.outside, {}, {spec.shelf}), {shelf}));
  auto overlap = canonical_subprocess(outside, cell_states(spec.overlap));

  // Overlap -> Fetch: c -> (c, c); actions matched by pushforward, same
  // direction on both factors first.
  const FiniteMdp& ov = *overlap.mdp;
  const FiniteMdp& fe = *fetch.mdp;
  std::vector<std::size_t> f(ov.num_states()), g(ov.num_actions());
  for (std::size_t s = 0; s < f.size(); ++s) f[s] = fe.state_index(pair(ov.state(s), ov.state(s)));
  std::vector<char> used(fe.num_actions(), 0);
  for (std::size_t a = 0; a < g.size(); ++a) {
    auto target = detail::push(ov, a, f);
    const std::size_t at = f[ov.anchor(a)];
    std::size_t pick = npos;
    auto preferred = fe.find_action(pair(ov.action(a).id, ov.action(a).id));
    auto fits = [&](std::size_t b) {
      return !used[b] && fe.anchor(b) == at && detail::approx_equal(detail::sparse(fe, b), target, kEps) &&
             fe.reward(b) == ov.reward(a);
    };
    if (preferred && fits(*preferred)) pick = *preferred;
    for (std::size_t k = 0; pick == npos && k < fe.actions_at(at).size(); ++k) {
      if (fits(fe.actions_at(at)[k])) pick = fe.actions_at(at)[k];
    }
    if (pick == npos) {
      throw Error(ErrorKind::PreconditionFailed, "overlap action " + ov.action(a).id.str() + " has no partner in Fetch");
    }
    used[pick] = 1;
    g[a] = pick;
  }
  MdpMorphism overlap_to_fetch(overlap.mdp, fetch.mdp, std::move(f), std::move(g), true);
  auto move = pushout(Span{overlap_to_fetch, overlap.inclusion}, RewardMode::Require);

  const MdpPtr& pt = point_ptr();
  const std::size_t shelf_out = outside->state_index(shelf);
  const std::size_t stay_out = outside->action_index(stay_of(shelf));
  MdpMorphism place(pt, move.glued, {move.incl2.f(shelf_out)}, {move.incl2.g(stay_out)});

  ZigZagDiagram diagram;
  diagram.environments = {box, move.glued, pt};
  diagram.bridges = {Bridge{fetch.inclusion, move.incl1}, Bridge{place, identity(pt)}};
  return FetchAndPlace{std::move(diagram), box, fetch, outside, overlap, overlap_to_fetch, move};
}

MirrorGrid mirror_grid(int width, int height) {
  if (width % 2 != 0) throw Error(ErrorKind::PreconditionFailed, "mirror grid needs an even width");
  GridSpec spec{width, height, {0, 0}, 0.0};
  auto m = share(grid_world(spec, {}, {{width / 2 - 1, height - 1}, {width / 2, height - 1}}));
  StateMap sm;
  ActionMap am;
  for (auto c : spec.cells()) {
    const Cell r{width - 1 - c.x, c.y};
    sm.emplace(cell_state(c), cell_state(r));
    for (auto d : kDirections) {
      if (m->find_action(cell_action(c, d))) am.emplace(cell_action(c, d), cell_action(r, mirrored(d)));
    }
  }
  return MirrorGrid{m, permutation_from_maps(*m, sm, am)};
}

CycleWorld cycle_world(int rings, int size) {
  if (rings < 1 || size < 1) throw Error(ErrorKind::PreconditionFailed, "cycle world needs rings and cells");
  auto name = [](int r, int p) { return "r" + std::to_string(r) + "p" + std::to_string(p); };
  std::vector<StateId> states;
  std::vector<ActionSpec> actions;
  const std::array<std::pair<const char*, std::pair<int, int>>, 5> moves{{
      {"down", {-1, 0}}, {"left", {0, -1}}, {"right", {0, 1}}, {"stay", {0, 0}}, {"up", {1, 0}}}};
  for (int r = 0; r < rings; ++r) {
    for (int p = 0; p < size; ++p) {
      const StateId s = StateId::atom(name(r, p));
      states.push_back(s);
      for (const auto& [label, delta] : moves) {
        int nr = r + delta.first;
        if (nr < 0 || nr >= rings) nr = r;
        const int np = ((p + delta.second) % size + size) % size;
        const StateId t = StateId::atom(name(nr, np));
        const double reward = (r != rings - 1 && nr == rings - 1) ? 1.0 : 0.0;
        actions.push_back(ActionSpec{ActionId::atom(name(r, p) + ":" + label), s, Dist::dirac(t), reward});
      }
    }
  }
  auto m = share(FiniteMdp(std::move(states), std::move(actions), true));
  StateMap sm;
  ActionMap am;
  for (int r = 0; r < rings; ++r) {
    for (int p = 0; p < size; ++p) {
      const int q = (p + 1) % size;
      sm.emplace(StateId::atom(name(r, p)), StateId::atom(name(r, q)));
      for (const auto& [label, delta] : moves) {
        am.emplace(ActionId::atom(name(r, p) + ":" + label), ActionId::atom(name(r, q) + ":" + label));
      }
    }
  }
  return CycleWorld{m, permutation_from_maps(*m, sm, am)};
}

ZigZagDiagram monotonicity_counterexample() {
  const StateId x = StateId::atom("x"), y1 = StateId::atom("y1"), y2 = StateId::atom("y2");
  auto stay = [](const StateId& s, double r) {
    return ActionSpec{stay_of(s), s, Dist::dirac(s), r};
  };
  auto m0 = share(FiniteMdp({x, y1, y2},
                            {ActionSpec{ActionId::atom("a"), x, Dist::dirac(y1), 1.0},
                             ActionSpec{ActionId::atom("b"), x, Dist::dirac(y2), 1.0}, stay(y1, 0.0),
                             stay(y2, 0.0)},
                            true));
  auto m1 = share(FiniteMdp({y1, y2},
                            {stay(y1, 0.0), stay(y2, 0.0),
                             ActionSpec{ActionId::atom("go"), y2, Dist::dirac(y1), 10.0}},
                            true));
  auto n0 = share(FiniteMdp({y1, y2}, {stay(y1, 0.0), stay(y2, 0.0)}, false));
  auto leg = [&](const MdpPtr& env) {
    StateMap sm{{y1, y1}, {y2, y2}};
    ActionMap am{{stay_of(y1), stay_of(y1)}, {stay_of(y2), stay_of(y2)}};
    return MdpMorphism::from_tables(n0, env, sm, am);
  };
  ZigZagDiagram zz;
  zz.environments = {m0, m1};
  zz.bridges = {Bridge{leg(m0), leg(m1)}};
  return zz;
}

}  // namespace cmdp

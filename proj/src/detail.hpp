#pragma once

// Index-level helpers shared by the construction modules.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "cmdp/mdp.hpp"

namespace cmdp::detail {

using SparseDist = std::vector<std::pair<std::size_t, double>>;

/// Transition of `action` in `m` as (state index, mass), ascending by index.
inline SparseDist sparse(const FiniteMdp& m, std::size_t action) {
  SparseDist out;
  auto sup = m.support(action);
  auto entries = m.action(action).to.entries();
  out.reserve(sup.size());
  for (std::size_t k = 0; k < sup.size(); ++k) out.emplace_back(sup[k], entries[k].second);
  return out;
}

/// Merge-sort a list of (index, mass) pairs, summing duplicates.
inline SparseDist normalize(SparseDist d) {
  std::sort(d.begin(), d.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  SparseDist out;
  out.reserve(d.size());
  for (const auto& e : d) {
    if (!out.empty() && out.back().first == e.first) {
      out.back().second += e.second;
    } else {
      out.push_back(e);
    }
  }
  return out;
}

/// Pushforward of action `a` of `m` along the index map `f`.
inline SparseDist push(const FiniteMdp& m, std::size_t a, std::span<const std::size_t> f) {
  SparseDist d = sparse(m, a);
  for (auto& e : d) e.first = (e.first == npos) ? npos : f[e.first];
  return normalize(std::move(d));
}

inline bool approx_equal(const SparseDist& x, const SparseDist& y, double eps) {
  std::size_t i = 0, j = 0;
  while (i < x.size() || j < y.size()) {
    if (j == y.size() || (i < x.size() && x[i].first < y[j].first)) {
      if (std::abs(x[i].second) > eps) return false;
      ++i;
    } else if (i == x.size() || y[j].first < x[i].first) {
      if (std::abs(y[j].second) > eps) return false;
      ++j;
    } else {
      if (std::abs(x[i].second - y[j].second) > eps) return false;
      ++i;
      ++j;
    }
  }
  return true;
}

/// Turn a sparse index distribution over `m`'s states back into a Dist.
inline Dist to_dist(const FiniteMdp& m, const SparseDist& d) {
  std::vector<Dist::Entry> entries;
  entries.reserve(d.size());
  for (const auto& [s, p] : d) entries.emplace_back(m.state(s), p);
  return Dist(std::move(entries));
}

inline bool injective(std::span<const std::size_t> table, std::size_t codomain) {
  std::vector<char> seen(codomain, 0);
  for (auto x : table) {
    if (x >= codomain || seen[x]) return false;
    seen[x] = 1;
  }
  return true;
}

/// End of the label text starting at `pos`: stops at whitespace or a
/// separator outside parentheses, honouring backslash escapes.
inline std::size_t label_extent(std::string_view text, std::size_t pos) {
  int depth = 0;
  while (pos < text.size()) {
    const char c = text[pos];
    if (c == '\\') {
      pos += 2;
      continue;
    }
    if (depth == 0 && (std::isspace(static_cast<unsigned char>(c)) || c == ',' || c == ')' || c == '}' ||
                       c == ']')) {
      break;
    }
    if (c == '(') ++depth;
    if (c == ')') --depth;
    ++pos;
  }
  return std::min(pos, text.size());
}

}  // namespace cmdp::detail

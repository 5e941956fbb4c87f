#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cmdp {

/// Structured identifier shared by states and actions.
///
/// Constructions never invent fresh names: they wrap the labels of their
/// inputs (Left/Right/Glued for gluing, Pair for products, Orbit for
/// quotients), so repeated builds are label-identical. Labels are immutable
/// and cheap to copy; the total order sorts by kind first, then atoms
/// lexicographically, then children lexicographically.
class Label {
 public:
  enum class Kind : std::uint8_t { Atom, Left, Right, Glued, Pair, Orbit };

  /// Throws Error(Malformed) for an empty name.
  static Label atom(std::string name);
  static Label left(Label inner);
  static Label right(Label inner);
  static Label glued(Label inner);
  static Label pair(Label first, Label second);
  /// Members are sorted and deduplicated.
  static Label orbit(std::vector<Label> members);

  /// Inverse of str(); throws SyntaxError with line 1 and the offending column.
  static Label parse(std::string_view text);

  Kind kind() const noexcept { return node_->kind; }
  const std::string& name() const noexcept { return node_->name; }
  std::span<const Label> children() const noexcept { return node_->children; }
  const Label& child(std::size_t i) const { return node_->children.at(i); }
  std::size_t hash() const noexcept { return node_->hash; }

  /// Text form, e.g. `Pair(Left(s0),x1y2)`. Reserved characters in atoms are
  /// backslash-escaped.
  std::string str() const;

  std::strong_ordering operator<=>(const Label& other) const noexcept;
  bool operator==(const Label& other) const noexcept;

 private:
  struct Node {
    Kind kind;
    std::string name;
    std::vector<Label> children;
    std::size_t hash;
  };

  explicit Label(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  static Label make(Kind kind, std::string name, std::vector<Label> children);
  void append_to(std::string& out) const;

  std::shared_ptr<const Node> node_;
};

std::string_view to_string(Label::Kind kind);

/// Strong wrapper so state and action identifiers cannot be mixed up.
template <class Tag>
class Id {
 public:
  explicit Id(Label label) : label_(std::move(label)) {}

  static Id atom(std::string name) { return Id(Label::atom(std::move(name))); }
  static Id parse(std::string_view text) { return Id(Label::parse(text)); }

  const Label& label() const noexcept { return label_; }
  std::string str() const { return label_.str(); }

  auto operator<=>(const Id&) const noexcept = default;
  bool operator==(const Id&) const noexcept = default;

 private:
  Label label_;
};

struct StateTag;
struct ActionTag;
using StateId = Id<StateTag>;
using ActionId = Id<ActionTag>;

template <class Tag>
Id<Tag> left(const Id<Tag>& x) {
  return Id<Tag>(Label::left(x.label()));
}
template <class Tag>
Id<Tag> right(const Id<Tag>& x) {
  return Id<Tag>(Label::right(x.label()));
}
template <class Tag>
Id<Tag> glued(const Id<Tag>& x) {
  return Id<Tag>(Label::glued(x.label()));
}
template <class Tag>
Id<Tag> pair(const Id<Tag>& x, const Id<Tag>& y) {
  return Id<Tag>(Label::pair(x.label(), y.label()));
}
template <class Tag>
Id<Tag> orbit(const std::vector<Id<Tag>>& members) {
  std::vector<Label> labels;
  labels.reserve(members.size());
  for (const auto& m : members) labels.push_back(m.label());
  return Id<Tag>(Label::orbit(std::move(labels)));
}

/// Strips gluing wrappers and collapses diagonal pairs and singleton orbits.
/// Used as a cheap candidate matching for isomorphism checks.
Label skeleton(const Label& label);

namespace literals {
inline StateId operator""_s(const char* text, std::size_t n) {
  return StateId::parse(std::string_view(text, n));
}
inline ActionId operator""_a(const char* text, std::size_t n) {
  return ActionId::parse(std::string_view(text, n));
}
}  // namespace literals

}  // namespace cmdp

template <>
struct std::hash<cmdp::Label> {
  std::size_t operator()(const cmdp::Label& l) const noexcept { return l.hash(); }
};
template <class Tag>
struct std::hash<cmdp::Id<Tag>> {
  std::size_t operator()(const cmdp::Id<Tag>& id) const noexcept { return id.label().hash(); }
};

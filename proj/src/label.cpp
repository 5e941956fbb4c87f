#include "cmdp/label.hpp"

#include <algorithm>
#include <cctype>

#include "cmdp/error.hpp"

namespace cmdp {

namespace {

constexpr std::size_t kHashSeed = 0x9e3779b97f4a7c15ULL;

std::size_t combine(std::size_t h, std::size_t v) {
  return h ^ (v + kHashSeed + (h << 6) + (h >> 2));
}

bool reserved(char c) {
  switch (c) {
    case '\\':
    case '(':
    case ')':
    case '[':
    case ']':
    case '{':
    case '}':
    case ',':
      return true;
    default:
      return std::isspace(static_cast<unsigned char>(c)) != 0;
  }
}

struct Constructor {
  std::string_view name;
  Label::Kind kind;
};

constexpr Constructor kConstructors[] = {
    {"Left", Label::Kind::Left},   {"Right", Label::Kind::Right}, {"Glued", Label::Kind::Glued},
    {"Pair", Label::Kind::Pair},   {"Orbit", Label::Kind::Orbit},
};

class LabelParser {
 public:
  explicit LabelParser(std::string_view text) : text_(text) {}

  Label parse_all() {
    skip_ws();
    Label l = parse_label();
    skip_ws();
    if (pos_ != text_.size()) fail("trailing characters after label");
    return l;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw SyntaxError(1, pos_ + 1, what); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  Label parse_label() {
    std::string name;
    bool escaped_any = false;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '\\') {
        if (pos_ + 1 >= text_.size()) fail("dangling escape");
        name.push_back(text_[pos_ + 1]);
        pos_ += 2;
        escaped_any = true;
        continue;
      }
      if (reserved(c)) break;
      name.push_back(c);
      ++pos_;
    }
    if (name.empty()) fail("expected a label");
    if (!escaped_any && pos_ < text_.size() && text_[pos_] == '(') {
      for (const auto& ctor : kConstructors) {
        if (ctor.name == name) return parse_constructed(ctor.kind);
      }
    }
    return Label::atom(std::move(name));
  }

  Label parse_constructed(Label::Kind kind) {
    ++pos_;  // '('
    std::vector<Label> args;
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == ')') {
      ++pos_;
    } else {
      while (true) {
        skip_ws();
        args.push_back(parse_label());
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == ',') {
          ++pos_;
          continue;
        }
        expect(')');
        break;
      }
    }
    switch (kind) {
      case Label::Kind::Left:
      case Label::Kind::Right:
      case Label::Kind::Glued:
        if (args.size() != 1) fail("constructor takes exactly one argument");
        if (kind == Label::Kind::Left) return Label::left(args[0]);
        if (kind == Label::Kind::Right) return Label::right(args[0]);
        return Label::glued(args[0]);
      case Label::Kind::Pair:
        if (args.size() != 2) fail("Pair takes exactly two arguments");
        return Label::pair(args[0], args[1]);
      case Label::Kind::Orbit:
        return Label::orbit(std::move(args));
      case Label::Kind::Atom:
        break;
    }
    fail("unknown constructor");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string_view to_string(Label::Kind kind) {
  switch (kind) {
    case Label::Kind::Atom:
      return "Atom";
    case Label::Kind::Left:
      return "Left";
    case Label::Kind::Right:
      return "Right";
    case Label::Kind::Glued:
      return "Glued";
    case Label::Kind::Pair:
      return "Pair";
    case Label::Kind::Orbit:
      return "Orbit";
  }
  return "?";
}

Label Label::make(Kind kind, std::string name, std::vector<Label> children) {
  std::size_t h = combine(kHashSeed, static_cast<std::size_t>(kind));
  h = combine(h, std::hash<std::string>{}(name));
  for (const auto& c : children) h = combine(h, c.hash());
  return Label(std::make_shared<const Node>(Node{kind, std::move(name), std::move(children), h}));
}

Label Label::atom(std::string name) {
  if (name.empty()) throw Error(ErrorKind::Malformed, "empty atom label");
  return make(Kind::Atom, std::move(name), {});
}

Label Label::left(Label inner) { return make(Kind::Left, {}, {std::move(inner)}); }
Label Label::right(Label inner) { return make(Kind::Right, {}, {std::move(inner)}); }
Label Label::glued(Label inner) { return make(Kind::Glued, {}, {std::move(inner)}); }
Label Label::pair(Label first, Label second) {
  return make(Kind::Pair, {}, {std::move(first), std::move(second)});
}

Label Label::orbit(std::vector<Label> members) {
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  return make(Kind::Orbit, {}, std::move(members));
}

Label Label::parse(std::string_view text) { return LabelParser(text).parse_all(); }

std::strong_ordering Label::operator<=>(const Label& other) const noexcept {
  if (node_ == other.node_) return std::strong_ordering::equal;
  if (auto c = kind() <=> other.kind(); c != 0) return c;
  if (kind() == Kind::Atom) {
    int c = name().compare(other.name());
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }
  return std::lexicographical_compare_three_way(node_->children.begin(), node_->children.end(),
                                                other.node_->children.begin(),
                                                other.node_->children.end());
}

bool Label::operator==(const Label& other) const noexcept {
  if (node_ == other.node_) return true;
  if (hash() != other.hash() || kind() != other.kind()) return false;
  return (*this <=> other) == 0;
}

void Label::append_to(std::string& out) const {
  if (kind() == Kind::Atom) {
    for (char c : name()) {
      if (reserved(c)) out.push_back('\\');
      out.push_back(c);
    }
    // An atom spelled like a constructor must not be followed by '(' when
    // reparsed; atoms never are, so no extra escaping is needed.
    return;
  }
  out.append(to_string(kind()));
  out.push_back('(');
  bool first = true;
  for (const auto& c : children()) {
    if (!first) out.push_back(',');
    first = false;
    c.append_to(out);
  }
  out.push_back(')');
}

std::string Label::str() const {
  std::string out;
  append_to(out);
  return out;
}

Label skeleton(const Label& label) {
  switch (label.kind()) {
    case Label::Kind::Atom:
      return label;
    case Label::Kind::Left:
    case Label::Kind::Right:
    case Label::Kind::Glued:
      return skeleton(label.child(0));
    case Label::Kind::Pair: {
      Label a = skeleton(label.child(0));
      Label b = skeleton(label.child(1));
      if (a == b) return a;
      return Label::pair(std::move(a), std::move(b));
    }
    case Label::Kind::Orbit: {
      if (label.children().size() == 1) return skeleton(label.child(0));
      std::vector<Label> members;
      for (const auto& c : label.children()) members.push_back(skeleton(c));
      return Label::orbit(std::move(members));
    }
  }
  return label;
}

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Malformed: return "Malformed";
    case ErrorKind::SizeExceeded: return "SizeExceeded";
    case ErrorKind::DanglingState: return "DanglingState";
    case ErrorKind::Mismatch: return "Mismatch";
    case ErrorKind::NotASubprocess: return "NotASubprocess";
    case ErrorKind::NotIndependent: return "NotIndependent";
    case ErrorKind::NonCommuting: return "NonCommuting";
    case ErrorKind::RewardClash: return "RewardClash";
    case ErrorKind::PreconditionFailed: return "PreconditionFailed";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::NotAutomorphism: return "NotAutomorphism";
    case ErrorKind::InconsistentOrbit: return "InconsistentOrbit";
    case ErrorKind::NotInvariant: return "NotInvariant";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::EmptiedBridge: return "EmptiedBridge";
    case ErrorKind::MaxIterExceeded: return "MaxIterExceeded";
    case ErrorKind::SolverDiverged: return "SolverDiverged";
    case ErrorKind::OutOfBounds: return "OutOfBounds";
    case ErrorKind::RegionOnObstacle: return "RegionOnObstacle";
    case ErrorKind::EmptyOverlap: return "EmptyOverlap";
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::SemanticError: return "SemanticError";
    case ErrorKind::UnboundName: return "UnboundName";
  }
  return "Unknown";
}

}  // namespace cmdp

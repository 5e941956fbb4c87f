#include "cmdp/expr.hpp"

#include <cctype>
#include <filesystem>

#include "cmdp/error.hpp"
#include "cmdp/puncture.hpp"
#include "detail.hpp"

namespace cmdp {

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr parse() {
    Expr e = expr();
    skip();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    auto [line, col] = line_column(text_, pos_);
    throw SyntaxError(line, col, what);
  }

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  static bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
  static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

  std::string peek_ident() {
    skip();
    std::size_t end = pos_;
    if (end < text_.size() && ident_start(text_[end])) {
      while (end < text_.size() && ident_char(text_[end])) ++end;
    }
    return std::string(text_.substr(pos_, end - pos_));
  }

  std::string ident(const char* what) {
    std::string id = peek_ident();
    if (id.empty()) fail(std::string("expected ") + what);
    pos_ += id.size();
    return id;
  }

  void keyword(const char* kw) {
    auto id = peek_ident();
    if (id != kw) fail(std::string("expected '") + kw + "'");
    pos_ += id.size();
  }

  void expect(char c) {
    skip();
    if (pos_ >= text_.size() || text_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  bool followed_by_paren(std::size_t after) const {
    while (after < text_.size() && std::isspace(static_cast<unsigned char>(text_[after]))) ++after;
    return after < text_.size() && text_[after] == '(';
  }

  Expr expr() {
    skip();
    Expr e;
    std::tie(e.line, e.column) = line_column(text_, pos_);
    const std::string id = ident("an expression");
    static const std::map<std::string, Expr::Kind> ops{
        {"product", Expr::Kind::Product}, {"fiber", Expr::Kind::Fiber},       {"glue", Expr::Kind::Glue},
        {"puncture", Expr::Kind::Puncture}, {"quotient", Expr::Kind::Quotient}, {"zigzag", Expr::Kind::ZigZag}};
    auto op = ops.find(id);
    if (op == ops.end() || !followed_by_paren(pos_)) {
      e.kind = Expr::Kind::Name;
      e.name = id;
      return e;
    }
    e.kind = op->second;
    expect('(');
    switch (e.kind) {
      case Expr::Kind::Product:
        e.args.push_back(expr());
        expect(',');
        e.args.push_back(expr());
        break;
      case Expr::Kind::Fiber:
      case Expr::Kind::Glue:
        e.args.push_back(expr());
        expect(',');
        e.args.push_back(expr());
        keyword(e.kind == Expr::Kind::Fiber ? "over" : "along");
        e.args.push_back(expr());
        keyword("via");
        e.refs.push_back(ident("a morphism name"));
        expect(',');
        e.refs.push_back(ident("a morphism name"));
        break;
      case Expr::Kind::Puncture:
        e.args.push_back(expr());
        keyword("minus");
        expect('{');
        if (!accept('}')) {
          do {
            skip();
            const std::size_t start = pos_, end = detail::label_extent(text_, pos_);
            if (end == start) fail("expected a state label");
            try {
              e.ids.push_back(StateId::parse(text_.substr(start, end - start)));
            } catch (const SyntaxError& err) {
              pos_ = start + err.column() - 1;
              fail("bad state label");
            }
            pos_ = end;
          } while (accept(','));
          expect('}');
        }
        break;
      case Expr::Kind::Quotient:
        e.args.push_back(expr());
        keyword("by");
        e.name = ident("a group name");
        break;
      case Expr::Kind::ZigZag:
        e.args.push_back(expr());
        do {
          expect('-');
          expect('[');
          e.refs.push_back(ident("a bridge name"));
          expect(']');
          expect('-');
          e.args.push_back(expr());
          skip();
        } while (pos_ < text_.size() && text_[pos_] == '-');
        break;
      case Expr::Kind::Name:
        break;
    }
    expect(')');
    return e;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

template <class T>
const T& expect_kind(const Binding& b, const std::string& name, const char* what) {
  if (const T* v = std::get_if<T>(&b)) return *v;
  throw Error(ErrorKind::SemanticError, "'" + name + "' is not bound to " + what);
}

}  // namespace

std::string Expr::str() const {
  std::string out;
  auto join_args = [&](std::size_t from, std::size_t to, const char* sep) {
    for (std::size_t i = from; i < to; ++i) {
      if (i > from) out += sep;
      out += args[i].str();
    }
  };
  switch (kind) {
    case Kind::Name: return name;
    case Kind::Product:
      out = "product(";
      join_args(0, 2, ", ");
      return out + ")";
    case Kind::Fiber:
    case Kind::Glue:
      out = kind == Kind::Fiber ? "fiber(" : "glue(";
      join_args(0, 2, ", ");
      out += kind == Kind::Fiber ? " over " : " along ";
      out += args[2].str() + " via " + refs[0] + ", " + refs[1] + ")";
      return out;
    case Kind::Puncture:
      out = "puncture(" + args[0].str() + " minus {";
      for (std::size_t i = 0; i < ids.size(); ++i) out += (i ? ", " : "") + ids[i].str();
      return out + "})";
    case Kind::Quotient: return "quotient(" + args[0].str() + " by " + name + ")";
    case Kind::ZigZag:
      out = "zigzag(" + args[0].str();
      for (std::size_t i = 0; i < refs.size(); ++i) out += " -[" + refs[i] + "]- " + args[i + 1].str();
      return out + ")";
  }
  return out;
}

bool Expr::same_shape(const Expr& other) const {
  if (kind != other.kind || name != other.name || refs != other.refs || ids != other.ids ||
      args.size() != other.args.size()) {
    return false;
  }
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (!args[i].same_shape(other.args[i])) return false;
  }
  return true;
}

Expr parse_expr(std::string_view text) { return Parser(text).parse(); }

Binding binding_from_json(const Json& doc, double eps) {
  switch (document_kind(doc)) {
    case DocumentKind::Mdp: {
      FiniteMdp m = mdp_from_json(doc);
      auto report = validate(m, eps);
      if (!report.ok()) throw Error(ErrorKind::SemanticError, report.summary());
      return m;
    }
    case DocumentKind::Morphism: return morphism_from_json(doc);
    case DocumentKind::Group: return group_from_json(doc);
    case DocumentKind::Bridge: return bridge_from_json(doc);
    default: break;
  }
  throw Error(ErrorKind::SemanticError,
              "documents of kind " + std::string(to_string(document_kind(doc))) + " cannot be bound to a name");
}

const Binding& Bindings::lookup(const std::string& name) {
  if (auto it = loaded_.find(name); it != loaded_.end()) return it->second;
  std::string path;
  if (auto it = paths_.find(name); it != paths_.end()) {
    path = it->second;
  } else if (!dir_.empty() && std::filesystem::exists(std::filesystem::path(dir_) / (name + ".json"))) {
    path = (std::filesystem::path(dir_) / (name + ".json")).string();
  } else {
    throw Error(ErrorKind::UnboundName, "no binding for '" + name + "'");
  }
  return loaded_.emplace(name, binding_from_json(parse_json(read_file(path)))).first->second;
}

EvalResult evaluate(const Expr& e, Bindings& bindings, double eps) {
  auto sub = [&](std::size_t i) { return evaluate(e.args[i], bindings, eps).mdp; };
  auto morphism = [&](const std::string& name) {
    return expect_kind<MorphismTables>(bindings.lookup(name), name, "a morphism");
  };
  switch (e.kind) {
    case Expr::Kind::Name: {
      const auto& m = expect_kind<FiniteMdp>(bindings.lookup(e.name), e.name, "an MDP");
      return {share(m), std::nullopt};
    }
    case Expr::Kind::Product: return {cartesian_product(sub(0), sub(1)).product, std::nullopt};
    case Expr::Kind::Fiber: {
      auto a = sub(0), b = sub(1), c = sub(2);
      Cospan cs{morphism(e.refs[0]).bind(a, c), morphism(e.refs[1]).bind(b, c)};
      return {fiber_product(cs).product, std::nullopt};
    }
    case Expr::Kind::Glue: {
      auto a = sub(0), b = sub(1), n = sub(2);
      Span sp{morphism(e.refs[0]).bind(n, a), morphism(e.refs[1]).bind(n, b)};
      return {pushout(sp, RewardMode::IfPresent, eps).glued, std::nullopt};
    }
    case Expr::Kind::Puncture: {
      std::set<StateId> obstacles(e.ids.begin(), e.ids.end());
      return {puncture(sub(0), obstacles, eps).mdp, std::nullopt};
    }
    case Expr::Kind::Quotient: {
      const auto& g = expect_kind<GroupTables>(bindings.lookup(e.name), e.name, "a group");
      return {quotient(g.bind(sub(0)), eps).mdp, std::nullopt};
    }
    case Expr::Kind::ZigZag: {
      ZigZagDiagram z;
      for (std::size_t i = 0; i < e.args.size(); ++i) z.environments.push_back(sub(i));
      for (std::size_t i = 0; i < e.refs.size(); ++i) {
        const Binding& b = bindings.lookup(e.refs[i]);
        BridgeTables t;
        if (const auto* m = std::get_if<FiniteMdp>(&b)) {
          t.mdp = *m;
        } else {
          t = expect_kind<BridgeTables>(b, e.refs[i], "a bridge or an MDP");
        }
        z.bridges.push_back(t.bind(z.environments[i], z.environments[i + 1]));
      }
      auto report = check_diagram(z, eps);
      if (!report.ok()) throw Error(ErrorKind::SemanticError, "invalid zigzag: " + report.summary());
      auto c = build_composite(z, eps);
      return {c.mdp, std::move(z)};
    }
  }
  throw Error(ErrorKind::Malformed, "unknown expression node");
}

}  // namespace cmdp

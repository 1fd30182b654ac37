#include "tdm/term.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <sstream>

#include "tdm/sexp.hpp"

namespace tdm {

ParseError::ParseError(const std::string& message, std::size_t line, std::size_t column)
    : Error("syntax error at " + std::to_string(line) + ":" + std::to_string(column) + ": " +
            message),
      line_(line),
      column_(column) {}

namespace {

struct BuiltinInfo {
  std::string_view name;
  std::size_t arity;  // 0 for the variadic/special ones
  bool fixed;
};

constexpr std::array<BuiltinInfo, 25> kBuiltins{{
    {"if", 3, true},        {"not", 1, true},       {"consp", 1, true},
    {"atom", 1, true},      {"endp", 1, true},      {"null", 1, true},
    {"eq", 2, true},        {"eql", 2, true},       {"equal", 2, true},
    {"car", 1, true},       {"cdr", 1, true},       {"cons", 2, true},
    {"zp", 1, true},        {"natp", 1, true},      {"integerp", 1, true},
    {"<", 2, true},         {"+", 2, true},         {"-", 2, true},
    {"1-", 1, true},        {"1+", 1, true},        {"acl2-count", 1, true},
    {"list", 0, false},     {"quote", 1, false},    {"t", 0, false},
    {"nil", 0, false},
}};

const BuiltinInfo* find_builtin(std::string_view name) {
  for (const auto& b : kBuiltins) {
    if (b.name == name) {
      return &b;
    }
  }
  return nullptr;
}

bool is_abbreviation(std::string_view name) {
  if (name.size() < 4 || name.size() > 6 || name.front() != 'c' || name.back() != 'r') {
    return false;
  }
  return std::all_of(name.begin() + 1, name.end() - 1,
                     [](char c) { return c == 'a' || c == 'd'; });
}

}  // namespace

std::optional<std::size_t> builtin_arity(std::string_view name) {
  const BuiltinInfo* b = find_builtin(name);
  if (b == nullptr || !b->fixed) {
    return std::nullopt;
  }
  return b->arity;
}

bool is_builtin(std::string_view name) { return find_builtin(name) != nullptr; }

std::optional<std::size_t> stub_arity(std::string_view name) {
  constexpr std::string_view prefix = "stub-";
  if (name.size() <= prefix.size() || name.substr(0, prefix.size()) != prefix) {
    return std::nullopt;
  }
  std::string_view digits = name.substr(prefix.size());
  if (digits.front() == '0') {
    return std::nullopt;
  }
  std::size_t k = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || k == 0) {
    return std::nullopt;
  }
  return k;
}

std::string stub_name(std::size_t arity) { return "stub-" + std::to_string(arity); }

bool is_reserved_name(std::string_view name) {
  return is_builtin(name) || is_abbreviation(name) || name == "and" || name == "or" ||
         stub_arity(name).has_value();
}

SymbolClass classify_symbol(std::string_view name, bool head_position) {
  if (name == "t" || name == "nil") {
    return SymbolClass::ConstantSymbol;
  }
  if (is_builtin(name)) {
    return SymbolClass::Builtin;
  }
  if (stub_arity(name)) {
    return SymbolClass::Stub;
  }
  return head_position ? SymbolClass::UserFunction : SymbolClass::Variable;
}

// ---------------------------------------------------------------------------
// Value

struct Value::Pair {
  Value car;
  Value cdr;
};

Value Value::natural(std::uint64_t n) {
  Value v;
  v.rep_ = n;
  return v;
}

Value Value::symbol(std::string name) {
  Value v;
  v.rep_ = std::move(name);
  return v;
}

Value Value::nil() { return symbol("nil"); }
Value Value::t() { return symbol("t"); }

Value Value::cons(Value car, Value cdr) {
  Value v;
  v.rep_ = std::make_shared<const Pair>(Pair{std::move(car), std::move(cdr)});
  return v;
}

Value::Kind Value::kind() const { return static_cast<Kind>(rep_.index()); }

bool Value::is_nil() const {
  const auto* s = std::get_if<std::string>(&rep_);
  return s != nullptr && *s == "nil";
}

std::uint64_t Value::as_natural() const { return std::get<std::uint64_t>(rep_); }
const std::string& Value::symbol_name() const { return std::get<std::string>(rep_); }
const Value& Value::car() const { return std::get<std::shared_ptr<const Pair>>(rep_)->car; }
const Value& Value::cdr() const { return std::get<std::shared_ptr<const Pair>>(rep_)->cdr; }

std::strong_ordering operator<=>(const Value& a, const Value& b) {
  if (a.rep_.index() != b.rep_.index()) {
    return a.rep_.index() <=> b.rep_.index();
  }
  switch (a.kind()) {
    case Value::Kind::Natural:
      return a.as_natural() <=> b.as_natural();
    case Value::Kind::Symbol:
      return a.symbol_name().compare(b.symbol_name()) <=> 0;
    case Value::Kind::Pair: {
      const auto& pa = std::get<std::shared_ptr<const Value::Pair>>(a.rep_);
      const auto& pb = std::get<std::shared_ptr<const Value::Pair>>(b.rep_);
      if (pa == pb) {
        return std::strong_ordering::equal;
      }
      if (auto c = pa->car <=> pb->car; c != 0) {
        return c;
      }
      return pa->cdr <=> pb->cdr;
    }
  }
  return std::strong_ordering::equal;
}

namespace {

void print_value_to(std::ostream& os, const Value& v) {
  switch (v.kind()) {
    case Value::Kind::Natural:
      os << v.as_natural();
      break;
    case Value::Kind::Symbol:
      os << v.symbol_name();
      break;
    case Value::Kind::Pair:
      os << '(';
      print_value_to(os, v.car());
      os << " . ";
      print_value_to(os, v.cdr());
      os << ')';
      break;
  }
}

}  // namespace

std::string print_value(const Value& v) {
  std::ostringstream os;
  print_value_to(os, v);
  return os.str();
}

// ---------------------------------------------------------------------------
// Term

struct Term::Node {
  Kind kind;
  std::optional<Value> value;
  std::string name;
  std::vector<Term> args;
  std::size_t size;
};

Term Term::constant(Value v) {
  return Term(std::make_shared<const Node>(Node{Kind::Const, std::move(v), {}, {}, 1}));
}

Term Term::var(std::string name) {
  return Term(std::make_shared<const Node>(Node{Kind::Var, std::nullopt, std::move(name), {}, 1}));
}

Term Term::app(std::string head, std::vector<Term> args) {
  std::size_t size = 1;
  for (const auto& a : args) {
    size += a.size();
  }
  return Term(std::make_shared<const Node>(
      Node{Kind::App, std::nullopt, std::move(head), std::move(args), size}));
}

Term::Kind Term::kind() const { return node_->kind; }
bool Term::is_app(std::string_view head) const { return is_app() && node_->name == head; }
const Value& Term::value() const { return *node_->value; }
const std::string& Term::name() const { return node_->name; }
std::span<const Term> Term::args() const { return node_->args; }
std::size_t Term::size() const { return node_->size; }

std::strong_ordering compare_terms(const Term& a, const Term& b) {
  if (a.node_ == b.node_) {
    return std::strong_ordering::equal;
  }
  if (a.kind() != b.kind()) {
    return static_cast<int>(a.kind()) <=> static_cast<int>(b.kind());
  }
  switch (a.kind()) {
    case Term::Kind::Const:
      return a.value() <=> b.value();
    case Term::Kind::Var:
      return a.name().compare(b.name()) <=> 0;
    case Term::Kind::App: {
      if (auto c = a.name().compare(b.name()) <=> 0; c != 0) {
        return c;
      }
      if (auto c = a.args().size() <=> b.args().size(); c != 0) {
        return c;
      }
      for (std::size_t i = 0; i < a.args().size(); ++i) {
        if (auto c = compare_terms(a.args()[i], b.args()[i]); c != 0) {
          return c;
        }
      }
      return std::strong_ordering::equal;
    }
  }
  return std::strong_ordering::equal;
}

std::strong_ordering operator<=>(const Term& a, const Term& b) { return compare_terms(a, b); }

bool operator==(const Term& a, const Term& b) {
  if (a.node_ == b.node_) {
    return true;
  }
  if (a.size() != b.size()) {
    return false;
  }
  return compare_terms(a, b) == std::strong_ordering::equal;
}

Term parse_term(std::string_view text) { return term_from_sexp(read_single_sexp(text)); }

namespace {

void print_to(std::ostream& os, const Term& t) {
  switch (t.kind()) {
    case Term::Kind::Const: {
      const Value& v = t.value();
      if (v.kind() == Value::Kind::Natural || v.is_nil() ||
          (v.kind() == Value::Kind::Symbol && v.symbol_name() == "t")) {
        os << print_value(v);
      } else {
        os << '\'' << print_value(v);
      }
      break;
    }
    case Term::Kind::Var:
      os << t.name();
      break;
    case Term::Kind::App:
      os << '(' << t.name();
      for (const auto& a : t.args()) {
        os << ' ';
        print_to(os, a);
      }
      os << ')';
      break;
  }
}

}  // namespace

std::string print_term(const Term& t) {
  std::ostringstream os;
  print_to(os, t);
  return os.str();
}

// ---------------------------------------------------------------------------
// Substitution and matching

Term apply_subst(const Term& t, const Substitution& s) {
  switch (t.kind()) {
    case Term::Kind::Const:
      return t;
    case Term::Kind::Var: {
      auto it = s.vars.find(t.name());
      return it == s.vars.end() ? t : it->second;
    }
    case Term::Kind::App: {
      std::vector<Term> args;
      args.reserve(t.args().size());
      bool changed = false;
      for (const auto& a : t.args()) {
        args.push_back(apply_subst(a, s));
        changed = changed || !(args.back() == a);
      }
      std::string head = t.name();
      if (auto it = s.stubs.find(head); it != s.stubs.end()) {
        if (it->second.arity != t.args().size()) {
          throw Error("arity mismatch instantiating " + head + " with " + it->second.name +
                      " of arity " + std::to_string(it->second.arity));
        }
        head = it->second.name;
        changed = true;
      }
      if (!changed) {
        return t;
      }
      return Term::app(std::move(head), std::move(args));
    }
  }
  return t;
}

namespace {

bool match_into(const Term& pattern, const Term& target, Substitution& s,
                const MatchOptions& options) {
  switch (pattern.kind()) {
    case Term::Kind::Const:
      return target.is_const() && pattern.value() == target.value();
    case Term::Kind::Var: {
      auto it = s.vars.find(pattern.name());
      if (it != s.vars.end()) {
        return it->second == target;
      }
      if (options.var_to_var_only && !target.is_var()) {
        return false;
      }
      s.vars.emplace(pattern.name(), target);
      return true;
    }
    case Term::Kind::App: {
      if (!target.is_app() || target.args().size() != pattern.args().size()) {
        return false;
      }
      if (auto arity = stub_arity(pattern.name())) {
        auto it = s.stubs.find(pattern.name());
        if (it != s.stubs.end()) {
          if (it->second.name != target.name()) {
            return false;
          }
        } else {
          if (classify_symbol(target.name(), true) != SymbolClass::UserFunction) {
            return false;
          }
          if (options.stub_target && *options.stub_target != target.name()) {
            return false;
          }
          s.stubs.emplace(pattern.name(), FunctionRef{target.name(), *arity});
        }
      } else if (pattern.name() != target.name()) {
        return false;
      }
      for (std::size_t i = 0; i < pattern.args().size(); ++i) {
        if (!match_into(pattern.args()[i], target.args()[i], s, options)) {
          return false;
        }
      }
      return true;
    }
  }
  return false;
}

}  // namespace

std::optional<Substitution> match_term(const Term& pattern, const Term& target,
                                       const Substitution& seed, const MatchOptions& options) {
  Substitution s = seed;
  if (!match_into(pattern, target, s, options)) {
    return std::nullopt;
  }
  return s;
}

void collect_variables(const Term& t, std::vector<std::string>& out) {
  if (t.is_var()) {
    if (std::find(out.begin(), out.end(), t.name()) == out.end()) {
      out.push_back(t.name());
    }
  } else if (t.is_app()) {
    for (const auto& a : t.args()) {
      collect_variables(a, out);
    }
  }
}

std::vector<std::string> free_variables(const Term& t) {
  std::vector<std::string> out;
  collect_variables(t, out);
  return out;
}

bool mentions_function(const Term& t, std::string_view head) {
  if (!t.is_app()) {
    return false;
  }
  if (t.name() == head) {
    return true;
  }
  return std::any_of(t.args().begin(), t.args().end(),
                     [&](const Term& a) { return mentions_function(a, head); });
}

const Term& subterm_at(const Term& t, std::span<const std::size_t> path) {
  const Term* cur = &t;
  for (std::size_t i : path) {
    if (!cur->is_app() || i >= cur->args().size()) {
      throw Error("invalid term position");
    }
    cur = &cur->args()[i];
  }
  return *cur;
}

Term replace_at(const Term& t, std::span<const std::size_t> path, Term replacement) {
  if (path.empty()) {
    return replacement;
  }
  if (!t.is_app() || path[0] >= t.args().size()) {
    throw Error("invalid term position");
  }
  std::vector<Term> args(t.args().begin(), t.args().end());
  args[path[0]] = replace_at(args[path[0]], path.subspan(1), std::move(replacement));
  return Term::app(t.name(), std::move(args));
}

}  // namespace tdm

#include "tdm/obligations.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

#include "tdm/sexp.hpp"

namespace tdm {

namespace {

void check_variable_name(const Sexp& s) {
  if (!s.is_atom()) {
    throw_at(s, "formal must be a symbol");
  }
  const std::string& n = s.atom;
  if (n == "t" || n == "nil" || n.front() == ':' ||
      std::isdigit(static_cast<unsigned char>(n.front())) != 0) {
    throw_at(s, "illegal formal '" + n + "'");
  }
  if (is_reserved_name(n)) {
    throw_at(s, "formal '" + n + "' collides with a reserved symbol");
  }
}

void check_self_calls(const Term& t, const std::string& name, std::size_t arity,
                      const Sexp& where) {
  if (!t.is_app()) {
    return;
  }
  if (t.name() == name && t.args().size() != arity) {
    throw_at(where, "call of " + name + " with " + std::to_string(t.args().size()) +
                        " arguments; expected " + std::to_string(arity));
  }
  for (const auto& a : t.args()) {
    check_self_calls(a, name, arity, where);
  }
}

void check_free_variables(const Term& t, const std::vector<std::string>& formals,
                          const std::string& what, const Sexp& where) {
  for (const auto& v : free_variables(t)) {
    if (std::find(formals.begin(), formals.end(), v) == formals.end()) {
      throw_at(where, what + " mentions '" + v + "', which is not a formal");
    }
  }
}

}  // namespace

FunctionDef defun_from_sexp(const Sexp& form) {
  if (!form.is_list() || form.items.empty() || !form.items[0].is_atom()) {
    throw_at(form, "expected a defun form");
  }
  const std::string& op = form.items[0].atom;
  if (op == "mutual-recursion") {
    throw_at(form, "mutual recursion is not supported");
  }
  if (op != "defun" && op != "defunt") {
    throw_at(form, "expected defun, found '" + op + "'");
  }
  if (form.dotted || form.items.size() < 4) {
    throw_at(form, "malformed defun: expected (defun name (formals...) body)");
  }

  const Sexp& name_sexp = form.items[1];
  if (!name_sexp.is_atom() || name_sexp.atom.front() == ':' ||
      std::isdigit(static_cast<unsigned char>(name_sexp.atom.front())) != 0 ||
      name_sexp.atom == "t" || name_sexp.atom == "nil") {
    throw_at(name_sexp, "malformed defun: bad function name");
  }
  if (is_reserved_name(name_sexp.atom)) {
    throw_at(name_sexp, "function name '" + name_sexp.atom + "' collides with a reserved symbol");
  }

  FunctionDef def{name_sexp.atom, {}, Term::constant(Value::nil()), std::nullopt};

  const Sexp& formals = form.items[2];
  if (!formals.is_list() && !formals.is_atom("nil")) {
    throw_at(formals, "malformed defun: formals must be a list");
  }
  if (formals.dotted) {
    throw_at(formals, "malformed defun: dotted formals");
  }
  for (const auto& f : formals.items) {
    check_variable_name(f);
    if (std::find(def.formals.begin(), def.formals.end(), f.atom) != def.formals.end()) {
      throw_at(f, "duplicate formal '" + f.atom + "'");
    }
    def.formals.push_back(f.atom);
  }

  const Sexp* measure_sexp = nullptr;
  std::size_t i = 3;
  for (; i + 1 < form.items.size(); ++i) {
    const Sexp& d = form.items[i];
    if (!d.is_list() || d.items.empty() || !d.items[0].is_atom("declare")) {
      throw_at(d, "malformed defun: expected declare or a single body");
    }
    for (std::size_t j = 1; j < d.items.size(); ++j) {
      const Sexp& spec = d.items[j];
      if (!spec.is_list() || spec.items.empty() || !spec.items[0].is_atom("xargs")) {
        throw_at(spec, "unknown declare form");
      }
      if ((spec.items.size() - 1) % 2 != 0) {
        throw_at(spec, "xargs expects keyword/value pairs");
      }
      for (std::size_t k = 1; k < spec.items.size(); k += 2) {
        const Sexp& key = spec.items[k];
        if (!key.is_atom(":measure")) {
          throw_at(key, "unknown declare key '" + (key.is_atom() ? key.atom : "?") + "'");
        }
        if (def.measure) {
          throw_at(key, "duplicate :measure");
        }
        def.measure = term_from_sexp(spec.items[k + 1]);
        measure_sexp = &spec.items[k + 1];
      }
    }
  }
  def.body = term_from_sexp(form.items[i]);

  check_free_variables(def.body, def.formals, "body of " + def.name, form.items[i]);
  if (def.measure) {
    check_free_variables(*def.measure, def.formals, "measure of " + def.name, *measure_sexp);
    if (mentions_function(*def.measure, def.name)) {
      throw_at(*measure_sexp, "measure of " + def.name + " calls " + def.name);
    }
  }
  check_self_calls(def.body, def.name, def.formals.size(), form.items[i]);
  return def;
}

FunctionDef parse_defun(std::string_view text) { return defun_from_sexp(read_single_sexp(text)); }

std::vector<FunctionDef> parse_defuns(std::string_view text) {
  std::vector<FunctionDef> defs;
  for (const auto& form : read_sexps(text)) {
    defs.push_back(defun_from_sexp(form));
  }
  return defs;
}

std::string print_defun(const FunctionDef& def) {
  std::ostringstream os;
  os << "(defun " << def.name << " (";
  for (std::size_t i = 0; i < def.formals.size(); ++i) {
    os << (i ? " " : "") << def.formals[i];
  }
  os << ")";
  if (def.measure) {
    os << " (declare (xargs :measure " << print_term(*def.measure) << "))";
  }
  os << " " << print_term(def.body) << ")";
  return os.str();
}

// ---------------------------------------------------------------------------

namespace {

void collect_contexts(const Term& t, const std::string& name, std::vector<Term>& ruler,
                      std::vector<CallContext>& out) {
  if (!t.is_app()) {
    return;
  }
  if (t.is_app("if")) {
    collect_contexts(t.arg(0), name, ruler, out);
    ruler.push_back(t.arg(0));
    collect_contexts(t.arg(1), name, ruler, out);
    ruler.back() = Term::app("not", {t.arg(0)});
    collect_contexts(t.arg(2), name, ruler, out);
    ruler.pop_back();
    return;
  }
  for (const auto& a : t.args()) {
    collect_contexts(a, name, ruler, out);
  }
  if (t.name() == name) {
    out.push_back(CallContext{ruler, std::vector<Term>(t.args().begin(), t.args().end()),
                              out.size()});
  }
}

}  // namespace

std::vector<CallContext> call_contexts(const FunctionDef& def) {
  std::vector<CallContext> out;
  std::vector<Term> ruler;
  collect_contexts(def.body, def.name, ruler, out);
  return out;
}

Clause Clause::canonical(std::vector<Term> literals) {
  std::sort(literals.begin(), literals.end());
  literals.erase(std::unique(literals.begin(), literals.end()), literals.end());
  return Clause{std::move(literals)};
}

std::string print_clause(const Clause& c) {
  std::string out = "(";
  for (std::size_t i = 0; i < c.literals.size(); ++i) {
    if (i) {
      out += ' ';
    }
    out += print_term(c.literals[i]);
  }
  return out + ")";
}

Term negate(const Term& t) {
  if (t.is_app("not")) {
    return t.arg(0);
  }
  return Term::app("not", {t});
}

ClauseList measure_conjecture(const FunctionDef& def, const Measure& m) {
  ClauseList out;
  for (const auto& ctx : call_contexts(def)) {
    std::vector<Term> lits;
    for (const auto& r : ctx.ruler) {
      lits.push_back(negate(r));
    }
    Substitution s;
    for (std::size_t i = 0; i < def.formals.size(); ++i) {
      s.vars.emplace(def.formals[i], ctx.args[i]);
    }
    lits.push_back(Term::app("<", {apply_subst(m.term, s), m.term}));
    out.push_back(Clause::canonical(std::move(lits)));
  }
  return out;
}

std::uint64_t acl2_count(const Value& v) {
  switch (v.kind()) {
    case Value::Kind::Natural:
      return v.as_natural();
    case Value::Kind::Symbol:
      return 0;
    case Value::Kind::Pair:
      return 1 + acl2_count(v.car()) + acl2_count(v.cdr());
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

Value truth(bool b) { return b ? Value::t() : Value::nil(); }

std::uint64_t as_nat(const Value& v) {
  return v.kind() == Value::Kind::Natural ? v.as_natural() : 0;
}

class Evaluator {
 public:
  Evaluator(const DefTable& defs, std::uint64_t fuel) : defs_(defs), fuel_(fuel) {}

  std::optional<Value> eval(const Term& t, const Env& env) {
    switch (t.kind()) {
      case Term::Kind::Const:
        return t.value();
      case Term::Kind::Var: {
        auto it = env.find(t.name());
        if (it == env.end()) {
          throw Error("unbound variable '" + t.name() + "'");
        }
        return it->second;
      }
      case Term::Kind::App:
        break;
    }
    const std::string& f = t.name();
    if (f == "if") {
      auto test = eval(t.arg(0), env);
      if (!test) {
        return std::nullopt;
      }
      return eval(test->is_nil() ? t.arg(2) : t.arg(1), env);
    }

    std::vector<Value> args;
    args.reserve(t.args().size());
    for (const auto& a : t.args()) {
      auto v = eval(a, env);
      if (!v) {
        return std::nullopt;
      }
      args.push_back(std::move(*v));
    }

    if (is_builtin(f)) {
      return apply_builtin(f, args);
    }
    auto it = defs_.find(f);
    if (it == defs_.end() || stub_arity(f)) {
      throw Error("unknown function '" + f + "'");
    }
    const FunctionDef& def = it->second;
    if (def.formals.size() != args.size()) {
      throw Error("arity mismatch calling '" + f + "'");
    }
    if (fuel_ == 0) {
      return std::nullopt;
    }
    --fuel_;
    Env inner;
    for (std::size_t i = 0; i < args.size(); ++i) {
      inner.insert_or_assign(def.formals[i], std::move(args[i]));
    }
    return eval(def.body, inner);
  }

 private:
  static Value apply_builtin(const std::string& f, const std::vector<Value>& a) {
    if (f == "not" || f == "null") return truth(a[0].is_nil());
    if (f == "consp") return truth(a[0].is_pair());
    if (f == "atom" || f == "endp") return truth(!a[0].is_pair());
    if (f == "eq" || f == "eql" || f == "equal") return truth(a[0] == a[1]);
    if (f == "car") return a[0].is_pair() ? a[0].car() : Value::nil();
    if (f == "cdr") return a[0].is_pair() ? a[0].cdr() : Value::nil();
    if (f == "cons") return Value::cons(a[0], a[1]);
    if (f == "zp") {
      return truth(!(a[0].kind() == Value::Kind::Natural && a[0].as_natural() > 0));
    }
    if (f == "natp" || f == "integerp") return truth(a[0].kind() == Value::Kind::Natural);
    if (f == "<") return truth(as_nat(a[0]) < as_nat(a[1]));
    if (f == "+") return Value::natural(as_nat(a[0]) + as_nat(a[1]));
    if (f == "-") {
      std::uint64_t x = as_nat(a[0]);
      std::uint64_t y = as_nat(a[1]);
      return Value::natural(x > y ? x - y : 0);
    }
    if (f == "acl2-count") return Value::natural(acl2_count(a[0]));
    throw Error("builtin '" + f + "' cannot be evaluated");
  }

  const DefTable& defs_;
  std::uint64_t fuel_;
};

}  // namespace

std::optional<Value> eval_term(const Term& t, const Env& env, const DefTable& defs,
                               std::uint64_t fuel) {
  return Evaluator(defs, fuel).eval(t, env);
}

// ---------------------------------------------------------------------------
// Falsification

std::vector<Value> enumerate_values(std::uint64_t max_count) {
  std::vector<std::vector<Value>> exact(max_count + 1);
  for (std::uint64_t c = 0; c <= max_count; ++c) {
    auto& bucket = exact[c];
    if (c == 0) {
      bucket = {Value::nil(), Value::t(), Value::natural(0)};
      continue;
    }
    bucket.push_back(Value::natural(c));
    for (std::uint64_t left = 0; left < c; ++left) {
      for (const auto& a : exact[left]) {
        for (const auto& b : exact[c - 1 - left]) {
          bucket.push_back(Value::cons(a, b));
        }
      }
    }
  }
  std::vector<Value> all;
  for (auto& bucket : exact) {
    all.insert(all.end(), bucket.begin(), bucket.end());
  }
  return all;
}

bool is_builtin_only(const Term& t) {
  if (!t.is_app()) {
    return true;
  }
  if (!is_builtin(t.name())) {
    return false;
  }
  return std::all_of(t.args().begin(), t.args().end(),
                     [](const Term& a) { return is_builtin_only(a); });
}

namespace {

// Literals are bucketed by the position of their last variable in the
// enumeration order, so a literal that is already true prunes every
// extension of the current partial environment.
std::optional<Env> falsify_clause(const Clause& clause, const std::vector<Value>& universe) {
  std::set<std::string> var_set;
  for (const auto& lit : clause.literals) {
    for (auto& v : free_variables(lit)) {
      var_set.insert(std::move(v));
    }
  }
  std::vector<std::string> vars(var_set.begin(), var_set.end());
  std::vector<std::vector<const Term*>> by_level(vars.size() + 1);
  for (const auto& lit : clause.literals) {
    std::size_t level = 0;
    for (const auto& v : free_variables(lit)) {
      auto pos = static_cast<std::size_t>(std::find(vars.begin(), vars.end(), v) - vars.begin());
      level = std::max(level, pos + 1);
    }
    by_level[level].push_back(&lit);
  }

  static const DefTable kNoDefs;
  Env env;
  auto all_nil = [&](std::size_t level) {
    for (const Term* lit : by_level[level]) {
      auto v = eval_term(*lit, env, kNoDefs, std::numeric_limits<std::uint64_t>::max());
      if (!v || !v->is_nil()) {
        return false;
      }
    }
    return true;
  };

  std::function<bool(std::size_t)> search = [&](std::size_t depth) -> bool {
    if (depth == vars.size()) {
      return true;
    }
    for (const auto& value : universe) {
      env.insert_or_assign(vars[depth], value);
      if (all_nil(depth + 1) && search(depth + 1)) {
        return true;
      }
    }
    env.erase(vars[depth]);
    return false;
  };

  if (!all_nil(0) || !search(0)) {
    return std::nullopt;
  }
  return env;
}

}  // namespace

FalsifyResult falsify(const ClauseList& clauses, std::uint64_t max_count) {
  FalsifyResult result;
  const std::vector<Value> universe = enumerate_values(max_count);
  for (std::size_t i = 0; i < clauses.size(); ++i) {
    const auto& lits = clauses[i].literals;
    if (!std::all_of(lits.begin(), lits.end(), [](const Term& l) { return is_builtin_only(l); })) {
      result.skipped.push_back(i);
      continue;
    }
    if (!result.counterexample) {
      if (auto env = falsify_clause(clauses[i], universe)) {
        result.counterexample = Counterexample{i, std::move(*env)};
      }
    }
  }
  return result;
}

}  // namespace tdm

#include "tdm/normalize.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

namespace tdm {

const std::vector<RewriteRule>& theory_rules() {
  static const std::vector<RewriteRule> rules = {
      {"r1-atom", parse_term("(atom x)"), parse_term("(not (consp x))"), false},
      {"r2-endp", parse_term("(endp x)"), parse_term("(not (consp x))"), false},
      {"r3-null", parse_term("(null x)"), parse_term("(not x)"), false},
      {"r4-eq", parse_term("(eq x y)"), parse_term("(equal x y)"), false},
      {"r4-eql", parse_term("(eql x y)"), parse_term("(equal x y)"), false},
      {"r5-not-not", parse_term("(not (not p))"), parse_term("p"), true},
  };
  return rules;
}

const RewriteRule& find_rule(std::string_view id) {
  for (const auto& r : theory_rules()) {
    if (r.id == id) {
      return r;
    }
  }
  throw Error("unknown rewrite rule '" + std::string(id) + "'");
}

bool is_tautology(const Clause& c) {
  for (const auto& lit : c.literals) {
    if (lit.is_const() && !lit.value().is_nil()) {
      return true;
    }
    if (lit.is_app("not")) {
      const Term& p = lit.arg(0);
      if (std::find(c.literals.begin(), c.literals.end(), p) != c.literals.end()) {
        return true;
      }
    }
  }
  return false;
}

namespace {

using State = std::vector<std::vector<Term>>;

void apply_step(State& st, const TraceStep& step) {
  auto check_clause = [&] {
    if (step.clause >= st.size()) {
      throw Error("trace step refers to missing clause " + std::to_string(step.clause));
    }
  };
  auto check_literal = [&] {
    check_clause();
    if (step.literal >= st[step.clause].size()) {
      throw Error("trace step refers to missing literal " + std::to_string(step.literal));
    }
  };

  switch (step.action) {
    case TraceStep::Action::Rewrite: {
      check_literal();
      const RewriteRule& rule = find_rule(step.rule);
      if (rule.top_level_only && !step.path.empty()) {
        throw Error("rule " + rule.id + " applies only at a literal root");
      }
      Term& lit = st[step.clause][step.literal];
      const Term& sub = subterm_at(lit, step.path);
      auto s = match_term(rule.pattern, sub, {});
      if (!s) {
        throw Error("rule " + rule.id + " does not match " + print_term(sub));
      }
      lit = replace_at(lit, step.path, apply_subst(rule.replacement, *s));
      break;
    }
    case TraceStep::Action::DropLiteral: {
      check_literal();
      auto& lits = st[step.clause];
      const Term& l = lits[step.literal];
      bool duplicate = false;
      for (std::size_t k = 0; k < lits.size(); ++k) {
        duplicate = duplicate || (k != step.literal && lits[k] == l);
      }
      if (!duplicate) {
        throw Error("dropped literal is not a duplicate");
      }
      lits.erase(lits.begin() + static_cast<std::ptrdiff_t>(step.literal));
      break;
    }
    case TraceStep::Action::DropClause: {
      check_clause();
      if (!is_tautology(Clause{st[step.clause]})) {
        throw Error("dropped clause is not a tautology");
      }
      st.erase(st.begin() + static_cast<std::ptrdiff_t>(step.clause));
      break;
    }
    case TraceStep::Action::SortLiterals:
      check_clause();
      std::sort(st[step.clause].begin(), st[step.clause].end());
      break;
    case TraceStep::Action::DropDuplicateClause: {
      check_clause();
      auto end = st.begin() + static_cast<std::ptrdiff_t>(step.clause);
      if (std::find(st.begin(), end, st[step.clause]) == end) {
        throw Error("dropped clause has no earlier duplicate");
      }
      st.erase(end);
      break;
    }
  }
}

class Simplifier {
 public:
  explicit Simplifier(const ClauseList& input) {
    for (const auto& c : input) {
      st_.push_back(c.literals);
    }
  }

  Simplified run() {
    for (std::size_t i = 0; i < st_.size(); ++i) {
      for (std::size_t j = 0; j < st_[i].size(); ++j) {
        TermPath path;
        normalize_at(i, j, path);
      }
    }

    for (std::size_t i = 0; i < st_.size();) {
      if (!std::is_sorted(st_[i].begin(), st_[i].end())) {
        record({TraceStep::Action::SortLiterals, i, 0, {}, {}});
      }
      for (std::size_t j = 1; j < st_[i].size();) {
        if (st_[i][j] == st_[i][j - 1]) {
          record({TraceStep::Action::DropLiteral, i, j, {}, {}});
        } else {
          ++j;
        }
      }
      if (is_tautology(Clause{st_[i]})) {
        record({TraceStep::Action::DropClause, i, 0, {}, {}});
      } else {
        ++i;
      }
    }

    for (std::size_t i = 0; i < st_.size();) {
      auto end = st_.begin() + static_cast<std::ptrdiff_t>(i);
      if (std::find(st_.begin(), end, st_[i]) != end) {
        record({TraceStep::Action::DropDuplicateClause, i, 0, {}, {}});
      } else {
        ++i;
      }
    }

    Simplified out;
    for (auto& lits : st_) {
      out.clauses.push_back(Clause{std::move(lits)});
    }
    out.trace = std::move(trace_);
    return out;
  }

 private:
  void record(TraceStep step) {
    apply_step(st_, step);
    trace_.steps.push_back(std::move(step));
  }

  void normalize_at(std::size_t clause, std::size_t literal, TermPath& path) {
    normalize_children(clause, literal, path);
    for (;;) {
      Term sub = subterm_at(st_[clause][literal], path);
      const RewriteRule* fired = nullptr;
      for (const auto& rule : theory_rules()) {
        if (rule.top_level_only && !path.empty()) {
          continue;
        }
        if (match_term(rule.pattern, sub, {})) {
          fired = &rule;
          break;
        }
      }
      if (fired == nullptr) {
        return;
      }
      record({TraceStep::Action::Rewrite, clause, literal, path, fired->id});
      normalize_children(clause, literal, path);
    }
  }

  void normalize_children(std::size_t clause, std::size_t literal, TermPath& path) {
    std::size_t n = subterm_at(st_[clause][literal], path).is_app()
                        ? subterm_at(st_[clause][literal], path).args().size()
                        : 0;
    for (std::size_t k = 0; k < n; ++k) {
      path.push_back(k);
      normalize_at(clause, literal, path);
      path.pop_back();
    }
  }

  State st_;
  RewriteTrace trace_;
};

}  // namespace

Simplified simplify_clause_list(const ClauseList& clauses) { return Simplifier(clauses).run(); }

ClauseList replay_trace(const ClauseList& original, const RewriteTrace& trace) {
  State st;
  for (const auto& c : original) {
    st.push_back(c.literals);
  }
  for (const auto& step : trace.steps) {
    apply_step(st, step);
  }
  ClauseList out;
  for (auto& lits : st) {
    out.push_back(Clause{std::move(lits)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Canonicalization

std::string slot_name(std::size_t index) { return "v" + std::to_string(index); }

namespace {

Term rename_impl(const Term& t, std::span<const std::string> formals, std::string_view self,
                 std::optional<std::size_t>& self_arity) {
  switch (t.kind()) {
    case Term::Kind::Const:
      return t;
    case Term::Kind::Var: {
      auto it = std::find(formals.begin(), formals.end(), t.name());
      if (it == formals.end()) {
        throw Error("variable '" + t.name() + "' is not a formal");
      }
      return Term::var(slot_name(static_cast<std::size_t>(it - formals.begin()) + 1));
    }
    case Term::Kind::App: {
      std::vector<Term> args;
      for (const auto& a : t.args()) {
        args.push_back(rename_impl(a, formals, self, self_arity));
      }
      if (t.name() != self) {
        return Term::app(t.name(), std::move(args));
      }
      if (self_arity && *self_arity != args.size()) {
        throw Error("inconsistent arity for '" + std::string(self) + "'");
      }
      self_arity = args.size();
      std::string stub = stub_name(args.size());
      return Term::app(std::move(stub), std::move(args));
    }
  }
  return t;
}

}  // namespace

Term rename_to_slots(const Term& t, std::span<const std::string> formals, std::string_view self) {
  std::optional<std::size_t> arity;
  return rename_impl(t, formals, self, arity);
}

CanonicalScheme canonicalize(const ClauseList& clauses, std::span<const std::string> formals,
                             std::string_view self) {
  CanonicalScheme scheme;
  scheme.slot_count = formals.size();
  std::optional<std::size_t> self_arity;
  for (const auto& c : clauses) {
    std::vector<Term> lits;
    for (const auto& l : c.literals) {
      lits.push_back(rename_impl(l, formals, self, self_arity));
    }
    scheme.clauses.push_back(Clause::canonical(std::move(lits)));
  }
  std::sort(scheme.clauses.begin(), scheme.clauses.end(),
            [](const Clause& a, const Clause& b) { return a.literals < b.literals; });
  scheme.clauses.erase(std::unique(scheme.clauses.begin(), scheme.clauses.end()),
                       scheme.clauses.end());
  return scheme;
}

// ---------------------------------------------------------------------------
// Subsumption

std::optional<SubsumptionWitness> clause_subsumes(const Clause& old, const Clause& target,
                                                  const Substitution& seed,
                                                  std::optional<std::string_view> stub_target) {
  const auto& pattern = old.literals;
  std::vector<std::size_t> order(pattern.size());
  std::iota(order.begin(), order.end(), 0);
  // Most constrained first.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (pattern[a].size() != pattern[b].size()) {
      return pattern[a].size() > pattern[b].size();
    }
    return pattern[a] < pattern[b];
  });

  MatchOptions options;
  options.var_to_var_only = true;
  if (stub_target) {
    options.stub_target = std::string(*stub_target);
  }

  std::vector<std::size_t> literal_map(pattern.size());
  std::function<std::optional<Substitution>(std::size_t, const Substitution&)> extend =
      [&](std::size_t depth, const Substitution& s) -> std::optional<Substitution> {
    if (depth == order.size()) {
      return s;
    }
    const Term& lit = pattern[order[depth]];
    for (std::size_t t = 0; t < target.literals.size(); ++t) {
      auto next = match_term(lit, target.literals[t], s, options);
      if (!next) {
        continue;
      }
      literal_map[order[depth]] = t;
      if (auto done = extend(depth + 1, *next)) {
        return done;
      }
    }
    return std::nullopt;
  };

  auto s = extend(0, seed);
  if (!s) {
    return std::nullopt;
  }
  return SubsumptionWitness{std::move(*s), std::move(literal_map)};
}

bool check_witness(const Clause& old, const Clause& target, const SubsumptionWitness& w) {
  if (w.literal_map.size() != old.literals.size()) {
    return false;
  }
  for (const auto& [slot, image] : w.substitution.vars) {
    if (!image.is_var()) {
      return false;
    }
  }
  try {
    for (std::size_t i = 0; i < old.literals.size(); ++i) {
      std::size_t j = w.literal_map[i];
      if (j >= target.literals.size() ||
          !(apply_subst(old.literals[i], w.substitution) == target.literals[j])) {
        return false;
      }
    }
  } catch (const Error&) {
    return false;
  }
  return true;
}

}  // namespace tdm

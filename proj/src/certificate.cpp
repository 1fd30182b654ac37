#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

#include "tdm/engine.hpp"
#include "tdm/sexp.hpp"

namespace tdm {

std::string definition_digest(const FunctionDef& def) { return sha256_hex(print_defun(def)); }

Certificate make_certificate(const Database& db, const FunctionDef& def, const SearchResult& r) {
  Certificate cert;
  cert.theory_version = db.theory_version;
  cert.database_digest = database_digest(db);
  cert.definition_digest = definition_digest(def);
  cert.function = def.name;
  cert.mode = r.mode;
  cert.includes = r.includes_needed;
  for (const auto& u : r.used_entries) {
    cert.entry_refs.push_back(u.id);
  }
  cert.new_simplify = r.simplified.trace;
  cert.new_simplified = r.simplified.clauses;
  if (r.mode == ProofMode::Subsumption) {
    cert.by_step = r.witnesses;
    for (const auto& w : r.witnesses) {
      for (const auto& [stub, f] : w.witness.substitution.stubs) {
        cert.stub_instantiation.emplace(stub, f);
      }
    }
  } else {
    for (std::size_t i = 0; i < r.simplified.clauses.size(); ++i) {
      cert.structural.push_back(i);
    }
  }
  cert.measure = r.measure.term;
  if (cert.stub_instantiation.empty()) {
    // The final functional instance always names the function's own stub.
    cert.stub_instantiation.emplace(stub_name(def.formals.size()),
                                    FunctionRef{def.name, def.formals.size()});
  }
  return cert;
}

// ---------------------------------------------------------------------------
// Event plan rendering

namespace {

std::string formula(const ClauseList& clauses) {
  auto disjunction = [](const Clause& c) {
    if (c.literals.size() == 1) {
      return print_term(c.literals[0]);
    }
    std::string s = "(or";
    for (const auto& l : c.literals) {
      s += " " + print_term(l);
    }
    return s + ")";
  };
  if (clauses.empty()) {
    return "t";
  }
  if (clauses.size() == 1) {
    return disjunction(clauses[0]);
  }
  std::string s = "(and";
  for (const auto& c : clauses) {
    s += " " + disjunction(c);
  }
  return s + ")";
}

ClauseList stubbed(const ClauseList& clauses, const FunctionDef& def) {
  ClauseList out;
  for (const auto& c : clauses) {
    std::vector<Term> lits;
    for (const auto& l : c.literals) {
      lits.push_back(l);
      if (mentions_function(l, def.name)) {
        // Only the function symbol changes; variables keep their names.
        std::function<Term(const Term&)> swap = [&](const Term& t) -> Term {
          if (!t.is_app()) {
            return t;
          }
          std::vector<Term> args;
          for (const auto& a : t.args()) {
            args.push_back(swap(a));
          }
          return Term::app(t.name() == def.name ? stub_name(args.size()) : t.name(),
                           std::move(args));
        };
        lits.back() = swap(l);
      }
    }
    out.push_back(Clause{std::move(lits)});
  }
  return out;
}

}  // namespace

EventPlan render_event_plan(const Database& db, const FunctionDef& def, const Certificate& cert) {
  std::ostringstream os;
  const std::string stub = stub_name(def.formals.size());
  os << "(encapsulate ()\n";
  for (const auto& book : cert.includes) {
    os << "  (local (include-book \"" << book << "\" :dir :system))\n";
  }
  for (auto id : cert.entry_refs) {
    const SchemeEntry* e = db.find(id);
    if (e == nullptr) {
      continue;
    }
    os << "  ;; scheme " << id << " from the termination theorem of " << e->representative
       << "\n";
    os << "  (local (defthm termination-scheme-" << id << "\n"
       << "           " << formula(e->scheme.clauses) << "\n"
       << "           :hints ((\"Goal\" :use (:termination-theorem " << e->representative
       << ")))))\n";
  }
  os << "  (local (defthm new-termination-theorem-simplified\n"
     << "           " << formula(stubbed(cert.new_simplified, def)) << "\n";
  if (cert.mode == ProofMode::Subsumption) {
    os << "           :hints ((\"Goal\" :by";
    for (const auto& w : cert.by_step) {
      os << " (:clause " << w.clause << " termination-scheme-" << w.entry << ")";
    }
    os << "))))\n";
  } else {
    os << "           ;; every clause discharged by the structural decrease rules\n"
       << "           ))\n";
  }
  ClauseList raw = measure_conjecture(def, Measure{cert.measure});
  os << "  (local (defthm new-termination-theorem\n"
     << "           " << formula(stubbed(raw, def)) << "\n"
     << "           :hints ((\"Goal\" :use new-termination-theorem-simplified))))\n";
  os << "  (defun " << def.name << " (";
  for (std::size_t i = 0; i < def.formals.size(); ++i) {
    os << (i ? " " : "") << def.formals[i];
  }
  os << ")\n"
     << "    (declare (xargs :measure " << print_term(cert.measure) << "\n"
     << "                    :hints ((\"Goal\" :by (:functional-instance "
        "new-termination-theorem ("
     << stub << " " << def.name << "))))))\n"
     << "    " << print_term(def.body) << "))\n";
  return EventPlan{os.str()};
}

Plan emit_plan(const Database& db, const FunctionDef& def, const SearchResult& r) {
  Certificate cert = make_certificate(db, def, r);
  EventPlan events = render_event_plan(db, def, cert);
  return Plan{std::move(cert), std::move(events)};
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

std::string action_name(TraceStep::Action a) {
  switch (a) {
    case TraceStep::Action::Rewrite: return "rewrite";
    case TraceStep::Action::DropLiteral: return "drop-literal";
    case TraceStep::Action::DropClause: return "drop-clause";
    case TraceStep::Action::SortLiterals: return "sort";
    case TraceStep::Action::DropDuplicateClause: return "drop-duplicate-clause";
  }
  return "?";
}

std::string path_text(const TermPath& p) {
  if (p.empty()) {
    return "-";
  }
  std::string s;
  for (std::size_t i = 0; i < p.size(); ++i) {
    s += (i ? "." : "") + std::to_string(p[i]);
  }
  return s;
}

}  // namespace

std::string write_certificate(const Certificate& cert) {
  std::ostringstream os;
  os << "tdm-certificate " << kCertificateFormat << "\n";
  os << "theory " << cert.theory_version << "\n";
  os << "database " << cert.database_digest << "\n";
  os << "definition " << cert.definition_digest << "\n";
  os << "function " << cert.function << "\n";
  os << "mode " << (cert.mode == ProofMode::Subsumption ? "subsumption" : "fallback") << "\n";
  for (const auto& b : cert.includes) {
    os << "step include " << b << "\n";
  }
  for (auto id : cert.entry_refs) {
    os << "step entry " << id << "\n";
  }
  os << "step new-simplify\n";
  for (const auto& s : cert.new_simplify.steps) {
    os << action_name(s.action) << " " << s.clause;
    switch (s.action) {
      case TraceStep::Action::Rewrite:
        os << " " << s.literal << " " << path_text(s.path) << " " << s.rule;
        break;
      case TraceStep::Action::DropLiteral:
        os << " " << s.literal;
        break;
      default:
        break;
    }
    os << "\n";
  }
  for (const auto& c : cert.new_simplified) {
    os << "result";
    for (const auto& l : c.literals) {
      os << " " << print_term(l);
    }
    os << "\n";
  }
  os << "end\n";
  if (cert.mode == ProofMode::Subsumption) {
    os << "step by\n";
    for (const auto& w : cert.by_step) {
      os << "witness " << w.clause << " " << w.entry << " " << w.entry_clause << "\n";
      os << "map";
      for (auto i : w.witness.literal_map) {
        os << " " << i;
      }
      os << "\n";
      for (const auto& [v, t] : w.witness.substitution.vars) {
        os << "bind " << v << " " << print_term(t) << "\n";
      }
      for (const auto& [s, f] : w.witness.substitution.stubs) {
        os << "stub " << s << " " << f.name << "\n";
      }
    }
    os << "end\n";
  } else {
    os << "step structural\n";
    for (auto i : cert.structural) {
      os << "proven " << i << "\n";
    }
    os << "end\n";
  }
  if (cert.use_step) {
    os << "step use\n";
  }
  os << "step final-defun\n";
  os << "measure " << print_term(cert.measure) << "\n";
  for (const auto& [s, f] : cert.stub_instantiation) {
    os << "instantiate " << s << " " << f.name << "\n";
  }
  os << "end\n";
  return os.str();
}

namespace {

class CertificateReader {
 public:
  explicit CertificateReader(std::string_view text) {
    std::istringstream in{std::string(text)};
    for (std::string line; std::getline(in, line);) {
      if (!line.empty() && line.back() == '\r') {
        line.pop_back();
      }
      lines_.push_back(std::move(line));
    }
  }

  Certificate read() {
    Certificate cert;
    if (header("tdm-certificate") != std::to_string(kCertificateFormat)) {
      fail("unsupported certificate format");
    }
    cert.theory_version = header("theory");
    cert.database_digest = header("database");
    cert.definition_digest = header("definition");
    cert.function = header("function");
    std::string mode = header("mode");
    if (mode == "subsumption") {
      cert.mode = ProofMode::Subsumption;
    } else if (mode == "fallback") {
      cert.mode = ProofMode::Fallback;
    } else {
      fail("unknown mode '" + mode + "'");
    }

    bool saw_final = false;
    cert.use_step = false;
    while (pos_ < lines_.size()) {
      auto words = split(lines_[pos_]);
      if (words.empty()) {
        ++pos_;
        continue;
      }
      if (words[0] != "step" || words.size() < 2) {
        fail("expected a step");
      }
      const std::string& kind = words[1];
      if (kind == "include") {
        cert.includes.push_back(rest(lines_[pos_], 2));
        ++pos_;
      } else if (kind == "entry") {
        cert.entry_refs.push_back(number(words, 2));
        ++pos_;
      } else if (kind == "new-simplify") {
        ++pos_;
        read_new_simplify(cert);
      } else if (kind == "by") {
        ++pos_;
        read_by(cert);
      } else if (kind == "structural") {
        ++pos_;
        while (!at_end_marker()) {
          auto w = split(lines_[pos_]);
          if (w.empty() || w[0] != "proven") {
            fail("expected 'proven <clause>'");
          }
          cert.structural.push_back(number(w, 1));
          ++pos_;
        }
        ++pos_;
      } else if (kind == "use") {
        cert.use_step = true;
        ++pos_;
      } else if (kind == "final-defun") {
        ++pos_;
        read_final(cert);
        saw_final = true;
      } else {
        fail("unknown step '" + kind + "'");
      }
    }
    if (!saw_final) {
      throw ParseError("certificate has no final-defun step", lines_.size(), 1);
    }
    return cert;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(message, pos_ + 1, 1);
  }

  static std::vector<std::string> split(const std::string& line) {
    std::istringstream in(line);
    std::vector<std::string> words;
    for (std::string w; in >> w;) {
      words.push_back(w);
    }
    return words;
  }

  static std::string rest(const std::string& line, std::size_t skip_words) {
    std::size_t p = 0;
    for (std::size_t i = 0; i < skip_words; ++i) {
      p = line.find_first_not_of(' ', p);
      p = line.find(' ', p);
      if (p == std::string::npos) {
        return {};
      }
    }
    return line.substr(line.find_first_not_of(' ', p));
  }

  std::uint64_t number(const std::vector<std::string>& words, std::size_t i) const {
    if (i >= words.size() || words[i].empty() ||
        !std::all_of(words[i].begin(), words[i].end(), ::isdigit)) {
      fail("expected a number");
    }
    return std::stoull(words[i]);
  }

  std::string header(std::string_view key) {
    if (pos_ >= lines_.size()) {
      fail("unexpected end of certificate");
    }
    auto words = split(lines_[pos_]);
    if (words.size() != 2 || words[0] != key) {
      fail("expected '" + std::string(key) + " <value>'");
    }
    ++pos_;
    return words[1];
  }

  bool at_end_marker() const {
    if (pos_ >= lines_.size()) {
      throw ParseError("missing 'end'", lines_.size(), 1);
    }
    return lines_[pos_] == "end";
  }

  std::vector<Term> terms(const std::string& text) const {
    std::vector<Term> out;
    try {
      for (const auto& s : read_sexps(text)) {
        out.push_back(term_from_sexp(s));
      }
    } catch (const ParseError& e) {
      fail(e.what());
    }
    return out;
  }

  void read_new_simplify(Certificate& cert) {
    while (!at_end_marker()) {
      const std::string& line = lines_[pos_];
      auto w = split(line);
      if (w.empty()) {
        fail("empty trace line");
      }
      if (w[0] == "result") {
        cert.new_simplified.push_back(Clause{terms(rest(line, 1))});
        ++pos_;
        continue;
      }
      TraceStep s;
      if (w[0] == "rewrite") {
        if (w.size() != 5) {
          fail("expected 'rewrite <clause> <literal> <path> <rule>'");
        }
        s.action = TraceStep::Action::Rewrite;
        s.literal = number(w, 2);
        if (w[3] != "-") {
          std::istringstream p(w[3]);
          for (std::string part; std::getline(p, part, '.');) {
            s.path.push_back(number({part}, 0));
          }
        }
        s.rule = w[4];
      } else if (w[0] == "drop-literal") {
        s.action = TraceStep::Action::DropLiteral;
        s.literal = number(w, 2);
      } else if (w[0] == "drop-clause") {
        s.action = TraceStep::Action::DropClause;
      } else if (w[0] == "sort") {
        s.action = TraceStep::Action::SortLiterals;
      } else if (w[0] == "drop-duplicate-clause") {
        s.action = TraceStep::Action::DropDuplicateClause;
      } else {
        fail("unknown trace action '" + w[0] + "'");
      }
      s.clause = number(w, 1);
      cert.new_simplify.steps.push_back(std::move(s));
      ++pos_;
    }
    ++pos_;
  }

  void read_by(Certificate& cert) {
    while (!at_end_marker()) {
      auto w = split(lines_[pos_]);
      if (w.size() != 4 || w[0] != "witness") {
        fail("expected 'witness <clause> <entry> <entry-clause>'");
      }
      ClauseWitness cw;
      cw.clause = number(w, 1);
      cw.entry = number(w, 2);
      cw.entry_clause = number(w, 3);
      ++pos_;
      auto m = pos_ < lines_.size() ? split(lines_[pos_]) : std::vector<std::string>{};
      if (m.empty() || m[0] != "map") {
        fail("expected 'map'");
      }
      for (std::size_t i = 1; i < m.size(); ++i) {
        cw.witness.literal_map.push_back(number(m, i));
      }
      ++pos_;
      while (pos_ < lines_.size()) {
        auto b = split(lines_[pos_]);
        if (b.size() >= 3 && b[0] == "bind") {
          auto t = terms(rest(lines_[pos_], 2));
          if (t.size() != 1) {
            fail("expected one term");
          }
          cw.witness.substitution.vars.insert_or_assign(b[1], t[0]);
        } else if (b.size() == 3 && b[0] == "stub") {
          auto arity = stub_arity(b[1]);
          if (!arity) {
            fail("'" + b[1] + "' is not a stub");
          }
          cw.witness.substitution.stubs.insert_or_assign(b[1], FunctionRef{b[2], *arity});
        } else {
          break;
        }
        ++pos_;
      }
      cert.by_step.push_back(std::move(cw));
    }
    ++pos_;
  }

  void read_final(Certificate& cert) {
    bool saw_measure = false;
    while (!at_end_marker()) {
      const std::string& line = lines_[pos_];
      auto w = split(line);
      if (!w.empty() && w[0] == "measure") {
        auto t = terms(rest(line, 1));
        if (t.size() != 1) {
          fail("expected one measure term");
        }
        cert.measure = t[0];
        saw_measure = true;
      } else if (w.size() == 3 && w[0] == "instantiate") {
        auto arity = stub_arity(w[1]);
        if (!arity) {
          fail("'" + w[1] + "' is not a stub");
        }
        cert.stub_instantiation.insert_or_assign(w[1], FunctionRef{w[2], *arity});
      } else {
        fail("unexpected line in final-defun");
      }
      ++pos_;
    }
    ++pos_;
    if (!saw_measure) {
      fail("final-defun has no measure");
    }
  }

  std::vector<std::string> lines_;
  std::size_t pos_ = 0;
};

}  // namespace

Certificate read_certificate(std::string_view text) { return CertificateReader(text).read(); }

// ---------------------------------------------------------------------------
// Verification

namespace {

Verdict reject(std::string step, std::string reason) {
  return Verdict{false, std::move(step), std::move(reason)};
}

}  // namespace

Verdict verify_certificate(const Database& db, const FunctionDef& def, const Certificate& cert) {
  // Header.
  if (cert.theory_version != kTheoryVersion || db.theory_version != kTheoryVersion) {
    return reject("header", "theory version mismatch");
  }
  if (cert.database_digest != database_digest(db)) {
    return reject("header", "database digest mismatch");
  }
  if (cert.definition_digest != definition_digest(def) || cert.function != def.name) {
    return reject("header", "definition digest mismatch");
  }

  // Entry references, then includes against them.
  std::set<std::uint64_t> refs;
  for (auto id : cert.entry_refs) {
    if (db.find(id) == nullptr) {
      return reject("entry", "entry " + std::to_string(id) + " not in database");
    }
    if (!refs.insert(id).second) {
      return reject("entry", "entry " + std::to_string(id) + " referenced twice");
    }
  }
  std::set<std::string> seen_books;
  for (const auto& book : cert.includes) {
    bool justified = std::any_of(refs.begin(), refs.end(), [&](std::uint64_t id) {
      const SchemeEntry* e = db.find(id);
      return e->provenance.origin == Origin::Book && e->provenance.book == book;
    });
    if (!justified || !seen_books.insert(book).second) {
      return reject("include", "include " + book + " is not required by any referenced entry");
    }
  }
  if (cert.mode == ProofMode::Fallback && !(cert.includes.empty() && cert.entry_refs.empty())) {
    return reject("entry", "structural certificate references database entries");
  }

  // new => new_s: replay the trace on the regenerated obligation.
  ClauseList raw = measure_conjecture(def, Measure{cert.measure});
  ClauseList replayed;
  try {
    replayed = replay_trace(raw, cert.new_simplify);
  } catch (const Error& e) {
    return reject("new-simplify", std::string("trace replay failed: ") + e.what());
  }
  if (!(replayed == cert.new_simplified)) {
    return reject("new-simplify", "replayed trace does not produce the stated clauses");
  }
  if (!(simplify_clause_list(raw).clauses == cert.new_simplified)) {
    return reject("new-simplify", "stated clauses differ from simplification from scratch");
  }
  const ClauseList& target = cert.new_simplified;

  if (cert.mode == ProofMode::Subsumption) {
    std::vector<int> covered(target.size(), 0);
    for (const auto& w : cert.by_step) {
      const std::string at = "witness for clause " + std::to_string(w.clause) + ": ";
      if (w.clause >= target.size()) {
        return reject("by", at + "no such clause");
      }
      ++covered[w.clause];
      if (refs.count(w.entry) == 0) {
        return reject("by", at + "entry " + std::to_string(w.entry) + " not referenced");
      }
      const SchemeEntry& e = *db.find(w.entry);
      if (w.entry_clause >= e.scheme.clauses.size()) {
        return reject("by", at + "entry clause index out of range");
      }
      for (const auto& [stub, f] : w.witness.substitution.stubs) {
        if (f.name != def.name || f.arity != def.formals.size() ||
            stub_arity(stub) != std::optional<std::size_t>(f.arity)) {
          return reject("by", at + "stub " + stub + " must map to " + def.name);
        }
      }
      for (const auto& [slot, image] : w.witness.substitution.vars) {
        if (!image.is_var() || std::find(def.formals.begin(), def.formals.end(), image.name()) ==
                                   def.formals.end()) {
          return reject("by", at + "slot " + slot + " must map to a formal");
        }
      }
      if (!check_witness(e.scheme.clauses[w.entry_clause], target[w.clause], w.witness)) {
        return reject("by", at + "literal map does not match");
      }
      for (const auto& slot : free_variables(e.justification.measure)) {
        if (w.witness.substitution.vars.count(slot) == 0) {
          return reject("by", at + "measure slot " + slot + " unbound");
        }
      }
      if (!(apply_subst(e.justification.measure, w.witness.substitution) == cert.measure) ||
          e.justification.relation != kNatLess) {
        return reject("by", at + "entry measure does not instantiate to the certificate measure");
      }
    }
    for (std::size_t k = 0; k < covered.size(); ++k) {
      if (covered[k] != 1) {
        return reject("by", "clause " + std::to_string(k) + " covered " +
                                std::to_string(covered[k]) + " times");
      }
    }
  } else {
    std::vector<int> covered(target.size(), 0);
    for (auto k : cert.structural) {
      if (k >= target.size()) {
        return reject("structural", "no clause " + std::to_string(k));
      }
      ++covered[k];
      try {
        if (structural_decrease_check(target[k]) != StructuralVerdict::Proven) {
          return reject("structural", "clause " + std::to_string(k) + " not proven");
        }
      } catch (const Error& e) {
        return reject("structural", e.what());
      }
    }
    if (std::any_of(covered.begin(), covered.end(), [](int c) { return c != 1; })) {
      return reject("structural", "clauses not covered exactly once");
    }
  }

  if (!cert.use_step) {
    return reject("use", "missing use step");
  }

  for (const auto& v : free_variables(cert.measure)) {
    if (std::find(def.formals.begin(), def.formals.end(), v) == def.formals.end()) {
      return reject("final-defun", "measure mentions non-formal " + v);
    }
  }
  if (mentions_function(cert.measure, def.name)) {
    return reject("final-defun", "measure calls " + def.name);
  }
  std::map<std::string, FunctionRef> expected;
  for (const auto& w : cert.by_step) {
    for (const auto& [stub, f] : w.witness.substitution.stubs) {
      expected.emplace(stub, f);
    }
  }
  if (expected.empty()) {
    expected.emplace(stub_name(def.formals.size()), FunctionRef{def.name, def.formals.size()});
  }
  if (cert.stub_instantiation != expected) {
    return reject("final-defun", "stub instantiation does not match the witnesses");
  }
  return Verdict{true, {}, {}};
}

}  // namespace tdm

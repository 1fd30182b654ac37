#include "tdm/database.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "tdm/sexp.hpp"

namespace tdm {

std::size_t Database::entry_count() const {
  std::size_t n = 0;
  for (const auto& [j, entries] : groups) {
    n += entries.size();
  }
  return n;
}

std::size_t Database::function_count() const {
  std::size_t n = 0;
  for (const auto& [j, entries] : groups) {
    for (const auto& e : entries) {
      n += e.provenance.contributors.size();
    }
  }
  return n;
}

const SchemeEntry* Database::find(std::uint64_t id) const {
  for (const auto& [j, entries] : groups) {
    for (const auto& e : entries) {
      if (e.id == id) {
        return &e;
      }
    }
  }
  return nullptr;
}

const std::vector<SchemeEntry>* Database::group(const Justification& j) const {
  auto it = groups.find(j);
  return it == groups.end() ? nullptr : &it->second;
}

// ---------------------------------------------------------------------------
// Structural checker

namespace {

/// A nonempty car/cdr chain ending in `var`.
bool is_car_cdr_chain(const Term& t, std::string_view var) {
  if (!t.is_app("car") && !t.is_app("cdr")) {
    return false;
  }
  const Term* cur = &t.arg(0);
  while (cur->is_app("car") || cur->is_app("cdr")) {
    cur = &cur->arg(0);
  }
  return cur->is_var() && cur->name() == var;
}

bool has_literal(const Clause& c, const Term& lit) {
  return std::find(c.literals.begin(), c.literals.end(), lit) != c.literals.end();
}

}  // namespace

StructuralVerdict structural_decrease_check(const Clause& c) {
  bool found = false;
  for (const auto& lit : c.literals) {
    if (!lit.is_app("<") || !lit.arg(1).is_app("acl2-count") || !lit.arg(1).arg(0).is_var()) {
      continue;
    }
    found = true;
    const Term& v = lit.arg(1).arg(0);
    const Term& smaller = lit.arg(0);
    if (!smaller.is_app("acl2-count")) {
      continue;
    }
    const Term& d = smaller.arg(0);
    // The other literals are the negated hypotheses: (consp v) is assumed
    // when (not (consp v)) is a literal.
    if (is_car_cdr_chain(d, v.name()) &&
        has_literal(c, Term::app("not", {Term::app("consp", {v})}))) {
      return StructuralVerdict::Proven;
    }
    if (d.is_app("-") && d.arg(0) == v && d.arg(1).is_const() &&
        d.arg(1).value() == Value::natural(1) && has_literal(c, Term::app("zp", {v}))) {
      return StructuralVerdict::Proven;
    }
  }
  if (!found) {
    throw Error("malformed decrease literal in clause " + print_clause(c));
  }
  return StructuralVerdict::Unknown;
}

// ---------------------------------------------------------------------------
// Insertion

namespace {

void collect_stubs(const Term& t, std::set<std::string>& out) {
  if (!t.is_app()) {
    return;
  }
  if (stub_arity(t.name())) {
    out.insert(t.name());
  }
  for (const auto& a : t.args()) {
    collect_stubs(a, out);
  }
}

void add_contributors(std::vector<std::string>& to, const std::vector<std::string>& from) {
  for (const auto& name : from) {
    if (std::find(to.begin(), to.end(), name) == to.end()) {
      to.push_back(name);
    }
  }
}

}  // namespace

bool scheme_covers(const CanonicalScheme& covering, const CanonicalScheme& covered) {
  Substitution identity;
  std::set<std::string> stubs;
  for (const auto& c : covering.clauses) {
    for (const auto& l : c.literals) {
      for (const auto& v : free_variables(l)) {
        identity.vars.emplace(v, Term::var(v));
      }
      collect_stubs(l, stubs);
    }
  }
  for (const auto& s : stubs) {
    identity.stubs.emplace(s, FunctionRef{s, *stub_arity(s)});
  }
  return std::all_of(covered.clauses.begin(), covered.clauses.end(), [&](const Clause& target) {
    return std::any_of(covering.clauses.begin(), covering.clauses.end(), [&](const Clause& c) {
      return clause_subsumes(c, target, identity, std::nullopt).has_value();
    });
  });
}

InsertAction insert_entry(Database& db, SchemeEntry entry) {
  if (db.theory_version != kTheoryVersion) {
    throw Error("database theory " + db.theory_version + " does not match " +
                std::string(kTheoryVersion));
  }
  add_contributors(entry.provenance.contributors, {entry.representative});
  auto& group = db.groups[entry.justification];

  for (auto& existing : group) {
    if (scheme_covers(existing.scheme, entry.scheme)) {
      add_contributors(existing.provenance.contributors, entry.provenance.contributors);
      return InsertAction{InsertAction::Kind::Skipped, existing.id, {}};
    }
  }

  InsertAction action;
  std::vector<SchemeEntry> kept;
  for (auto& existing : group) {
    if (scheme_covers(entry.scheme, existing.scheme)) {
      action.replaced.push_back(existing.id);
      add_contributors(entry.provenance.contributors, existing.provenance.contributors);
    } else {
      kept.push_back(std::move(existing));
    }
  }
  entry.id = db.next_id++;
  action.id = entry.id;
  action.kind = action.replaced.empty() ? InsertAction::Kind::Added : InsertAction::Kind::Replaced;
  kept.push_back(std::move(entry));
  group = std::move(kept);
  return action;
}

// ---------------------------------------------------------------------------
// Mining

std::vector<CorpusItem> parse_corpus(std::string_view text) {
  std::vector<CorpusItem> items;
  std::set<std::string> seen;
  for (const auto& form : read_sexps(text)) {
    CorpusItem item{defun_from_sexp(form), Origin::Session, {}};
    for (const auto& comment : form.leading_comments) {
      constexpr std::string_view tag = "book:";
      if (comment.rfind(tag, 0) == 0) {
        std::string path = comment.substr(tag.size());
        path.erase(0, path.find_first_not_of(" \t"));
        if (path.empty()) {
          throw_at(form, "empty book path");
        }
        item.origin = Origin::Book;
        item.book = path;
      }
    }
    if (!seen.insert(item.def.name).second) {
      throw_at(form, "duplicate function name '" + item.def.name + "'");
    }
    items.push_back(std::move(item));
  }
  return items;
}

std::vector<Term> default_measures(const FunctionDef& def) {
  std::vector<Term> out;
  for (const auto& f : def.formals) {
    out.push_back(Term::app("acl2-count", {Term::var(f)}));
  }
  return out;
}

std::optional<Simplified> validated_obligation(const FunctionDef& def, const Term& measure) {
  Simplified s = simplify_clause_list(measure_conjecture(def, Measure{measure}));
  for (const auto& c : s.clauses) {
    try {
      if (structural_decrease_check(c) != StructuralVerdict::Proven) {
        return std::nullopt;
      }
    } catch (const Error&) {
      return std::nullopt;
    }
  }
  return s;
}

bool MineReport::all_accepted() const {
  return std::all_of(lines.begin(), lines.end(), [](const auto& l) { return l.accepted; });
}

std::string MineReport::format() const {
  std::ostringstream os;
  for (const auto& l : lines) {
    os << (l.accepted ? "accepted " : "rejected ") << l.function << ": " << l.detail << "\n";
  }
  return os.str();
}

namespace {

std::string format_env(const Env& env) {
  std::string out;
  for (const auto& [name, value] : env) {
    if (!out.empty()) {
      out += ", ";
    }
    out += name + "=" + print_value(value);
  }
  return out;
}

std::string rejection_reason(const FunctionDef& def, const Term& measure) {
  Simplified s = simplify_clause_list(measure_conjecture(def, Measure{measure}));
  ClauseList unproven;
  for (const auto& c : s.clauses) {
    bool proven = false;
    try {
      proven = structural_decrease_check(c) == StructuralVerdict::Proven;
    } catch (const Error&) {
    }
    if (!proven) {
      unproven.push_back(c);
    }
  }
  FalsifyResult f = falsify(unproven);
  if (f.counterexample) {
    return "counterexample to " + print_clause(unproven[f.counterexample->clause_index]) +
           " under measure " + print_term(measure) + " with " +
           format_env(f.counterexample->env);
  }
  return "not machine-checked under measure " + print_term(measure);
}

}  // namespace

MineReport mine_into(Database& db, const std::vector<CorpusItem>& corpus) {
  MineReport report;
  for (const auto& item : corpus) {
    const FunctionDef& def = item.def;
    if (!def.is_recursive()) {
      report.lines.push_back({def.name, false, "not recursive"});
      continue;
    }
    std::vector<Term> candidates = def.measure ? std::vector<Term>{*def.measure}
                                               : default_measures(def);
    if (candidates.empty()) {
      report.lines.push_back({def.name, false, "no formals to measure"});
      continue;
    }
    std::optional<Simplified> obligation;
    const Term* measure = nullptr;
    for (const auto& m : candidates) {
      obligation = validated_obligation(def, m);
      if (obligation) {
        measure = &m;
        break;
      }
    }
    if (!obligation) {
      report.lines.push_back({def.name, false, rejection_reason(def, candidates.front())});
      continue;
    }

    SchemeEntry entry;
    entry.scheme = canonicalize(obligation->clauses, def.formals, def.name);
    entry.justification = Justification{rename_to_slots(*measure, def.formals, def.name)};
    entry.provenance = Provenance{item.origin, item.book, {def.name}};
    entry.representative = def.name;
    InsertAction action = insert_entry(db, std::move(entry));

    std::string detail = "measure " + print_term(*measure) + ", ";
    switch (action.kind) {
      case InsertAction::Kind::Added:
        detail += "added entry " + std::to_string(action.id);
        break;
      case InsertAction::Kind::Skipped:
        detail += "covered by entry " + std::to_string(action.id) + " (" +
                  db.find(action.id)->representative + ")";
        break;
      case InsertAction::Kind::Replaced: {
        detail += "added entry " + std::to_string(action.id) + ", replacing";
        for (auto id : action.replaced) {
          detail += " " + std::to_string(id);
        }
        break;
      }
    }
    report.lines.push_back({def.name, true, detail});
  }
  return report;
}

MineResult mine_corpus(const std::vector<CorpusItem>& corpus) {
  MineResult result;
  result.report = mine_into(result.db, corpus);
  return result;
}

// ---------------------------------------------------------------------------
// Persistence

std::string save_database(const Database& db) {
  std::ostringstream os;
  os << "format " << kDatabaseFormat << "\n";
  os << "theory " << db.theory_version << "\n";
  os << "entries " << db.entry_count() << "\n";
  os << "functions " << db.function_count() << "\n";
  for (const auto& [j, entries] : db.groups) {
    for (const auto& e : entries) {
      os << "entry " << e.id << "\n";
      os << "measure " << print_term(j.measure) << "\n";
      os << "slots " << e.scheme.slot_count << "\n";
      if (e.provenance.origin == Origin::Session) {
        os << "origin session\n";
      } else {
        os << "origin book " << e.provenance.book << "\n";
      }
      os << "contributors";
      for (const auto& c : e.provenance.contributors) {
        os << ' ' << c;
      }
      os << "\n";
      os << "representative " << e.representative << "\n";
      for (const auto& c : e.scheme.clauses) {
        os << "clause";
        for (const auto& l : c.literals) {
          os << ' ' << print_term(l);
        }
        os << "\n";
      }
    }
  }
  return os.str();
}

namespace {

class DatabaseReader {
 public:
  explicit DatabaseReader(std::string_view text) {
    std::size_t start = 0;
    while (start < text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string_view::npos) {
        end = text.size();
      }
      lines_.emplace_back(text.substr(start, end - start));
      start = end + 1;
    }
  }

  Database read() {
    Database db;
    expect_header("format", std::to_string(kDatabaseFormat), "unsupported database format");
    std::string theory = value_of("theory");
    if (theory != kTheoryVersion) {
      throw Error("database theory version " + theory + " does not match " +
                  std::string(kTheoryVersion));
    }
    db.theory_version = theory;
    std::uint64_t entries = number(value_of("entries"));
    std::uint64_t functions = number(value_of("functions"));

    std::set<std::uint64_t> ids;
    while (skip_blank()) {
      SchemeEntry e;
      e.id = number(value_of("entry"));
      if (!ids.insert(e.id).second) {
        fail("duplicate entry id " + std::to_string(e.id));
      }
      e.justification.measure = term(value_of("measure"), 8);
      e.scheme.slot_count = number(value_of("slots"));
      std::string origin = value_of("origin");
      if (origin == "session") {
        e.provenance.origin = Origin::Session;
      } else if (origin.rfind("book ", 0) == 0 && origin.size() > 5) {
        e.provenance.origin = Origin::Book;
        e.provenance.book = origin.substr(5);
      } else {
        fail("expected 'origin session' or 'origin book <path>'");
      }
      std::istringstream names(value_of("contributors", true));
      for (std::string n; names >> n;) {
        e.provenance.contributors.push_back(n);
      }
      e.representative = value_of("representative");
      while (pos_ < lines_.size() && keyword_is("clause")) {
        e.scheme.clauses.push_back(clause());
      }
      db.next_id = std::max(db.next_id, e.id + 1);
      auto& group = db.groups[e.justification];
      group.push_back(std::move(e));
    }
    for (auto& [j, group] : db.groups) {
      std::sort(group.begin(), group.end(),
                [](const SchemeEntry& a, const SchemeEntry& b) { return a.id < b.id; });
    }
    if (db.entry_count() != entries) {
      throw Error("header says " + std::to_string(entries) + " entries, file has " +
                  std::to_string(db.entry_count()));
    }
    if (db.function_count() != functions) {
      throw Error("header says " + std::to_string(functions) + " functions, file has " +
                  std::to_string(db.function_count()));
    }
    return db;
  }

 private:
  [[noreturn]] void fail(const std::string& message, std::size_t column = 1) const {
    throw ParseError(message, pos_ + 1, column);
  }

  bool skip_blank() {
    while (pos_ < lines_.size() && lines_[pos_].find_first_not_of(" \t\r") == std::string::npos) {
      ++pos_;
    }
    return pos_ < lines_.size();
  }

  bool keyword_is(std::string_view key) const {
    const std::string& line = lines_[pos_];
    return line.rfind(key, 0) == 0 && (line.size() == key.size() || line[key.size()] == ' ');
  }

  std::string value_of(std::string_view key, bool allow_empty = false) {
    if (!skip_blank()) {
      ++pos_;
      fail("unexpected end of file, expected '" + std::string(key) + "'");
    }
    if (!keyword_is(key)) {
      fail("expected '" + std::string(key) + "'");
    }
    std::string value = lines_[pos_].size() > key.size() ? lines_[pos_].substr(key.size() + 1) : "";
    if (value.empty() && !allow_empty) {
      fail("missing value for '" + std::string(key) + "'");
    }
    ++pos_;
    return value;
  }

  void expect_header(std::string_view key, const std::string& expected, const std::string& message) {
    std::string v = value_of(key);
    if (v != expected) {
      throw Error(message + ": " + v);
    }
  }

  std::uint64_t number(const std::string& s) {
    if (s.empty() || !std::all_of(s.begin(), s.end(), ::isdigit)) {
      --pos_;
      fail("expected a natural number, found '" + s + "'");
    }
    return std::stoull(s);
  }

  Term term(const std::string& text, std::size_t offset) {
    try {
      return parse_term(text);
    } catch (const ParseError& e) {
      --pos_;
      fail(e.what(), offset + e.column());
    }
  }

  Clause clause() {
    std::string_view rest = std::string_view(lines_[pos_]).substr(6);
    std::vector<Term> lits;
    try {
      for (const auto& s : read_sexps(rest)) {
        lits.push_back(term_from_sexp(s));
      }
    } catch (const ParseError& e) {
      fail(e.what(), 7 + e.column());
    }
    Clause c = Clause::canonical(lits);
    if (c.literals != lits || lits.empty()) {
      fail("clause literals are not in canonical order");
    }
    ++pos_;
    return c;
  }

  std::vector<std::string> lines_;
  std::size_t pos_ = 0;
};

}  // namespace

Database load_database_text(std::string_view text) { return DatabaseReader(text).read(); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error("cannot write " + path);
  }
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) {
    throw Error("write failed for " + path);
  }
}

void save_database(const Database& db, const std::string& path) {
  write_file(path, save_database(db));
}

Database load_database(const std::string& path) { return load_database_text(read_file(path)); }

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 failed");
  }
  std::ostringstream os;
  os << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < len; ++i) {
    os << std::setw(2) << static_cast<int>(digest[i]);
  }
  return os.str();
}

std::string database_digest(const Database& db) { return sha256_hex(save_database(db)); }

std::string DatabaseStats::summary() const {
  return "entries=" + std::to_string(entries) + " functions=" + std::to_string(functions) +
         " groups=" + std::to_string(groups);
}

DatabaseStats stats(const Database& db) {
  DatabaseStats s;
  s.entries = db.entry_count();
  s.functions = db.function_count();
  s.groups = db.groups.size();
  for (const auto& [j, entries] : db.groups) {
    s.group_sizes.emplace_back(print_term(j.measure), entries.size());
  }
  return s;
}

}  // namespace tdm

#ifndef TDM_DATABASE_HPP
#define TDM_DATABASE_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tdm/normalize.hpp"
#include "tdm/obligations.hpp"
#include "tdm/term.hpp"

namespace tdm {

/// The grouping key for stored schemes: a measure over slot variables and
/// its well-founded relation.
struct Justification {
  Term measure = Term::constant(Value::nil());
  std::string relation{kNatLess};

  friend bool operator==(const Justification&, const Justification&) = default;
  friend std::strong_ordering operator<=>(const Justification& a, const Justification& b) {
    if (auto c = compare_terms(a.measure, b.measure); c != 0) {
      return c;
    }
    return a.relation.compare(b.relation) <=> 0;
  }
};

enum class Origin { Session, Book };

struct Provenance {
  Origin origin = Origin::Session;
  /// Nonempty iff origin is Book.
  std::string book;
  std::vector<std::string> contributors;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct SchemeEntry {
  std::uint64_t id = 0;
  CanonicalScheme scheme;
  Justification justification;
  Provenance provenance;
  /// The function whose termination theorem this entry stands for.
  std::string representative;

  friend bool operator==(const SchemeEntry&, const SchemeEntry&) = default;
};

/// Termination schemes grouped by justification. Within a group no entry
/// covers another; entries are ordered by id.
struct Database {
  std::string theory_version{kTheoryVersion};
  std::map<Justification, std::vector<SchemeEntry>> groups;
  std::uint64_t next_id = 1;

  std::size_t entry_count() const;
  /// Sum of contributor-list lengths.
  std::size_t function_count() const;
  const SchemeEntry* find(std::uint64_t id) const;
  const std::vector<SchemeEntry>* group(const Justification& j) const;

  friend bool operator==(const Database& a, const Database& b) {
    return a.theory_version == b.theory_version && a.groups == b.groups;
  }
};

enum class StructuralVerdict { Proven, Unknown };

/// Trusted validator for a single obligation clause. The clause must contain
/// a positive literal (< m' (acl2-count v)); it is proven when
///   m' = (acl2-count d), d a car/cdr chain over v, with (consp v) assumed, or
///   m' = (acl2-count (- v 1)) with (not (zp v)) assumed.
/// Throws Error when no decrease literal of that shape exists.
StructuralVerdict structural_decrease_check(const Clause& c);

/// `covering` covers `covered` when each clause of `covered` is subsumed by
/// some clause of `covering` under the identity slot and stub mapping.
bool scheme_covers(const CanonicalScheme& covering, const CanonicalScheme& covered);

struct InsertAction {
  enum class Kind { Added, Skipped, Replaced };

  Kind kind = Kind::Added;
  /// The id of the added entry, or of the covering entry when skipped.
  std::uint64_t id = 0;
  std::vector<std::uint64_t> replaced;
};

/// Dedup-aware insertion. The entry's id is assigned here. A skipped entry's
/// contributors are appended to the covering entry; replaced entries hand
/// their contributors to the new one.
InsertAction insert_entry(Database& db, SchemeEntry entry);

struct CorpusItem {
  FunctionDef def;
  Origin origin = Origin::Session;
  std::string book;
};

/// Defun forms; a `;; book: <path>` comment right above a form sets its
/// provenance. Throws on duplicate names.
std::vector<CorpusItem> parse_corpus(std::string_view text);

struct MineReportLine {
  std::string function;
  bool accepted = false;
  std::string detail;
};

struct MineReport {
  std::vector<MineReportLine> lines;

  bool all_accepted() const;
  std::string format() const;
};

/// Mines into an existing database. Each definition's obligation is
/// simplified and validated clause by clause with the structural checker;
/// anything it cannot prove is rejected.
MineReport mine_into(Database& db, const std::vector<CorpusItem>& corpus);

struct MineResult {
  Database db;
  MineReport report;
};
MineResult mine_corpus(const std::vector<CorpusItem>& corpus);

/// Measures tried when none is declared: (acl2-count f) per formal, in order.
std::vector<Term> default_measures(const FunctionDef& def);

/// The simplified obligation for def under m, if the structural checker
/// proves every clause.
std::optional<Simplified> validated_obligation(const FunctionDef& def, const Term& measure);

inline constexpr int kDatabaseFormat = 1;

std::string save_database(const Database& db);
void save_database(const Database& db, const std::string& path);
/// Parses save_database output. Throws ParseError (with the line) on
/// malformed input and Error on version mismatch.
Database load_database_text(std::string_view text);
Database load_database(const std::string& path);

/// SHA-256 of the canonical serialization, hex encoded.
std::string database_digest(const Database& db);
std::string sha256_hex(std::string_view bytes);

struct DatabaseStats {
  std::size_t entries = 0;
  std::size_t functions = 0;
  std::size_t groups = 0;
  std::vector<std::pair<std::string, std::size_t>> group_sizes;

  std::string summary() const;  // entries=N functions=M groups=G
};
DatabaseStats stats(const Database& db);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace tdm

#endif  // TDM_DATABASE_HPP

#ifndef TDM_SEXP_HPP
#define TDM_SEXP_HPP

#include <string>
#include <string_view>
#include <vector>

#include "tdm/term.hpp"

namespace tdm {

/// Raw reader output, before any interpretation as a term or a defun.
struct Sexp {
  enum class Kind { Atom, List };

  Kind kind = Kind::Atom;
  std::string atom;  // lowercased
  std::vector<Sexp> items;
  /// `(a b . c)`: the last item is the tail.
  bool dotted = false;
  std::size_t line = 1;
  std::size_t column = 1;
  /// `;` comment lines directly above a top-level form, without the
  /// leading semicolons and surrounding blanks.
  std::vector<std::string> leading_comments;

  bool is_atom() const { return kind == Kind::Atom; }
  bool is_list() const { return kind == Kind::List; }
  bool is_atom(std::string_view name) const { return is_atom() && atom == name; }
};

/// Reads every top-level form. `'x` becomes `(quote x)`.
std::vector<Sexp> read_sexps(std::string_view text);

/// Exactly one form, else ParseError.
Sexp read_single_sexp(std::string_view text);

/// Term interpretation of a form. Atoms outside head position are variables
/// (or t/nil/naturals); any non-builtin head is a user function.
Term term_from_sexp(const Sexp& s);

[[noreturn]] void throw_at(const Sexp& s, const std::string& message);

}  // namespace tdm

#endif  // TDM_SEXP_HPP

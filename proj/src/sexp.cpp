#include "tdm/sexp.hpp"

#include <algorithm>
#include <cctype>
#include <limits>

namespace tdm {

namespace {

bool is_symbol_char(char c) {
  if (std::isalnum(static_cast<unsigned char>(c))) {
    return true;
  }
  switch (c) {
    case '-': case '+': case '*': case '/': case '<': case '>': case '=':
    case '!': case '?': case '_': case '&': case '%': case '$': case ':':
    case '.': case '~': case '^': case '@':
      return true;
    default:
      return false;
  }
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return std::isdigit(static_cast<unsigned char>(c)) != 0;
  });
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) {
    return {};
  }
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  std::vector<Sexp> read_all() {
    std::vector<Sexp> forms;
    for (;;) {
      std::vector<std::string> comments = skip_space_collecting();
      if (at_end()) {
        break;
      }
      Sexp s = read();
      s.leading_comments = std::move(comments);
      forms.push_back(std::move(s));
    }
    return forms;
  }

 private:
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(message, line_, column_);
  }

  // Comments separated from the next form by a blank line are discarded.
  std::vector<std::string> skip_space_collecting() {
    std::vector<std::string> comments;
    std::size_t newlines_since_comment = 0;
    while (!at_end()) {
      char c = peek();
      if (c == ';') {
        std::size_t start = pos_;
        while (!at_end() && peek() != '\n') {
          advance();
        }
        std::string_view body = text_.substr(start, pos_ - start);
        body.remove_prefix(std::min(body.find_first_not_of(';'), body.size()));
        if (newlines_since_comment > 1) {
          comments.clear();
        }
        comments.push_back(trim(body));
        newlines_since_comment = 0;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        if (c == '\n') {
          ++newlines_since_comment;
        }
        advance();
      } else {
        break;
      }
    }
    if (newlines_since_comment > 1) {
      comments.clear();
    }
    return comments;
  }

  void skip_space() { (void)skip_space_collecting(); }

  Sexp read() {
    skip_space();
    if (at_end()) {
      fail("unexpected end of input");
    }
    Sexp s;
    s.line = line_;
    s.column = column_;
    char c = peek();
    if (c == '(') {
      advance();
      s.kind = Sexp::Kind::List;
      for (;;) {
        skip_space();
        if (at_end()) {
          throw ParseError("unbalanced parentheses: missing ')'", s.line, s.column);
        }
        if (peek() == ')') {
          advance();
          break;
        }
        if (peek() == '.' && is_lone_dot()) {
          if (s.items.empty() || s.dotted) {
            fail("misplaced '.'");
          }
          advance();
          s.items.push_back(read());
          s.dotted = true;
          skip_space();
          if (at_end() || peek() != ')') {
            fail("expected ')' after dotted tail");
          }
          advance();
          break;
        }
        s.items.push_back(read());
      }
      return s;
    }
    if (c == ')') {
      fail("unbalanced parentheses: unexpected ')'");
    }
    if (c == '\'') {
      advance();
      s.kind = Sexp::Kind::List;
      Sexp q;
      q.line = s.line;
      q.column = s.column;
      q.atom = "quote";
      s.items.push_back(std::move(q));
      s.items.push_back(read());
      return s;
    }
    if (!is_symbol_char(c)) {
      fail(std::string("illegal character '") + c + "'");
    }
    std::size_t start = pos_;
    while (!at_end() && is_symbol_char(peek())) {
      advance();
    }
    std::string token(text_.substr(start, pos_ - start));
    std::transform(token.begin(), token.end(), token.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    validate_token(token, s);
    s.atom = std::move(token);
    return s;
  }

  bool is_lone_dot() const {
    return pos_ + 1 >= text_.size() || !is_symbol_char(text_[pos_ + 1]);
  }

  static void validate_token(const std::string& token, const Sexp& at) {
    if (token == "1+" || token == "1-") {
      return;
    }
    bool numeric_start = std::isdigit(static_cast<unsigned char>(token[0])) != 0 ||
                         ((token[0] == '-' || token[0] == '+') && token.size() > 1 &&
                          std::isdigit(static_cast<unsigned char>(token[1])) != 0);
    if (numeric_start && !all_digits(token)) {
      throw ParseError("illegal token '" + token + "' (only nonnegative integers)",
                       at.line, at.column);
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

std::uint64_t parse_natural(const Sexp& s) {
  std::uint64_t n = 0;
  for (char c : s.atom) {
    auto digit = static_cast<std::uint64_t>(c - '0');
    if (n > (std::numeric_limits<std::uint64_t>::max() - digit) / 10) {
      throw_at(s, "integer literal out of range: " + s.atom);
    }
    n = n * 10 + digit;
  }
  return n;
}

Value value_from_sexp(const Sexp& s) {
  if (s.is_atom()) {
    if (all_digits(s.atom)) {
      return Value::natural(parse_natural(s));
    }
    return Value::symbol(s.atom);
  }
  std::size_t n = s.items.size();
  Value tail = Value::nil();
  if (s.dotted) {
    tail = value_from_sexp(s.items.back());
    --n;
  }
  for (std::size_t i = n; i-- > 0;) {
    tail = Value::cons(value_from_sexp(s.items[i]), std::move(tail));
  }
  return tail;
}

/// Letters between the c and the r of cadr-style names, or empty.
std::string_view abbreviation_path(std::string_view name) {
  if (name.size() < 4 || name.size() > 6 || name.front() != 'c' || name.back() != 'r') {
    return {};
  }
  std::string_view mid = name.substr(1, name.size() - 2);
  if (!std::all_of(mid.begin(), mid.end(), [](char c) { return c == 'a' || c == 'd'; })) {
    return {};
  }
  return mid;
}

void expect_args(const Sexp& s, std::size_t n) {
  if (s.items.size() - 1 != n) {
    throw_at(s, "arity violation: '" + s.items[0].atom + "' expects " + std::to_string(n) +
                    " argument" + (n == 1 ? "" : "s") + ", got " +
                    std::to_string(s.items.size() - 1));
  }
}

}  // namespace

std::vector<Sexp> read_sexps(std::string_view text) { return Reader(text).read_all(); }

Sexp read_single_sexp(std::string_view text) {
  auto forms = read_sexps(text);
  if (forms.empty()) {
    throw ParseError("empty input", 1, 1);
  }
  if (forms.size() > 1) {
    throw ParseError("trailing input after expression", forms[1].line, forms[1].column);
  }
  return std::move(forms[0]);
}

void throw_at(const Sexp& s, const std::string& message) {
  throw ParseError(message, s.line, s.column);
}

Term term_from_sexp(const Sexp& s) {
  if (s.is_atom()) {
    if (all_digits(s.atom)) {
      return Term::constant(Value::natural(parse_natural(s)));
    }
    if (s.atom == "nil") {
      return Term::constant(Value::nil());
    }
    if (s.atom == "t") {
      return Term::constant(Value::t());
    }
    if (s.atom.front() == ':') {
      throw_at(s, "keyword '" + s.atom + "' is not a term");
    }
    if (is_reserved_name(s.atom)) {
      throw_at(s, "reserved symbol '" + s.atom + "' used as a variable");
    }
    return Term::var(s.atom);
  }
  if (s.items.empty()) {
    return Term::constant(Value::nil());
  }
  if (s.dotted) {
    throw_at(s, "dotted list outside quote");
  }
  const Sexp& head = s.items[0];
  if (!head.is_atom()) {
    throw_at(head, "application head must be a symbol");
  }
  const std::string& name = head.atom;
  if (all_digits(name) || name == "t" || name == "nil" || name.front() == ':') {
    throw_at(head, "'" + name + "' cannot be applied");
  }

  auto args = [&](std::size_t from = 1) {
    std::vector<Term> out;
    for (std::size_t i = from; i < s.items.size(); ++i) {
      out.push_back(term_from_sexp(s.items[i]));
    }
    return out;
  };

  if (name == "quote") {
    expect_args(s, 1);
    return Term::constant(value_from_sexp(s.items[1]));
  }
  if (auto path = abbreviation_path(name); !path.empty()) {
    expect_args(s, 1);
    Term t = term_from_sexp(s.items[1]);
    for (std::size_t i = path.size(); i-- > 0;) {
      t = Term::app(path[i] == 'a' ? "car" : "cdr", {std::move(t)});
    }
    return t;
  }
  if (name == "list") {
    Term t = Term::constant(Value::nil());
    auto elems = args();
    for (std::size_t i = elems.size(); i-- > 0;) {
      t = Term::app("cons", {std::move(elems[i]), std::move(t)});
    }
    return t;
  }
  if (name == "1+" || name == "1-") {
    expect_args(s, 1);
    return Term::app(name == "1+" ? "+" : "-",
                     {term_from_sexp(s.items[1]), Term::constant(Value::natural(1))});
  }
  if (name == "and") {
    auto elems = args();
    if (elems.empty()) {
      return Term::constant(Value::t());
    }
    Term t = elems.back();
    for (std::size_t i = elems.size() - 1; i-- > 0;) {
      t = Term::app("if", {std::move(elems[i]), std::move(t), Term::constant(Value::nil())});
    }
    return t;
  }
  if (name == "or") {
    auto elems = args();
    if (elems.empty()) {
      return Term::constant(Value::nil());
    }
    Term t = elems.back();
    for (std::size_t i = elems.size() - 1; i-- > 0;) {
      t = Term::app("if", {elems[i], elems[i], std::move(t)});
    }
    return t;
  }
  if (auto arity = builtin_arity(name)) {
    expect_args(s, *arity);
    return Term::app(name, args());
  }
  if (auto arity = stub_arity(name)) {
    expect_args(s, *arity);
    return Term::app(name, args());
  }
  if (is_reserved_name(name)) {
    throw_at(head, "'" + name + "' cannot be applied");
  }
  return Term::app(name, args());
}

}  // namespace tdm

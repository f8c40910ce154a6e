#include "krivine/text.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>
#include <vector>

namespace krivine {

ParseError::ParseError(const std::string& message, std::size_t position)
    : std::runtime_error("parse error at " + std::to_string(position) + ": " + message),
      position_(position) {}

namespace {

constexpr Nat kMaxNumeralLiteral = 1'000'000;

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

class Parser {
 public:
  Parser(std::string_view text, const ParseOptions& options) : text_(text), options_(options) {}

  Term term() {
    skip_ws();
    if (peek() == '\\') return lambda();
    std::optional<Term> acc;
    for (;;) {
      skip_ws();
      const char c = peek();
      if (c == '\\') {
        Term lam = lambda();
        acc = acc ? Term::app(*acc, lam) : lam;
        break;
      }
      if (!(ident_start(c) || c == '(' || c == '#')) break;
      Term a = atom();
      acc = acc ? Term::app(*acc, a) : a;
    }
    if (!acc) fail("expected a term");
    return *acc;
  }

  Stack stack() {
    skip_ws();
    const std::size_t start = pos_;
    if (ident_start(peek())) {
      std::string name = ident();
      if (!in_scope(name)) {
        if (auto id = ConstantTable::instance().find(name);
            id && ConstantTable::instance().kind(*id) == ConstKind::StackBottom) {
          return Stack::bottom(*id);
        }
      }
      pos_ = start;
    }
    Term top = term();
    skip_ws();
    expect('.');
    Stack rest = stack();
    try {
      return Stack::push(top, rest);
    } catch (const SyntaxError& e) {
      throw ParseError(e.what(), start);
    }
  }

  Process process() {
    Term head = term();
    skip_ws();
    expect('*');
    Stack s = stack();
    if (!head.closed()) throw ParseError("process head must be closed", 0);
    return Process{head, s};
  }

  void finish() {
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
  }

 private:
  [[noreturn]] void fail(const std::string& message) const { throw ParseError(message, pos_); }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string ident() {
    if (!ident_start(peek())) fail("expected an identifier");
    const std::size_t start = pos_;
    while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  bool in_scope(const std::string& name) const {
    for (const auto& s : scope_) {
      if (s == name) return true;
    }
    return false;
  }

  std::optional<Term> lookup_bound(std::string_view name) const {
    for (std::size_t i = scope_.size(); i-- > 0;) {
      if (scope_[i] == name) return Term::bound(static_cast<std::uint32_t>(scope_.size() - 1 - i));
    }
    return std::nullopt;
  }

  Term lambda() {
    expect('\\');
    std::vector<std::string> names;
    for (;;) {
      skip_ws();
      if (peek() == '.') break;
      names.push_back(ident());
    }
    if (names.empty()) fail("lambda without binder");
    expect('.');
    for (const auto& n : names) scope_.push_back(n);
    Term body = term();
    for (auto it = names.rbegin(); it != names.rend(); ++it) {
      scope_.pop_back();
      body = Term::lam(*it, body);
    }
    return body;
  }

  Term atom() {
    const char c = peek();
    if (c == '(') {
      ++pos_;
      Term t = term();
      skip_ws();
      expect(')');
      return t;
    }
    if (c == '#') {
      ++pos_;
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      Nat n = 0;
      auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, n);
      if (start == pos_ || ec != std::errc{}) {
        pos_ = start;
        fail("expected a natural number after '#'");
      }
      if (n > kMaxNumeralLiteral) {
        pos_ = start;
        fail("numeral literal too large");
      }
      return numeral(n);
    }
    const std::size_t start = pos_;
    std::string name = ident();
    if (name == "k" && peek() == '[') {
      ++pos_;
      Stack s = stack();
      skip_ws();
      expect(']');
      return Term::cont(s);
    }
    return resolve(name, start);
  }

  Term resolve(const std::string& name, std::size_t start) {
    if (auto b = lookup_bound(name)) return *b;
    auto& table = ConstantTable::instance();
    if (auto id = table.find(name)) {
      switch (table.kind(*id)) {
        case ConstKind::Instruction: {
          const bool allowed = options_.allow_instruction ? options_.allow_instruction(*id)
                                                          : *id != builtin::fork();
          if (!allowed) throw ParseError("instruction '" + name + "' is not installed", start);
          return Term::constant(*id);
        }
        case ConstKind::Inert:
          return Term::constant(*id);
        case ConstKind::StackBottom:
          throw ParseError("stack constant '" + name + "' used as a term", start);
      }
    }
    if (options_.allow_free_vars) return Term::free(name);
    // `xx` for `x x` when every letter is a bound variable.
    if (name.size() > 1) {
      std::optional<Term> acc;
      for (char ch : name) {
        auto b = lookup_bound(std::string(1, ch));
        if (!b) {
          acc.reset();
          break;
        }
        acc = acc ? Term::app(*acc, *b) : *b;
      }
      if (acc) return *acc;
    }
    throw ParseError("unknown identifier '" + name + "'", start);
  }

  std::string_view text_;
  const ParseOptions& options_;
  std::size_t pos_ = 0;
  std::vector<std::string> scope_;
};

// ---------------------------------------------------------------------------
// Printing

class Printer {
 public:
  explicit Printer(std::set<std::string> reserved) : reserved_(std::move(reserved)) {}

  enum Level { Top, Function, Argument };

  void term(const Term& t, Level level, std::string& out) {
    if (auto n = decode_numeral(t)) {
      out += '#';
      out += std::to_string(*n);
      return;
    }
    switch (t.kind()) {
      case TermKind::Bound:
        out += scope_.at(scope_.size() - 1 - t.index());
        return;
      case TermKind::Free:
        out += t.name();
        return;
      case TermKind::Const:
        out += ConstantTable::instance().name(t.const_id());
        return;
      case TermKind::Cont:
        out += "k[";
        stack(t.stack(), out);
        out += ']';
        return;
      case TermKind::Lam: {
        if (level != Top) out += '(';
        out += '\\';
        const Term* cur = &t;
        std::size_t bound = 0;
        while (cur->kind() == TermKind::Lam && !decode_numeral(*cur)) {
          std::string name = pick(cur->name());
          if (bound > 0) out += ' ';
          out += name;
          scope_.push_back(std::move(name));
          ++bound;
          cur = &cur->body();
        }
        out += '.';
        term(*cur, Top, out);
        scope_.resize(scope_.size() - bound);
        if (level != Top) out += ')';
        return;
      }
      case TermKind::App: {
        std::vector<const Term*> args;
        const Term* head = &t;
        while (head->kind() == TermKind::App && !decode_numeral(*head)) {
          args.push_back(&head->arg());
          head = &head->fun();
        }
        if (level == Argument) out += '(';
        term(*head, Function, out);
        for (auto it = args.rbegin(); it != args.rend(); ++it) {
          out += ' ';
          term(**it, Argument, out);
        }
        if (level == Argument) out += ')';
        return;
      }
    }
  }

  void stack(const Stack& s, std::string& out) {
    for (const Stack* cur = &s;; cur = &cur->rest()) {
      if (cur->is_bottom()) {
        out += ConstantTable::instance().name(cur->bottom_id());
        return;
      }
      term(cur->top(), Function, out);
      out += '.';
    }
  }

 private:
  bool taken(const std::string& name) const {
    if (reserved_.count(name) || ConstantTable::instance().find(name)) return true;
    for (const auto& s : scope_) {
      if (s == name) return true;
    }
    return false;
  }

  std::string pick(const std::string& hint) const {
    std::string base = hint;
    if (base.empty() || !ident_start(base[0]) ||
        !std::all_of(base.begin(), base.end(), ident_char)) {
      base = "x";
    }
    if (!taken(base)) return base;
    for (std::size_t i = 1;; ++i) {
      std::string candidate = base + std::to_string(i);
      if (!taken(candidate)) return candidate;
    }
  }

  std::set<std::string> reserved_;
  std::vector<std::string> scope_;
};

}  // namespace

Term parse_term(std::string_view text, const ParseOptions& options) {
  Parser p(text, options);
  Term t = p.term();
  p.finish();
  return t;
}

Stack parse_stack(std::string_view text, const ParseOptions& options) {
  Parser p(text, options);
  Stack s = p.stack();
  p.finish();
  return s;
}

Process parse_process(std::string_view text, const ParseOptions& options) {
  Parser p(text, options);
  Process proc = p.process();
  p.finish();
  return proc;
}

std::string to_string(const Term& t) {
  std::string out;
  Printer(free_vars(t)).term(t, Printer::Top, out);
  return out;
}

std::string to_string(const Stack& s) {
  std::string out;
  Printer({}).stack(s, out);
  return out;
}

std::string to_string(const Process& p) {
  std::string out;
  Printer printer({});
  printer.term(p.head, Printer::Function, out);
  out += " * ";
  printer.stack(p.stack, out);
  return out;
}

}  // namespace krivine

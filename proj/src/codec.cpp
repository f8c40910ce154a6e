#include "krivine/codec.hpp"

namespace krivine {

const Term& pair_combinator() {
  static const Term p = lam({"x", "y", "f"}, app(var("f"), {var("x"), var("y")}));
  return p;
}

const Term& nil() { return zero(); }

Term cons(const Term& head, const Term& tail) {
  return Term::app(Term::app(pair_combinator(), head), tail);
}

std::optional<std::pair<Term, Term>> uncons(const Term& t) {
  if (t.kind() != TermKind::App) return std::nullopt;
  const Term& inner = t.fun();
  if (inner.kind() != TermKind::App || inner.fun() != pair_combinator()) return std::nullopt;
  return std::make_pair(inner.arg(), t.arg());
}

Term encode_tuple(const std::vector<Nat>& values) {
  Term t = nil();
  for (auto it = values.rbegin(); it != values.rend(); ++it) t = cons(numeral(*it), t);
  return t;
}

std::optional<std::vector<Nat>> decode_tuple(const Term& t) {
  std::vector<Nat> out;
  Term cur = t;
  for (;;) {
    if (cur == nil()) return out;
    auto cell = uncons(cur);
    if (!cell) return std::nullopt;
    auto n = decode_numeral(cell->first);
    if (!n) return std::nullopt;
    out.push_back(*n);
    cur = cell->second;
  }
}

}  // namespace krivine

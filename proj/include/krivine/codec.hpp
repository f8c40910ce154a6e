#pragma once

// Tuples of numerals as cons-lists: <m1,...,mi> = P m1 (P m2 (... nil))
// with P = \x y f.f x y applied literally and nil = \x f.x.

#include <optional>
#include <vector>

#include "krivine/syntax.hpp"

namespace krivine {

const Term& pair_combinator();
const Term& nil();

/// P a b, unreduced.
Term cons(const Term& head, const Term& tail);
/// Splits P a b into (a, b).
std::optional<std::pair<Term, Term>> uncons(const Term& t);

Term encode_tuple(const std::vector<Nat>& values);
std::optional<std::vector<Nat>> decode_tuple(const Term& t);

}  // namespace krivine

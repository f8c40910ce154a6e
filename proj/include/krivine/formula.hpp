#pragma once

// Arithmetical formulas  forall z1..zg exists x1 forall y1 ... exists xh forall yh
// (f(z, x, y) = 0)  with f primitive recursive, plus the machinery the
// referees need around them: a small primitive-recursive DSL, a Turing
// machine enumeration for the halting formula, Theta instructions and a
// brute-force truth oracle.

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "krivine/syntax.hpp"

namespace krivine {

class FormulaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Primitive recursive functions

/// DSL grammar (s-expressions):
///   (zero k)            k-ary constant 0
///   succ                unary successor
///   (proj k i)          i-th of k arguments, 0-based
///   (comp g h1 ... hm)  g(h1(y), ..., hm(y))
///   (rec base step)     f(0,y) = base(y), f(n+1,y) = step(n, f(n,y), y)
///   name                a registered function
class PrimRecFn {
 public:
  using Native = std::function<Nat(std::span<const Nat>)>;

  static PrimRecFn native(std::string name, std::size_t arity, Native fn);
  static PrimRecFn dsl(std::string name, std::string_view source);

  const std::string& name() const;
  std::size_t arity() const;
  bool is_native() const;
  /// DSL source, empty for natives.
  const std::string& source() const;

  Nat operator()(std::span<const Nat> args) const;
  Nat operator()(std::initializer_list<Nat> args) const {
    return (*this)(std::span<const Nat>(args.begin(), args.size()));
  }

  struct Impl;
  /// Internal: wraps an implementation record.
  static PrimRecFn from_impl(std::shared_ptr<const Impl> impl) { return PrimRecFn(std::move(impl)); }

 private:
  explicit PrimRecFn(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

/// Registers `fn` under its name; names are unique.
void register_function(const PrimRecFn& fn);
std::optional<PrimRecFn> find_function(std::string_view name);
PrimRecFn function(std::string_view name);

// ---------------------------------------------------------------------------
// Formulas

struct ArithFormula {
  std::string name;
  std::size_t h = 0;        // number of exists/forall blocks
  std::size_t leading = 0;  // universal quantifiers before the first exists
  PrimRecFn fn;

  /// f(z, x, y).
  Nat eval(const std::vector<Nat>& z, const std::vector<Nat>& x, const std::vector<Nat>& y) const;
  bool holds(const std::vector<Nat>& z, const std::vector<Nat>& x,
             const std::vector<Nat>& y) const {
    return eval(z, x, y) == 0;
  }
};

ArithFormula make_formula(std::string name, std::size_t h, std::size_t leading, PrimRecFn fn);

void register_formula(const ArithFormula& formula);
std::optional<ArithFormula> find_formula(std::string_view name);
ArithFormula formula(std::string_view name);
std::vector<std::string> formula_names();
/// Loads {name, h, leadingForall, fn: {native} | {dsl}} objects (one object
/// or an array) and registers them.  Returns the names.
std::vector<std::string> load_formulas_json(std::string_view json_text);

// ---------------------------------------------------------------------------
// Turing machines over {blank, 0, 1}, started on the empty tape.
//
// Machine m with s states (0..s-1, s is the halting state) is a table of
// 3s transitions (write in {0,1}, move L/R, next in 0..s).  Indices list all
// 0-state machines, then all 1-state machines, ..., up to 4 states; inside a
// block, transition (q, symbol) is digit q*3+symbol of a mixed-radix number
// with base 4(s+1), least significant first, and
// digit = (write*2 + move)*(s+1) + next, move 0 = left, 1 = right.

struct TmTransition {
  std::uint8_t write = 0;  // 0 or 1 (written as tape symbol write+1)
  std::uint8_t move = 0;   // 0 left, 1 right
  std::uint8_t next = 0;   // == states means halt
};

struct TuringMachine {
  std::size_t states = 0;
  std::vector<TmTransition> table;  // index q*3 + symbol

  const TmTransition& at(std::size_t q, std::size_t symbol) const { return table.at(q * 3 + symbol); }
};

constexpr std::size_t kMaxTmStates = 4;

/// Number of machines with at most kMaxTmStates states.
Nat tm_count();
TuringMachine tm_decode(Nat index);
Nat tm_encode(const TuringMachine& tm);
/// Steps until the halting state is entered, if that happens within `cap`.
std::optional<Nat> tm_steps_to_halt(const TuringMachine& tm, Nat cap);
/// 1 iff machine m halts in strictly fewer than n steps.
Nat halt_predicate(Nat m, Nat n);

/// The machine whose initial state is halting (index 0).
Nat tm_immediate();
/// One state, always writes 0, moves right and stays.
Nat tm_loop();
/// Two states, halting after exactly three steps (index 541).
Nat tm_three_steps();

// ---------------------------------------------------------------------------
// Theta instructions

enum class ThetaForm { Numerals, Tuples };

/// Registers instruction `name`:
///   Numerals:  name * a1..aa . b1..bb . t0 . t1 . pi
///   Tuples:    name * <a> . <b> . t0 . t1 . pi
/// continuing with t0 * pi when f(a, b) = 0 and t1 * pi otherwise.
/// Undecodable arguments leave the process stuck.
ConstId make_theta(std::string_view name, const PrimRecFn& f, std::size_t a, std::size_t b,
                   ThetaForm form);

// ---------------------------------------------------------------------------
// Bounded truth oracle

enum class Verdict { Win, Lose, Unknown };
std::string_view to_string(Verdict v);

/// An exists-position (m_i, n_i).
struct Position {
  std::vector<Nat> m;
  std::vector<Nat> n;
  friend bool operator==(const Position&, const Position&) = default;
};

/// Abelard plays in [0, B] and Eloise in [0, B + 1], so Eloise can always
/// answer strictly above any move of Abelard.
constexpr Nat eloise_bound(Nat bound) { return bound + 1; }

/// Value of `pos` in the restricted game.
bool bounded_value(const ArithFormula& f, Nat bound, const std::vector<Nat>& leading,
                   const Position& pos);

/// Whether the history is winning for Eloise in the restricted game.  With
/// `report_unknown`, a losing verdict is reported as Unknown since a larger
/// bound may change it.
Verdict truth_oracle_g0(const ArithFormula& f, Nat bound, const std::vector<Position>& history = {},
                        const std::vector<Nat>& leading = {}, bool report_unknown = false);

}  // namespace krivine

#pragma once

// The library of concrete realizers: small combinators, the halting-problem
// realizer, the wild realizer t_leq, the universal realizer t_phi built from
// native combinators, a storage operator and two scheme fixtures.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "krivine/formula.hpp"
#include "krivine/syntax.hpp"

namespace krivine {

class RealizerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RealizerEntry {
  std::string name;
  Term term;
  /// Formula the realizer targets, if any.
  std::optional<std::string> formula;
  /// Reduction contracts, one "lhs > rhs" line each.
  std::vector<std::string> contract;
};

// ---------------------------------------------------------------------------
// Basic terms

const Term& identity();     // \x.x
const Term& delta();        // \x.x x
const Term& delta_prime();  // \x.x x I
const Term& first();        // \p.p (\x y.x)
const Term& second();       // \p.p (\x y.y)

/// I, delta, delta', 0, s, pair, fst, snd.
std::vector<RealizerEntry> basic_terms();
/// I, I I, delta I, \x.cc (\k.x), cc (\k.k I delta k).
std::vector<RealizerEntry> identity_like_suite();

// ---------------------------------------------------------------------------
// Enumeration of N^h by iterated Cantor pairing: a tuple (a, rest) has index
// pair(a, index(rest)), and the 1-tuple (a) has index a.

Nat cantor_pair(Nat a, Nat b);
std::pair<Nat, Nat> cantor_unpair(Nat index);
std::vector<Nat> next_tuple(std::size_t h, Nat index);
Nat tuple_index(const std::vector<Nat>& tuple);
/// Largest index of a tuple in [0, box]^h.
Nat enumeration_bound(std::size_t h, Nat box);

/// Instruction next<h>:  next<h> * <m> . t . pi  >  t * <m'> . pi  where m'
/// follows m in the enumeration.
ConstId next_instruction(std::size_t h);

// ---------------------------------------------------------------------------
// Histories as cons-lists of entries [<m>, <n>, u, k_pi], newest first.

struct HistoryRecord {
  std::vector<Nat> m;
  std::vector<Nat> n;
  Term u;
  Stack pi;
  friend bool operator==(const HistoryRecord&, const HistoryRecord&) = default;
};

Term encode_history_entry(const HistoryRecord& record);
std::optional<HistoryRecord> decode_history_entry(const Term& t);
Term encode_history(const std::vector<HistoryRecord>& records);
std::optional<std::vector<HistoryRecord>> decode_history(const Term& t);
/// At most one (n, u, pi) per m.
bool is_functional(const std::vector<HistoryRecord>& records);

// ---------------------------------------------------------------------------
// Halting problem:  t_H = \m u. cc (\k. u 0 T[m,u,k])  with
// T[m,u,k] = \p v. Theta m p (k (u p (\p v.v))) v.

/// Theta for the halting formula: continues with t0 iff machine m halts in
/// fewer than p steps.
ConstId theta_halt();
Term halting_step(const Term& m, const Term& u, const Term& k);
RealizerEntry build_t_H();

// ---------------------------------------------------------------------------
// Wild realizer for  exists x forall y (x <= y).

Term wild_T2(const Term& y, const Term& m);
Term wild_T1(const Term& u, const Term& m);
Term wild_T0(const Term& u, const Term& m);
RealizerEntry build_t_leq();

// ---------------------------------------------------------------------------
// Universal realizer t_phi for a formula without leading universals.

struct UniversalRealizer {
  RealizerEntry entry;
  std::size_t h = 0;
  std::vector<ConstId> T;  // T[0] is T_1
  ConstId theta = 0;
  ConstId N = 0;
  ConstId L = 0;
  ConstId next = 0;
};

/// Registers (once per formula) the instructions <f>_T1..<f>_Th, <f>_theta,
/// <f>_N, <f>_L and next<h>:
///   T_i * <m>.<n>.H.n_i.u.pi  >  u * m_{i+1} . T_{i+1} <m> <n n_i> H' . pi
///   T_h * <m>.<n>.H.n_h.u.pi  >  theta * <m>.<n n_h>.u.(N <m> H').pi
///   N * <m>.H.pi              >  next * <m> . (\t.L t H) . pi
///   L * <m>.H.pi              >  u_i * m_{i+1} . T_{i+1} <m> <n_i> H . pi_i
/// where H' adds [<m_1..m_i>, <n_1..n_i>, u, k_pi] to H and L resumes the
/// entry whose m is the longest prefix of <m>.
UniversalRealizer build_t_phi(const ArithFormula& f);
/// T_i <m> <n> H as a term.
Term universal_T(const UniversalRealizer& r, std::size_t i, const std::vector<Nat>& m,
                 const std::vector<Nat>& n, const Term& history);

// ---------------------------------------------------------------------------
// Miscellaneous

/// T = \f nu. nu f (\r x. r (s x)) 0:  T * f . nu . pi  >  f * n . pi when nu
/// computes the numeral n.
RealizerEntry storage_operator();
/// \u. u 0 (\n v. v), a one-move realizer of exists x forall y (x <= y).
RealizerEntry toy_h1();
/// Builds the seven-line two-block scheme whose tree is 0, 1, 1.0, 1.1, 2,
/// 0.0 with the final configuration at node 4.
RealizerEntry fig_scheme_mock();

// ---------------------------------------------------------------------------
// Registry

/// Built-in names plus t_phi_<formula> for every registered formula with no
/// leading universals.
std::vector<std::string> realizer_names();
std::optional<RealizerEntry> find_realizer(std::string_view name);
RealizerEntry realizer(std::string_view name);
/// Registers a proof-like term under a new name.
void register_realizer(const RealizerEntry& entry);
/// Loads {name: {"term": text, "formula"?: name} | {"bundle": "t_phi",
/// "formula": name}} and registers each entry.  Returns the names.
std::vector<std::string> load_realizers_json(std::string_view json_text);

}  // namespace krivine

#pragma once

// Terms, stacks and processes of the lambda_c calculus.
//
// Bound variables are stored as de Bruijn indices (locally nameless), so
// alpha-equivalence is plain structural equality and `operator==` on terms
// is the syntactic identity used by the `eq` instruction.  Free variables
// keep their names; they only appear in term templates and never inside a
// stack or a process.  Nodes are immutable and shared; every operation
// returns a new value.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <initializer_list>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace krivine {

using Nat = std::uint64_t;
using ConstId = std::uint32_t;

enum class ConstKind : std::uint8_t { Instruction, Inert, StackBottom };

struct ConstantDecl {
  ConstId id = 0;
  std::string name;
  ConstKind kind = ConstKind::Inert;
};

class SyntaxError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Process-wide registry of constant names.  Instructions, inert constants
/// and stack bottoms share one namespace.  Thread-safe.
class ConstantTable {
 public:
  static ConstantTable& instance();

  /// Declares `name` with `kind`.  Redeclaring with the same kind returns the
  /// existing id; a different kind throws SyntaxError.
  ConstId declare(std::string_view name, ConstKind kind);
  std::optional<ConstId> find(std::string_view name) const;
  ConstantDecl decl(ConstId id) const;
  std::string_view name(ConstId id) const;
  ConstKind kind(ConstId id) const;

  /// `count` new constants `prefix<k>` whose names were never declared.
  std::vector<ConstId> fresh(std::string_view prefix, std::size_t count, ConstKind kind);

 private:
  ConstantTable();
  ConstId declare_locked(std::string_view name, ConstKind kind);

  mutable std::mutex mutex_;
  std::deque<ConstantDecl> decls_;
  std::unordered_map<std::string, ConstId> by_name_;
  std::unordered_map<std::string, std::size_t> fresh_counters_;
};

namespace builtin {
ConstId cc();
ConstId quote();
ConstId eq();
ConstId eq_nat();
ConstId fork();
}  // namespace builtin

std::vector<ConstId> fresh_constants(std::string_view prefix, std::size_t count);
std::vector<ConstId> fresh_stack_constants(std::string_view prefix, std::size_t count);
ConstId declare_inert(std::string_view name);
ConstId declare_stack_constant(std::string_view name);

enum class TermKind : std::uint8_t { Bound, Free, Lam, App, Cont, Const };

class Stack;

namespace detail {
struct TermNode;
struct StackNode;
struct Access;
}  // namespace detail

class Term {
 public:
  Term() = default;

  static Term bound(std::uint32_t index);
  static Term free(std::string name);
  /// `body` is already locally nameless: index 0 refers to this binder.
  static Term lam(std::string hint, Term body);
  static Term app(Term fun, Term arg);
  static Term cont(Stack stack);
  static Term constant(ConstId id);

  bool null() const { return node_ == nullptr; }
  TermKind kind() const;
  std::uint32_t index() const;
  /// Free-variable name, or the printing hint of a lambda.
  const std::string& name() const;
  const Term& body() const;
  const Term& fun() const;
  const Term& arg() const;
  const Stack& stack() const;
  ConstId const_id() const;

  std::size_t hash() const;
  /// One past the largest dangling de Bruijn index (0 if locally closed).
  std::uint32_t loose() const;
  bool has_free() const;
  bool has_cont() const;
  /// Bloom mask over every constant id occurring, continuations included.
  std::uint64_t const_mask() const;
  bool closed() const { return loose() == 0 && !has_free(); }
  bool proof_like() const { return !has_cont(); }
  bool same_node(const Term& other) const { return node_ == other.node_; }

  /// Syntactic identity up to alpha-conversion.
  friend bool operator==(const Term& a, const Term& b);
  friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }

 private:
  friend struct detail::Access;
  explicit Term(std::shared_ptr<const detail::TermNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const detail::TermNode> node_;
};

class Stack {
 public:
  Stack() = default;

  static Stack bottom(ConstId alpha);
  static Stack push(Term top, Stack rest);
  /// t1 . t2 . ... . bottom
  static Stack of(std::initializer_list<Term> items, Stack bottom);
  static Stack of(const std::vector<Term>& items, Stack bottom);

  bool null() const { return node_ == nullptr; }
  bool is_bottom() const;
  ConstId bottom_id() const;  // the terminating stack constant
  const Term& top() const;
  const Stack& rest() const;
  /// Number of pushed terms.
  std::size_t depth() const;
  /// Drops `k` pushed terms; nullopt if the stack is too short.
  std::optional<Stack> drop(std::size_t k) const;
  /// The k-th pushed term (0 = top); nullopt if absent.
  std::optional<Term> at(std::size_t k) const;

  std::size_t hash() const;
  std::uint64_t const_mask() const;
  bool has_cont() const;
  bool same_node(const Stack& other) const { return node_ == other.node_; }

  friend bool operator==(const Stack& a, const Stack& b);
  friend bool operator!=(const Stack& a, const Stack& b) { return !(a == b); }

 private:
  friend struct detail::Access;
  explicit Stack(std::shared_ptr<const detail::StackNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const detail::StackNode> node_;
};

struct Process {
  Term head;
  Stack stack;

  std::size_t hash() const;
  friend bool operator==(const Process& a, const Process& b) {
    return a.head == b.head && a.stack == b.stack;
  }
  friend bool operator!=(const Process& a, const Process& b) { return !(a == b); }
};

struct TermHash {
  std::size_t operator()(const Term& t) const { return t.hash(); }
};
struct StackHash {
  std::size_t operator()(const Stack& s) const { return s.hash(); }
};
struct ProcessHash {
  std::size_t operator()(const Process& p) const { return p.hash(); }
};

namespace detail {

// Destructors dismantle uniquely owned subtrees iteratively, so long chains
// such as large numerals do not exhaust the call stack.
struct TermNode {
  TermNode() = default;
  TermNode(TermNode&&) = default;
  TermNode& operator=(TermNode&&) = default;
  ~TermNode();

  TermKind kind = TermKind::Bound;
  std::uint32_t index = 0;
  ConstId id = 0;
  std::string name;
  Term a;  // lambda body / application function
  Term b;  // application argument
  Stack stack;
  std::size_t hash = 0;
  std::uint32_t loose = 0;
  bool has_free = false;
  bool has_cont = false;
  std::uint64_t mask = 0;
};

struct StackNode {
  StackNode() = default;
  StackNode(StackNode&&) = default;
  StackNode& operator=(StackNode&&) = default;
  ~StackNode();

  ConstId bottom = 0;
  Term top;  // null for a bottom
  Stack rest;
  std::size_t hash = 0;
  std::size_t depth = 0;
  std::uint64_t mask = 0;
  bool has_cont = false;
};

}  // namespace detail

inline TermKind Term::kind() const { return node_->kind; }
inline std::uint32_t Term::index() const { return node_->index; }
inline const std::string& Term::name() const { return node_->name; }
inline const Term& Term::body() const { return node_->a; }
inline const Term& Term::fun() const { return node_->a; }
inline const Term& Term::arg() const { return node_->b; }
inline const Stack& Term::stack() const { return node_->stack; }
inline ConstId Term::const_id() const { return node_->id; }
inline std::size_t Term::hash() const { return node_->hash; }
inline std::uint32_t Term::loose() const { return node_->loose; }
inline bool Term::has_free() const { return node_->has_free; }
inline bool Term::has_cont() const { return node_->has_cont; }
inline std::uint64_t Term::const_mask() const { return node_->mask; }

inline bool Stack::is_bottom() const { return node_->top.null(); }
inline const Term& Stack::top() const { return node_->top; }
inline const Stack& Stack::rest() const { return node_->rest; }
inline std::size_t Stack::depth() const { return node_->depth; }
inline std::size_t Stack::hash() const { return node_->hash; }
inline std::uint64_t Stack::const_mask() const { return node_->mask; }
inline bool Stack::has_cont() const { return node_->has_cont; }
inline ConstId Stack::bottom_id() const { return node_->bottom; }

inline std::uint64_t mask_bit(ConstId id) { return std::uint64_t{1} << (id % 64); }

// ---------------------------------------------------------------------------
// Construction helpers working with named variables.

Term var(std::string name);
/// Binds the free variable `name` in `body`.
Term lam(const std::string& name, const Term& body);
Term lam(std::initializer_list<std::string> names, const Term& body);
Term app(const Term& fun, const Term& arg);
Term app(const Term& fun, std::initializer_list<Term> args);
Term constant(std::string_view name);
Stack stack_bottom(std::string_view name);

// ---------------------------------------------------------------------------
// Substitutions.

/// body[0 := u] for the body of a lambda; `u` must be locally closed.
Term open(const Term& body, const Term& u);
/// Replaces the free variable `name` by `u` (Free(name) -> Bound(depth)).
Term abstract(const std::string& name, const Term& t);
/// t{x := u}.  Does not descend into continuation constants.
Term subst_var(const Term& t, std::string_view x, const Term& u);

/// Simultaneous substitution of constants: inert constants by closed terms
/// and stack constants by stacks.  Propagates through continuations.
struct ConstSubstitution {
  std::unordered_map<ConstId, Term> terms;
  std::unordered_map<ConstId, Stack> stacks;

  bool empty() const { return terms.empty() && stacks.empty(); }
  Term apply(const Term& t) const;
  Stack apply(const Stack& s) const;
  Process apply(const Process& p) const;

 private:
  std::uint64_t mask() const;
};

/// {c := u}; `c` must be an inert constant and `u` closed.
Term subst_const(const Term& t, ConstId c, const Term& u);
Stack subst_const(const Stack& s, ConstId c, const Term& u);
Process subst_const(const Process& p, ConstId c, const Term& u);
/// {alpha := pi0}.
Term subst_stack_const(const Term& t, ConstId alpha, const Stack& pi0);
Stack subst_stack_const(const Stack& s, ConstId alpha, const Stack& pi0);
Process subst_stack_const(const Process& p, ConstId alpha, const Stack& pi0);

// ---------------------------------------------------------------------------
// Queries.

bool occurs(ConstId c, const Term& t);
bool occurs(ConstId c, const Stack& s);
bool occurs(ConstId c, const Process& p);
std::set<ConstId> constants_of(const Term& t);
std::set<ConstId> constants_of(const Stack& s);
std::set<ConstId> constants_of(const Process& p);
/// Variable names occurring free in `t`.
std::set<std::string> free_vars(const Term& t);

// ---------------------------------------------------------------------------
// Numerals: n = s^n 0 with 0 = \x f.x and s = \n x f.f (n x f).

const Term& zero();
const Term& succ();
Term numeral(Nat n);
/// n iff `t` is literally s^n 0 up to alpha; beta-equal forms are rejected.
std::optional<Nat> decode_numeral(const Term& t);

}  // namespace krivine

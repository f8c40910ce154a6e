#include "krivine/syntax.hpp"

#include <algorithm>
#include <functional>

namespace krivine {

namespace detail {

struct Access {
  static const TermNode* node(const Term& t) { return t.node_.get(); }
  static const StackNode* node(const Stack& s) { return s.node_.get(); }
  // Nodes are allocated non-const so that a sole owner may dismantle them.
  static Term make(TermNode n) { return Term(std::shared_ptr<const TermNode>(std::make_shared<TermNode>(std::move(n)))); }
  static Stack make(StackNode n) { return Stack(std::shared_ptr<const StackNode>(std::make_shared<StackNode>(std::move(n)))); }

  struct Worklist {
    std::vector<std::shared_ptr<const TermNode>> terms;
    std::vector<std::shared_ptr<const StackNode>> stacks;

    void take(Term& t) {
      if (t.node_ && t.node_.use_count() == 1) terms.push_back(std::move(t.node_));
    }
    void take(Stack& s) {
      if (s.node_ && s.node_.use_count() == 1) stacks.push_back(std::move(s.node_));
    }
    void drain() {
      while (!terms.empty() || !stacks.empty()) {
        if (!terms.empty()) {
          std::shared_ptr<const TermNode> p = std::move(terms.back());
          terms.pop_back();
          if (p.use_count() == 1) {
            auto* n = const_cast<TermNode*>(p.get());
            take(n->a);
            take(n->b);
            take(n->stack);
          }
        } else {
          std::shared_ptr<const StackNode> p = std::move(stacks.back());
          stacks.pop_back();
          if (p.use_count() == 1) {
            auto* n = const_cast<StackNode*>(p.get());
            take(n->top);
            take(n->rest);
          }
        }
      }
    }
  };
};

TermNode::~TermNode() {
  Access::Worklist w;
  w.take(a);
  w.take(b);
  w.take(stack);
  w.drain();
}

StackNode::~StackNode() {
  Access::Worklist w;
  w.take(top);
  w.take(rest);
  w.drain();
}

}  // namespace detail

namespace {

using detail::Access;
using detail::StackNode;
using detail::TermNode;

std::size_t mix(std::size_t h, std::size_t v) {
  std::uint64_t x = h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
  x ^= x >> 31;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 29;
  return static_cast<std::size_t>(x);
}

bool stack_eq(const StackNode* a, const StackNode* b);

bool term_eq(const TermNode* a, const TermNode* b) {
  for (;;) {
    if (a == b) return true;
    if (a->hash != b->hash || a->kind != b->kind) return false;
    switch (a->kind) {
      case TermKind::Bound:
        return a->index == b->index;
      case TermKind::Free:
        return a->name == b->name;
      case TermKind::Const:
        return a->id == b->id;
      case TermKind::Cont:
        return stack_eq(Access::node(a->stack), Access::node(b->stack));
      case TermKind::Lam:
        a = Access::node(a->a);
        b = Access::node(b->a);
        continue;
      case TermKind::App:
        if (!term_eq(Access::node(a->a), Access::node(b->a))) return false;
        a = Access::node(a->b);
        b = Access::node(b->b);
        continue;
    }
    return false;
  }
}

bool stack_eq(const StackNode* a, const StackNode* b) {
  for (;;) {
    if (a == b) return true;
    if (a->hash != b->hash || a->depth != b->depth) return false;
    if (a->top.null()) return b->top.null() && a->bottom == b->bottom;
    if (!term_eq(Access::node(a->top), Access::node(b->top))) return false;
    a = Access::node(a->rest);
    b = Access::node(b->rest);
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Constant table

ConstantTable& ConstantTable::instance() {
  static ConstantTable table;
  return table;
}

ConstantTable::ConstantTable() {
  for (const char* name : {"cc", "quote", "eq", "eq_nat", "fork"}) {
    declare_locked(name, ConstKind::Instruction);
  }
  for (int i = 0; i < 10; ++i) {
    declare_locked("a" + std::to_string(i), ConstKind::StackBottom);
    declare_locked("c" + std::to_string(i), ConstKind::Inert);
  }
}

ConstId ConstantTable::declare_locked(std::string_view name, ConstKind kind) {
  if (auto it = by_name_.find(std::string(name)); it != by_name_.end()) {
    if (decls_[it->second].kind != kind) {
      throw SyntaxError("constant '" + std::string(name) + "' already declared with another kind");
    }
    return it->second;
  }
  const auto id = static_cast<ConstId>(decls_.size());
  decls_.push_back(ConstantDecl{id, std::string(name), kind});
  by_name_.emplace(std::string(name), id);
  return id;
}

ConstId ConstantTable::declare(std::string_view name, ConstKind kind) {
  std::lock_guard lock(mutex_);
  return declare_locked(name, kind);
}

std::optional<ConstId> ConstantTable::find(std::string_view name) const {
  std::lock_guard lock(mutex_);
  if (auto it = by_name_.find(std::string(name)); it != by_name_.end()) return it->second;
  return std::nullopt;
}

ConstantDecl ConstantTable::decl(ConstId id) const {
  std::lock_guard lock(mutex_);
  return decls_.at(id);
}

std::string_view ConstantTable::name(ConstId id) const {
  std::lock_guard lock(mutex_);
  return decls_.at(id).name;
}

ConstKind ConstantTable::kind(ConstId id) const {
  std::lock_guard lock(mutex_);
  return decls_.at(id).kind;
}

std::vector<ConstId> ConstantTable::fresh(std::string_view prefix, std::size_t count,
                                          ConstKind kind) {
  std::lock_guard lock(mutex_);
  std::vector<ConstId> out;
  auto& counter = fresh_counters_[std::string(prefix)];
  while (out.size() < count) {
    std::string name = std::string(prefix) + std::to_string(counter++);
    if (by_name_.count(name)) continue;
    out.push_back(declare_locked(name, kind));
  }
  return out;
}

namespace builtin {
ConstId cc() {
  static const ConstId id = *ConstantTable::instance().find("cc");
  return id;
}
ConstId quote() {
  static const ConstId id = *ConstantTable::instance().find("quote");
  return id;
}
ConstId eq() {
  static const ConstId id = *ConstantTable::instance().find("eq");
  return id;
}
ConstId eq_nat() {
  static const ConstId id = *ConstantTable::instance().find("eq_nat");
  return id;
}
ConstId fork() {
  static const ConstId id = *ConstantTable::instance().find("fork");
  return id;
}
}  // namespace builtin

std::vector<ConstId> fresh_constants(std::string_view prefix, std::size_t count) {
  return ConstantTable::instance().fresh(prefix, count, ConstKind::Inert);
}

std::vector<ConstId> fresh_stack_constants(std::string_view prefix, std::size_t count) {
  return ConstantTable::instance().fresh(prefix, count, ConstKind::StackBottom);
}

ConstId declare_inert(std::string_view name) {
  return ConstantTable::instance().declare(name, ConstKind::Inert);
}

ConstId declare_stack_constant(std::string_view name) {
  return ConstantTable::instance().declare(name, ConstKind::StackBottom);
}

// ---------------------------------------------------------------------------
// Terms

Term Term::bound(std::uint32_t index) {
  TermNode n;
  n.kind = TermKind::Bound;
  n.index = index;
  n.hash = mix(1, index);
  n.loose = index + 1;
  return Access::make(std::move(n));
}

Term Term::free(std::string name) {
  TermNode n;
  n.kind = TermKind::Free;
  n.hash = mix(2, std::hash<std::string>{}(name));
  n.name = std::move(name);
  n.has_free = true;
  return Access::make(std::move(n));
}

Term Term::lam(std::string hint, Term body) {
  TermNode n;
  n.kind = TermKind::Lam;
  n.hash = mix(3, body.hash());
  n.loose = body.loose() > 0 ? body.loose() - 1 : 0;
  n.has_free = body.has_free();
  n.has_cont = body.has_cont();
  n.mask = body.const_mask();
  n.name = std::move(hint);
  n.a = std::move(body);
  return Access::make(std::move(n));
}

Term Term::app(Term fun, Term arg) {
  TermNode n;
  n.kind = TermKind::App;
  n.hash = mix(mix(4, fun.hash()), arg.hash());
  n.loose = std::max(fun.loose(), arg.loose());
  n.has_free = fun.has_free() || arg.has_free();
  n.has_cont = fun.has_cont() || arg.has_cont();
  n.mask = fun.const_mask() | arg.const_mask();
  n.a = std::move(fun);
  n.b = std::move(arg);
  return Access::make(std::move(n));
}

Term Term::cont(Stack stack) {
  TermNode n;
  n.kind = TermKind::Cont;
  n.hash = mix(5, stack.hash());
  n.has_cont = true;
  n.mask = stack.const_mask();
  n.stack = std::move(stack);
  return Access::make(std::move(n));
}

Term Term::constant(ConstId id) {
  TermNode n;
  n.kind = TermKind::Const;
  n.id = id;
  n.hash = mix(6, id);
  n.mask = mask_bit(id);
  return Access::make(std::move(n));
}

bool operator==(const Term& a, const Term& b) {
  if (a.null() || b.null()) return a.null() && b.null();
  return term_eq(Access::node(a), Access::node(b));
}

// ---------------------------------------------------------------------------
// Stacks

Stack Stack::bottom(ConstId alpha) {
  if (ConstantTable::instance().kind(alpha) != ConstKind::StackBottom) {
    throw SyntaxError("'" + std::string(ConstantTable::instance().name(alpha)) +
                      "' is not a stack constant");
  }
  StackNode n;
  n.bottom = alpha;
  n.hash = mix(7, alpha);
  n.mask = mask_bit(alpha);
  return Access::make(std::move(n));
}

Stack Stack::push(Term top, Stack rest) {
  if (!top.closed()) throw SyntaxError("terms pushed on a stack must be closed");
  StackNode n;
  n.bottom = rest.bottom_id();
  n.hash = mix(mix(8, top.hash()), rest.hash());
  n.depth = rest.depth() + 1;
  n.mask = top.const_mask() | rest.const_mask();
  n.has_cont = top.has_cont() || rest.has_cont();
  n.top = std::move(top);
  n.rest = std::move(rest);
  return Access::make(std::move(n));
}

Stack Stack::of(std::initializer_list<Term> items, Stack bottom) {
  return of(std::vector<Term>(items), std::move(bottom));
}

Stack Stack::of(const std::vector<Term>& items, Stack bottom) {
  Stack s = std::move(bottom);
  for (auto it = items.rbegin(); it != items.rend(); ++it) s = push(*it, s);
  return s;
}

std::optional<Stack> Stack::drop(std::size_t k) const {
  if (k > depth()) return std::nullopt;
  const Stack* s = this;
  for (std::size_t i = 0; i < k; ++i) s = &s->rest();
  return *s;
}

std::optional<Term> Stack::at(std::size_t k) const {
  if (k >= depth()) return std::nullopt;
  const Stack* s = this;
  for (std::size_t i = 0; i < k; ++i) s = &s->rest();
  return s->top();
}

bool operator==(const Stack& a, const Stack& b) {
  if (a.null() || b.null()) return a.null() && b.null();
  return stack_eq(Access::node(a), Access::node(b));
}

std::size_t Process::hash() const { return mix(head.hash(), stack.hash()); }

// ---------------------------------------------------------------------------
// Named construction

Term var(std::string name) { return Term::free(std::move(name)); }

namespace {

Term abstract_at(const std::string& name, const Term& t, std::uint32_t depth) {
  if (!t.has_free()) return t;
  switch (t.kind()) {
    case TermKind::Free:
      return t.name() == name ? Term::bound(depth) : t;
    case TermKind::Lam:
      return Term::lam(t.name(), abstract_at(name, t.body(), depth + 1));
    case TermKind::App:
      return Term::app(abstract_at(name, t.fun(), depth), abstract_at(name, t.arg(), depth));
    default:
      return t;
  }
}

Term open_at(const Term& t, std::uint32_t depth, const Term& u) {
  if (t.loose() <= depth) return t;
  switch (t.kind()) {
    case TermKind::Bound:
      if (t.index() == depth) return u;
      return Term::bound(t.index() - 1);
    case TermKind::Lam:
      return Term::lam(t.name(), open_at(t.body(), depth + 1, u));
    case TermKind::App:
      return Term::app(open_at(t.fun(), depth, u), open_at(t.arg(), depth, u));
    default:
      return t;
  }
}

Term subst_var_rec(const Term& t, std::string_view x, const Term& u) {
  if (!t.has_free()) return t;
  switch (t.kind()) {
    case TermKind::Free:
      return t.name() == x ? u : t;
    case TermKind::Lam:
      return Term::lam(t.name(), subst_var_rec(t.body(), x, u));
    case TermKind::App:
      return Term::app(subst_var_rec(t.fun(), x, u), subst_var_rec(t.arg(), x, u));
    default:
      return t;
  }
}

}  // namespace

Term abstract(const std::string& name, const Term& t) { return abstract_at(name, t, 0); }

Term lam(const std::string& name, const Term& body) {
  return Term::lam(name, abstract_at(name, body, 0));
}

Term lam(std::initializer_list<std::string> names, const Term& body) {
  Term t = body;
  for (auto it = std::rbegin(names); it != std::rend(names); ++it) t = lam(*it, t);
  return t;
}

Term app(const Term& fun, const Term& arg) { return Term::app(fun, arg); }

Term app(const Term& fun, std::initializer_list<Term> args) {
  Term t = fun;
  for (const auto& a : args) t = Term::app(t, a);
  return t;
}

Term constant(std::string_view name) {
  auto id = ConstantTable::instance().find(name);
  if (!id) throw SyntaxError("unknown constant '" + std::string(name) + "'");
  if (ConstantTable::instance().kind(*id) == ConstKind::StackBottom) {
    throw SyntaxError("'" + std::string(name) + "' is a stack constant, not a term");
  }
  return Term::constant(*id);
}

Stack stack_bottom(std::string_view name) {
  auto id = ConstantTable::instance().find(name);
  if (!id) throw SyntaxError("unknown stack constant '" + std::string(name) + "'");
  return Stack::bottom(*id);
}

Term open(const Term& body, const Term& u) { return open_at(body, 0, u); }

Term subst_var(const Term& t, std::string_view x, const Term& u) {
  if (u.loose() != 0) throw SyntaxError("subst_var: replacement must be locally closed");
  return subst_var_rec(t, x, u);
}

// ---------------------------------------------------------------------------
// Constant substitution

std::uint64_t ConstSubstitution::mask() const {
  std::uint64_t m = 0;
  for (const auto& [c, _] : terms) m |= mask_bit(c);
  for (const auto& [a, _] : stacks) m |= mask_bit(a);
  return m;
}

namespace {

struct ConstSubst {
  const ConstSubstitution& sigma;
  std::uint64_t mask;

  Term term(const Term& t) const {
    if ((t.const_mask() & mask) == 0) return t;
    switch (t.kind()) {
      case TermKind::Const: {
        auto it = sigma.terms.find(t.const_id());
        return it == sigma.terms.end() ? t : it->second;
      }
      case TermKind::Lam:
        return Term::lam(t.name(), term(t.body()));
      case TermKind::App:
        return Term::app(term(t.fun()), term(t.arg()));
      case TermKind::Cont:
        return Term::cont(stack(t.stack()));
      default:
        return t;
    }
  }

  Stack stack(const Stack& s) const {
    if ((s.const_mask() & mask) == 0) return s;
    if (s.is_bottom()) {
      auto it = sigma.stacks.find(s.bottom_id());
      return it == sigma.stacks.end() ? s : it->second;
    }
    return Stack::push(term(s.top()), stack(s.rest()));
  }
};

void require_inert(ConstId c) {
  if (ConstantTable::instance().kind(c) != ConstKind::Inert) {
    throw SyntaxError("'" + std::string(ConstantTable::instance().name(c)) +
                      "' is not an inert constant");
  }
}

ConstSubstitution single_term(ConstId c, const Term& u) {
  require_inert(c);
  if (!u.closed()) throw SyntaxError("constant substitution requires a closed term");
  ConstSubstitution s;
  s.terms.emplace(c, u);
  return s;
}

ConstSubstitution single_stack(ConstId alpha, const Stack& pi0) {
  if (ConstantTable::instance().kind(alpha) != ConstKind::StackBottom) {
    throw SyntaxError("'" + std::string(ConstantTable::instance().name(alpha)) +
                      "' is not a stack constant");
  }
  ConstSubstitution s;
  s.stacks.emplace(alpha, pi0);
  return s;
}

}  // namespace

Term ConstSubstitution::apply(const Term& t) const { return ConstSubst{*this, mask()}.term(t); }
Stack ConstSubstitution::apply(const Stack& s) const { return ConstSubst{*this, mask()}.stack(s); }
Process ConstSubstitution::apply(const Process& p) const {
  ConstSubst f{*this, mask()};
  return Process{f.term(p.head), f.stack(p.stack)};
}

Term subst_const(const Term& t, ConstId c, const Term& u) { return single_term(c, u).apply(t); }
Stack subst_const(const Stack& s, ConstId c, const Term& u) { return single_term(c, u).apply(s); }
Process subst_const(const Process& p, ConstId c, const Term& u) {
  return single_term(c, u).apply(p);
}

Term subst_stack_const(const Term& t, ConstId alpha, const Stack& pi0) {
  return single_stack(alpha, pi0).apply(t);
}
Stack subst_stack_const(const Stack& s, ConstId alpha, const Stack& pi0) {
  return single_stack(alpha, pi0).apply(s);
}
Process subst_stack_const(const Process& p, ConstId alpha, const Stack& pi0) {
  return single_stack(alpha, pi0).apply(p);
}

// ---------------------------------------------------------------------------
// Queries

namespace {

void collect(const Term& t, std::set<ConstId>& out);

void collect(const Stack& s, std::set<ConstId>& out) {
  for (const Stack* cur = &s;; cur = &cur->rest()) {
    if (cur->is_bottom()) {
      out.insert(cur->bottom_id());
      return;
    }
    collect(cur->top(), out);
  }
}

void collect(const Term& t, std::set<ConstId>& out) {
  if (t.const_mask() == 0) return;
  switch (t.kind()) {
    case TermKind::Const:
      out.insert(t.const_id());
      return;
    case TermKind::Lam:
      collect(t.body(), out);
      return;
    case TermKind::App:
      collect(t.fun(), out);
      collect(t.arg(), out);
      return;
    case TermKind::Cont:
      collect(t.stack(), out);
      return;
    default:
      return;
  }
}

bool occurs_rec(ConstId c, const Stack& s);

bool occurs_rec(ConstId c, const Term& t) {
  if ((t.const_mask() & mask_bit(c)) == 0) return false;
  switch (t.kind()) {
    case TermKind::Const:
      return t.const_id() == c;
    case TermKind::Lam:
      return occurs_rec(c, t.body());
    case TermKind::App:
      return occurs_rec(c, t.fun()) || occurs_rec(c, t.arg());
    case TermKind::Cont:
      return occurs_rec(c, t.stack());
    default:
      return false;
  }
}

bool occurs_rec(ConstId c, const Stack& s) {
  for (const Stack* cur = &s;; cur = &cur->rest()) {
    if ((cur->const_mask() & mask_bit(c)) == 0) return false;
    if (cur->is_bottom()) return cur->bottom_id() == c;
    if (occurs_rec(c, cur->top())) return true;
  }
}

void collect_free(const Term& t, std::set<std::string>& out) {
  if (!t.has_free()) return;
  switch (t.kind()) {
    case TermKind::Free:
      out.insert(t.name());
      return;
    case TermKind::Lam:
      collect_free(t.body(), out);
      return;
    case TermKind::App:
      collect_free(t.fun(), out);
      collect_free(t.arg(), out);
      return;
    default:
      return;
  }
}

}  // namespace

bool occurs(ConstId c, const Term& t) { return occurs_rec(c, t); }
bool occurs(ConstId c, const Stack& s) { return occurs_rec(c, s); }
bool occurs(ConstId c, const Process& p) { return occurs_rec(c, p.head) || occurs_rec(c, p.stack); }

std::set<ConstId> constants_of(const Term& t) {
  std::set<ConstId> out;
  collect(t, out);
  return out;
}
std::set<ConstId> constants_of(const Stack& s) {
  std::set<ConstId> out;
  collect(s, out);
  return out;
}
std::set<ConstId> constants_of(const Process& p) {
  std::set<ConstId> out;
  collect(p.head, out);
  collect(p.stack, out);
  return out;
}

std::set<std::string> free_vars(const Term& t) {
  std::set<std::string> out;
  collect_free(t, out);
  return out;
}

// ---------------------------------------------------------------------------
// Numerals

const Term& zero() {
  static const Term t = lam({"x", "f"}, var("x"));
  return t;
}

const Term& succ() {
  static const Term t =
      lam({"n", "x", "f"}, app(var("f"), app(var("n"), {var("x"), var("f")})));
  return t;
}

Term numeral(Nat n) {
  Term t = zero();
  for (Nat i = 0; i < n; ++i) t = Term::app(succ(), t);
  return t;
}

std::optional<Nat> decode_numeral(const Term& t) {
  Nat count = 0;
  const Term* cur = &t;
  while (cur->kind() == TermKind::App && cur->fun() == succ()) {
    ++count;
    cur = &cur->arg();
  }
  if (*cur == zero()) return count;
  return std::nullopt;
}

}  // namespace krivine

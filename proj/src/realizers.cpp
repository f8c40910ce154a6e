#include "krivine/realizers.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>

#include "json.hpp"
#include "krivine/codec.hpp"
#include "krivine/machine.hpp"
#include "krivine/text.hpp"

namespace krivine {

namespace {

Term parse_library_term(std::string_view text) {
  ParseOptions options;
  options.allow_free_vars = true;
  return parse_term(text, options);
}

RealizerEntry make_entry(std::string name, Term term, std::vector<std::string> contract,
                         std::optional<std::string> formula = std::nullopt) {
  if (!term.closed()) throw RealizerError("realizer " + name + " is not closed");
  if (!term.proof_like()) throw RealizerError("realizer " + name + " is not proof-like");
  return RealizerEntry{std::move(name), std::move(term), std::move(formula), std::move(contract)};
}

Term tuple_term(const std::vector<Nat>& values) { return encode_tuple(values); }

std::vector<Nat> prefix(const std::vector<Nat>& v, std::size_t k) {
  return std::vector<Nat>(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k));
}

}  // namespace

// ---------------------------------------------------------------------------
// Basic terms

const Term& identity() {
  static const Term t = parse_term("\\x.x");
  return t;
}

const Term& delta() {
  static const Term t = parse_term("\\x.x x");
  return t;
}

const Term& delta_prime() {
  static const Term t = parse_term("\\x.x x (\\y.y)");
  return t;
}

const Term& first() {
  static const Term t = parse_term("\\p.p (\\x y.x)");
  return t;
}

const Term& second() {
  static const Term t = parse_term("\\p.p (\\x y.y)");
  return t;
}

std::vector<RealizerEntry> basic_terms() {
  return {
      make_entry("I", identity(), {"I * u.pi > u * pi"}),
      make_entry("delta", delta(), {"delta * delta.a > delta delta * a (period 2)"}),
      make_entry("delta_prime", delta_prime(), {"delta' delta' * a >3 delta' delta' * I.a"}),
      make_entry("zero", zero(), {"0 * x.f.pi > x * pi"}),
      make_entry("succ", succ(), {"s * n.x.f.pi > f * (n x f).pi"}),
      make_entry("pair", pair_combinator(), {"P * a.b.f.pi > f * a.b.pi"}),
      make_entry("fst", first(), {"fst * (P a b).pi > a * pi"}),
      make_entry("snd", second(), {"snd * (P a b).pi > b * pi"}),
  };
}

std::vector<RealizerEntry> identity_like_suite() {
  const std::vector<std::string> contract{"t * u.pi > u * pi"};
  return {
      make_entry("id_I", identity(), contract),
      make_entry("id_II", app(identity(), identity()), contract),
      make_entry("id_deltaI", app(delta(), identity()), contract),
      make_entry("id_cc_const", parse_term("\\x.cc (\\k.x)"), contract),
      make_entry("id_cc_jump", parse_term("cc (\\k.k (\\x.x) (\\x.x x) k)"), contract),
  };
}

// ---------------------------------------------------------------------------
// Enumeration

Nat cantor_pair(Nat a, Nat b) {
  Nat s = 0, s1 = 0, tri = 0, index = 0;
  const bool overflow = __builtin_add_overflow(a, b, &s) || __builtin_add_overflow(s, 1, &s1) ||
                        __builtin_mul_overflow(s % 2 == 0 ? s / 2 : s, s % 2 == 0 ? s1 : s1 / 2, &tri) ||
                        __builtin_add_overflow(tri, b, &index);
  if (overflow) throw RealizerError("cantor_pair overflow");
  return index;
}

std::pair<Nat, Nat> cantor_unpair(Nat index) {
  // w = floor((sqrt(8z + 1) - 1) / 2), corrected for rounding.
  auto tri = [](Nat w) { return w % 2 == 0 ? (w / 2) * (w + 1) : w * ((w + 1) / 2); };
  Nat w = static_cast<Nat>((std::sqrt(8.0L * static_cast<long double>(index) + 1.0L) - 1.0L) / 2.0L);
  while (w > 0 && tri(w) > index) --w;
  while (tri(w + 1) <= index) ++w;
  const Nat b = index - tri(w);
  return {w - b, b};
}

std::vector<Nat> next_tuple(std::size_t h, Nat index) {
  if (h == 0) throw RealizerError("next_tuple: h must be positive");
  std::vector<Nat> out;
  for (std::size_t k = h; k > 1; --k) {
    auto [a, rest] = cantor_unpair(index);
    out.push_back(a);
    index = rest;
  }
  out.push_back(index);
  return out;
}

Nat tuple_index(const std::vector<Nat>& tuple) {
  if (tuple.empty()) throw RealizerError("tuple_index: empty tuple");
  Nat index = tuple.back();
  for (std::size_t k = tuple.size() - 1; k > 0; --k) index = cantor_pair(tuple[k - 1], index);
  return index;
}

Nat enumeration_bound(std::size_t h, Nat box) { return tuple_index(std::vector<Nat>(h, box)); }

ConstId next_instruction(std::size_t h) {
  if (h == 0) throw RealizerError("next: h must be positive");
  return define_native("next" + std::to_string(h), [h](const Process& p) -> std::optional<Process> {
    auto rest = p.stack.drop(2);
    if (!rest) return std::nullopt;
    auto m = decode_tuple(*p.stack.at(0));
    if (!m || m->size() != h) return std::nullopt;
    try {
      const Nat index = tuple_index(*m);
      if (index == std::numeric_limits<Nat>::max()) return std::nullopt;
      return Process{*p.stack.at(1), Stack::push(tuple_term(next_tuple(h, index + 1)), *rest)};
    } catch (const RealizerError&) {
      return std::nullopt;
    }
  });
}

// ---------------------------------------------------------------------------
// Histories

Term encode_history_entry(const HistoryRecord& record) {
  return cons(tuple_term(record.m),
              cons(tuple_term(record.n), cons(record.u, cons(Term::cont(record.pi), nil()))));
}

std::optional<HistoryRecord> decode_history_entry(const Term& t) {
  std::vector<Term> fields;
  Term cur = t;
  while (fields.size() < 4) {
    auto cell = uncons(cur);
    if (!cell) return std::nullopt;
    fields.push_back(cell->first);
    cur = cell->second;
  }
  if (cur != nil()) return std::nullopt;
  auto m = decode_tuple(fields[0]);
  auto n = decode_tuple(fields[1]);
  if (!m || !n || m->size() != n->size()) return std::nullopt;
  if (fields[3].kind() != TermKind::Cont) return std::nullopt;
  return HistoryRecord{*m, *n, fields[2], fields[3].stack()};
}

Term encode_history(const std::vector<HistoryRecord>& records) {
  Term t = nil();
  for (auto it = records.rbegin(); it != records.rend(); ++it) t = cons(encode_history_entry(*it), t);
  return t;
}

std::optional<std::vector<HistoryRecord>> decode_history(const Term& t) {
  std::vector<HistoryRecord> out;
  Term cur = t;
  while (cur != nil()) {
    auto cell = uncons(cur);
    if (!cell) return std::nullopt;
    auto entry = decode_history_entry(cell->first);
    if (!entry) return std::nullopt;
    out.push_back(std::move(*entry));
    cur = cell->second;
  }
  return out;
}

bool is_functional(const std::vector<HistoryRecord>& records) {
  for (std::size_t i = 0; i < records.size(); ++i) {
    for (std::size_t j = i + 1; j < records.size(); ++j) {
      if (records[i].m == records[j].m && !(records[i] == records[j])) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Halting problem

ConstId theta_halt() {
  static const ConstId id = make_theta("theta_halt", function("not_halt"), 1, 1, ThetaForm::Numerals);
  return id;
}

Term halting_step(const Term& m, const Term& u, const Term& k) {
  theta_halt();
  static const Term tmpl = parse_library_term("\\p v. theta_halt M p (K (U p (\\p v.v))) v");
  return subst_var(subst_var(subst_var(tmpl, "M", m), "U", u), "K", k);
}

RealizerEntry build_t_H() {
  const Term body = app(var("u"), {zero(), halting_step(var("m"), var("u"), var("k"))});
  const Term t = lam({"m", "u"}, app(Term::constant(builtin::cc()), lam("k", body)));
  return make_entry("t_H", t,
                    {"t_H * m.u.pi > u * 0.T[m,u,k_pi].pi",
                     "T[m,u,k_pi] * p.u'.pi' > u' * pi'  if m runs for at least p steps",
                     "T[m,u,k_pi] * p.u'.pi' > u * p.(\\p v.v).pi  if m halts in fewer than p steps"},
                    "halt");
}

// ---------------------------------------------------------------------------
// Wild realizer

Term wild_T2(const Term& y, const Term& m) {
  static const Term tmpl =
      parse_library_term("\\z w. quote (\\n. eq_nat n M (eq w (Y Y) (\\x.x) w) w)");
  return subst_var(subst_var(tmpl, "Y", y), "M", m);
}

Term wild_T1(const Term& u, const Term& m) {
  return lam("y", app(u, {zero(), wild_T2(var("y"), m)}));
}

Term wild_T0(const Term& u, const Term& m) {
  const Term t1 = wild_T1(u, m);
  return app(t1, t1);
}

RealizerEntry build_t_leq() {
  const Term t = lam("u", app(Term::constant(builtin::quote()), lam("m", wild_T0(var("u"), var("m")))));
  return make_entry("t_leq", t,
                    {"t_leq * u.pi > u * 0.T2[T1[u,n_pi],n_pi].pi",
                     "T2[T1[u,n_pi],n_pi] * n.u'.pi' > I * pi'  if u' = T0[u,n_pi] and pi' = pi",
                     "T2[T1[u,n_pi],n_pi] * n.u'.pi' > u' * pi'  otherwise"},
                    "leq");
}

// ---------------------------------------------------------------------------
// Universal realizer

namespace {

struct UniversalCache {
  std::mutex mutex;
  std::map<std::string, UniversalRealizer> built;
};

UniversalCache& universal_cache() {
  static UniversalCache cache;
  return cache;
}

Term apply_T(ConstId Ti, const std::vector<Nat>& m, const std::vector<Nat>& n, const Term& history) {
  return app(Term::constant(Ti), {tuple_term(m), tuple_term(n), history});
}

}  // namespace

UniversalRealizer build_t_phi(const ArithFormula& f) {
  if (f.h == 0) throw RealizerError("t_phi needs at least one exists/forall block");
  if (f.leading != 0) throw RealizerError("t_phi does not support leading universals");
  auto& cache = universal_cache();
  std::lock_guard lock(cache.mutex);
  if (auto it = cache.built.find(f.name); it != cache.built.end()) return it->second;

  UniversalRealizer r;
  const std::size_t h = f.h;
  r.h = h;
  r.next = next_instruction(h);
  r.theta = make_theta(f.name + "_theta", f.fn, h, h, ThetaForm::Tuples);
  auto& tbl = ConstantTable::instance();
  for (std::size_t i = 1; i <= h; ++i) {
    r.T.push_back(tbl.declare(f.name + "_T" + std::to_string(i), ConstKind::Instruction));
  }
  r.N = tbl.declare(f.name + "_N", ConstKind::Instruction);
  r.L = tbl.declare(f.name + "_L", ConstKind::Instruction);

  const std::vector<ConstId> T = r.T;
  const ConstId theta = r.theta, N = r.N, L = r.L, next = r.next;

  for (std::size_t i = 1; i <= h; ++i) {
    define_native(f.name + "_T" + std::to_string(i),
                  [=](const Process& p) -> std::optional<Process> {
                    auto pi = p.stack.drop(5);
                    if (!pi) return std::nullopt;
                    auto m = decode_tuple(*p.stack.at(0));
                    auto n = decode_tuple(*p.stack.at(1));
                    auto ni = decode_numeral(*p.stack.at(3));
                    if (!m || !n || !ni || m->size() != h || n->size() != i - 1) return std::nullopt;
                    const Term history = *p.stack.at(2);
                    const Term u = *p.stack.at(4);
                    n->push_back(*ni);
                    const Term extended =
                        cons(encode_history_entry(HistoryRecord{prefix(*m, i), *n, u, *pi}), history);
                    if (i < h) {
                      return Process{u, Stack::of({numeral((*m)[i]), apply_T(T[i], *m, *n, extended)}, *pi)};
                    }
                    const Term resume = app(Term::constant(N), {tuple_term(*m), extended});
                    return Process{Term::constant(theta),
                                   Stack::of({tuple_term(*m), tuple_term(*n), u, resume}, *pi)};
                  });
  }

  define_native(f.name + "_N", [=](const Process& p) -> std::optional<Process> {
    auto pi = p.stack.drop(2);
    if (!pi) return std::nullopt;
    const Term m = *p.stack.at(0);
    const Term history = *p.stack.at(1);
    const Term k = lam("t", app(Term::constant(L), {var("t"), history}));
    return Process{Term::constant(next), Stack::of({m, k}, *pi)};
  });

  define_native(f.name + "_L", [=](const Process& p) -> std::optional<Process> {
    if (!p.stack.drop(2)) return std::nullopt;
    auto m = decode_tuple(*p.stack.at(0));
    const Term history = *p.stack.at(1);
    auto records = decode_history(history);
    if (!m || m->size() != h || !records) return std::nullopt;
    const HistoryRecord* best = nullptr;
    for (const auto& rec : *records) {
      if (rec.m.size() >= h) continue;
      if (prefix(*m, rec.m.size()) != rec.m) continue;
      if (!best || rec.m.size() > best->m.size()) best = &rec;
    }
    if (!best) return std::nullopt;
    const std::size_t i = best->m.size();
    return Process{best->u,
                   Stack::of({numeral((*m)[i]), apply_T(T[i], *m, best->n, history)}, best->pi)};
  });

  const Term entry0 = cons(nil(), cons(nil(), cons(var("u"), cons(var("k"), nil()))));
  const Term start = apply_T(T[0], std::vector<Nat>(h, 0), {}, cons(entry0, nil()));
  const Term t = lam("u", app(Term::constant(builtin::cc()), lam("k", app(var("u"), {zero(), start}))));
  r.entry = make_entry("t_phi_" + f.name, t,
                       {"t_phi * u0.pi0 > u0 * 0.T1[<0>, <>, H0].pi0",
                        "T_i[m, n, H] * n_i.u_i.pi_i > u_i * m_{i+1}.T_{i+1}[m, n n_i, H'].pi_i",
                        "T_h[m, n, H] * n_h.u_h.pi_h > theta * <m>.<n n_h>.u_h.N[m, H'].pi_h",
                        "N[m, H] * pi > next * <m>.(\\t.L t H).pi",
                        "L[m, H] * pi > u_i * m_{i+1}.T_{i+1}[m, n_i, H].pi_i"},
                       f.name);
  cache.built.emplace(f.name, r);
  return r;
}

Term universal_T(const UniversalRealizer& r, std::size_t i, const std::vector<Nat>& m,
                 const std::vector<Nat>& n, const Term& history) {
  if (i == 0 || i > r.h) throw RealizerError("universal_T: block index out of range");
  return apply_T(r.T[i - 1], m, n, history);
}

// ---------------------------------------------------------------------------
// Miscellaneous

RealizerEntry storage_operator() {
  return make_entry("storage", parse_library_term("\\f nu. nu f (\\r x. r ((\\n x f. f (n x f)) x)) #0"),
                    {"T * f.nu.pi > f * n.pi  when nu computes n"});
}

RealizerEntry toy_h1() {
  return make_entry("toy_h1", parse_library_term("\\u. u #0 (\\n v. v)"),
                    {"toy_h1 * u.pi > u * 0.(\\n v.v).pi"}, "leq");
}

RealizerEntry fig_scheme_mock() {
  // Each T_i restores the stack of the node it answers on through a
  // continuation captured when that node was created.
  static constexpr std::string_view text =
      "\\u0. cc (\\v0. u0 #1 "
      "(\\n1 u1. cc (\\v1. v0 (u0 #0 "
      "(\\n2 u2. cc (\\v2. u2 #3 "
      "(\\n3 u3. v2 (u2 #2 "
      "(\\n4 u4. cc (\\v4. v0 (u0 #2 "
      "(\\n5 u5. v1 (u1 #0 "
      "(\\n6 u6. v4 u4))))))))))))))";
  return make_entry("fig_scheme_mock", parse_library_term(text),
                    {"lines: k0 k0 k2 k2 k0 k1, final k4 * a4"}, "phi4");
}

// ---------------------------------------------------------------------------
// Registry

namespace {

struct RealizerRegistry {
  std::mutex mutex;
  std::map<std::string, RealizerEntry, std::less<>> custom;
};

RealizerRegistry& registry() {
  static RealizerRegistry reg;
  return reg;
}

std::optional<RealizerEntry> builtin_realizer(std::string_view name) {
  if (name == "t_H") return build_t_H();
  if (name == "t_leq") return build_t_leq();
  if (name == "storage") return storage_operator();
  if (name == "toy_h1") return toy_h1();
  if (name == "fig_scheme_mock") return fig_scheme_mock();
  for (auto& e : basic_terms()) {
    if (e.name == name) return e;
  }
  for (auto& e : identity_like_suite()) {
    if (e.name == name) return e;
  }
  if (name.starts_with("t_phi_")) {
    auto f = find_formula(name.substr(6));
    if (f && f->h > 0 && f->leading == 0) return build_t_phi(*f).entry;
  }
  return std::nullopt;
}

}  // namespace

std::vector<std::string> realizer_names() {
  std::vector<std::string> out{"t_H", "t_leq", "storage", "toy_h1", "fig_scheme_mock"};
  for (const auto& e : basic_terms()) out.push_back(e.name);
  for (const auto& e : identity_like_suite()) out.push_back(e.name);
  for (const auto& name : formula_names()) {
    auto f = find_formula(name);
    if (f && f->h > 0 && f->leading == 0) out.push_back("t_phi_" + name);
  }
  auto& reg = registry();
  std::lock_guard lock(reg.mutex);
  for (const auto& [name, _] : reg.custom) out.push_back(name);
  return out;
}

std::optional<RealizerEntry> find_realizer(std::string_view name) {
  {
    auto& reg = registry();
    std::lock_guard lock(reg.mutex);
    if (auto it = reg.custom.find(name); it != reg.custom.end()) return it->second;
  }
  return builtin_realizer(name);
}

RealizerEntry realizer(std::string_view name) {
  auto r = find_realizer(name);
  if (!r) throw RealizerError("unknown realizer: " + std::string(name));
  return *r;
}

void register_realizer(const RealizerEntry& entry) {
  if (builtin_realizer(entry.name)) throw RealizerError("realizer already defined: " + entry.name);
  RealizerEntry checked = make_entry(entry.name, entry.term, entry.contract, entry.formula);
  auto& reg = registry();
  std::lock_guard lock(reg.mutex);
  if (!reg.custom.emplace(checked.name, checked).second) {
    throw RealizerError("realizer already defined: " + entry.name);
  }
}

std::vector<std::string> load_realizers_json(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw RealizerError(std::string("realizer manifest: ") + e.what());
  }
  if (!doc.is_object()) throw RealizerError("realizer manifest must be an object");
  std::vector<std::string> names;
  for (const auto& [name, spec] : doc.items()) {
    if (!spec.is_object()) throw RealizerError("realizer manifest entry must be an object: " + name);
    std::optional<std::string> formula_name;
    if (spec.contains("formula")) {
      if (!spec["formula"].is_string()) throw RealizerError("formula must be a string: " + name);
      formula_name = spec["formula"].get<std::string>();
    }
    RealizerEntry entry;
    if (spec.contains("term") && spec["term"].is_string()) {
      try {
        entry = make_entry(name, parse_term(spec["term"].get<std::string>()), {}, formula_name);
      } catch (const ParseError& e) {
        throw RealizerError("realizer " + name + ": " + e.what());
      }
    } else if (spec.contains("bundle") && spec["bundle"] == "t_phi" && formula_name) {
      entry = build_t_phi(formula(*formula_name)).entry;
      entry.name = name;
    } else {
      throw RealizerError("realizer " + name + " needs \"term\" or \"bundle\": \"t_phi\" with a formula");
    }
    register_realizer(entry);
    names.push_back(name);
  }
  return names;
}

}  // namespace krivine

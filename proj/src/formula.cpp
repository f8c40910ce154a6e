#include "krivine/formula.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <mutex>

#include "json.hpp"
#include "krivine/codec.hpp"
#include "krivine/machine.hpp"

namespace krivine {

// ---------------------------------------------------------------------------
// DSL

namespace {

struct Dsl;
using DslPtr = std::shared_ptr<const Dsl>;

struct Dsl {
  enum class Kind { Zero, Succ, Proj, Comp, Rec, Ref } kind;
  std::size_t arity = 0;
  std::size_t index = 0;
  std::vector<DslPtr> kids;
  std::optional<PrimRecFn> ref;
};

}  // namespace

struct PrimRecFn::Impl {
  std::string name;
  std::size_t arity = 0;
  Native native;
  DslPtr dsl;
  std::string source;
};

namespace {

using Lookup = std::function<std::optional<PrimRecFn>(std::string_view)>;

class DslParser {
 public:
  DslParser(std::string_view text, Lookup lookup) : text_(text), lookup_(std::move(lookup)) {}

  DslPtr parse() {
    DslPtr d = expr();
    skip();
    if (pos_ != text_.size()) fail("trailing input");
    return d;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw FormulaError("dsl: " + msg + " at " + std::to_string(pos_));
  }

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::string atom() {
    skip();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) &&
           text_[pos_] != '(' && text_[pos_] != ')') {
      ++pos_;
    }
    if (start == pos_) fail("expected an atom");
    return std::string(text_.substr(start, pos_ - start));
  }

  std::size_t number() {
    const std::string a = atom();
    if (!std::all_of(a.begin(), a.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      fail("expected a number, got '" + a + "'");
    }
    return std::stoul(a);
  }

  DslPtr named(const std::string& name) {
    if (name == "succ") {
      auto d = std::make_shared<Dsl>();
      d->kind = Dsl::Kind::Succ;
      d->arity = 1;
      return d;
    }
    auto fn = lookup_(name);
    if (!fn) fail("unknown function '" + name + "'");
    auto d = std::make_shared<Dsl>();
    d->kind = Dsl::Kind::Ref;
    d->arity = fn->arity();
    d->ref = *fn;
    return d;
  }

  DslPtr expr() {
    skip();
    if (pos_ >= text_.size()) fail("unexpected end");
    if (text_[pos_] != '(') return named(atom());
    ++pos_;
    const std::string head = atom();
    auto d = std::make_shared<Dsl>();
    if (head == "zero") {
      d->kind = Dsl::Kind::Zero;
      d->arity = number();
    } else if (head == "proj") {
      d->kind = Dsl::Kind::Proj;
      d->arity = number();
      d->index = number();
      if (d->index >= d->arity) fail("projection index out of range");
    } else if (head == "comp") {
      d->kind = Dsl::Kind::Comp;
      DslPtr g = expr();
      d->kids.push_back(g);
      skip();
      while (pos_ < text_.size() && text_[pos_] != ')') {
        d->kids.push_back(expr());
        skip();
      }
      const std::size_t m = d->kids.size() - 1;
      if (m == 0) fail("comp needs at least one inner function");
      if (g->arity != m) fail("comp: outer arity mismatch");
      d->arity = d->kids[1]->arity;
      for (std::size_t i = 2; i < d->kids.size(); ++i) {
        if (d->kids[i]->arity != d->arity) fail("comp: inner arities differ");
      }
    } else if (head == "rec") {
      d->kind = Dsl::Kind::Rec;
      d->kids.push_back(expr());
      d->kids.push_back(expr());
      if (d->kids[1]->arity != d->kids[0]->arity + 2) fail("rec: step arity must be base arity + 2");
      d->arity = d->kids[0]->arity + 1;
    } else {
      fail("unknown form '" + head + "'");
    }
    skip();
    if (pos_ >= text_.size() || text_[pos_] != ')') fail("expected ')'");
    ++pos_;
    return d;
  }

  std::string_view text_;
  Lookup lookup_;
  std::size_t pos_ = 0;
};

Nat eval_dsl(const Dsl& d, std::span<const Nat> args) {
  switch (d.kind) {
    case Dsl::Kind::Zero:
      return 0;
    case Dsl::Kind::Succ:
      return args[0] + 1;
    case Dsl::Kind::Proj:
      return args[d.index];
    case Dsl::Kind::Ref:
      return (*d.ref)(args);
    case Dsl::Kind::Comp: {
      std::vector<Nat> inner;
      inner.reserve(d.kids.size() - 1);
      for (std::size_t i = 1; i < d.kids.size(); ++i) inner.push_back(eval_dsl(*d.kids[i], args));
      return eval_dsl(*d.kids[0], inner);
    }
    case Dsl::Kind::Rec: {
      const Nat n = args[0];
      std::vector<Nat> step_args(args.size() + 1);
      for (std::size_t i = 1; i < args.size(); ++i) step_args[i + 1] = args[i];
      Nat acc = eval_dsl(*d.kids[0], args.subspan(1));
      for (Nat k = 0; k < n; ++k) {
        step_args[0] = k;
        step_args[1] = acc;
        acc = eval_dsl(*d.kids[1], step_args);
      }
      return acc;
    }
  }
  return 0;
}

PrimRecFn make_dsl(std::string name, std::string_view source, const Lookup& lookup);

}  // namespace

PrimRecFn PrimRecFn::native(std::string name, std::size_t arity, Native fn) {
  auto impl = std::make_shared<Impl>();
  impl->name = std::move(name);
  impl->arity = arity;
  impl->native = std::move(fn);
  return PrimRecFn(impl);
}

const std::string& PrimRecFn::name() const { return impl_->name; }
std::size_t PrimRecFn::arity() const { return impl_->arity; }
bool PrimRecFn::is_native() const { return static_cast<bool>(impl_->native); }
const std::string& PrimRecFn::source() const { return impl_->source; }

Nat PrimRecFn::operator()(std::span<const Nat> args) const {
  if (args.size() != impl_->arity) {
    throw FormulaError(impl_->name + ": expected " + std::to_string(impl_->arity) +
                       " arguments, got " + std::to_string(args.size()));
  }
  if (impl_->native) return impl_->native(args);
  return eval_dsl(*impl_->dsl, args);
}

// ---------------------------------------------------------------------------
// Turing machines

namespace {

Nat block_size(std::size_t s) {
  Nat n = 1;
  for (std::size_t i = 0; i < 3 * s; ++i) n *= 4 * (s + 1);
  return n;
}

Nat block_offset(std::size_t s) {
  Nat off = 0;
  for (std::size_t i = 0; i < s; ++i) off += block_size(i);
  return off;
}

}  // namespace

Nat tm_count() { return block_offset(kMaxTmStates + 1); }

TuringMachine tm_decode(Nat index) {
  for (std::size_t s = 0; s <= kMaxTmStates; ++s) {
    const Nat size = block_size(s);
    if (index < size) {
      TuringMachine tm;
      tm.states = s;
      const Nat radix = 4 * (s + 1);
      for (std::size_t pos = 0; pos < 3 * s; ++pos) {
        const Nat digit = index % radix;
        index /= radix;
        TmTransition t;
        t.next = static_cast<std::uint8_t>(digit % (s + 1));
        const Nat wm = digit / (s + 1);
        t.write = static_cast<std::uint8_t>(wm / 2);
        t.move = static_cast<std::uint8_t>(wm % 2);
        tm.table.push_back(t);
      }
      return tm;
    }
    index -= size;
  }
  throw FormulaError("machine index out of range");
}

Nat tm_encode(const TuringMachine& tm) {
  if (tm.states > kMaxTmStates || tm.table.size() != 3 * tm.states) {
    throw FormulaError("malformed machine table");
  }
  const Nat radix = 4 * (tm.states + 1);
  Nat local = 0;
  for (std::size_t pos = tm.table.size(); pos-- > 0;) {
    const auto& t = tm.table[pos];
    if (t.write > 1 || t.move > 1 || t.next > tm.states) throw FormulaError("malformed transition");
    local = local * radix + (Nat{t.write} * 2 + t.move) * (tm.states + 1) + t.next;
  }
  return block_offset(tm.states) + local;
}

std::optional<Nat> tm_steps_to_halt(const TuringMachine& tm, Nat cap) {
  if (tm.states == 0) return 0;
  std::vector<std::uint8_t> tape(64, 0);
  std::size_t head = 32;
  std::size_t q = 0;
  for (Nat steps = 0; steps < cap;) {
    const auto& t = tm.at(q, tape[head]);
    tape[head] = static_cast<std::uint8_t>(t.write + 1);
    if (t.move == 1) {
      if (++head == tape.size()) tape.resize(tape.size() * 2, 0);
    } else {
      if (head == 0) {
        tape.insert(tape.begin(), tape.size(), 0);
        head = tape.size() / 2;
      }
      --head;
    }
    q = t.next;
    ++steps;
    if (q == tm.states) return steps;
  }
  return std::nullopt;
}

Nat halt_predicate(Nat m, Nat n) {
  if (m >= tm_count()) throw FormulaError("machine index out of range");
  if (n == 0) return 0;
  return tm_steps_to_halt(tm_decode(m), n - 1).has_value() ? 1 : 0;
}

Nat tm_immediate() { return 0; }

Nat tm_loop() {
  TuringMachine tm;
  tm.states = 1;
  tm.table.assign(3, TmTransition{0, 1, 0});
  return tm_encode(tm);
}

Nat tm_three_steps() {
  // q0 on blank: write 0, right, q1.  q1 on blank: write 0, left, q0.
  // q0 on 0: halt.
  TuringMachine tm;
  tm.states = 2;
  tm.table.assign(6, TmTransition{0, 0, 0});
  tm.table[0] = TmTransition{0, 1, 1};
  tm.table[1] = TmTransition{0, 0, 2};
  return tm_encode(tm);
}

// ---------------------------------------------------------------------------
// Function registry

namespace {

Nat monus(Nat x, Nat y) { return x > y ? x - y : 0; }
Nat g_fn(Nat x, Nat y) { return x + monus(1, x) * y; }

struct FunctionRegistry {
  std::mutex mutex;
  std::map<std::string, PrimRecFn, std::less<>> fns;

  void add(const PrimRecFn& fn) { fns.emplace(fn.name(), fn); }

  FunctionRegistry() {
    using S = std::span<const Nat>;
    add(PrimRecFn::native("add", 2, [](S a) { return a[0] + a[1]; }));
    add(PrimRecFn::native("mul", 2, [](S a) { return a[0] * a[1]; }));
    add(PrimRecFn::native("monus", 2, [](S a) { return monus(a[0], a[1]); }));
    add(PrimRecFn::native("sg", 1, [](S a) -> Nat { return a[0] == 0 ? 0 : 1; }));
    add(PrimRecFn::native("is_zero", 1, [](S a) -> Nat { return a[0] == 0 ? 1 : 0; }));
    add(PrimRecFn::native("g", 2, [](S a) { return g_fn(a[0], a[1]); }));
    add(PrimRecFn::native("leq", 2, [](S a) -> Nat { return a[0] <= a[1] ? 0 : 1; }));
    // (x1, x2, y1, y2)
    add(PrimRecFn::native("phi4", 4, [](S a) -> Nat {
      return (a[0] == a[2] || g_fn(a[0], a[1]) > g_fn(a[2], a[3])) ? 0 : 1;
    }));
    add(PrimRecFn::native("halt", 2, [](S a) { return halt_predicate(a[0], a[1]); }));
    add(PrimRecFn::native("not_halt", 2, [](S a) { return 1 - halt_predicate(a[0], a[1]); }));
    // (m, n, p)
    add(PrimRecFn::native("f_halt", 3, [](S a) -> Nat {
      const bool ok = (a[1] > 0 && halt_predicate(a[0], a[1]) == 1) ||
                      (a[1] == 0 && halt_predicate(a[0], a[2]) == 0);
      return ok ? 0 : 1;
    }));
    add(PrimRecFn::native("true", 2, [](S) -> Nat { return 0; }));
    add(PrimRecFn::native("false", 2, [](S) -> Nat { return 1; }));

    Lookup local = [this](std::string_view n) -> std::optional<PrimRecFn> {
      auto it = fns.find(n);
      if (it == fns.end()) return std::nullopt;
      return it->second;
    };
    const std::pair<const char*, const char*> dsl_defs[] = {
        {"add_dsl", "(rec (proj 1 0) (comp succ (proj 3 1)))"},
        {"mul_dsl", "(rec (zero 1) (comp add_dsl (proj 3 1) (proj 3 2)))"},
        {"pred_dsl", "(rec (zero 0) (proj 2 0))"},
        {"monus_dsl", "(comp (rec (proj 1 0) (comp pred_dsl (proj 3 1))) (proj 2 1) (proj 2 0))"},
        {"sg_dsl", "(rec (zero 0) (comp succ (zero 2)))"},
        {"is_zero_dsl", "(rec (comp succ (zero 0)) (zero 2))"},
        {"g_dsl",
         "(comp add_dsl (proj 2 0)"
         " (comp mul_dsl (comp monus_dsl (comp succ (zero 2)) (proj 2 0)) (proj 2 1)))"},
        {"leq_dsl", "(comp sg_dsl monus_dsl)"},
        {"phi4_dsl",
         "(comp mul_dsl"
         " (comp sg_dsl (comp add_dsl (comp monus_dsl (proj 4 0) (proj 4 2))"
         "                            (comp monus_dsl (proj 4 2) (proj 4 0))))"
         " (comp is_zero_dsl (comp monus_dsl (comp g_dsl (proj 4 0) (proj 4 1))"
         "                                   (comp g_dsl (proj 4 2) (proj 4 3)))))"},
    };
    for (const auto& [name, src] : dsl_defs) add(make_dsl(name, src, local));
  }
};

FunctionRegistry& functions() {
  static FunctionRegistry registry;
  return registry;
}

PrimRecFn make_dsl(std::string name, std::string_view source, const Lookup& lookup) {
  auto impl = std::make_shared<PrimRecFn::Impl>();
  impl->dsl = DslParser(source, lookup).parse();
  impl->arity = impl->dsl->arity;
  impl->name = std::move(name);
  impl->source = std::string(source);
  return PrimRecFn::from_impl(impl);
}

}  // namespace

PrimRecFn PrimRecFn::dsl(std::string name, std::string_view source) {
  return make_dsl(std::move(name), source, [](std::string_view n) { return find_function(n); });
}

void register_function(const PrimRecFn& fn) {
  auto& reg = functions();
  std::lock_guard lock(reg.mutex);
  if (!reg.fns.emplace(fn.name(), fn).second) {
    throw FormulaError("function '" + fn.name() + "' already registered");
  }
}

std::optional<PrimRecFn> find_function(std::string_view name) {
  auto& reg = functions();
  std::lock_guard lock(reg.mutex);
  auto it = reg.fns.find(name);
  if (it == reg.fns.end()) return std::nullopt;
  return it->second;
}

PrimRecFn function(std::string_view name) {
  auto fn = find_function(name);
  if (!fn) throw FormulaError("unknown function '" + std::string(name) + "'");
  return *fn;
}

// ---------------------------------------------------------------------------
// Formulas

Nat ArithFormula::eval(const std::vector<Nat>& z, const std::vector<Nat>& x,
                       const std::vector<Nat>& y) const {
  if (z.size() != leading || x.size() != h || y.size() != h) {
    throw FormulaError(name + ": wrong number of arguments");
  }
  std::vector<Nat> args;
  args.reserve(leading + 2 * h);
  args.insert(args.end(), z.begin(), z.end());
  args.insert(args.end(), x.begin(), x.end());
  args.insert(args.end(), y.begin(), y.end());
  return fn(args);
}

ArithFormula make_formula(std::string name, std::size_t h, std::size_t leading, PrimRecFn fn) {
  if (fn.arity() != leading + 2 * h) {
    throw FormulaError(name + ": function arity " + std::to_string(fn.arity()) +
                       " does not match " + std::to_string(leading + 2 * h));
  }
  return ArithFormula{std::move(name), h, leading, std::move(fn)};
}

namespace {

struct FormulaRegistry {
  std::mutex mutex;
  std::map<std::string, ArithFormula, std::less<>> formulas;

  FormulaRegistry() {
    for (auto f : {make_formula("leq", 1, 0, function("leq")),
                   make_formula("phi4", 2, 0, function("phi4")),
                   make_formula("halt", 1, 1, function("f_halt")),
                   make_formula("true", 1, 0, function("true")),
                   make_formula("false", 1, 0, function("false"))}) {
      formulas.emplace(f.name, f);
    }
  }
};

FormulaRegistry& formula_registry() {
  static FormulaRegistry registry;
  return registry;
}

}  // namespace

void register_formula(const ArithFormula& f) {
  auto& reg = formula_registry();
  std::lock_guard lock(reg.mutex);
  if (!reg.formulas.emplace(f.name, f).second) {
    throw FormulaError("formula '" + f.name + "' already registered");
  }
}

std::optional<ArithFormula> find_formula(std::string_view name) {
  auto& reg = formula_registry();
  std::lock_guard lock(reg.mutex);
  auto it = reg.formulas.find(name);
  if (it == reg.formulas.end()) return std::nullopt;
  return it->second;
}

ArithFormula formula(std::string_view name) {
  auto f = find_formula(name);
  if (!f) throw FormulaError("unknown formula '" + std::string(name) + "'");
  return *f;
}

std::vector<std::string> formula_names() {
  auto& reg = formula_registry();
  std::lock_guard lock(reg.mutex);
  std::vector<std::string> out;
  for (const auto& [name, _] : reg.formulas) out.push_back(name);
  return out;
}

std::vector<std::string> load_formulas_json(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw FormulaError(std::string("formula file: ") + e.what());
  }
  if (!doc.is_array()) doc = nlohmann::json::array({doc});
  std::vector<std::string> names;
  for (const auto& entry : doc) {
    try {
      const std::string name = entry.at("name").get<std::string>();
      const auto h = entry.at("h").get<std::size_t>();
      const auto leading = entry.value("leadingForall", std::size_t{0});
      const auto& fn = entry.at("fn");
      PrimRecFn f = fn.contains("native") ? function(fn.at("native").get<std::string>())
                                          : PrimRecFn::dsl(name, fn.at("dsl").get<std::string>());
      register_formula(make_formula(name, h, leading, f));
      names.push_back(name);
    } catch (const nlohmann::json::exception& e) {
      throw FormulaError(std::string("formula file: ") + e.what());
    }
  }
  return names;
}

// ---------------------------------------------------------------------------
// Theta

ConstId make_theta(std::string_view name, const PrimRecFn& f, std::size_t a, std::size_t b,
                   ThetaForm form) {
  if (a + b != f.arity()) throw FormulaError("theta: split does not match the arity");
  NativeRule rule = [f, a, b, form](const Process& p) -> std::optional<Process> {
    const std::size_t nargs = form == ThetaForm::Numerals ? a + b : 2;
    auto rest = p.stack.drop(nargs + 2);
    if (!rest) return std::nullopt;
    std::vector<Nat> args;
    if (form == ThetaForm::Numerals) {
      for (std::size_t i = 0; i < nargs; ++i) {
        auto n = decode_numeral(*p.stack.at(i));
        if (!n) return std::nullopt;
        args.push_back(*n);
      }
    } else {
      auto left = decode_tuple(*p.stack.at(0));
      auto right = decode_tuple(*p.stack.at(1));
      if (!left || !right || left->size() != a || right->size() != b) return std::nullopt;
      args = *left;
      args.insert(args.end(), right->begin(), right->end());
    }
    Nat value;
    try {
      value = f(args);
    } catch (const FormulaError&) {
      return std::nullopt;
    }
    return Process{*p.stack.at(value == 0 ? nargs : nargs + 1), *rest};
  };
  return define_native(name, std::move(rule));
}

// ---------------------------------------------------------------------------
// Oracle

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Win:
      return "win";
    case Verdict::Lose:
      return "lose";
    case Verdict::Unknown:
      return "unknown";
  }
  return "?";
}

bool bounded_value(const ArithFormula& f, Nat bound, const std::vector<Nat>& leading,
                   const Position& pos) {
  if (pos.m.size() != pos.n.size() || pos.m.size() > f.h) {
    throw FormulaError("malformed position");
  }
  if (pos.m.size() == f.h) return f.holds(leading, pos.m, pos.n);
  Position next = pos;
  next.m.push_back(0);
  next.n.push_back(0);
  for (Nat m = 0; m <= eloise_bound(bound); ++m) {
    next.m.back() = m;
    bool all = true;
    for (Nat n = 0; n <= bound && all; ++n) {
      next.n.back() = n;
      all = bounded_value(f, bound, leading, next);
    }
    if (all) return true;
  }
  return false;
}

Verdict truth_oracle_g0(const ArithFormula& f, Nat bound, const std::vector<Position>& history,
                        const std::vector<Nat>& leading, bool report_unknown) {
  if (leading.size() != f.leading) throw FormulaError("oracle: wrong number of leading values");
  const std::vector<Position> root{Position{}};
  for (const auto& pos : history.empty() ? root : history) {
    if (bounded_value(f, bound, leading, pos)) return Verdict::Win;
  }
  return report_unknown ? Verdict::Unknown : Verdict::Lose;
}

}  // namespace krivine

#include "krivine/machine.hpp"

#include <algorithm>
#include <deque>
#include <mutex>
#include "json.hpp"
#include <sstream>
#include <unordered_set>

namespace krivine {

namespace {

struct NativeRegistry {
  std::mutex mutex;
  std::unordered_map<ConstId, NativeRule> rules;
};

NativeRegistry& natives() {
  static NativeRegistry registry;
  return registry;
}

std::optional<NativeRule> native_rule(ConstId id) {
  auto& reg = natives();
  std::lock_guard lock(reg.mutex);
  auto it = reg.rules.find(id);
  if (it == reg.rules.end()) return std::nullopt;
  return it->second;
}

bool is_core_instruction(ConstId id) {
  return id == builtin::cc() || id == builtin::quote() || id == builtin::eq() ||
         id == builtin::eq_nat() || id == builtin::fork();
}

}  // namespace

ConstId define_native(std::string_view name, NativeRule rule) {
  const ConstId id = ConstantTable::instance().declare(name, ConstKind::Instruction);
  if (is_core_instruction(id)) throw MachineError("cannot redefine builtin instruction");
  auto& reg = natives();
  std::lock_guard lock(reg.mutex);
  reg.rules.emplace(id, std::move(rule));
  return id;
}

bool is_native(ConstId id) {
  auto& reg = natives();
  std::lock_guard lock(reg.mutex);
  return reg.rules.count(id) > 0;
}

std::vector<ConstId> native_instructions() {
  auto& reg = natives();
  std::lock_guard lock(reg.mutex);
  std::vector<ConstId> out;
  for (const auto& [id, _] : reg.rules) out.push_back(id);
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Configuration

MachineConfig MachineConfig::core() {
  MachineConfig c;
  c.installed_.insert(builtin::cc());
  return c;
}

MachineConfig MachineConfig::standard() {
  MachineConfig c = core();
  c.install(builtin::quote()).install(builtin::eq()).install(builtin::eq_nat());
  c.all_natives_ = true;
  return c;
}

MachineConfig& MachineConfig::install(ConstId id) {
  auto& table = ConstantTable::instance();
  if (table.kind(id) != ConstKind::Instruction) {
    throw MachineError("'" + std::string(table.name(id)) + "' is not an instruction");
  }
  if (!is_core_instruction(id) && !is_native(id)) {
    throw MachineError("instruction '" + std::string(table.name(id)) + "' has no rule");
  }
  if ((id == builtin::quote() || id == builtin::eq()) && !substitutive_.empty()) {
    throw MachineError("quote and eq cannot coexist with substitutive constants");
  }
  installed_.insert(id);
  removed_.erase(id);
  return *this;
}

MachineConfig& MachineConfig::install(std::string_view name) {
  auto id = ConstantTable::instance().find(name);
  if (!id) throw MachineError("unknown instruction '" + std::string(name) + "'");
  return install(*id);
}

MachineConfig& MachineConfig::uninstall(ConstId id) {
  if (id == builtin::cc()) throw MachineError("cc is always installed");
  installed_.erase(id);
  removed_.insert(id);
  return *this;
}

bool MachineConfig::installed(ConstId id) const {
  if (installed_.count(id)) return true;
  return all_natives_ && !removed_.count(id) && is_native(id);
}

std::set<ConstId> MachineConfig::instructions() const {
  std::set<ConstId> out = installed_;
  if (all_natives_) {
    for (ConstId id : native_instructions()) {
      if (!removed_.count(id)) out.insert(id);
    }
  }
  return out;
}

bool MachineConfig::deterministic() const { return !installed(builtin::fork()); }

bool MachineConfig::has_quote_or_eq() const {
  return installed(builtin::quote()) || installed(builtin::eq());
}

MachineConfig& MachineConfig::mark_substitutive(ConstId id) {
  if (ConstantTable::instance().kind(id) != ConstKind::Inert) {
    throw MachineError("only inert constants can be substitutive");
  }
  if (has_quote_or_eq()) {
    throw MachineError("no constant is substitutive when quote or eq is installed");
  }
  substitutive_.insert(id);
  return *this;
}

ParseOptions MachineConfig::parse_options() const {
  ParseOptions o;
  MachineConfig copy = *this;
  o.allow_instruction = [copy](ConstId id) { return copy.installed(id); };
  return o;
}

// ---------------------------------------------------------------------------
// Traces

std::string_view to_string(TraceStatus status) {
  switch (status) {
    case TraceStatus::Stuck:
      return "stuck";
    case TraceStatus::BudgetExhausted:
      return "budget";
    case TraceStatus::Cycle:
      return "cycle";
    case TraceStatus::WatcherHit:
      return "watcher";
  }
  return "?";
}

std::string Trace::summary() const {
  std::ostringstream out;
  switch (status) {
    case TraceStatus::Stuck:
      out << "stuck after " << steps() << " steps at " << to_string(last());
      break;
    case TraceStatus::BudgetExhausted:
      out << "budget exhausted after " << steps() << " steps";
      break;
    case TraceStatus::Cycle:
      out << "cycle(entry " << cycle_entry << ", period " << cycle_period << ")";
      break;
    case TraceStatus::WatcherHit:
      out << "watcher " << watcher << " hit at step " << hit_index;
      break;
  }
  return out.str();
}

std::string trace_to_text(const Trace& trace) {
  std::ostringstream out;
  for (std::size_t i = 0; i < trace.entries.size(); ++i) {
    out << "step " << i << ": " << to_string(trace.entries[i].process) << '\n';
  }
  out << trace.summary() << '\n';
  return out.str();
}

std::string trace_to_json(const Trace& trace, int indent) {
  nlohmann::json steps = nlohmann::json::array();
  for (std::size_t i = 0; i < trace.entries.size(); ++i) {
    const auto& e = trace.entries[i];
    steps.push_back({{"step", i},
                     {"head", to_string(e.process.head)},
                     {"stack", to_string(e.process.stack)},
                     {"rule", std::string(e.rule)}});
  }
  return steps.dump(indent);
}

// ---------------------------------------------------------------------------
// Machine

Machine::Machine(MachineConfig config) : config_(std::move(config)) {}

Nat Machine::quote_code(const Stack& stack) {
  auto [it, inserted] = quote_table_.emplace(stack, quote_table_.size());
  return it->second;
}

std::vector<Transition> Machine::successors(const Process& p) {
  const Term& head = p.head;
  const Stack& pi = p.stack;
  switch (head.kind()) {
    case TermKind::App:
      return {{Process{head.fun(), Stack::push(head.arg(), pi)}, "push"}};
    case TermKind::Lam:
      if (pi.is_bottom()) return {};
      return {{Process{open(head.body(), pi.top()), pi.rest()}, "grab"}};
    case TermKind::Cont:
      if (pi.is_bottom()) return {};
      return {{Process{pi.top(), head.stack()}, "restore"}};
    case TermKind::Bound:
    case TermKind::Free:
      return {};
    case TermKind::Const:
      break;
  }

  const ConstId id = head.const_id();
  if (!config_.installed(id)) return {};
  if (id == builtin::cc()) {
    if (pi.is_bottom()) return {};
    return {{Process{pi.top(), Stack::push(Term::cont(pi.rest()), pi.rest())}, "save"}};
  }
  if (id == builtin::quote()) {
    if (pi.is_bottom()) return {};
    const Nat code = quote_code(pi.rest());
    return {{Process{pi.top(), Stack::push(numeral(code), pi.rest())}, "quote"}};
  }
  if (id == builtin::eq() || id == builtin::eq_nat()) {
    auto rest = pi.drop(4);
    if (!rest) return {};
    const Term t1 = *pi.at(0);
    const Term t2 = *pi.at(1);
    bool same;
    if (id == builtin::eq()) {
      same = t1 == t2;
    } else {
      auto m = decode_numeral(t1);
      auto n = decode_numeral(t2);
      if (!m || !n) return {};
      same = *m == *n;
    }
    const Term branch = same ? *pi.at(2) : *pi.at(3);
    return {{Process{branch, *rest}, id == builtin::eq() ? "eq" : "eq_nat"}};
  }
  if (id == builtin::fork()) {
    auto rest = pi.drop(2);
    if (!rest) return {};
    return {{Process{*pi.at(0), *rest}, "fork"}, {Process{*pi.at(1), *rest}, "fork"}};
  }
  if (auto rule = native_rule(id)) {
    if (auto next = (*rule)(p)) {
      return {{std::move(*next), ConstantTable::instance().name(id)}};
    }
  }
  return {};
}

std::optional<Transition> Machine::step(const Process& p) {
  auto next = successors(p);
  if (next.empty()) return std::nullopt;
  if (next.size() > 1) throw MachineError("nondeterministic step; use thread()");
  if (observer) observer(p, next.front());
  return std::move(next.front());
}

Trace Machine::run(const Process& p, std::size_t budget, const std::vector<Watcher>& watchers) {
  Trace trace;
  std::unordered_map<Process, std::size_t, ProcessHash> seen;
  auto check = [&](const Process& q, std::size_t index) {
    for (const auto& w : watchers) {
      if (w.predicate(q)) {
        trace.status = TraceStatus::WatcherHit;
        trace.watcher = w.id;
        trace.hit_index = index;
        return true;
      }
    }
    return false;
  };

  trace.entries.push_back({p, "start"});
  seen.emplace(p, 0);
  if (check(p, 0)) return trace;
  for (;;) {
    if (trace.steps() >= budget) {
      trace.status = TraceStatus::BudgetExhausted;
      return trace;
    }
    auto next = step(trace.last());
    if (!next) {
      trace.status = TraceStatus::Stuck;
      return trace;
    }
    const std::size_t index = trace.entries.size();
    trace.entries.push_back({next->next, next->rule});
    if (check(trace.last(), index)) return trace;
    auto [it, inserted] = seen.emplace(trace.last(), index);
    if (!inserted) {
      trace.status = TraceStatus::Cycle;
      trace.cycle_entry = it->second;
      trace.cycle_period = index - it->second;
      return trace;
    }
  }
}

std::vector<Process> Machine::thread(const Process& p, std::size_t budget) {
  std::vector<Process> out;
  std::unordered_set<Process, ProcessHash> seen;
  std::deque<std::pair<Process, std::size_t>> queue;
  queue.emplace_back(p, 0);
  seen.insert(p);
  while (!queue.empty()) {
    auto [q, depth] = std::move(queue.front());
    queue.pop_front();
    out.push_back(q);
    if (depth >= budget) continue;
    for (auto& t : successors(q)) {
      if (seen.insert(t.next).second) queue.emplace_back(std::move(t.next), depth + 1);
    }
  }
  return out;
}

}  // namespace krivine

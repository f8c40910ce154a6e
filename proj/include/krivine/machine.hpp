#pragma once

// The Krivine abstract machine: Push, Grab, Save and Restore, plus a
// registry of extra instructions with native rules.

#include <cstddef>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "krivine/syntax.hpp"
#include "krivine/text.hpp"

namespace krivine {

class Machine;

/// Rule of a native instruction: receives a process whose head is the
/// instruction and returns its successor, or nullopt when stuck.
using NativeRule = std::function<std::optional<Process>(const Process&)>;

/// Declares `name` as an instruction with a native rule.  Defining the same
/// name twice keeps the first rule.  Returns the constant id.
ConstId define_native(std::string_view name, NativeRule rule);
bool is_native(ConstId id);
std::vector<ConstId> native_instructions();

class MachineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MachineConfig {
 public:
  /// Only cc.
  static MachineConfig core();
  /// cc, quote, eq, eq_nat and every registered native; no fork.
  static MachineConfig standard();

  MachineConfig& install(ConstId id);
  MachineConfig& install(std::string_view name);
  MachineConfig& uninstall(ConstId id);
  bool installed(ConstId id) const;
  /// Installed instructions, natives included.
  std::set<ConstId> instructions() const;

  bool deterministic() const;
  bool has_quote_or_eq() const;

  /// Flags an inert constant as substitutive; incompatible with quote/eq.
  MachineConfig& mark_substitutive(ConstId id);
  const std::set<ConstId>& substitutive() const { return substitutive_; }

  ParseOptions parse_options() const;

  std::size_t default_budget = 100000;

 private:
  std::set<ConstId> installed_;
  std::set<ConstId> removed_;
  bool all_natives_ = false;  // natives defined later are installed too
  std::set<ConstId> substitutive_;
};

struct Transition {
  Process next;
  std::string_view rule;
};

struct TraceEntry {
  Process process;
  std::string_view rule;  // rule that produced this entry; "start" for the first
};

enum class TraceStatus { Stuck, BudgetExhausted, Cycle, WatcherHit };

std::string_view to_string(TraceStatus status);

struct Watcher {
  std::string id;
  std::function<bool(const Process&)> predicate;
};

struct Trace {
  std::vector<TraceEntry> entries;
  TraceStatus status = TraceStatus::Stuck;
  std::size_t cycle_entry = 0;
  std::size_t cycle_period = 0;
  std::string watcher;
  std::size_t hit_index = 0;

  std::size_t steps() const { return entries.empty() ? 0 : entries.size() - 1; }
  const Process& last() const { return entries.back().process; }
  std::string summary() const;
};

std::string trace_to_text(const Trace& trace);
std::string trace_to_json(const Trace& trace, int indent = -1);

class Machine {
 public:
  explicit Machine(MachineConfig config = MachineConfig::standard());

  const MachineConfig& config() const { return config_; }

  /// All successors (two for fork, otherwise at most one).
  std::vector<Transition> successors(const Process& p);
  /// The unique successor; throws MachineError if there are several.
  std::optional<Transition> step(const Process& p);

  /// Code of `stack` in this machine's intern table.
  Nat quote_code(const Stack& stack);

  /// Runs until stuck, a revisited process, a watcher hit or `budget` steps.
  Trace run(const Process& p, std::size_t budget, const std::vector<Watcher>& watchers = {});
  /// Processes reachable from `p` in at most `budget` steps (breadth-first).
  std::vector<Process> thread(const Process& p, std::size_t budget);

  /// Called after every step taken through `step`.
  std::function<void(const Process& from, const Transition& to)> observer;

 private:
  MachineConfig config_;
  std::unordered_map<Stack, Nat, StackHash> quote_table_;
};

}  // namespace krivine

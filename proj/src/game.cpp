#include "krivine/game.hpp"

#include <algorithm>
#include <iostream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "krivine/text.hpp"

namespace krivine {

namespace {

using ojson = nlohmann::ordered_json;

bool same_term(const Term& a, const Term& b) { return a.hash() == b.hash() && a == b; }
bool same_stack(const Stack& a, const Stack& b) { return a.hash() == b.hash() && a == b; }

/// Match of `p` against one entry.
std::optional<MoveEvent> match_entry(const Process& p, const HistoryEntry& e, std::size_t index,
                                     std::size_t h) {
  if (!same_term(p.head, e.u)) return std::nullopt;
  if (e.depth() >= h) {
    if (same_stack(p.stack, e.pi)) return MoveEvent{MoveEvent::Kind::Win, index, 0, {}};
    return std::nullopt;
  }
  auto rest = p.stack.drop(2);
  if (!rest || !same_stack(*rest, e.pi)) return std::nullopt;
  auto m = decode_numeral(*p.stack.at(0));
  if (!m) return std::nullopt;
  return MoveEvent{MoveEvent::Kind::Play, index, *m, *p.stack.at(1)};
}

/// History with a lookup from head hash to entries.
class IndexedHistory {
 public:
  IndexedHistory(std::vector<HistoryEntry>& entries, const ArithFormula& f, std::vector<Nat> leading)
      : entries_(entries), f_(f), leading_(std::move(leading)) {
    for (std::size_t i = 0; i < entries_.size(); ++i) index(i);
  }

  std::size_t add(HistoryEntry e) {
    entries_.push_back(std::move(e));
    index(entries_.size() - 1);
    return entries_.size() - 1;
  }

  bool winning(const HistoryEntry& e) const {
    return e.depth() == f_.h && f_.holds(leading_, e.m, e.n);
  }

  /// Detection against entries [from, to).
  std::optional<MoveEvent> detect(const Process& p, std::size_t from, std::size_t to) const {
    auto it = by_head_.find(p.head.hash());
    if (it == by_head_.end()) return std::nullopt;
    std::optional<MoveEvent> play;
    for (std::size_t idx : it->second) {
      if (idx < from || idx >= to) continue;
      auto ev = match_entry(p, entries_[idx], idx, f_.h);
      if (!ev) continue;
      if (ev->kind == MoveEvent::Kind::Win) {
        if (winning(entries_[idx])) return ev;
      } else if (!play) {
        play = ev;
      }
    }
    return play;
  }

  std::optional<MoveEvent> detect(const Process& p) const { return detect(p, 0, entries_.size()); }

  const std::vector<HistoryEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

 private:
  void index(std::size_t i) { by_head_[entries_[i].u.hash()].push_back(i); }

  std::vector<HistoryEntry>& entries_;
  const ArithFormula& f_;
  std::vector<Nat> leading_;
  std::unordered_map<std::size_t, std::vector<std::size_t>> by_head_;
};

void validate_match(const Term& realizer, const Handle& handle, const ArithFormula& f,
                    const MatchOptions& options) {
  if (!realizer.closed()) throw GameError("realizer is not closed");
  if (!realizer.proof_like()) throw GameError("realizer is not proof-like");
  if (!options.config.deterministic()) throw GameError("matches need a deterministic machine (no fork)");
  if (!handle.u.closed()) throw GameError("handle term is not closed");
  if (handle.leading.size() != f.leading) {
    throw GameError("formula " + f.name + " expects " + std::to_string(f.leading) + " leading numerals");
  }
}

Process initial_process(const Term& realizer, const Handle& handle) {
  std::vector<Term> items;
  for (Nat z : handle.leading) items.push_back(numeral(z));
  items.push_back(handle.u);
  return Process{realizer, Stack::of(items, handle.pi)};
}

void check_answer(const AbelardMove& a) {
  if (a.u.null() || !a.u.closed()) throw GameError("Abelard's term is not closed");
  if (a.pi.null()) throw GameError("Abelard's stack is empty");
}

HistoryEntry extend(const HistoryEntry& parent, std::size_t parent_index, Nat m, const AbelardMove& a) {
  HistoryEntry e{parent.m, parent.n, a.u, a.pi, parent_index};
  e.m.push_back(m);
  e.n.push_back(a.n);
  return e;
}

/// Appends to a segment, keeping at most `allowance` recorded entries in
/// total; past that only the latest entry of the segment is kept.
void record_step(TraceSegment& seg, std::size_t& allowance, bool& truncated, const Process& p,
                 std::string_view rule) {
  if (allowance > 0) {
    seg.entries.push_back({p, rule});
    --allowance;
  } else if (truncated) {
    seg.entries.back() = {p, rule};
  } else {
    seg.entries.push_back({p, rule});
    truncated = true;
  }
}

std::string tuple_text(const std::vector<Nat>& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + ")";
}

}  // namespace

Handle fresh_handle(std::vector<Nat> leading) {
  return Handle{Term::constant(fresh_constants("kappa", 1).front()),
                Stack::bottom(fresh_stack_constants("alpha", 1).front()), std::move(leading)};
}

std::optional<MoveEvent> detect_move(const Process& p, const std::vector<HistoryEntry>& history,
                                     std::size_t h,
                                     const std::function<bool(const HistoryEntry&)>& winning) {
  std::optional<MoveEvent> play;
  for (std::size_t i = 0; i < history.size(); ++i) {
    auto ev = match_entry(p, history[i], i, h);
    if (!ev) continue;
    if (ev->kind == MoveEvent::Kind::Win) {
      if (!winning || winning(history[i])) return ev;
    } else if (!play) {
      play = ev;
    }
  }
  return play;
}

// ---------------------------------------------------------------------------
// Abelard strategies

std::optional<AbelardMove> ScriptedAbelard::answer(const AbelardContext&) {
  if (next_ >= moves_.size()) return std::nullopt;
  return moves_[next_++];
}

std::optional<AbelardMove> FreshConstantAbelard::answer(const AbelardContext& ctx) {
  if (ctx.move_index >= answers_.size()) return std::nullopt;
  AbelardMove move{answers_[ctx.move_index], Term::constant(fresh_constants("kappa", 1).front()),
                   Stack::bottom(fresh_stack_constants("alpha", 1).front())};
  given_.push_back(move);
  return move;
}

Term RandomAbelard::random_term(int depth, std::uint32_t scope) {
  static const std::vector<ConstId> pool = {declare_inert("c0"), declare_inert("c1"), declare_inert("c2"),
                                            declare_inert("c3")};
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); };
  const std::size_t choice = depth <= 0 ? pick(3) : pick(7);
  switch (choice) {
    case 0:
      if (scope > 0) return Term::bound(static_cast<std::uint32_t>(pick(scope)));
      [[fallthrough]];
    case 1:
      return Term::constant(pool[pick(pool.size())]);
    case 2:
      return numeral(pick(4));
    case 3:
    case 4:
      return Term::lam("x", random_term(depth - 1, scope + 1));
    default:
      return Term::app(random_term(depth - 1, scope), random_term(depth - 1, scope));
  }
}

Stack RandomAbelard::random_stack() {
  static const std::vector<ConstId> bottoms = {declare_stack_constant("a0"), declare_stack_constant("a1"),
                                               declare_stack_constant("a2"), declare_stack_constant("a3")};
  Stack s = Stack::bottom(bottoms[std::uniform_int_distribution<std::size_t>(0, bottoms.size() - 1)(rng_)]);
  const int pushes = std::uniform_int_distribution<int>(0, 2)(rng_);
  for (int i = 0; i < pushes; ++i) s = Stack::push(random_term(max_depth_ - 1, 0), s);
  return s;
}

std::optional<AbelardMove> RandomAbelard::answer(const AbelardContext& ctx) {
  const Nat n = std::uniform_int_distribution<Nat>(0, max_n_)(rng_);
  for (;;) {
    Term u = random_term(max_depth_, 0);
    Stack pi = random_stack();
    const bool repeated = std::any_of(ctx.history.begin(), ctx.history.end(), [&](const HistoryEntry& e) {
      return same_term(e.u, u) && same_stack(e.pi, pi);
    });
    if (!repeated) return AbelardMove{n, std::move(u), std::move(pi)};
  }
}

std::optional<AbelardMove> InteractiveAbelard::answer(const AbelardContext& ctx) {
  const HistoryEntry& e = ctx.history[ctx.entry];
  out_ << "Eloise plays m = " << ctx.m << " on position " << ctx.entry << " " << tuple_text(e.m) << "/"
       << tuple_text(e.n) << "\n  with " << to_string(ctx.t) << "\n";
  std::string line;
  AbelardMove move;
  for (;;) {
    out_ << "n> " << std::flush;
    if (!std::getline(in_, line)) return std::nullopt;
    try {
      std::size_t used = 0;
      move.n = std::stoull(line, &used);
      if (line.find_first_not_of(" \t", used) == std::string::npos) break;
    } catch (const std::exception&) {
    }
    out_ << "expected a natural number\n";
  }
  for (;;) {
    out_ << "u> " << std::flush;
    if (!std::getline(in_, line)) return std::nullopt;
    try {
      move.u = parse_term(line);
      break;
    } catch (const ParseError& err) {
      out_ << "parse error at " << err.position() << ": " << err.what() << "\n";
    }
  }
  for (;;) {
    out_ << "pi> " << std::flush;
    if (!std::getline(in_, line)) return std::nullopt;
    try {
      move.pi = parse_stack(line);
      break;
    } catch (const ParseError& err) {
      out_ << "parse error at " << err.position() << ": " << err.what() << "\n";
    }
  }
  return move;
}

AbelardScript parse_abelard_script(std::string_view json_text, const ParseOptions& options) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw GameError(std::string("script: ") + e.what());
  }
  AbelardScript script;
  const nlohmann::json* moves = &doc;
  try {
    if (doc.is_object()) {
      if (!doc.contains("moves")) throw GameError("script object needs \"moves\"");
      moves = &doc["moves"];
      if (doc.contains("leading")) script.leading = doc["leading"].get<std::vector<Nat>>();
      if (doc.contains("handle")) {
        const auto& h = doc["handle"];
        script.handle = Handle{parse_term(h.at("u").get<std::string>(), options),
                               parse_stack(h.at("pi").get<std::string>(), options), script.leading};
      }
    }
    if (!moves->is_array()) throw GameError("script moves must be an array");
    for (const auto& m : *moves) {
      if (!m.is_object() || !m.contains("n") || !m["n"].is_number_unsigned()) {
        throw GameError("script move needs a natural \"n\"");
      }
      script.moves.push_back(AbelardMove{m["n"].get<Nat>(), parse_term(m.at("u").get<std::string>(), options),
                                         parse_stack(m.at("pi").get<std::string>(), options)});
    }
  } catch (const nlohmann::json::exception& e) {
    throw GameError(std::string("script: ") + e.what());
  } catch (const ParseError& e) {
    throw GameError(std::string("script: ") + e.what());
  }
  return script;
}

std::string abelard_script_to_json(const AbelardScript& script) {
  ojson doc;
  doc["leading"] = script.leading;
  if (script.handle) doc["handle"] = {{"u", to_string(script.handle->u)}, {"pi", to_string(script.handle->pi)}};
  doc["moves"] = ojson::array();
  for (const auto& m : script.moves) {
    doc["moves"].push_back({{"n", m.n}, {"u", to_string(m.u)}, {"pi", to_string(m.pi)}});
  }
  return doc.dump(2);
}

// ---------------------------------------------------------------------------
// Outcomes

std::string_view to_string(MatchResult r) { return r == MatchResult::EloiseWin ? "EloiseWin" : "AbelardWin"; }

std::string_view to_string(LossReason r) {
  switch (r) {
    case LossReason::None:
      return "none";
    case LossReason::Stuck:
      return "stuck";
    case LossReason::Budget:
      return "budget";
    case LossReason::Cycle:
      return "cycle";
  }
  return "?";
}

std::string MatchOutcome::verdict() const {
  if (eloise_wins()) return "EloiseWin";
  return "AbelardWin(" + std::string(to_string(reason)) + ")";
}

std::vector<AbelardMove> MatchOutcome::abelard_moves() const {
  std::vector<AbelardMove> out;
  for (const auto& m : moves) out.push_back(m.answer);
  return out;
}

bool MatchOutcome::used_rule(std::string_view rule) const {
  for (const auto& s : segments) {
    for (const auto& e : s.entries) {
      if (e.rule == rule) return true;
    }
  }
  return false;
}

std::string transcript_to_json(const MatchOutcome& o, int indent) {
  ojson doc;
  doc["game"] = o.game;
  doc["verdict"] = o.verdict();
  doc["steps"] = o.steps;
  doc["winning_entry"] = o.winning_entry ? ojson(*o.winning_entry) : ojson(nullptr);
  doc["history"] = ojson::array();
  for (std::size_t i = 0; i < o.history.size(); ++i) {
    const auto& e = o.history[i];
    doc["history"].push_back({{"index", i},
                              {"m", e.m},
                              {"n", e.n},
                              {"u", to_string(e.u)},
                              {"pi", to_string(e.pi)},
                              {"parent", e.parent ? ojson(*e.parent) : ojson(nullptr)}});
  }
  doc["positions"] = ojson::array();
  for (const auto& p : o.positions) doc["positions"].push_back(to_string(p));
  doc["moves"] = ojson::array();
  for (const auto& m : o.moves) {
    doc["moves"].push_back({{"entry", m.entry},
                            {"m", m.m},
                            {"t", to_string(m.t)},
                            {"n", m.answer.n},
                            {"u", to_string(m.answer.u)},
                            {"pi", to_string(m.answer.pi)},
                            {"new_entry", m.new_entry},
                            {"segment", m.segment}});
  }
  doc["segments"] = ojson::array();
  for (std::size_t i = 0; i < o.segments.size(); ++i) {
    const auto& s = o.segments[i];
    std::map<std::string, std::size_t> rules;
    for (std::size_t k = 1; k < s.entries.size(); ++k) ++rules[std::string(s.entries[k].rule)];
    doc["segments"].push_back({{"index", i},
                               {"process", s.process},
                               {"steps", s.steps},
                               {"recorded", s.entries.empty() ? 0 : s.entries.size() - 1},
                               {"rules", rules},
                               {"last", s.entries.empty() ? "" : to_string(s.entries.back().process)}});
  }
  return doc.dump(indent);
}

std::string transcript_to_text(const MatchOutcome& o, bool with_steps) {
  std::ostringstream out;
  out << "game " << o.game << "\n";
  out << "handle: u = " << to_string(o.history.front().u) << ", pi = " << to_string(o.history.front().pi) << "\n";
  for (std::size_t i = 0; i < o.moves.size(); ++i) {
    const auto& m = o.moves[i];
    const auto& e = o.history[m.entry];
    out << "move " << i + 1 << ": Eloise plays " << m.m << " on " << tuple_text(e.m) << "/" << tuple_text(e.n)
        << "; Abelard answers " << m.answer.n << " with " << to_string(m.answer.u) << " * "
        << to_string(m.answer.pi) << "\n";
  }
  if (with_steps) {
    for (std::size_t i = 0; i < o.segments.size(); ++i) {
      const auto& s = o.segments[i];
      out << "segment " << i << " (position " << s.process << ", " << s.steps << " steps)\n";
      for (std::size_t k = 0; k < s.entries.size(); ++k) {
        out << "  " << s.entries[k].rule << ": " << to_string(s.entries[k].process) << "\n";
      }
    }
  }
  out << "verdict: " << o.verdict();
  if (o.winning_entry) {
    const auto& e = o.history[*o.winning_entry];
    out << " at " << tuple_text(e.m) << "/" << tuple_text(e.n);
  }
  out << " after " << o.steps << " steps\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// G1

MatchOutcome play_g1(const Term& realizer, const Handle& handle, const ArithFormula& formula,
                     AbelardStrategy& abelard, const MatchOptions& options) {
  validate_match(realizer, handle, formula, options);
  Machine machine(options.config);
  machine.observer = options.observer;
  MatchOutcome out;
  out.game = "g1";
  out.history.push_back(HistoryEntry{{}, {}, handle.u, handle.pi, std::nullopt});
  IndexedHistory history(out.history, formula, handle.leading);
  std::size_t allowance = options.max_recorded_steps;

  Process p = initial_process(realizer, handle);
  out.positions.push_back(p);
  for (;;) {
    const std::size_t budget = std::min(options.phase_budget, options.total_budget - out.steps);
    std::optional<MoveEvent> event;
    Watcher watcher{"move", [&](const Process& q) {
                      event = history.detect(q);
                      return event.has_value();
                    }};
    Trace trace = machine.run(p, budget, {watcher});
    out.steps += trace.steps();
    out.segments.push_back(TraceSegment{out.positions.size() - 1, {}, trace.steps()});
    bool truncated = false;
    for (const auto& e : trace.entries) record_step(out.segments.back(), allowance, truncated, e.process, e.rule);

    switch (trace.status) {
      case TraceStatus::Stuck:
        out.reason = LossReason::Stuck;
        return out;
      case TraceStatus::Cycle:
        out.reason = LossReason::Cycle;
        return out;
      case TraceStatus::BudgetExhausted:
        out.reason = LossReason::Budget;
        return out;
      case TraceStatus::WatcherHit:
        break;
    }
    if (event->kind == MoveEvent::Kind::Win) {
      out.result = MatchResult::EloiseWin;
      out.winning_entry = event->entry;
      out.winning_segment = out.segments.size() - 1;
      return out;
    }
    AbelardContext ctx{out.history, formula, event->entry, event->m, event->t, out.moves.size()};
    auto answer = abelard.answer(ctx);
    if (!answer) {
      out.reason = LossReason::Budget;
      return out;
    }
    check_answer(*answer);
    const std::size_t idx = history.add(extend(out.history[event->entry], event->entry, event->m, *answer));
    out.moves.push_back(MoveRecord{event->entry, event->m, event->t, *answer, idx, out.segments.size() - 1});
    p = Process{event->t, Stack::of({numeral(answer->n), answer->u}, answer->pi)};
    out.positions.push_back(p);
    if (out.steps >= options.total_budget) {
      out.reason = LossReason::Budget;
      return out;
    }
  }
}

// ---------------------------------------------------------------------------
// G2

namespace {

struct PlayedKey {
  std::size_t entry;
  Nat m;
  Term t;
  friend bool operator==(const PlayedKey& a, const PlayedKey& b) {
    return a.entry == b.entry && a.m == b.m && a.t == b.t;
  }
};

struct PlayedHash {
  std::size_t operator()(const PlayedKey& k) const {
    return k.t.hash() ^ (k.entry * 0x9e3779b97f4a7c15ULL) ^ (k.m * 0xc2b2ae3d27d4eb4fULL);
  }
};

struct LiveProcess {
  std::vector<Process> visited;
  std::unordered_set<Process, ProcessHash> seen;
  bool dead = false;
  LossReason end = LossReason::None;
  std::size_t checked = 0;  // entries every visited process was matched against
  std::size_t steps = 0;
  bool truncated = false;
};

}  // namespace

MatchOutcome play_g2(const Term& realizer, const Handle& handle, const ArithFormula& formula,
                     AbelardStrategy& abelard, const MatchOptions& options) {
  validate_match(realizer, handle, formula, options);
  if (options.quantum == 0) throw GameError("scheduler quantum must be positive");
  Machine machine(options.config);
  machine.observer = options.observer;
  MatchOutcome out;
  out.game = "g2";
  out.history.push_back(HistoryEntry{{}, {}, handle.u, handle.pi, std::nullopt});
  IndexedHistory history(out.history, formula, handle.leading);
  std::size_t allowance = options.max_recorded_steps;
  std::vector<LiveProcess> live;
  std::unordered_set<PlayedKey, PlayedHash> played;

  auto spawn = [&](const Process& p) {
    out.positions.push_back(p);
    out.segments.push_back(TraceSegment{out.positions.size() - 1, {}, 0});
    live.emplace_back();
    live.back().visited.push_back(p);
    live.back().seen.insert(p);
    record_step(out.segments.back(), allowance, live.back().truncated, p, "start");
  };
  auto record = [&](std::size_t k, const Process& p, std::string_view rule) {
    record_step(out.segments[k], allowance, live[k].truncated, p, rule);
  };

  enum class Handled { Continue, Won, AbelardDone };
  // Plays a detected event; Won / AbelardDone end the match.
  auto handle_event = [&](const MoveEvent& ev, std::size_t k) -> std::pair<Handled, bool> {
    if (ev.kind == MoveEvent::Kind::Win) {
      out.result = MatchResult::EloiseWin;
      out.winning_entry = ev.entry;
      out.winning_segment = k;
      return {Handled::Won, false};
    }
    if (!played.insert(PlayedKey{ev.entry, ev.m, ev.t}).second) return {Handled::Continue, false};
    AbelardContext ctx{out.history, formula, ev.entry, ev.m, ev.t, out.moves.size()};
    auto answer = abelard.answer(ctx);
    if (!answer) {
      out.reason = LossReason::Budget;
      return {Handled::AbelardDone, false};
    }
    check_answer(*answer);
    const std::size_t idx = history.add(extend(out.history[ev.entry], ev.entry, ev.m, *answer));
    out.moves.push_back(MoveRecord{ev.entry, ev.m, ev.t, *answer, idx, k});
    spawn(Process{ev.t, Stack::of({numeral(answer->n), answer->u}, answer->pi)});
    return {Handled::Continue, true};
  };

  spawn(initial_process(realizer, handle));
  for (;;) {
    bool progress = false;
    for (std::size_t k = 0; k < live.size(); ++k) {
      // Match the whole thread so far against entries added since the last visit.
      while (live[k].checked < history.size()) {
        const std::size_t e = live[k].checked;
        for (std::size_t v = 0; v < live[k].visited.size(); ++v) {
          auto ev = history.detect(live[k].visited[v], e, e + 1);
          if (!ev) continue;
          auto [status, moved] = handle_event(*ev, k);
          if (status != Handled::Continue) return out;
          progress = progress || moved;
        }
        ++live[k].checked;
      }
      if (live[k].dead) continue;
      for (std::size_t s = 0; s < options.quantum; ++s) {
        if (out.steps >= options.total_budget) {
          out.reason = LossReason::Budget;
          return out;
        }
        if (live[k].steps >= options.phase_budget) {
          live[k].dead = true;
          live[k].end = LossReason::Budget;
          break;
        }
        auto next = machine.step(live[k].visited.back());
        if (!next) {
          live[k].dead = true;
          live[k].end = LossReason::Stuck;
          break;
        }
        ++out.steps;
        ++live[k].steps;
        ++out.segments[k].steps;
        progress = true;
        if (!live[k].seen.insert(next->next).second) {
          live[k].dead = true;
          live[k].end = LossReason::Cycle;
          break;
        }
        live[k].visited.push_back(next->next);
        record(k, next->next, next->rule);
        auto ev = history.detect(next->next);
        if (!ev) continue;
        auto [status, moved] = handle_event(*ev, k);
        if (status != Handled::Continue) return out;
        if (moved) break;
      }
    }
    if (!progress) {
      bool any_budget = false, all_cycle = true;
      for (const auto& l : live) {
        any_budget = any_budget || l.end == LossReason::Budget;
        all_cycle = all_cycle && l.end == LossReason::Cycle;
      }
      out.reason = any_budget ? LossReason::Budget : all_cycle ? LossReason::Cycle : LossReason::Stuck;
      return out;
    }
  }
}

// ---------------------------------------------------------------------------
// G0

std::optional<std::pair<std::size_t, Nat>> ScriptedEloiseG0::propose(const std::vector<Position>& history) {
  if (next_ >= moves_.size()) return std::nullopt;
  const auto& [start, m] = moves_[next_++];
  auto it = std::find(history.begin(), history.end(), start);
  if (it == history.end()) return std::nullopt;
  return std::make_pair(static_cast<std::size_t>(it - history.begin()), m);
}

std::optional<Nat> ScriptedAbelardG0::answer(const std::vector<Position>&, std::size_t, Nat) {
  if (next_ >= answers_.size()) return std::nullopt;
  return answers_[next_++];
}

std::optional<std::pair<std::size_t, Nat>> BlindEnumerationEloise::propose(const std::vector<Position>& history) {
  for (; index_ <= max_index_; ++index_) {
    std::vector<Nat> tuple;
    if (h_ == 1) {
      tuple = {index_};
    } else {
      // Same enumeration as the next<h> instruction.
      Nat rest = index_;
      for (std::size_t k = h_; k > 1; --k) {
        Nat w = 0;
        while ((w + 1) * (w + 2) / 2 <= rest) ++w;
        const Nat b = rest - w * (w + 1) / 2;
        tuple.push_back(w - b);
        rest = b;
      }
      tuple.push_back(rest);
    }
    if (std::any_of(tuple.begin(), tuple.end(), [&](Nat v) { return v > box_; })) continue;
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < history.size(); ++i) {
      const auto& pos = history[i];
      if (pos.m.size() > tuple.size() || !std::equal(pos.m.begin(), pos.m.end(), tuple.begin())) continue;
      if (!best || pos.m.size() > history[*best].m.size()) best = i;
    }
    if (!best) continue;
    const std::size_t depth = history[*best].m.size();
    if (depth >= h_) continue;
    return std::make_pair(*best, tuple[depth]);
  }
  return std::nullopt;
}

std::optional<Nat> OracleAbelard::answer(const std::vector<Position>& history, std::size_t position, Nat m) {
  const Position& p = history.at(position);
  for (Nat n = 0; n <= bound_; ++n) {
    Position next = p;
    next.m.push_back(m);
    next.n.push_back(n);
    if (!bounded_value(f_, bound_, leading_, next)) return n;
  }
  return Nat{0};
}

G0Outcome play_g0(const ArithFormula& f, EloiseG0& eloise, AbelardG0& abelard, std::size_t max_moves,
                  const std::vector<Nat>& leading) {
  G0Outcome out;
  out.history.push_back(Position{});
  if (f.h == 0 && f.holds(leading, {}, {})) {
    out.eloise_wins = true;
    out.winning_position = 0;
    out.reason = "win";
    return out;
  }
  while (out.moves < max_moves) {
    auto proposal = eloise.propose(out.history);
    if (!proposal) {
      out.reason = "eloise gave up";
      return out;
    }
    const auto [idx, m] = *proposal;
    if (idx >= out.history.size() || out.history[idx].m.size() >= f.h) {
      throw GameError("Eloise must extend a non-final position of the history");
    }
    auto n = abelard.answer(out.history, idx, m);
    if (!n) {
      out.reason = "abelard gave up";
      return out;
    }
    Position next = out.history[idx];
    next.m.push_back(m);
    next.n.push_back(*n);
    out.history.push_back(next);
    ++out.moves;
    if (next.m.size() == f.h && f.holds(leading, next.m, next.n)) {
      out.eloise_wins = true;
      out.winning_position = out.history.size() - 1;
      out.reason = "win";
      return out;
    }
  }
  out.reason = "move limit";
  return out;
}

// ---------------------------------------------------------------------------
// Strategy checking

std::size_t StrategyReport::eloise_wins() const {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.outcome.eloise_wins(); }));
}

std::size_t StrategyReport::abelard_wins() const { return rows.size() - eloise_wins(); }

const StrategyCheckRow* StrategyReport::counterexample() const {
  for (const auto& r : rows) {
    if (!r.outcome.eloise_wins()) return &r;
  }
  return nullptr;
}

StrategyReport check_strategy(const Term& realizer, const ArithFormula& formula,
                              const std::vector<AbelardFactory>& adversaries, const std::vector<Handle>& handles,
                              const std::vector<std::string>& games, const MatchOptions& options) {
  StrategyReport report;
  for (const auto& game : games) {
    if (game != "g1" && game != "g2") throw GameError("unknown game: " + game);
    for (std::size_t h = 0; h < handles.size(); ++h) {
      for (std::size_t a = 0; a < adversaries.size(); ++a) {
        auto abelard = adversaries[a]();
        StrategyCheckRow row{game, h, a, abelard->name(), {}};
        row.outcome = game == "g1" ? play_g1(realizer, handles[h], formula, *abelard, options)
                                   : play_g2(realizer, handles[h], formula, *abelard, options);
        report.rows.push_back(std::move(row));
      }
    }
  }
  return report;
}

}  // namespace krivine

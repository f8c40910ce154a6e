#pragma once

// Referees for the realizability games.
//
// G1: the state is the current exists-position p and the history H of
// forall-positions (m, n, u, pi).  Eloise is a realizer running on the
// machine; she plays m with strategy t when p reduces to u * m . t . pi for
// a non-final entry of H, and wins when p reduces to u * pi for a final
// entry with f(m, n) = 0.
// G2: as G1 but every exists-position ever created stays live, and the
// threads of all of them are matched against the growing history.
// G0: the abstract game on integers only.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "krivine/formula.hpp"
#include "krivine/machine.hpp"
#include "krivine/syntax.hpp"

namespace krivine {

class GameError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct HistoryEntry {
  std::vector<Nat> m;
  std::vector<Nat> n;
  Term u;
  Stack pi;
  std::optional<std::size_t> parent;  // none for the handle
  std::size_t depth() const { return m.size(); }
};

/// The initial Abelard move, plus numerals for leading universals.
struct Handle {
  Term u;
  Stack pi;
  std::vector<Nat> leading;
};

/// A handle made of a fresh inert constant and a fresh stack constant.
Handle fresh_handle(std::vector<Nat> leading = {});

struct MoveEvent {
  enum class Kind { Win, Play };
  Kind kind = Kind::Play;
  std::size_t entry = 0;
  Nat m = 0;
  Term t;  // Eloise's strategy term (Play only)
};

/// Matches `p` against `history`: Win(entry) when p is u * pi for a final
/// entry (depth h) accepted by `winning` (all final entries if empty);
/// Play(entry, m, t) when p is u * m . t . pi for a non-final entry and m is
/// a numeral.  Wins take precedence; otherwise the earliest entry is chosen.
std::optional<MoveEvent> detect_move(const Process& p, const std::vector<HistoryEntry>& history,
                                     std::size_t h,
                                     const std::function<bool(const HistoryEntry&)>& winning = {});

// ---------------------------------------------------------------------------
// Abelard

struct AbelardMove {
  Nat n = 0;
  Term u;
  Stack pi;
};

struct AbelardContext {
  const std::vector<HistoryEntry>& history;
  const ArithFormula& formula;
  std::size_t entry;  // position Eloise plays on
  Nat m;
  const Term& t;
  std::size_t move_index;  // number of earlier Abelard answers
};

class AbelardStrategy {
 public:
  virtual ~AbelardStrategy() = default;
  virtual std::string name() const = 0;
  /// nullopt means Abelard has no further answer.
  virtual std::optional<AbelardMove> answer(const AbelardContext& ctx) = 0;
};

/// Plays a fixed list of moves in order.
class ScriptedAbelard : public AbelardStrategy {
 public:
  explicit ScriptedAbelard(std::vector<AbelardMove> moves) : moves_(std::move(moves)) {}
  std::string name() const override { return "script"; }
  std::optional<AbelardMove> answer(const AbelardContext& ctx) override;

 private:
  std::vector<AbelardMove> moves_;
  std::size_t next_ = 0;
};

/// Answers the k-th move with answers[k] together with a fresh inert
/// constant and a fresh stack constant; stops when the answers run out.
class FreshConstantAbelard : public AbelardStrategy {
 public:
  explicit FreshConstantAbelard(std::vector<Nat> answers) : answers_(std::move(answers)) {}
  std::string name() const override { return "fresh"; }
  std::optional<AbelardMove> answer(const AbelardContext& ctx) override;
  /// Constants handed out so far, in order.
  const std::vector<AbelardMove>& given() const { return given_; }

 private:
  std::vector<Nat> answers_;
  std::vector<AbelardMove> given_;
};

/// Seeded random answers: n in [0, max_n], a random closed term and a random
/// stack over the declared constants.  Never repeats an (u, pi) pair already
/// in the history.
class RandomAbelard : public AbelardStrategy {
 public:
  explicit RandomAbelard(std::uint64_t seed, Nat max_n = 9, int max_depth = 3)
      : rng_(seed), max_n_(max_n), max_depth_(max_depth) {}
  std::string name() const override { return "random"; }
  std::optional<AbelardMove> answer(const AbelardContext& ctx) override;

 private:
  Term random_term(int depth, std::uint32_t scope);
  Stack random_stack();
  std::mt19937_64 rng_;
  Nat max_n_;
  int max_depth_;
};

/// Prompts on `out` and reads n, u and pi from `in`, re-asking after parse
/// errors.  End of input ends Abelard's play.
class InteractiveAbelard : public AbelardStrategy {
 public:
  InteractiveAbelard(std::istream& in, std::ostream& out) : in_(in), out_(out) {}
  std::string name() const override { return "interactive"; }
  std::optional<AbelardMove> answer(const AbelardContext& ctx) override;

 private:
  std::istream& in_;
  std::ostream& out_;
};

struct AbelardScript {
  std::vector<AbelardMove> moves;
  std::vector<Nat> leading;
  std::optional<Handle> handle;
};

/// Either an array of {n, u, pi} or {"moves": [...], "leading": [...],
/// "handle": {"u": ..., "pi": ...}}.
AbelardScript parse_abelard_script(std::string_view json_text, const ParseOptions& options = {});
std::string abelard_script_to_json(const AbelardScript& script);

// ---------------------------------------------------------------------------
// Matches

enum class MatchResult { EloiseWin, AbelardWin };
enum class LossReason { None, Stuck, Budget, Cycle };
std::string_view to_string(MatchResult r);
std::string_view to_string(LossReason r);

struct MatchOptions {
  MachineConfig config = MachineConfig::standard();
  /// Steps between two moves (G1) or per process (G2).
  std::size_t phase_budget = 100000;
  /// Steps over the whole match.
  std::size_t total_budget = 1000000;
  /// Round-robin quantum of the G2 scheduler.
  std::size_t quantum = 256;
  /// Steps kept in the transcript; later steps are only counted.
  std::size_t max_recorded_steps = 200000;
  /// Called on every machine step.
  std::function<void(const Process&, const Transition&)> observer;
};

/// A stretch of machine execution of one exists-position.
struct TraceSegment {
  std::size_t process = 0;  // index into the match's positions
  std::vector<TraceEntry> entries;
  std::size_t steps = 0;    // may exceed entries.size() - 1 when truncated
};

struct MoveRecord {
  std::size_t entry = 0;  // position played on
  Nat m = 0;
  Term t;
  AbelardMove answer;
  std::size_t new_entry = 0;
  std::size_t segment = 0;  // segment in which the move was detected
};

struct MatchOutcome {
  std::string game;
  MatchResult result = MatchResult::AbelardWin;
  LossReason reason = LossReason::None;
  std::optional<std::size_t> winning_entry;
  std::size_t winning_segment = 0;
  std::vector<HistoryEntry> history;
  std::vector<MoveRecord> moves;
  std::vector<Process> positions;  // exists-positions in creation order
  std::vector<TraceSegment> segments;
  std::size_t steps = 0;

  bool eloise_wins() const { return result == MatchResult::EloiseWin; }
  /// "EloiseWin" or "AbelardWin(reason)".
  std::string verdict() const;
  /// Abelard's answers, usable as a script for a replay.
  std::vector<AbelardMove> abelard_moves() const;
  /// Whether any recorded step used `rule`.
  bool used_rule(std::string_view rule) const;
};

std::string transcript_to_json(const MatchOutcome& outcome, int indent = -1);
std::string transcript_to_text(const MatchOutcome& outcome, bool with_steps = false);

MatchOutcome play_g1(const Term& realizer, const Handle& handle, const ArithFormula& formula,
                     AbelardStrategy& abelard, const MatchOptions& options = {});
MatchOutcome play_g2(const Term& realizer, const Handle& handle, const ArithFormula& formula,
                     AbelardStrategy& abelard, const MatchOptions& options = {});

// ---------------------------------------------------------------------------
// G0

class EloiseG0 {
 public:
  virtual ~EloiseG0() = default;
  /// (index of a position in H, m), or nullopt to give up.
  virtual std::optional<std::pair<std::size_t, Nat>> propose(const std::vector<Position>& history) = 0;
};

class AbelardG0 {
 public:
  virtual ~AbelardG0() = default;
  virtual std::optional<Nat> answer(const std::vector<Position>& history, std::size_t position, Nat m) = 0;
};

/// Plays m from the listed start positions in order.
class ScriptedEloiseG0 : public EloiseG0 {
 public:
  explicit ScriptedEloiseG0(std::vector<std::pair<Position, Nat>> moves) : moves_(std::move(moves)) {}
  std::optional<std::pair<std::size_t, Nat>> propose(const std::vector<Position>& history) override;

 private:
  std::vector<std::pair<Position, Nat>> moves_;
  std::size_t next_ = 0;
};

class ScriptedAbelardG0 : public AbelardG0 {
 public:
  explicit ScriptedAbelardG0(std::vector<Nat> answers) : answers_(std::move(answers)) {}
  std::optional<Nat> answer(const std::vector<Position>&, std::size_t, Nat) override;

 private:
  std::vector<Nat> answers_;
  std::size_t next_ = 0;
};

/// Walks the tuples of [0, box]^h in enumeration order up to `max_index`,
/// extending for each the deepest position of H whose m is a prefix.
class BlindEnumerationEloise : public EloiseG0 {
 public:
  BlindEnumerationEloise(std::size_t h, Nat box, Nat max_index) : h_(h), box_(box), max_index_(max_index) {}
  std::optional<std::pair<std::size_t, Nat>> propose(const std::vector<Position>& history) override;

 private:
  std::size_t h_;
  Nat box_;
  Nat max_index_;
  Nat index_ = 0;
};

/// Answers in [0, B], choosing the least n that moves to a position losing
/// for Eloise in the bounded game, and 0 when there is none.
class OracleAbelard : public AbelardG0 {
 public:
  OracleAbelard(ArithFormula f, Nat bound, std::vector<Nat> leading = {})
      : f_(std::move(f)), bound_(bound), leading_(std::move(leading)) {}
  std::optional<Nat> answer(const std::vector<Position>& history, std::size_t position, Nat m) override;

 private:
  ArithFormula f_;
  Nat bound_;
  std::vector<Nat> leading_;
};

struct G0Outcome {
  bool eloise_wins = false;
  std::vector<Position> history;
  std::optional<std::size_t> winning_position;
  std::size_t moves = 0;
  std::string reason;  // "win", "eloise gave up", "abelard gave up", "move limit"
};

G0Outcome play_g0(const ArithFormula& f, EloiseG0& eloise, AbelardG0& abelard, std::size_t max_moves,
                  const std::vector<Nat>& leading = {});

// ---------------------------------------------------------------------------
// Strategy checking

using AbelardFactory = std::function<std::unique_ptr<AbelardStrategy>()>;

struct StrategyCheckRow {
  std::string game;  // "g1" or "g2"
  std::size_t handle = 0;
  std::size_t adversary = 0;
  std::string adversary_name;
  MatchOutcome outcome;
};

struct StrategyReport {
  std::vector<StrategyCheckRow> rows;
  std::size_t eloise_wins() const;
  std::size_t abelard_wins() const;
  /// First Abelard win, a definitive counterexample unless it is a budget loss.
  const StrategyCheckRow* counterexample() const;
};

/// Plays `realizer` against every (handle, adversary) pair in the listed
/// games.
StrategyReport check_strategy(const Term& realizer, const ArithFormula& formula,
                              const std::vector<AbelardFactory>& adversaries,
                              const std::vector<Handle>& handles,
                              const std::vector<std::string>& games = {"g1", "g2"},
                              const MatchOptions& options = {});

}  // namespace krivine

#pragma once

// Thread schemes: a realizer run against fresh interaction constants
// kappa_j / alpha_j, recorded as a tree of configurations
// kappa_j * m . t . alpha_j.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "krivine/formula.hpp"
#include "krivine/machine.hpp"
#include "krivine/syntax.hpp"

namespace krivine {

class SchemeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Path = std::vector<Nat>;

std::string path_to_string(const Path& p);

/// A finite tree of paths with its characteristic function phi, stored as
/// the insertion order: phi(0) is the root.  Every insertion keeps the set
/// prefix-closed and left-sibling-closed.
class PathTree {
 public:
  PathTree() : paths_{Path{}} {}

  /// Adds phi(parent) . c for the least c not yet used; returns the new index.
  std::size_t add_child(std::size_t parent);
  /// Adds `p`; throws SchemeError when the invariants would break.
  std::size_t insert(const Path& p);

  bool contains(const Path& p) const;
  std::optional<std::size_t> index_of(const Path& p) const;
  const Path& phi(std::size_t i) const { return paths_.at(i); }
  std::size_t size() const { return paths_.size(); }
  const std::vector<Path>& paths() const { return paths_; }

  /// Re-checks the invariants on every prefix {phi(k) : k <= n}.
  bool well_formed() const;

 private:
  std::vector<Path> paths_;
};

struct SchemeNode {
  Path path;
  std::optional<Nat> m;           // none for the root
  std::optional<Nat> n;           // none for the root
  std::optional<std::size_t> parent;
  Term t;                         // t_i, the strategy Eloise played
  ConstId kappa = 0;
  ConstId alpha = 0;
};

/// Line i of the scheme: start reduces in `steps` steps to `reached`.
struct SchemeLine {
  Process start;
  Process reached;
  std::size_t steps = 0;
  std::size_t target = 0;  // j of the kappa_j reached
};

enum class SchemeStatus { Success, Stuck, Budget, Cycle, WrongDepth, NonzeroValue, AnswersExhausted };
std::string_view to_string(SchemeStatus s);

struct ThreadScheme {
  std::string formula;
  std::size_t h = 0;
  std::vector<Nat> leading;
  std::vector<SchemeNode> nodes;  // nodes[0] is the root, t_0 the realizer
  std::vector<SchemeLine> lines;
  PathTree tree;
  SchemeStatus status = SchemeStatus::Stuck;
  std::string message;
  std::optional<std::size_t> f;  // line reaching kappa_s * alpha_s
  std::optional<std::size_t> s;

  bool ok() const { return status == SchemeStatus::Success; }
  /// m and n along phi(i).
  std::pair<std::vector<Nat>, std::vector<Nat>> along(std::size_t i) const;
};

struct SchemeOptions {
  /// Must not contain quote or eq.
  MachineConfig config = MachineConfig::standard().uninstall(builtin::quote()).uninstall(builtin::eq());
  std::size_t budget = 1000000;
  std::vector<Nat> leading;
};

/// Runs t0 * kappa_0 . alpha_0 and, on each kappa_j * m . t . alpha_j,
/// records a child of phi(j) and continues with t * n . kappa_i . alpha_i
/// where n is the next element of `nseq`.
ThreadScheme extract_scheme(const Term& t0, const std::vector<Nat>& nseq, const ArithFormula& f,
                            const SchemeOptions& options = {});

/// Same shape, m, n and parents; terms equal up to renaming of the
/// interaction constants.
bool same_scheme(const ThreadScheme& a, const ThreadScheme& b);

/// {x_i := m_{tau|i}, y_i := n_{tau|i}} for i = 1..|tau|.
std::vector<std::pair<std::string, Nat>> path_substitution(const ThreadScheme& scheme, const Path& tau);
/// Replaces the free variables x_i / y_i of `subject` by numerals.
Term substitute_along(const ThreadScheme& scheme, const Path& tau, const Term& subject);

struct Replacement {
  Term u;    // for kappa_j
  Stack pi;  // for alpha_j
};

/// Predicted lines after kappa_j := u_j and alpha_j := pi_j.  Indices
/// without a replacement keep their constants.
std::vector<SchemeLine> replay_with_substitution(const ThreadScheme& scheme,
                                                 const std::vector<std::optional<Replacement>>& replacements);

/// Whether the machine takes every predicted start to its predicted end
/// within `budget` steps.
bool confirm_replay(const std::vector<SchemeLine>& lines, const MachineConfig& config, std::size_t budget);

std::string scheme_to_json(const ThreadScheme& scheme, int indent = 2);
/// Two columns: each line and the configuration it reaches, with phi.
std::string scheme_to_text(const ThreadScheme& scheme, bool with_terms = false);
std::string scheme_to_dot(const ThreadScheme& scheme);

}  // namespace krivine

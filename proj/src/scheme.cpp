#include "krivine/scheme.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "krivine/text.hpp"

namespace krivine {

namespace {

using ojson = nlohmann::ordered_json;

std::string nat_list(const std::vector<Nat>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
  return s;
}

}  // namespace

std::string path_to_string(const Path& p) {
  if (p.empty()) return "()";
  std::string s;
  for (std::size_t i = 0; i < p.size(); ++i) s += (i ? "." : "") + std::to_string(p[i]);
  return s;
}

// ---------------------------------------------------------------------------
// PathTree

std::size_t PathTree::add_child(std::size_t parent) {
  Path p = phi(parent);
  p.push_back(0);
  while (contains(p)) ++p.back();
  return insert(p);
}

std::size_t PathTree::insert(const Path& p) {
  if (contains(p)) throw SchemeError("path " + path_to_string(p) + " is already in the tree");
  if (p.empty()) throw SchemeError("the root is already in the tree");
  Path parent(p.begin(), p.end() - 1);
  if (!contains(parent)) throw SchemeError("path " + path_to_string(p) + " has no parent in the tree");
  for (Nat c = 0; c < p.back(); ++c) {
    Path sib = parent;
    sib.push_back(c);
    if (!contains(sib)) throw SchemeError("path " + path_to_string(p) + " misses left sibling " + path_to_string(sib));
  }
  paths_.push_back(p);
  return paths_.size() - 1;
}

bool PathTree::contains(const Path& p) const { return index_of(p).has_value(); }

std::optional<std::size_t> PathTree::index_of(const Path& p) const {
  auto it = std::find(paths_.begin(), paths_.end(), p);
  if (it == paths_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - paths_.begin());
}

bool PathTree::well_formed() const {
  if (paths_.empty() || !paths_.front().empty()) return false;
  for (std::size_t n = 1; n < paths_.size(); ++n) {
    const Path& p = paths_[n];
    if (p.empty()) return false;
    auto seen_before = [&](const Path& q) {
      return std::find(paths_.begin(), paths_.begin() + static_cast<std::ptrdiff_t>(n), q) !=
             paths_.begin() + static_cast<std::ptrdiff_t>(n);
    };
    if (seen_before(p)) return false;
    Path parent(p.begin(), p.end() - 1);
    if (!seen_before(parent)) return false;
    for (Nat c = 0; c < p.back(); ++c) {
      Path sib = parent;
      sib.push_back(c);
      if (!seen_before(sib)) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Extraction

std::string_view to_string(SchemeStatus s) {
  switch (s) {
    case SchemeStatus::Success:
      return "success";
    case SchemeStatus::Stuck:
      return "stuck";
    case SchemeStatus::Budget:
      return "budget";
    case SchemeStatus::Cycle:
      return "cycle";
    case SchemeStatus::WrongDepth:
      return "wrong depth";
    case SchemeStatus::NonzeroValue:
      return "nonzero value";
    case SchemeStatus::AnswersExhausted:
      return "budget (answers exhausted)";
  }
  return "?";
}

std::pair<std::vector<Nat>, std::vector<Nat>> ThreadScheme::along(std::size_t i) const {
  std::vector<Nat> m, n;
  for (std::optional<std::size_t> k = i; k && nodes[*k].parent; k = nodes[*k].parent) {
    m.push_back(*nodes[*k].m);
    n.push_back(*nodes[*k].n);
  }
  std::reverse(m.begin(), m.end());
  std::reverse(n.begin(), n.end());
  return {m, n};
}

ThreadScheme extract_scheme(const Term& t0, const std::vector<Nat>& nseq, const ArithFormula& f,
                            const SchemeOptions& options) {
  if (options.config.has_quote_or_eq()) {
    throw SchemeError("scheme extraction needs a machine without quote and eq");
  }
  if (!options.config.deterministic()) throw SchemeError("scheme extraction needs a deterministic machine");
  if (!t0.closed()) throw SchemeError("realizer is not closed");
  if (options.leading.size() != f.leading) {
    throw SchemeError("formula " + f.name + " expects " + std::to_string(f.leading) + " leading numerals");
  }

  MachineConfig config = options.config;
  ThreadScheme scheme;
  scheme.formula = f.name;
  scheme.h = f.h;
  scheme.leading = options.leading;
  std::unordered_map<ConstId, std::size_t> kappa_index;

  auto fresh_pair = [&](SchemeNode& node, std::size_t index) {
    node.kappa = fresh_constants("kappa", 1).front();
    node.alpha = fresh_stack_constants("alpha", 1).front();
    config.mark_substitutive(node.kappa);
    kappa_index.emplace(node.kappa, index);
  };

  SchemeNode root;
  root.t = t0;
  fresh_pair(root, 0);
  scheme.nodes.push_back(root);

  std::vector<Term> first;
  for (Nat z : options.leading) first.push_back(numeral(z));
  first.push_back(Term::constant(root.kappa));
  Process start{t0, Stack::of(first, Stack::bottom(root.alpha))};

  std::size_t used = 0;
  std::size_t answers = 0;
  for (std::size_t i = 0;; ++i) {
    Machine machine(config);
    Trace trace = machine.run(start, options.budget - used);
    used += trace.steps();
    const Process& last = trace.last();
    SchemeLine line{start, last, trace.steps(), 0};

    if (trace.status == TraceStatus::BudgetExhausted) {
      scheme.status = SchemeStatus::Budget;
      scheme.message = "budget exhausted on line " + std::to_string(i);
      return scheme;
    }
    if (trace.status == TraceStatus::Cycle) {
      scheme.status = SchemeStatus::Cycle;
      scheme.message = "line " + std::to_string(i) + " loops";
      return scheme;
    }
    auto hit = last.head.kind() == TermKind::Const ? kappa_index.find(last.head.const_id()) : kappa_index.end();
    if (hit == kappa_index.end()) {
      scheme.status = SchemeStatus::Stuck;
      scheme.message = "line " + std::to_string(i) + " is stuck on " + to_string(last);
      return scheme;
    }
    const std::size_t j = hit->second;
    const SchemeNode& target = scheme.nodes[j];
    line.target = j;

    if (last.stack.is_bottom() && last.stack.bottom_id() == target.alpha) {
      scheme.lines.push_back(line);
      scheme.f = i;
      scheme.s = j;
      const auto [m, n] = scheme.along(j);
      if (m.size() != f.h) {
        scheme.status = SchemeStatus::WrongDepth;
        scheme.message = "reached kappa" + std::to_string(j) + " * alpha" + std::to_string(j) + " at depth " +
                         std::to_string(m.size()) + ", expected " + std::to_string(f.h);
      } else if (!f.holds(options.leading, m, n)) {
        scheme.status = SchemeStatus::NonzeroValue;
        scheme.message = "formula fails at m = " + nat_list(m) + ", n = " + nat_list(n);
      } else {
        scheme.status = SchemeStatus::Success;
      }
      return scheme;
    }

    auto rest = last.stack.drop(2);
    std::optional<Nat> m = rest ? decode_numeral(*last.stack.at(0)) : std::nullopt;
    if (!m || !rest->is_bottom() || rest->bottom_id() != target.alpha) {
      scheme.status = SchemeStatus::Stuck;
      scheme.message = "line " + std::to_string(i) + " reaches kappa" + std::to_string(j) +
                       " with an unexpected stack " + to_string(last.stack);
      return scheme;
    }
    if (scheme.tree.phi(j).size() >= f.h) {
      scheme.lines.push_back(line);
      scheme.status = SchemeStatus::WrongDepth;
      scheme.message = "line " + std::to_string(i) + " plays on the final node " + std::to_string(j);
      return scheme;
    }
    scheme.lines.push_back(line);
    if (answers >= nseq.size()) {
      scheme.status = SchemeStatus::AnswersExhausted;
      scheme.message = "no answer left for node " + std::to_string(i + 1);
      return scheme;
    }

    SchemeNode node;
    node.parent = j;
    node.m = *m;
    node.n = nseq[answers++];
    node.t = *last.stack.at(1);
    const std::size_t idx = scheme.tree.add_child(j);
    node.path = scheme.tree.phi(idx);
    fresh_pair(node, idx);
    scheme.nodes.push_back(node);
    start = Process{node.t, Stack::of({numeral(*node.n), Term::constant(node.kappa)}, Stack::bottom(node.alpha))};
  }
}

bool same_scheme(const ThreadScheme& a, const ThreadScheme& b) {
  if (a.status != b.status || a.f != b.f || a.s != b.s || a.nodes.size() != b.nodes.size() ||
      a.tree.paths() != b.tree.paths() || a.lines.size() != b.lines.size()) {
    return false;
  }
  ConstSubstitution rename;
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    rename.terms.emplace(b.nodes[i].kappa, Term::constant(a.nodes[i].kappa));
    rename.stacks.emplace(b.nodes[i].alpha, Stack::bottom(a.nodes[i].alpha));
  }
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    const auto& x = a.nodes[i];
    const auto& y = b.nodes[i];
    if (x.m != y.m || x.n != y.n || x.parent != y.parent || x.t != rename.apply(y.t)) return false;
  }
  for (std::size_t i = 0; i < a.lines.size(); ++i) {
    if (a.lines[i].steps != b.lines[i].steps || a.lines[i].target != b.lines[i].target ||
        a.lines[i].reached != rename.apply(b.lines[i].reached)) {
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Substitution along a path

std::vector<std::pair<std::string, Nat>> path_substitution(const ThreadScheme& scheme, const Path& tau) {
  auto idx = scheme.tree.index_of(tau);
  if (!idx) throw SchemeError("path " + path_to_string(tau) + " is not in the scheme");
  const auto [m, n] = scheme.along(*idx);
  std::vector<std::pair<std::string, Nat>> out;
  for (std::size_t i = 0; i < m.size(); ++i) {
    out.emplace_back("x" + std::to_string(i + 1), m[i]);
    out.emplace_back("y" + std::to_string(i + 1), n[i]);
  }
  return out;
}

Term substitute_along(const ThreadScheme& scheme, const Path& tau, const Term& subject) {
  Term out = subject;
  for (const auto& [x, v] : path_substitution(scheme, tau)) out = subst_var(out, x, numeral(v));
  return out;
}

std::vector<SchemeLine> replay_with_substitution(const ThreadScheme& scheme,
                                                 const std::vector<std::optional<Replacement>>& replacements) {
  ConstSubstitution sigma;
  for (std::size_t j = 0; j < replacements.size() && j < scheme.nodes.size(); ++j) {
    if (!replacements[j]) continue;
    if (replacements[j]->u.null() || !replacements[j]->u.closed()) {
      throw SchemeError("replacement for kappa" + std::to_string(j) + " is not closed");
    }
    sigma.terms.emplace(scheme.nodes[j].kappa, replacements[j]->u);
    sigma.stacks.emplace(scheme.nodes[j].alpha, replacements[j]->pi);
  }
  std::vector<SchemeLine> out;
  for (const auto& line : scheme.lines) {
    out.push_back(SchemeLine{sigma.apply(line.start), sigma.apply(line.reached), line.steps, line.target});
  }
  return out;
}

bool confirm_replay(const std::vector<SchemeLine>& lines, const MachineConfig& config, std::size_t budget) {
  Machine machine(config);
  for (const auto& line : lines) {
    const Process& target = line.reached;
    Trace trace = machine.run(line.start, budget, {Watcher{"line", [&](const Process& p) { return p == target; }}});
    if (trace.status != TraceStatus::WatcherHit) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Output

std::string scheme_to_json(const ThreadScheme& scheme, int indent) {
  ojson doc;
  doc["formula"] = scheme.formula;
  doc["h"] = scheme.h;
  doc["status"] = std::string(to_string(scheme.status));
  if (!scheme.message.empty()) doc["message"] = scheme.message;
  doc["nodes"] = ojson::array();
  for (std::size_t i = 0; i < scheme.nodes.size(); ++i) {
    const auto& node = scheme.nodes[i];
    doc["nodes"].push_back({{"idx", i},
                            {"path", node.path},
                            {"m", node.m ? ojson(*node.m) : ojson(nullptr)},
                            {"n", node.n ? ojson(*node.n) : ojson(nullptr)},
                            {"parent", node.parent ? ojson(*node.parent) : ojson(nullptr)},
                            {"term", to_string(node.t)}});
  }
  if (scheme.f && scheme.s) {
    doc["final"] = {{"f", *scheme.f}, {"s", *scheme.s}};
  } else {
    doc["final"] = nullptr;
  }
  return doc.dump(indent);
}

std::string scheme_to_text(const ThreadScheme& scheme, bool with_terms) {
  std::vector<std::pair<std::string, std::string>> rows;
  for (std::size_t i = 0; i < scheme.lines.size(); ++i) {
    const auto& line = scheme.lines[i];
    std::string left = "t" + std::to_string(i) + " * ";
    if (i == 0) {
      for (Nat z : scheme.leading) left += std::to_string(z) + " . ";
    } else {
      left += std::to_string(*scheme.nodes[i].n) + " . ";
    }
    left += "k" + std::to_string(i) + " . a" + std::to_string(i);
    const std::string j = std::to_string(line.target);
    std::string right;
    if (line.reached.stack.is_bottom()) {
      right = "k" + j + " * a" + j;
    } else if (i + 1 < scheme.nodes.size()) {
      right = "k" + j + " * " + std::to_string(*scheme.nodes[i + 1].m) + " . t" + std::to_string(i + 1) + " . a" + j;
      right += "    phi(" + std::to_string(i + 1) + ") = " + path_to_string(scheme.nodes[i + 1].path);
    } else if (auto m = line.reached.stack.at(0); m && decode_numeral(*m)) {
      right = "k" + j + " * " + std::to_string(*decode_numeral(*m)) + " . t" + std::to_string(i + 1) + " . a" + j +
              "    (no answer)";
    } else {
      right = to_string(line.reached);
    }
    rows.emplace_back(left, right);
  }
  std::size_t width = 0;
  for (const auto& r : rows) width = std::max(width, r.first.size());
  std::ostringstream out;
  for (const auto& [l, r] : rows) out << l << std::string(width - l.size(), ' ') << "  >  " << r << "\n";
  out << "status: " << to_string(scheme.status);
  if (scheme.f && scheme.s) out << " (f = " << *scheme.f << ", s = " << *scheme.s << ")";
  if (!scheme.message.empty()) out << ": " << scheme.message;
  out << "\n";
  if (with_terms) {
    for (std::size_t i = 0; i < scheme.nodes.size(); ++i) out << "t" << i << " = " << to_string(scheme.nodes[i].t) << "\n";
  }
  return out.str();
}

std::string scheme_to_dot(const ThreadScheme& scheme) {
  std::ostringstream out;
  out << "digraph scheme {\n  node [shape=box];\n";
  for (std::size_t i = 0; i < scheme.nodes.size(); ++i) {
    const auto& node = scheme.nodes[i];
    out << "  n" << i << " [label=\"" << i << ": " << path_to_string(node.path);
    if (node.m) out << "\\nm=" << *node.m << " n=" << *node.n;
    out << "\"";
    if (scheme.s && *scheme.s == i) out << ", peripheries=2";
    out << "];\n";
  }
  for (std::size_t i = 0; i < scheme.nodes.size(); ++i) {
    if (scheme.nodes[i].parent) out << "  n" << *scheme.nodes[i].parent << " -> n" << i << ";\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace krivine

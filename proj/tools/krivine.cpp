// krivine: evaluate processes, play realizability games, extract thread
// schemes and query the bounded truth oracle.
//
// Exit codes: 0 success / EloiseWin / win, 1 AbelardWin / failure / lose,
// 2 usage or configuration error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "krivine/formula.hpp"
#include "krivine/game.hpp"
#include "krivine/machine.hpp"
#include "krivine/realizers.hpp"
#include "krivine/scheme.hpp"
#include "krivine/text.hpp"

using namespace krivine;

namespace {

constexpr int kConfigError = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::size_t default_steps() {
  if (const char* env = std::getenv("KRIVINE_STEPS")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw UsageError(std::string("KRIVINE_STEPS is not a number: ") + env);
    }
  }
  return 1000000;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<Nat> parse_nat_list(const std::string& text) {
  std::vector<Nat> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    try {
      out.push_back(std::stoull(item, &used));
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw UsageError("not a list of naturals: " + text);
  }
  return out;
}

ArithFormula resolve_formula(const std::string& name) {
  auto f = find_formula(name);
  if (!f) throw UsageError("unknown formula: " + name);
  return *f;
}

RealizerEntry resolve_realizer(const std::string& name) {
  auto r = find_realizer(name);
  if (!r) throw UsageError("unknown realizer: " + name);
  return *r;
}

struct Common {
  std::vector<std::string> formula_files;
  std::vector<std::string> realizer_files;
  std::string format = "text";

  void add_to(CLI::App* app) {
    app->add_option("--formulas", formula_files, "JSON file of extra formulas");
    app->add_option("--realizers", realizer_files, "JSON file of extra realizers");
    app->add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json"}));
  }
  void load() const {
    for (const auto& f : formula_files) load_formulas_json(read_file(f));
    for (const auto& f : realizer_files) load_realizers_json(read_file(f));
  }
  bool json() const { return format == "json"; }
};

// ---------------------------------------------------------------------------

struct EvalArgs {
  Common common;
  std::string process;
  std::optional<std::size_t> steps;
  bool trace = false;
  bool core = false;
};

int run_eval(const EvalArgs& a) {
  a.common.load();
  MachineConfig config = a.core ? MachineConfig::core() : MachineConfig::standard();
  const Process p = parse_process(a.process, config.parse_options());
  Machine machine(config);
  const Trace trace = machine.run(p, a.steps.value_or(default_steps()));
  if (a.common.json()) {
    nlohmann::ordered_json doc;
    doc["status"] = std::string(to_string(trace.status));
    doc["steps"] = trace.steps();
    doc["summary"] = trace.summary();
    doc["last"] = to_string(trace.last());
    if (trace.status == TraceStatus::Cycle) {
      doc["cycle_entry"] = trace.cycle_entry;
      doc["cycle_period"] = trace.cycle_period;
    }
    if (a.trace) doc["trace"] = nlohmann::ordered_json::parse(trace_to_json(trace));
    std::cout << doc.dump(2) << "\n";
  } else if (a.trace) {
    std::cout << trace_to_text(trace);
  } else {
    std::cout << trace.summary() << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct MatchArgs {
  Common common;
  std::string game = "g1";
  std::string realizer;
  std::string formula;
  std::string abelard = "random";
  std::vector<Nat> leading;
  std::string answers;
  std::uint64_t seed = 0;
  std::optional<std::size_t> steps;
  std::size_t phase_steps = 100000;
  Nat bound = 4;
  bool trace = false;
};

int run_match_g0(const MatchArgs& a, const ArithFormula& f) {
  BlindEnumerationEloise eloise(f.h, eloise_bound(a.bound), enumeration_bound(f.h, eloise_bound(a.bound)));
  OracleAbelard abelard(f, a.bound, a.leading);
  const G0Outcome o = play_g0(f, eloise, abelard, a.steps.value_or(default_steps()), a.leading);
  if (a.common.json()) {
    nlohmann::ordered_json doc;
    doc["game"] = "g0";
    doc["verdict"] = o.eloise_wins ? "EloiseWin" : "AbelardWin";
    doc["reason"] = o.reason;
    doc["moves"] = o.moves;
    doc["history"] = nlohmann::ordered_json::array();
    for (const auto& p : o.history) doc["history"].push_back({{"m", p.m}, {"n", p.n}});
    std::cout << doc.dump(2) << "\n";
  } else {
    for (std::size_t i = 1; i < o.history.size(); ++i) {
      std::cout << "position " << i << ": m =";
      for (Nat v : o.history[i].m) std::cout << " " << v;
      std::cout << ", n =";
      for (Nat v : o.history[i].n) std::cout << " " << v;
      std::cout << "\n";
    }
    std::cout << "verdict: " << (o.eloise_wins ? "EloiseWin" : "AbelardWin") << " (" << o.reason << ")\n";
  }
  return o.eloise_wins ? 0 : 1;
}

int run_match(const MatchArgs& a) {
  a.common.load();
  const ArithFormula f = resolve_formula(a.formula);
  if (a.game == "g0") return run_match_g0(a, f);
  if (a.realizer.empty()) throw UsageError("--realizer is required for " + a.game);
  const RealizerEntry r = resolve_realizer(a.realizer);

  std::unique_ptr<AbelardStrategy> abelard;
  std::optional<Handle> handle;
  std::vector<Nat> leading = a.leading;
  if (a.abelard == "random") {
    abelard = std::make_unique<RandomAbelard>(a.seed);
  } else if (a.abelard == "fresh") {
    abelard = std::make_unique<FreshConstantAbelard>(parse_nat_list(a.answers));
  } else if (a.abelard == "interactive") {
    abelard = std::make_unique<InteractiveAbelard>(std::cin, std::cerr);
  } else {
    AbelardScript script;
    try {
      script = parse_abelard_script(read_file(a.abelard), MachineConfig::standard().parse_options());
    } catch (const GameError& e) {
      throw UsageError(e.what());
    }
    if (leading.empty()) leading = script.leading;
    handle = script.handle;
    if (handle) handle->leading = leading;
    abelard = std::make_unique<ScriptedAbelard>(script.moves);
  }
  if (leading.size() != f.leading) {
    throw UsageError("formula " + f.name + " needs " + std::to_string(f.leading) + " leading numerals (--leading)");
  }
  if (!handle) handle = fresh_handle(leading);

  MatchOptions options;
  options.total_budget = a.steps.value_or(default_steps());
  options.phase_budget = std::min(a.phase_steps, options.total_budget);
  const MatchOutcome o = a.game == "g1" ? play_g1(r.term, *handle, f, *abelard, options)
                                        : play_g2(r.term, *handle, f, *abelard, options);
  if (a.common.json()) {
    std::cout << transcript_to_json(o, 2) << "\n";
  } else {
    std::cout << transcript_to_text(o, a.trace);
  }
  return o.eloise_wins() ? 0 : 1;
}

// ---------------------------------------------------------------------------

struct SchemeArgs {
  Common common;
  std::string realizer;
  std::string formula;
  std::string answers;
  std::vector<Nat> leading;
  std::optional<std::size_t> steps;
  bool dot = false;
  bool terms = false;
};

int run_scheme(const SchemeArgs& a) {
  a.common.load();
  const RealizerEntry r = resolve_realizer(a.realizer);
  std::string fname = a.formula;
  if (fname.empty()) {
    if (!r.formula) throw UsageError("--formula is required for " + r.name);
    fname = *r.formula;
  }
  const ArithFormula f = resolve_formula(fname);
  SchemeOptions options;
  options.budget = a.steps.value_or(default_steps());
  options.leading = a.leading;
  const ThreadScheme s = extract_scheme(r.term, parse_nat_list(a.answers), f, options);
  if (a.common.json()) {
    std::cout << scheme_to_json(s, 2) << "\n";
  } else {
    std::cout << scheme_to_text(s, a.terms);
    if (a.dot) std::cout << scheme_to_dot(s);
  }
  return s.ok() ? 0 : 1;
}

// ---------------------------------------------------------------------------

struct OracleArgs {
  Common common;
  std::string formula;
  Nat bound = 4;
  std::vector<Nat> leading;
  bool cautious = false;
};

int run_oracle(const OracleArgs& a) {
  a.common.load();
  const ArithFormula f = resolve_formula(a.formula);
  if (a.leading.size() != f.leading) {
    throw UsageError("formula " + f.name + " needs " + std::to_string(f.leading) + " leading numerals (--leading)");
  }
  const Verdict v = truth_oracle_g0(f, a.bound, {}, a.leading, a.cautious);
  const std::string note = "Abelard bounded by " + std::to_string(a.bound) + ", Eloise by " +
                           std::to_string(eloise_bound(a.bound)) + "; a larger bound may turn lose into win";
  if (a.common.json()) {
    nlohmann::ordered_json doc{{"formula", f.name}, {"bound", a.bound}, {"verdict", to_string(v)}, {"note", note}};
    std::cout << doc.dump(2) << "\n";
  } else {
    std::cout << to_string(v) << "\n" << note << "\n";
  }
  return v == Verdict::Win ? 0 : 1;
}

int run_list(const Common& c) {
  c.load();
  if (c.json()) {
    nlohmann::ordered_json doc;
    doc["formulas"] = nlohmann::ordered_json::array();
    for (const auto& name : formula_names()) {
      const ArithFormula f = formula(name);
      doc["formulas"].push_back({{"name", name}, {"h", f.h}, {"leading", f.leading}});
    }
    doc["realizers"] = realizer_names();
    std::cout << doc.dump(2) << "\n";
    return 0;
  }
  std::cout << "formulas:\n";
  for (const auto& name : formula_names()) {
    const ArithFormula f = formula(name);
    std::cout << "  " << name << " (h = " << f.h << ", leading = " << f.leading << ")\n";
  }
  std::cout << "realizers:\n";
  for (const auto& name : realizer_names()) std::cout << "  " << name << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Krivine machine and realizability games"};
  app.require_subcommand(1);

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Run a process and classify how it ends");
  eval_cmd->add_option("process", eval.process, "Process text, t * pi")->required();
  eval_cmd->add_option("--steps", eval.steps, "Step budget");
  eval_cmd->add_flag("--trace", eval.trace, "Print every step");
  eval_cmd->add_flag("--core", eval.core, "Only cc, no extra instructions");
  eval.common.add_to(eval_cmd);

  MatchArgs match;
  auto* match_cmd = app.add_subcommand("match", "Play a realizer against Abelard");
  match_cmd->add_option("--game", match.game)->check(CLI::IsMember({"g0", "g1", "g2"}));
  match_cmd->add_option("--realizer", match.realizer, "Realizer name");
  match_cmd->add_option("--formula", match.formula, "Formula name")->required();
  match_cmd->add_option("--abelard", match.abelard, "random, fresh, interactive or a script file");
  match_cmd->add_option("--answers", match.answers, "n values for --abelard fresh, comma separated");
  match_cmd->add_option("--leading", match.leading, "Numerals for leading universals");
  match_cmd->add_option("--seed", match.seed, "Seed for --abelard random");
  match_cmd->add_option("--steps", match.steps, "Total step budget (g1, g2) or move limit (g0)");
  match_cmd->add_option("--phase-steps", match.phase_steps, "Steps between moves, or per process in g2");
  match_cmd->add_option("--bound", match.bound, "Abelard's bound in g0");
  match_cmd->add_flag("--trace", match.trace, "Include machine steps in the text transcript");
  match.common.add_to(match_cmd);

  SchemeArgs scheme;
  auto* scheme_cmd = app.add_subcommand("scheme", "Extract the thread scheme of a realizer");
  scheme_cmd->add_option("--realizer", scheme.realizer, "Realizer name")->required();
  scheme_cmd->add_option("--formula", scheme.formula, "Formula name (defaults to the realizer's)");
  scheme_cmd->add_option("--answers", scheme.answers, "Abelard's n values, comma separated")->required();
  scheme_cmd->add_option("--leading", scheme.leading, "Numerals for leading universals");
  scheme_cmd->add_option("--steps", scheme.steps, "Step budget");
  scheme_cmd->add_flag("--dot", scheme.dot, "Also print the tree in DOT");
  scheme_cmd->add_flag("--terms", scheme.terms, "Also print each t_i");
  scheme.common.add_to(scheme_cmd);

  OracleArgs oracle;
  auto* oracle_cmd = app.add_subcommand("oracle", "Decide the bounded integer game");
  oracle_cmd->add_option("--formula", oracle.formula, "Formula name")->required();
  oracle_cmd->add_option("--bound", oracle.bound, "Abelard's bound B");
  oracle_cmd->add_option("--leading", oracle.leading, "Numerals for leading universals");
  oracle_cmd->add_flag("--cautious", oracle.cautious, "Report unknown instead of lose");
  oracle.common.add_to(oracle_cmd);

  Common list;
  auto* list_cmd = app.add_subcommand("list", "List formulas and realizers");
  list.add_to(list_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*eval_cmd) return run_eval(eval);
    if (*match_cmd) return run_match(match);
    if (*scheme_cmd) return run_scheme(scheme);
    if (*oracle_cmd) return run_oracle(oracle);
    if (*list_cmd) return run_list(list);
  } catch (const ParseError& e) {
    std::cerr << e.what() << "\n";
    return kConfigError;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const SchemeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  }
  return kConfigError;
}

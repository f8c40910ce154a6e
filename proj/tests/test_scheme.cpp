#include <gtest/gtest.h>

#include <random>

#include "krivine/game.hpp"
#include "krivine/realizers.hpp"
#include "krivine/scheme.hpp"
#include "krivine/text.hpp"

using namespace krivine;

namespace {

const std::vector<Nat> kFigAnswers = {0, 1, 5, 4, 0, 7};
const ParseOptions kFree{{}, true};

bool is_prefix(const Path& a, const Path& b) {
  return a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin());
}

void check_invariants(const ThreadScheme& s) {
  EXPECT_TRUE(s.tree.well_formed());
  ASSERT_EQ(s.tree.size(), s.nodes.size());
  for (std::size_t i = 1; i < s.nodes.size(); ++i) {
    const auto& node = s.nodes[i];
    ASSERT_TRUE(node.parent);
    const std::size_t j = *node.parent;
    EXPECT_LT(j, i);
    EXPECT_EQ(s.tree.phi(i), node.path);
    EXPECT_TRUE(is_prefix(s.tree.phi(j), node.path));
    EXPECT_EQ(node.path.size(), s.tree.phi(j).size() + 1);
    // Line i-1 reached kappa_j.
    EXPECT_EQ(s.lines[i - 1].target, j);
    EXPECT_EQ(s.lines[i - 1].reached.head, Term::constant(s.nodes[j].kappa));
  }
  // Constants hygiene: kappa_j and alpha_j do not occur in t_i for i <= j.
  for (std::size_t j = 0; j < s.nodes.size(); ++j) {
    for (std::size_t i = 0; i <= j; ++i) {
      EXPECT_FALSE(occurs(s.nodes[j].kappa, s.nodes[i].t)) << i << " " << j;
    }
  }
}

/// A small random closed term over c0, c1 and numerals.
Term random_closed(std::mt19937_64& rng, int depth, std::uint32_t scope = 0) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 5);
  switch (pick(rng)) {
    case 0:
      if (scope > 0) return Term::bound(std::uniform_int_distribution<std::uint32_t>(0, scope - 1)(rng));
      [[fallthrough]];
    case 1:
      return constant(rng() % 2 ? "c0" : "c1");
    case 2:
      return numeral(rng() % 3);
    case 3:
    case 4:
      return Term::lam("x", random_closed(rng, depth - 1, scope + 1));
    default:
      return Term::app(random_closed(rng, depth - 1, scope), random_closed(rng, depth - 1, scope));
  }
}

}  // namespace

TEST(PathTree, Invariants) {
  PathTree t;
  EXPECT_EQ(t.add_child(0), 1u);
  EXPECT_EQ(t.phi(1), Path{0});
  EXPECT_EQ(t.add_child(0), 2u);
  EXPECT_EQ(t.phi(2), Path{1});
  EXPECT_EQ(t.add_child(2), 3u);
  EXPECT_EQ(t.phi(3), (Path{1, 0}));
  EXPECT_THROW(t.insert({3}), SchemeError);      // misses 2
  EXPECT_THROW(t.insert({0, 1}), SchemeError);   // misses 0.0
  EXPECT_THROW(t.insert({5, 0}), SchemeError);   // no parent
  EXPECT_THROW(t.insert({1}), SchemeError);      // duplicate
  EXPECT_NO_THROW(t.insert({2}));
  EXPECT_TRUE(t.well_formed());
}

TEST(Extract, ToyRealizer) {
  const ThreadScheme s = extract_scheme(toy_h1().term, {4}, formula("leq"));
  ASSERT_TRUE(s.ok()) << s.message;
  ASSERT_EQ(s.nodes.size(), 2u);
  EXPECT_EQ(s.nodes[1].path, Path{0});
  EXPECT_EQ(s.nodes[1].m, 0u);
  EXPECT_EQ(s.nodes[1].n, 4u);
  EXPECT_EQ(s.s, 1u);
  EXPECT_EQ(s.f, 1u);
  EXPECT_EQ(s.lines.size(), 2u);
  check_invariants(s);
}

TEST(Extract, FigureMock) {
  const ThreadScheme s = extract_scheme(fig_scheme_mock().term, kFigAnswers, formula("phi4"));
  ASSERT_TRUE(s.ok()) << s.message;
  const std::vector<Path> expected = {{}, {0}, {1}, {1, 0}, {1, 1}, {2}, {0, 0}};
  EXPECT_EQ(s.tree.paths(), expected);
  EXPECT_EQ(s.s, 4u);
  EXPECT_EQ(s.f, 6u);
  const std::vector<std::size_t> targets = {0, 0, 2, 2, 0, 1, 4};
  ASSERT_EQ(s.lines.size(), targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) EXPECT_EQ(s.lines[i].target, targets[i]) << i;
  const std::vector<Nat> ms = {1, 0, 3, 2, 2, 0};
  for (std::size_t i = 0; i < ms.size(); ++i) EXPECT_EQ(s.nodes[i + 1].m, ms[i]);
  check_invariants(s);
}

TEST(Extract, Failures) {
  // Identity-like realizers come back to kappa_0 * alpha_0 at depth 0.
  for (const char* text : {"\\u. u", "\\u. cc (\\k. k u)", "\\u. cc (\\k. u)"}) {
    const ThreadScheme id = extract_scheme(parse_term(text), {}, formula("leq"));
    EXPECT_EQ(id.status, SchemeStatus::WrongDepth) << text;
    EXPECT_EQ(id.s, 0u);
  }
  EXPECT_EQ(extract_scheme(parse_term("\\u. u u"), {}, formula("leq")).status, SchemeStatus::Stuck);
  EXPECT_EQ(extract_scheme(parse_term("\\u. c0"), {}, formula("leq")).status, SchemeStatus::Stuck);

  const ThreadScheme wrong = extract_scheme(parse_term("\\u. cc (\\k. u #0 (\\n v. k u))"), {3}, formula("leq"));
  EXPECT_EQ(wrong.status, SchemeStatus::WrongDepth) << wrong.message;
  EXPECT_EQ(wrong.s, 0u);

  const ThreadScheme nonzero = extract_scheme(parse_term("\\u. u #5 (\\n v. v)"), {2}, formula("leq"));
  EXPECT_EQ(nonzero.status, SchemeStatus::NonzeroValue);

  const ThreadScheme short_answers = extract_scheme(fig_scheme_mock().term, {0, 1}, formula("phi4"));
  EXPECT_EQ(short_answers.status, SchemeStatus::AnswersExhausted);
  EXPECT_EQ(short_answers.nodes.size(), 3u);
  check_invariants(short_answers);

  SchemeOptions tight;
  tight.budget = 3;
  EXPECT_EQ(extract_scheme(fig_scheme_mock().term, kFigAnswers, formula("phi4"), tight).status,
            SchemeStatus::Budget);
  EXPECT_EQ(extract_scheme(parse_term("\\u. (\\x. x x) (\\x. x x)"), {}, formula("leq")).status,
            SchemeStatus::Cycle);
}

TEST(Extract, RefusesQuoteAndEq) {
  SchemeOptions options;
  options.config = MachineConfig::standard();
  EXPECT_THROW(extract_scheme(toy_h1().term, {4}, formula("leq"), options), SchemeError);
  EXPECT_THROW(extract_scheme(parse_term("x", kFree), {4}, formula("leq")), SchemeError);
}

TEST(Extract, Deterministic) {
  const ThreadScheme a = extract_scheme(fig_scheme_mock().term, kFigAnswers, formula("phi4"));
  const ThreadScheme b = extract_scheme(fig_scheme_mock().term, kFigAnswers, formula("phi4"));
  EXPECT_NE(a.nodes[0].kappa, b.nodes[0].kappa);
  EXPECT_TRUE(same_scheme(a, b));
  const ThreadScheme c = extract_scheme(fig_scheme_mock().term, {0, 1, 5, 4, 0, 8}, formula("phi4"));
  EXPECT_FALSE(same_scheme(a, c));
}

TEST(Extract, UniversalRealizer) {
  for (const char* name : {"leq", "phi4"}) {
    const ArithFormula f = formula(name);
    std::vector<Nat> answers(200);
    for (std::size_t i = 0; i < answers.size(); ++i) answers[i] = (i * 7 + 3) % 10;
    const ThreadScheme s = extract_scheme(build_t_phi(f).entry.term, answers, f);
    EXPECT_TRUE(s.ok()) << name << ": " << s.message;
    check_invariants(s);
  }
}

TEST(CrossCheck, FreshConstantAbelard) {
  struct Case {
    RealizerEntry entry;
    std::vector<Nat> answers;
  };
  const std::vector<Case> cases = {{toy_h1(), {4}},
                                   {fig_scheme_mock(), kFigAnswers},
                                   {build_t_phi(formula("phi4")).entry, {3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5, 8, 9, 7}}};
  for (const auto& c : cases) {
    const ArithFormula f = formula(*c.entry.formula);
    const ThreadScheme s = extract_scheme(c.entry.term, c.answers, f);
    FreshConstantAbelard abelard(c.answers);
    const MatchOutcome o = play_g1(c.entry.term, fresh_handle(), f, abelard);
    ASSERT_EQ(o.moves.size() + 1, s.nodes.size()) << c.entry.name;
    for (std::size_t i = 0; i < o.moves.size(); ++i) {
      EXPECT_EQ(o.moves[i].entry, *s.nodes[i + 1].parent);
      EXPECT_EQ(o.moves[i].m, *s.nodes[i + 1].m);
      EXPECT_EQ(o.moves[i].answer.n, *s.nodes[i + 1].n);
    }
    EXPECT_EQ(o.eloise_wins(), s.ok()) << c.entry.name;
    if (o.winning_entry) {
      EXPECT_EQ(*o.winning_entry, *s.s);
    }
  }
}

TEST(Substitution, AlongPath) {
  const ThreadScheme s = extract_scheme(fig_scheme_mock().term, kFigAnswers, formula("phi4"));
  const auto sigma = path_substitution(s, {1, 1});
  const std::vector<std::pair<std::string, Nat>> expected = {{"x1", 0}, {"y1", 1}, {"x2", 2}, {"y2", 4}};
  EXPECT_EQ(sigma, expected);  // x1 := m2, y1 := n2, x2 := m4, y2 := n4
  EXPECT_TRUE(path_substitution(s, {}).empty());
  for (const auto& p : s.tree.paths()) EXPECT_EQ(path_substitution(s, p).size(), 2 * p.size());
  EXPECT_THROW(path_substitution(s, {3}), SchemeError);
  const Term subject = parse_term("x1 x2 y1 y2 z", kFree);
  EXPECT_EQ(substitute_along(s, {1, 1}, subject), parse_term("#0 #2 #1 #4 z", kFree));
  EXPECT_TRUE(formula("phi4").holds({}, {0, 2}, {1, 4}));
}

TEST(Replay, Identity) {
  const ThreadScheme s = extract_scheme(fig_scheme_mock().term, kFigAnswers, formula("phi4"));
  const auto lines = replay_with_substitution(s, {});
  ASSERT_EQ(lines.size(), s.lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    EXPECT_EQ(lines[i].start, s.lines[i].start);
    EXPECT_EQ(lines[i].reached, s.lines[i].reached);
  }
  EXPECT_TRUE(confirm_replay(lines, SchemeOptions{}.config, 1000));
}

TEST(Replay, FirstLine) {
  const ThreadScheme s = extract_scheme(toy_h1().term, {4}, formula("leq"));
  const Term u = constant("c0");
  const Stack pi = parse_stack("c1.a0");
  const auto lines = replay_with_substitution(s, {Replacement{u, pi}});
  EXPECT_EQ(lines[0].start, (Process{s.nodes[0].t, Stack::of({u}, pi)}));
  EXPECT_EQ(lines[0].reached, (Process{u, Stack::of({numeral(0), s.nodes[1].t}, pi)}));
  EXPECT_TRUE(confirm_replay(lines, SchemeOptions{}.config, 1000));
  EXPECT_THROW(replay_with_substitution(s, {Replacement{parse_term("x", kFree), pi}}), SchemeError);
}

TEST(Replay, RandomReplacements) {
  std::mt19937_64 rng(2024);
  const ThreadScheme s = extract_scheme(fig_scheme_mock().term, kFigAnswers, formula("phi4"));
  ASSERT_TRUE(s.ok());
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::optional<Replacement>> r;
    for (std::size_t j = 0; j < s.nodes.size(); ++j) {
      Stack pi = stack_bottom("a" + std::to_string(rng() % 3));
      for (int k = static_cast<int>(rng() % 3); k > 0; --k) pi = Stack::push(random_closed(rng, 3), pi);
      r.push_back(Replacement{random_closed(rng, 3), pi});
    }
    EXPECT_TRUE(confirm_replay(replay_with_substitution(s, r), SchemeOptions{}.config, 10000)) << trial;
  }
}

TEST(Output, Formats) {
  const ThreadScheme s = extract_scheme(fig_scheme_mock().term, kFigAnswers, formula("phi4"));
  const std::string text = scheme_to_text(s);
  EXPECT_NE(text.find("t0 * k0 . a0"), std::string::npos);
  EXPECT_NE(text.find("phi(4) = 1.1"), std::string::npos);
  EXPECT_NE(text.find("k4 * a4"), std::string::npos);
  EXPECT_NE(text.find("f = 6, s = 4"), std::string::npos);
  const std::string json = scheme_to_json(s);
  EXPECT_NE(json.find("\"final\""), std::string::npos);
  EXPECT_NE(json.find("\"s\": 4"), std::string::npos);
  const std::string dot = scheme_to_dot(s);
  EXPECT_NE(dot.find("n2 -> n4"), std::string::npos);
}

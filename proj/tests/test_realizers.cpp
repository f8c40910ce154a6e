#include <gtest/gtest.h>

#include <set>

#include "generators.hpp"
#include "krivine/codec.hpp"
#include "krivine/machine.hpp"
#include "krivine/realizers.hpp"
#include "krivine/text.hpp"

using namespace krivine;

namespace {

bool reaches(Machine& m, const Process& from, const Process& target, std::size_t budget) {
  Trace trace = m.run(from, budget, {Watcher{"target", [&](const Process& p) { return p == target; }}});
  return trace.status == TraceStatus::WatcherHit;
}

Stack S(std::string_view text) { return parse_stack(text); }
Term C(std::string_view name) { return constant(name); }

}  // namespace

TEST(Basic, Contracts) {
  Machine m;
  EXPECT_TRUE(reaches(m, {identity(), S("c0.a0")}, {C("c0"), S("a0")}, 1));
  Trace t = m.run({delta(), Stack::of({delta()}, stack_bottom("a0"))}, 100);
  EXPECT_EQ(t.status, TraceStatus::Cycle);
  EXPECT_EQ(t.cycle_period, 2u);
  const Term pair = app(pair_combinator(), {C("c0"), C("c1")});
  EXPECT_TRUE(reaches(m, {first(), Stack::of({pair}, stack_bottom("a0"))}, {C("c0"), S("a0")}, 20));
  EXPECT_TRUE(reaches(m, {second(), Stack::of({pair}, stack_bottom("a0"))}, {C("c1"), S("a0")}, 20));
  for (const auto& e : basic_terms()) {
    EXPECT_TRUE(e.term.closed()) << e.name;
    EXPECT_TRUE(e.term.proof_like()) << e.name;
  }
}

TEST(Basic, IdentityLikeSuite) {
  gen::Generator g(41, {});
  Machine m;
  for (const auto& e : identity_like_suite()) {
    for (int i = 0; i < 100; ++i) {
      const Term u = g.term();
      const Stack pi = g.stack();
      ASSERT_TRUE(reaches(m, {e.term, Stack::push(u, pi)}, {u, pi}, 50))
          << e.name << " on " << to_string(Process{u, pi});
    }
  }
}

TEST(Enumeration, Examples) {
  EXPECT_EQ(next_tuple(2, 0), (std::vector<Nat>{0, 0}));
  EXPECT_EQ(next_tuple(3, 0), (std::vector<Nat>{0, 0, 0}));
  for (Nat i = 0; i < 100; ++i) EXPECT_EQ(next_tuple(1, i), std::vector<Nat>{i});
  EXPECT_EQ(cantor_pair(0, 0), 0u);
  EXPECT_EQ(cantor_pair(1, 0), 1u);
  EXPECT_EQ(cantor_pair(0, 1), 2u);
  EXPECT_EQ(cantor_pair(5, 5), 60u);
  EXPECT_THROW(next_tuple(0, 3), RealizerError);
  EXPECT_THROW(cantor_pair(Nat{1} << 63, Nat{1} << 63), RealizerError);
}

TEST(Enumeration, RoundTrip) {
  for (std::size_t h = 1; h <= 3; ++h) {
    std::set<std::vector<Nat>> seen;
    for (Nat i = 0; i <= 10000; ++i) {
      const auto t = next_tuple(h, i);
      ASSERT_EQ(t.size(), h);
      ASSERT_EQ(tuple_index(t), i);
      ASSERT_TRUE(seen.insert(t).second);
    }
  }
}

TEST(Enumeration, BoxWithinBound) {
  for (std::size_t h = 1; h <= 3; ++h) {
    for (Nat box = 0; box <= 5; ++box) {
      const Nat bound = enumeration_bound(h, box);
      std::set<std::vector<Nat>> covered;
      for (Nat i = 0; i <= bound; ++i) {
        auto t = next_tuple(h, i);
        bool inside = true;
        for (Nat v : t) inside = inside && v <= box;
        if (inside) covered.insert(t);
      }
      Nat expected = 1;
      for (std::size_t k = 0; k < h; ++k) expected *= box + 1;
      EXPECT_EQ(covered.size(), expected) << "h=" << h << " box=" << box;
    }
  }
}

TEST(Enumeration, NextInstruction) {
  Machine m;
  const ConstId next2 = next_instruction(2);
  Process p{Term::constant(next2), Stack::of({encode_tuple({0, 0}), C("c0")}, stack_bottom("a0"))};
  auto r = m.step(p);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->next.head, C("c0"));
  EXPECT_EQ(decode_tuple(*r->next.stack.at(0)), next_tuple(2, 1));
  Process bad{Term::constant(next2), Stack::of({encode_tuple({0}), C("c0")}, stack_bottom("a0"))};
  EXPECT_FALSE(m.step(bad));
}

TEST(History, Codec) {
  const HistoryRecord a{{}, {}, C("c0"), S("a0")};
  const HistoryRecord b{{1}, {2}, C("c1"), S("c2.a1")};
  const HistoryRecord c{{1, 3}, {2, 0}, identity(), S("a2")};
  EXPECT_EQ(decode_history_entry(encode_history_entry(b)), b);
  const std::vector<HistoryRecord> h{c, b, a};
  EXPECT_EQ(decode_history(encode_history(h)), h);
  EXPECT_TRUE(is_functional(h));
  EXPECT_FALSE(is_functional({b, HistoryRecord{{1}, {3}, C("c1"), S("a1")}}));
  EXPECT_TRUE(is_functional({b, b}));
  EXPECT_FALSE(decode_history(C("c0")));
  EXPECT_EQ(decode_history(nil()), std::vector<HistoryRecord>{});
}

TEST(Halting, Contracts) {
  Machine m;
  const RealizerEntry tH = build_t_H();
  const Term u = C("c0");
  const Stack pi = S("a0");
  const Term k = Term::cont(pi);
  for (Nat machine : {tm_loop(), tm_three_steps()}) {
    const Term mbar = numeral(machine);
    const Term T = halting_step(mbar, u, k);
    EXPECT_TRUE(reaches(m, {tH.term, Stack::of({mbar, u}, pi)},
                        {u, Stack::of({numeral(0), T}, pi)}, 20));
    const Term u1 = C("c1");
    const Stack pi1 = S("c2.a1");
    for (Nat p : {Nat{2}, Nat{3}, Nat{5}, Nat{7}}) {
      const Process start{T, Stack::of({numeral(p), u1}, pi1)};
      const bool halts = halt_predicate(machine, p) == 1;
      const Process expected = halts ? Process{u, Stack::of({numeral(p), parse_term("\\p v.v")}, pi)}
                                     : Process{u1, pi1};
      EXPECT_TRUE(reaches(m, start, expected, 30)) << machine << " p=" << p;
    }
  }
}

TEST(Wild, Contracts) {
  Machine m;
  const RealizerEntry t = build_t_leq();
  EXPECT_TRUE(t.term.proof_like());
  const Term u = C("c0");
  const Stack pi = S("c1.a0");
  const Term npi = numeral(m.quote_code(pi));
  const Term T2 = wild_T2(wild_T1(u, npi), npi);
  EXPECT_TRUE(reaches(m, {t.term, Stack::push(u, pi)}, {u, Stack::of({numeral(0), T2}, pi)}, 30));
  const Term T0 = wild_T0(u, npi);
  EXPECT_TRUE(reaches(m, {T0, pi}, {u, Stack::of({numeral(0), T2}, pi)}, 30));
  // Replaying Abelard's own position is detected.
  EXPECT_TRUE(reaches(m, {T2, Stack::of({numeral(4), T0}, pi)}, {identity(), pi}, 30));
  // Anything else is handed back.
  for (const auto& [u1, pi1] : std::vector<std::pair<Term, Stack>>{
           {C("c2"), pi}, {T0, S("a1")}, {C("c2"), S("a2")}, {identity(), S("c1.a1")}}) {
    EXPECT_TRUE(reaches(m, {T2, Stack::of({numeral(1), u1}, pi1)}, {u1, pi1}, 30)) << to_string(u1);
  }
}

TEST(Wild, RequiresQuote) {
  Machine core(MachineConfig::core());
  const Process p{build_t_leq().term, S("c0.a0")};
  Trace t = core.run(p, 100);
  EXPECT_EQ(t.status, TraceStatus::Stuck);
  EXPECT_EQ(t.last().head, Term::constant(builtin::quote()));
}

TEST(Universal, StartAndBlocks) {
  const UniversalRealizer r = build_t_phi(formula("phi4"));
  EXPECT_EQ(r.entry.name, "t_phi_phi4");
  EXPECT_TRUE(r.entry.term.proof_like());
  EXPECT_TRUE(r.entry.term.closed());
  Machine m;
  const Term u0 = C("c0");
  const Stack pi0 = S("a0");
  const Term H0 = encode_history({HistoryRecord{{}, {}, u0, pi0}});
  const Term T1 = universal_T(r, 1, {0, 0}, {}, H0);
  EXPECT_TRUE(reaches(m, {r.entry.term, Stack::push(u0, pi0)}, {u0, Stack::of({numeral(0), T1}, pi0)}, 20));

  // T_1 records Abelard's answer and plays m_2.
  const Term u1 = C("c1");
  const Stack pi1 = S("a1");
  const Term H1 = encode_history({HistoryRecord{{0}, {3}, u1, pi1}, HistoryRecord{{}, {}, u0, pi0}});
  const Term T2 = universal_T(r, 2, {0, 0}, {3}, H1);
  EXPECT_TRUE(reaches(m, {T1, Stack::of({numeral(3), u1}, pi1)}, {u1, Stack::of({numeral(0), T2}, pi1)}, 10));

  // T_2 hands over to theta, which loses on (0,0)/(3,2) and moves on.
  const Term u2 = C("c2");
  const Stack pi2 = S("a2");
  Trace t = m.run({T2, Stack::of({numeral(2), u2}, pi2)}, 40,
                  {Watcher{"L", [&](const Process& p) { return p.head == Term::constant(r.L); }}});
  ASSERT_EQ(t.status, TraceStatus::WatcherHit);
  EXPECT_EQ(decode_tuple(*t.last().stack.at(0)), next_tuple(2, 1));
  // next tuple (1,0) shares no prefix: L resumes the root entry with m_1 = 1.
  auto after = m.step(t.last());
  ASSERT_TRUE(after);
  EXPECT_EQ(after->next.head, u0);
  EXPECT_EQ(after->next.stack.at(0), numeral(1));
  EXPECT_EQ(*after->next.stack.drop(2), pi0);
}

TEST(Universal, LongestPrefix) {
  const UniversalRealizer r = build_t_phi(formula("phi4"));
  Machine m;
  const HistoryRecord root{{}, {}, C("c0"), S("a0")};
  const HistoryRecord d1{{0}, {5}, C("c1"), S("a1")};
  const HistoryRecord other{{2}, {1}, C("c2"), S("a2")};
  const Term H = encode_history({other, d1, root});
  auto step = m.step({Term::constant(r.L), Stack::of({encode_tuple({0, 4}), H}, S("c3.a0"))});
  ASSERT_TRUE(step);
  EXPECT_EQ(step->next, (Process{C("c1"), Stack::of({numeral(4), universal_T(r, 2, {0, 4}, {5}, H)}, S("a1"))}));
}

TEST(Universal, Errors) {
  EXPECT_THROW(build_t_phi(formula("halt")), RealizerError);
  const PrimRecFn zero_fn = PrimRecFn::native("zero0", 0, [](std::span<const Nat>) { return Nat{0}; });
  EXPECT_THROW(build_t_phi(make_formula("h0", 0, 0, zero_fn)), RealizerError);
}

TEST(Storage, Contract) {
  Machine m;
  const Term T = storage_operator().term;
  const Term f = C("c0");
  const Stack pi = S("a0");
  for (const char* nu : {"#3", "(\\x.x) #3", "(\\x.x #3) (\\x.x)", "(\\n x f. f (n x f)) ((\\x.x) #2)"}) {
    EXPECT_TRUE(reaches(m, {T, Stack::of({f, parse_term(nu)}, pi)}, {f, Stack::push(numeral(3), pi)}, 200)) << nu;
  }
  for (Nat n : {Nat{0}, Nat{1}, Nat{17}}) {
    EXPECT_TRUE(reaches(m, {T, Stack::of({f, numeral(n)}, pi)}, {f, Stack::push(numeral(n), pi)}, 500));
  }
}

TEST(Toy, Reductions) {
  Machine m(MachineConfig::core());
  const Term t = toy_h1().term;
  const Term k0 = C("c0");
  const Term k1 = C("c1");
  EXPECT_TRUE(reaches(m, {t, Stack::push(k0, S("a0"))},
                      {k0, Stack::of({numeral(0), parse_term("\\n v.v")}, S("a0"))}, 10));
  EXPECT_TRUE(reaches(m, {parse_term("\\n v.v"), Stack::of({numeral(4), k1}, S("a1"))}, {k1, S("a1")}, 10));
  EXPECT_TRUE(fig_scheme_mock().term.proof_like());
}

TEST(Registry, Names) {
  for (const char* name : {"t_H", "t_leq", "t_phi_leq", "t_phi_phi4", "toy_h1", "fig_scheme_mock", "storage",
                           "I", "delta", "id_cc_jump"}) {
    EXPECT_TRUE(find_realizer(name)) << name;
  }
  EXPECT_FALSE(find_realizer("t_phi_halt"));
  EXPECT_FALSE(find_realizer("nosuch"));
  EXPECT_THROW(realizer("nosuch"), RealizerError);
  const auto names = realizer_names();
  EXPECT_NE(std::find(names.begin(), names.end(), "t_phi_phi4"), names.end());
}

TEST(Registry, Manifest) {
  auto names = load_realizers_json(R"json({
    "my_id": {"term": "\\x.x"},
    "my_phi": {"bundle": "t_phi", "formula": "leq"}
  })json");
  EXPECT_EQ(names.size(), 2u);
  EXPECT_EQ(realizer("my_id").term, identity());
  EXPECT_EQ(realizer("my_phi").term, realizer("t_phi_leq").term);
  EXPECT_THROW(load_realizers_json(R"({"cont": {"term": "\\x.k[a0]"}})"), RealizerError);
  EXPECT_THROW(load_realizers_json(R"({"my_id": {"term": "\\x.x"}})"), RealizerError);
  EXPECT_THROW(load_realizers_json(R"({"bad": {"term": "(\\x."}})"), RealizerError);
  EXPECT_THROW(load_realizers_json(R"({"bad2": {}})"), RealizerError);
  EXPECT_THROW(load_realizers_json("[1]"), RealizerError);
}

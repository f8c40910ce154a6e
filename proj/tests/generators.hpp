#pragma once

// Seeded generators of closed terms, stacks and processes for property tests.

#include <random>
#include <string>
#include <vector>

#include "krivine/syntax.hpp"

namespace krivine::gen {

struct GenOptions {
  int max_depth = 5;
  bool allow_cont = true;
  bool allow_cc = true;
  std::vector<ConstId> constants;     // inert constants to draw from
  std::vector<ConstId> bottoms;       // stack bottoms to draw from
  std::vector<ConstId> instructions;  // extra instruction heads
};

class Generator {
 public:
  Generator(std::uint64_t seed, GenOptions options) : rng_(seed), opt_(std::move(options)) {
    if (opt_.constants.empty()) {
      for (const char* n : {"c0", "c1", "c2", "c3"}) opt_.constants.push_back(declare_inert(n));
    }
    if (opt_.bottoms.empty()) {
      for (const char* n : {"a0", "a1", "a2"}) opt_.bottoms.push_back(declare_stack_constant(n));
    }
  }

  std::mt19937_64& rng() { return rng_; }

  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

  Term term() { return term_at(opt_.max_depth, 0); }

  Stack stack(int max_push = 3) {
    Stack s = Stack::bottom(opt_.bottoms[pick(static_cast<int>(opt_.bottoms.size()))]);
    const int n = pick(max_push + 1);
    for (int i = 0; i < n; ++i) s = Stack::push(term_at(opt_.max_depth - 1, 0), s);
    return s;
  }

  Process process() { return Process{term(), stack()}; }

 private:
  Term term_at(int depth, std::uint32_t scope) {
    const int choice = depth <= 0 ? pick(3) : pick(10);
    switch (choice) {
      case 0:
        if (scope > 0) return Term::bound(static_cast<std::uint32_t>(pick(static_cast<int>(scope))));
        [[fallthrough]];
      case 1:
        return leaf();
      case 2:
        return numeral(static_cast<Nat>(pick(4)));
      case 3:
      case 4:
      case 5:
        return Term::lam("x", term_at(depth - 1, scope + 1));
      case 6:
      case 7:
      case 8:
        return Term::app(term_at(depth - 1, scope), term_at(depth - 1, scope));
      default:
        if (opt_.allow_cont) {
          Stack s = Stack::bottom(opt_.bottoms[pick(static_cast<int>(opt_.bottoms.size()))]);
          if (pick(2)) s = Stack::push(term_at(depth - 2, 0), s);
          return Term::cont(s);
        }
        return leaf();
    }
  }

  Term leaf() {
    std::vector<ConstId> pool = opt_.constants;
    if (opt_.allow_cc) pool.push_back(builtin::cc());
    for (ConstId id : opt_.instructions) pool.push_back(id);
    return Term::constant(pool[pick(static_cast<int>(pool.size()))]);
  }

  std::mt19937_64 rng_;
  GenOptions opt_;
};

}  // namespace krivine::gen

#include <gtest/gtest.h>

#include <map>
#include <set>
#include <variant>

#include "surrosynth/parser.hpp"
#include "surrosynth/search.hpp"
#include "test_support.hpp"

namespace surrosynth {
namespace {

using testing::ModularSemantics;
using testing::RenderSemantics;
using testing::tiny_grammar;

// Brute force: every tiny-grammar program of exactly `cost` under weights
// (wa, wf, wg), built by direct recursion on cost without any bank.
std::vector<Program> all_programs(std::int64_t cost, std::int64_t wa, std::int64_t wf, std::int64_t wg) {
  std::vector<Program> out;
  if (cost == wa) out.emplace_back(0);
  for (const Program& p : cost - wf >= 1 ? all_programs(cost - wf, wa, wf, wg) : std::vector<Program>{}) {
    out.emplace_back(1, std::vector<Program>{p});
  }
  for (std::int64_t left = 1; left < cost - wg; ++left) {
    for (const Program& l : all_programs(left, wa, wf, wg)) {
      for (const Program& r : all_programs(cost - wg - left, wa, wf, wg)) {
        out.emplace_back(2, std::vector<Program>{l, r});
      }
    }
  }
  return out;
}

template <class Sem>
std::map<std::int64_t, std::set<typename Sem::Value>> oracle_new_signatures(const Sem& sem, std::int64_t max_level) {
  std::map<std::int64_t, std::set<typename Sem::Value>> by_level;
  std::set<typename Sem::Value> seen;
  for (std::int64_t level = 1; level <= max_level; ++level) {
    auto& fresh = by_level[level];
    for (const Program& p : all_programs(level, 1, 1, 1)) {
      auto v = evaluate(sem, p);
      if (!seen.count(v)) fresh.insert(v);
    }
    seen.insert(fresh.begin(), fresh.end());
  }
  return by_level;
}

template <class Sem>
std::map<std::int64_t, std::vector<typename Sem::Value>> banked_by_level(const Sem& sem, std::int64_t max_level) {
  auto g = tiny_grammar();
  auto wg = WeightedGrammar::uniform(g);
  BottomUpEnumerator<Sem> search(wg, sem, g->start());
  SearchBudget budget;
  budget.max_level = max_level;
  while (search.next(budget)) {
  }
  std::map<std::int64_t, std::vector<typename Sem::Value>> out;
  for (const auto& e : search.bank().entries()) out[e.cost].push_back(e.value);
  return out;
}

TEST(NewPrograms, LevelOneIsTheLeaf) {
  auto g = tiny_grammar();
  auto wg = WeightedGrammar::uniform(g);
  Bank<std::monostate> bank(1);
  auto progs = new_programs(wg, 1, bank);
  ASSERT_EQ(progs.size(), 1u);
  EXPECT_EQ(render(*g, progs[0]), "a");
}

TEST(NewPrograms, LevelThreeFromSeededBank) {
  auto g = tiny_grammar();
  auto wg = WeightedGrammar::uniform(g);
  Bank<std::monostate> bank(1);
  const auto& a = bank.add({0, 0, 1, {}, {}});
  bank.add({0, 1, 2, {&a}, {}});
  std::set<std::string> got;
  for (const Program& p : new_programs(wg, 3, bank)) got.insert(render(*g, p));
  EXPECT_EQ(got, (std::set<std::string>{"f(f(a))", "g(a, a)"}));
}

TEST(NewPrograms, WeightedLevelMatchesBruteForce) {
  auto g = tiny_grammar();
  WeightedGrammar wg(g, std::vector<double>{1.0, 1.0, 3.0}, 1.0);
  BottomUpEnumerator<RenderSemantics> search(wg, RenderSemantics{}, g->start());
  SearchBudget budget;
  budget.max_level = 4;
  while (search.next(budget)) {
  }
  std::set<std::string> got;
  for (const Program& p : new_programs(wg, 5, search.bank())) got.insert(render(*g, p));
  std::set<std::string> want;
  for (const Program& p : all_programs(5, 1, 1, 3)) want.insert(render(*g, p));
  EXPECT_EQ(got, want);
  EXPECT_TRUE(got.count("g(a, a)"));
  EXPECT_TRUE(got.count("f(f(f(f(a))))"));
}

TEST(Search, IdentityTaskSolvedAtFirstLevel) {
  auto g = tiny_grammar();
  auto wg = WeightedGrammar::uniform(g);
  auto out = bottom_up_search(wg, RenderSemantics{}, g->start(),
                              [](const std::string& v) { return v == "a"; });
  ASSERT_TRUE(out.solution);
  EXPECT_EQ(render(*g, *out.solution), "a");
  EXPECT_EQ(out.stats.level_reached, 1);
}

TEST(Search, RenderedTargetAndBankCounts) {
  auto g = tiny_grammar();
  auto wg = WeightedGrammar::uniform(g);
  auto out = bottom_up_search(wg, RenderSemantics{}, g->start(),
                              [](const std::string& v) { return v == "g(a,f(a))"; });
  ASSERT_TRUE(out.solution);
  EXPECT_EQ(out.stats.level_reached, 4);

  auto banked = banked_by_level(RenderSemantics{}, 6);
  for (std::int64_t level = 1; level <= 6; ++level) {
    std::set<std::string> renders;
    for (const Program& p : all_programs(level, 1, 1, 1)) renders.insert(render(*g, p));
    EXPECT_EQ(banked[level].size(), renders.size()) << "level " << level;
  }
}

TEST(Search, WeightsChangeLevelNotSolution) {
  auto g = tiny_grammar();
  auto goal = [](const std::string& v) { return v == "g(a,f(a))"; };
  auto uniform = bottom_up_search(WeightedGrammar::uniform(g), RenderSemantics{}, g->start(), goal);
  WeightedGrammar skew(g, std::vector<double>{1.0, 5.0, 0.5}, 2.0);
  auto weighted = bottom_up_search(skew, RenderSemantics{}, g->start(), goal);
  ASSERT_TRUE(uniform.solution && weighted.solution);
  EXPECT_NE(uniform.stats.level_reached, weighted.stats.level_reached);
  EXPECT_EQ(render(*g, *uniform.solution), render(*g, *weighted.solution));
}

TEST(Search, BankedSignaturesMatchOracleWithPruning) {
  ModularSemantics sem;
  auto banked = banked_by_level(sem, 6);
  auto oracle = oracle_new_signatures(sem, 6);
  for (std::int64_t level = 1; level <= 6; ++level) {
    std::set<std::vector<int>> got(banked[level].begin(), banked[level].end());
    EXPECT_EQ(got.size(), banked[level].size()) << "duplicate signature banked at " << level;
    EXPECT_EQ(got, oracle[level]) << "level " << level;
  }
}

TEST(Search, CompletenessUpToEquivalence) {
  ModularSemantics sem;
  auto banked = banked_by_level(sem, 6);
  std::set<std::vector<int>> all;
  for (const auto& [level, values] : banked) all.insert(values.begin(), values.end());
  for (std::int64_t level = 1; level <= 6; ++level) {
    for (const Program& p : all_programs(level, 1, 1, 1)) EXPECT_TRUE(all.count(evaluate(sem, p)));
  }
}

TEST(Search, CandidatesComeInNondecreasingCost) {
  auto g = tiny_grammar();
  WeightedGrammar wg(g, std::vector<double>{1.0, 2.0, 3.0}, 1.0);
  BottomUpEnumerator<RenderSemantics> search(wg, RenderSemantics{}, g->start());
  SearchBudget budget;
  budget.max_level = 9;
  std::int64_t last = 0;
  while (search.next(budget)) {
    EXPECT_GE(search.candidate().cost, last);
    last = search.candidate().cost;
    EXPECT_EQ(discrete_cost(wg, search.candidate().program()), last);
  }
  EXPECT_EQ(search.stop_reason(), StopReason::kMaxLevel);
}

TEST(Search, FiniteLanguageIsExhausted) {
  GrammarBuilder b("$S");
  b.add("$S", {"h(", "$T", ")"});
  b.add("$T", {"x"});
  b.add("$T", {"y"});
  auto g = std::make_shared<const Grammar>(b.build());
  auto wg = WeightedGrammar::uniform(g);
  struct Sem {
    using Value = int;
    void apply(ProductionId id, std::span<const Value* const> args, Value& out) const {
      out = id == 0 ? 10 + *args[0] : static_cast<int>(id);
    }
    std::size_t hash(const Value& v) const { return static_cast<std::size_t>(v); }
  };
  auto out = bottom_up_search(wg, Sem{}, g->start(), [](int v) { return v == 99; });
  EXPECT_FALSE(out.solution);
  EXPECT_EQ(out.stop, StopReason::kExhausted);
  EXPECT_EQ(out.stats.banked, 4u);
}

TEST(Search, DeadlineStopsTheSearch) {
  auto g = tiny_grammar();
  auto wg = WeightedGrammar::uniform(g);
  SearchBudget budget;
  budget.deadline = SteadyClock::now();
  auto out = bottom_up_search(wg, RenderSemantics{}, g->start(),
                              [](const std::string&) { return false; }, budget);
  EXPECT_FALSE(out.solution);
  EXPECT_EQ(out.stop, StopReason::kDeadline);
}

TEST(Search, ConstantSignatureOnSeveralInputs) {
  ModularSemantics sem;
  sem.inputs = {2, 2, 2};
  auto g = tiny_grammar();
  auto v = signature(sem, *parse(*g, "f(a)").program);
  EXPECT_EQ(v, (std::vector<int>{0, 0, 0}));
}

TEST(Search, InlinedGrammarEvaluatesThroughTemplates) {
  GrammarBuilder b("$S");
  b.add("$S", {"h(", "$A", ")"});
  b.add("$S", {"k(", "$S", ")"});
  b.add("$A", {"x"});
  auto g = std::make_shared<const Grammar>(b.build());
  WeightedGrammar wg(g, std::vector<double>{1.0, 1.0, 0.0}, 1.0);
  ASSERT_FALSE(wg.is_identity());
  struct Sem {
    using Value = std::string;
    void apply(ProductionId id, std::span<const Value* const> args, Value& out) const {
      out = id == 0 ? "h" + *args[0] : id == 1 ? "k" + *args[0] : "x";
    }
    std::size_t hash(const Value& v) const { return std::hash<std::string>{}(v); }
  };
  auto out = bottom_up_search(wg, Sem{}, *wg.grammar().find_nonterminal("$S"),
                              [](const std::string& v) { return v == "kkhx"; });
  ASSERT_TRUE(out.solution);
  EXPECT_EQ(render(*g, *out.solution), "k(k(h(x)))");
  validate_program(*g, *out.solution, g->start());
}

}  // namespace
}  // namespace surrosynth

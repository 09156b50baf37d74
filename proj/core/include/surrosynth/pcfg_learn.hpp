#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "surrosynth/grammar.hpp"
#include "surrosynth/program.hpp"
#include "surrosynth/weighted_grammar.hpp"

namespace surrosynth {

enum class LearnMode {
  kStrict,     // parsed completions only
  kNonStrict,  // parsed completions plus operator-terminal counts of the rest
  kBinary,     // non-strict counts, then p = 0 for unseen rules and uniform otherwise
};

std::string to_string(LearnMode mode);
LearnMode learn_mode_from_string(std::string_view name);

struct CompletionSet {
  std::string task_id;
  std::vector<std::string> completions;
  std::vector<std::pair<std::size_t, Program>> parsed;
  std::vector<std::pair<std::size_t, std::vector<SymbolId>>> lexed;

  std::size_t n() const { return completions.size(); }
  std::size_t n_parsed() const { return parsed.size(); }
  /// Fraction of completions that parsed; 0 for an empty set.
  double validity() const;
};

/// Parses each text from `from`; failures are lexed in non-strict and binary
/// modes and dropped in strict mode.
CompletionSet make_completion_set(std::string task_id, std::vector<std::string> texts,
                                  const Grammar& grammar, SymbolId from, LearnMode mode);
CompletionSet make_completion_set(std::string task_id, std::vector<std::string> texts,
                                  const Grammar& grammar, LearnMode mode);

class RuleCounts {
 public:
  explicit RuleCounts(const Grammar& grammar);

  double operator[](ProductionId id) const { return counts_.at(id); }
  void add(ProductionId id, double amount);
  /// Sum of counts over the rules of `nt`.
  double total(SymbolId nt) const;
  std::span<const double> values() const { return counts_; }

  RuleCounts& operator+=(const RuleCounts& other);

 private:
  std::vector<SymbolId> lhs_;
  std::vector<double> counts_;
};

/// Occurrences of each production across the programs' traces.
RuleCounts count_strict(const Grammar& grammar, std::span<const Program> programs);

/// Lexical approximation: a production with operator terminal t shared by k
/// productions gains occurrences(t) / k. A production without an operator
/// terminal whose rhs is a single terminal found in no other production gains
/// that terminal's occurrences; other productions gain nothing.
RuleCounts count_nonstrict(const Grammar& grammar,
                           std::span<const std::vector<SymbolId>> sequences);

/// Smoothed maximum likelihood, normalized per nonterminal:
/// p(R) = (count(R) + a) / (total(lhs) + a * |rules of lhs|).
ProbabilisticGrammar fit_pcfg(std::shared_ptr<const Grammar> grammar, const RuleCounts& counts,
                              double smoothing = 1.0);

/// p = 0 for rules with zero count, uniform over the others. A nonterminal
/// whose rules were all unseen stays uniform.
ProbabilisticGrammar fit_binary(std::shared_ptr<const Grammar> grammar, const RuleCounts& counts);

/// Real weight -log2 p; rules with p = 0 are excluded and single rules with
/// p = 1 are inlined. Throws DerivationError if the language collapses.
WeightedGrammar derive_wcfg(const ProbabilisticGrammar& pg, double scale = 100.0);

RuleCounts count_completions(const Grammar& grammar, const CompletionSet& completions,
                             LearnMode mode);
ProbabilisticGrammar learn_pcfg(std::shared_ptr<const Grammar> grammar,
                                const CompletionSet& completions, LearnMode mode,
                                double smoothing = 1.0);
WeightedGrammar learn(std::shared_ptr<const Grammar> grammar, const CompletionSet& completions,
                      LearnMode mode, double smoothing = 1.0, double scale = 100.0);

}  // namespace surrosynth

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "surrosynth/grammar.hpp"
#include "surrosynth/program.hpp"

namespace surrosynth {

/// Thrown when a weighting leaves the search grammar without a usable language.
class DerivationError : public GrammarError {
 public:
  using GrammarError::GrammarError;
};

/// How a production of a search grammar expands into base-grammar productions.
/// `preorder` lists base productions in preorder; a hole stands for the
/// search production's i-th child.
struct ProductionTemplate {
  struct Item {
    bool hole = false;
    std::uint32_t value = 0;  // base production id, or hole index
  };
  std::vector<Item> preorder;

  std::uint32_t root() const { return preorder.front().value; }
};

/// Rounds a scaled real weight up to an integer, absorbing floating-point
/// noise (10 * 1.2 rounds to 12, not 13). The result is at least 1.
std::int64_t discretize_weight(double real_weight, double scale);

/// A weighted grammar used to drive search.
///
/// Weights are given per production of a base grammar. A production without a
/// weight is excluded; a weight of zero is only allowed for the sole remaining
/// rule of a nonterminal, which is then inlined into every production that
/// references it (the start symbol's rule is kept instead, at discrete weight
/// 1). The resulting search grammar and its templates back to the base grammar
/// are exposed through grammar() and origin(). With no exclusions or zero
/// weights the search grammar is the base grammar itself.
class WeightedGrammar {
 public:
  WeightedGrammar(std::shared_ptr<const Grammar> base,
                  std::vector<std::optional<double>> base_weights, double scale);
  WeightedGrammar(std::shared_ptr<const Grammar> base, const std::vector<double>& base_weights,
                  double scale);

  /// Every production weighs `weight`.
  static WeightedGrammar uniform(std::shared_ptr<const Grammar> base, double weight = 1.0,
                                 double scale = 1.0);

  const Grammar& grammar() const { return *search_; }
  const std::shared_ptr<const Grammar>& grammar_ptr() const { return search_; }
  const Grammar& base_grammar() const { return *base_; }
  const std::shared_ptr<const Grammar>& base_grammar_ptr() const { return base_; }

  double scale() const { return scale_; }
  double real_weight(ProductionId id) const;
  std::int64_t discrete_weight(ProductionId id) const;
  std::span<const std::int64_t> discrete_weights() const { return discrete_; }

  /// The weight assigned to a base production, if it was not excluded.
  std::optional<double> base_weight(ProductionId base_id) const { return base_weights_.at(base_id); }
  std::span<const std::optional<double>> base_weights() const { return base_weights_; }

  const ProductionTemplate& origin(ProductionId id) const { return templates_.at(id); }
  bool is_identity() const { return search_ == base_; }

  /// Search production rooted at a base production, if that production survives.
  std::optional<ProductionId> search_production_of(ProductionId base_id) const;

  Program to_base(const Program& search_program) const;
  std::optional<Program> from_base(const Program& base_program) const;

 private:
  void derive();

  std::shared_ptr<const Grammar> base_;
  std::shared_ptr<const Grammar> search_;
  std::vector<std::optional<double>> base_weights_;
  double scale_;
  std::vector<double> real_;
  std::vector<std::int64_t> discrete_;
  std::vector<ProductionTemplate> templates_;
  std::vector<std::optional<ProductionId>> by_base_;
};

/// Sum of real weights over the trace of a search-grammar program.
double real_cost(const WeightedGrammar& wg, const Program& p);
/// Sum of discrete weights over the trace of a search-grammar program.
std::int64_t discrete_cost(const WeightedGrammar& wg, const Program& p);

/// A grammar with a probability per production; each nonterminal's
/// production probabilities sum to one.
class ProbabilisticGrammar {
 public:
  ProbabilisticGrammar(std::shared_ptr<const Grammar> grammar, std::vector<double> probabilities);

  const Grammar& grammar() const { return *grammar_; }
  const std::shared_ptr<const Grammar>& grammar_ptr() const { return grammar_; }
  double probability(ProductionId id) const { return probs_.at(id); }
  std::span<const double> probabilities() const { return probs_; }

 private:
  std::shared_ptr<const Grammar> grammar_;
  std::vector<double> probs_;
};

/// Product of production probabilities over the trace. Throws DerivationError
/// if the trace uses a production of probability zero.
double program_probability(const ProbabilisticGrammar& pg, const Program& p);

}  // namespace surrosynth

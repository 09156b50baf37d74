#include "surrosynth/pcfg_learn.hpp"

#include <cmath>
#include <unordered_map>

#include "surrosynth/lexer.hpp"
#include "surrosynth/parser.hpp"

namespace surrosynth {

std::string to_string(LearnMode mode) {
  switch (mode) {
    case LearnMode::kStrict: return "strict";
    case LearnMode::kNonStrict: return "non-strict";
    case LearnMode::kBinary: return "binary";
  }
  return "?";
}

LearnMode learn_mode_from_string(std::string_view name) {
  if (name == "strict") return LearnMode::kStrict;
  if (name == "non-strict" || name == "nonstrict") return LearnMode::kNonStrict;
  if (name == "binary") return LearnMode::kBinary;
  throw std::invalid_argument("unknown learn mode '" + std::string(name) + "'");
}

double CompletionSet::validity() const {
  return completions.empty() ? 0.0
                             : static_cast<double>(parsed.size()) /
                                   static_cast<double>(completions.size());
}

CompletionSet make_completion_set(std::string task_id, std::vector<std::string> texts,
                                  const Grammar& grammar, SymbolId from, LearnMode mode) {
  CompletionSet out;
  out.task_id = std::move(task_id);
  out.completions = std::move(texts);
  Parser parser(grammar);
  Lexer lexer(grammar);
  for (std::size_t i = 0; i < out.completions.size(); ++i) {
    auto result = parser.parse(out.completions[i], from);
    if (result) {
      out.parsed.emplace_back(i, std::move(*result.program));
    } else if (mode != LearnMode::kStrict) {
      out.lexed.emplace_back(i, lexer.lex(out.completions[i]).terminals());
    }
  }
  return out;
}

CompletionSet make_completion_set(std::string task_id, std::vector<std::string> texts,
                                  const Grammar& grammar, LearnMode mode) {
  return make_completion_set(std::move(task_id), std::move(texts), grammar, grammar.start(), mode);
}

RuleCounts::RuleCounts(const Grammar& grammar) : counts_(grammar.num_productions(), 0.0) {
  lhs_.reserve(grammar.num_productions());
  for (const Production& p : grammar.productions()) lhs_.push_back(p.lhs);
}

void RuleCounts::add(ProductionId id, double amount) {
  if (!(amount >= 0.0) || !std::isfinite(amount)) {
    throw std::invalid_argument("rule counts must be finite and nonnegative");
  }
  counts_.at(id) += amount;
}

double RuleCounts::total(SymbolId nt) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    if (lhs_[i] == nt) sum += counts_[i];
  }
  return sum;
}

RuleCounts& RuleCounts::operator+=(const RuleCounts& other) {
  if (other.counts_.size() != counts_.size()) throw std::invalid_argument("rule count size mismatch");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  return *this;
}

RuleCounts count_strict(const Grammar& grammar, std::span<const Program> programs) {
  RuleCounts counts(grammar);
  for (const Program& p : programs) {
    for (ProductionId id : p.trace()) counts.add(id, 1.0);
  }
  return counts;
}

RuleCounts count_nonstrict(const Grammar& grammar,
                           std::span<const std::vector<SymbolId>> sequences) {
  RuleCounts counts(grammar);
  std::vector<double> occurrences(grammar.num_terminals(), 0.0);
  for (const auto& seq : sequences) {
    for (SymbolId t : seq) occurrences.at(t) += 1.0;
  }
  for (const Production& p : grammar.productions()) {
    if (p.operator_terminal) {
      const SymbolId t = *p.operator_terminal;
      const auto k = static_cast<double>(grammar.productions_with_operator(t).size());
      counts.add(p.id, occurrences[t] / k);
    } else if (p.rhs.size() == 1 && p.rhs[0].is_terminal()) {
      const SymbolId t = p.rhs[0].id;
      if (grammar.productions_mentioning(t).size() == 1) counts.add(p.id, occurrences[t]);
    }
  }
  return counts;
}

ProbabilisticGrammar fit_pcfg(std::shared_ptr<const Grammar> grammar, const RuleCounts& counts,
                              double smoothing) {
  if (!(smoothing > 0.0)) throw std::invalid_argument("smoothing must be positive");
  std::vector<double> probs(grammar->num_productions(), 0.0);
  for (SymbolId nt = 0; nt < grammar->num_nonterminals(); ++nt) {
    const auto rules = grammar->productions_of(nt);
    const double denom = counts.total(nt) + smoothing * static_cast<double>(rules.size());
    for (ProductionId id : rules) probs[id] = (counts[id] + smoothing) / denom;
  }
  return ProbabilisticGrammar(std::move(grammar), std::move(probs));
}

ProbabilisticGrammar fit_binary(std::shared_ptr<const Grammar> grammar, const RuleCounts& counts) {
  std::vector<double> probs(grammar->num_productions(), 0.0);
  for (SymbolId nt = 0; nt < grammar->num_nonterminals(); ++nt) {
    const auto rules = grammar->productions_of(nt);
    std::size_t seen = 0;
    for (ProductionId id : rules) seen += counts[id] > 0.0 ? 1 : 0;
    for (ProductionId id : rules) {
      if (seen == 0) {
        probs[id] = 1.0 / static_cast<double>(rules.size());
      } else {
        probs[id] = counts[id] > 0.0 ? 1.0 / static_cast<double>(seen) : 0.0;
      }
    }
  }
  return ProbabilisticGrammar(std::move(grammar), std::move(probs));
}

WeightedGrammar derive_wcfg(const ProbabilisticGrammar& pg, double scale) {
  std::vector<std::optional<double>> weights(pg.grammar().num_productions());
  for (ProductionId id = 0; id < weights.size(); ++id) {
    const double p = pg.probability(id);
    if (p > 0.0) weights[id] = p >= 1.0 ? 0.0 : -std::log2(p);
  }
  return WeightedGrammar(pg.grammar_ptr(), std::move(weights), scale);
}

RuleCounts count_completions(const Grammar& grammar, const CompletionSet& completions,
                             LearnMode mode) {
  std::vector<Program> programs;
  programs.reserve(completions.parsed.size());
  for (const auto& [index, program] : completions.parsed) programs.push_back(program);
  RuleCounts counts = count_strict(grammar, programs);
  if (mode != LearnMode::kStrict) {
    std::vector<std::vector<SymbolId>> sequences;
    sequences.reserve(completions.lexed.size());
    for (const auto& [index, seq] : completions.lexed) sequences.push_back(seq);
    counts += count_nonstrict(grammar, sequences);
  }
  return counts;
}

ProbabilisticGrammar learn_pcfg(std::shared_ptr<const Grammar> grammar,
                                const CompletionSet& completions, LearnMode mode,
                                double smoothing) {
  RuleCounts counts = count_completions(*grammar, completions, mode);
  if (mode == LearnMode::kBinary) return fit_binary(std::move(grammar), counts);
  return fit_pcfg(std::move(grammar), counts, smoothing);
}

WeightedGrammar learn(std::shared_ptr<const Grammar> grammar, const CompletionSet& completions,
                      LearnMode mode, double smoothing, double scale) {
  return derive_wcfg(learn_pcfg(std::move(grammar), completions, mode, smoothing), scale);
}

}  // namespace surrosynth

#include "surrosynth/weighted_grammar.hpp"

#include <cmath>
#include <functional>

namespace surrosynth {

std::int64_t discretize_weight(double real_weight, double scale) {
  const double x = scale * real_weight;
  const double nearest = std::round(x);
  double up = std::fabs(x - nearest) <= 1e-9 * std::max(1.0, std::fabs(x)) ? nearest : std::ceil(x);
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(up));
}

WeightedGrammar::WeightedGrammar(std::shared_ptr<const Grammar> base,
                                 std::vector<std::optional<double>> base_weights, double scale)
    : base_(std::move(base)), base_weights_(std::move(base_weights)), scale_(scale) {
  if (!base_) throw GrammarError("weighted grammar needs a base grammar");
  if (base_weights_.size() != base_->num_productions()) {
    throw GrammarError("weight count does not match production count");
  }
  if (!(scale_ >= 1.0) || !std::isfinite(scale_)) throw GrammarError("scale must be >= 1");
  for (const auto& w : base_weights_) {
    if (w && (!std::isfinite(*w) || *w < 0.0)) {
      throw GrammarError("production weights must be finite and nonnegative");
    }
  }
  derive();
}

WeightedGrammar::WeightedGrammar(std::shared_ptr<const Grammar> base,
                                 const std::vector<double>& base_weights, double scale)
    : WeightedGrammar(std::move(base),
                      std::vector<std::optional<double>>(base_weights.begin(), base_weights.end()),
                      scale) {}

WeightedGrammar WeightedGrammar::uniform(std::shared_ptr<const Grammar> base, double weight,
                                         double scale) {
  const std::size_t n = base->num_productions();
  return WeightedGrammar(std::move(base), std::vector<double>(n, weight), scale);
}

void WeightedGrammar::derive() {
  const Grammar& g = *base_;
  const std::size_t num_nt = g.num_nonterminals();

  std::vector<std::vector<ProductionId>> surviving(num_nt);
  for (const Production& p : g.productions()) {
    if (base_weights_[p.id]) surviving[p.lhs].push_back(p.id);
  }

  // A zero weight means "always taken": only legal for a sole surviving rule.
  std::vector<bool> inlined(num_nt, false);
  bool any_excluded = false;
  for (const Production& p : g.productions()) {
    if (!base_weights_[p.id]) {
      any_excluded = true;
      continue;
    }
    if (*base_weights_[p.id] == 0.0) {
      if (surviving[p.lhs].size() != 1) {
        throw DerivationError("zero weight on '" + g.describe(p.id) +
                              "', which is not the only rule of its nonterminal");
      }
      if (p.lhs != g.start()) inlined[p.lhs] = true;
    }
  }

  // Reachability through surviving productions; every reached nonterminal
  // must keep at least one rule and be productive.
  std::vector<bool> reached(num_nt, false);
  std::vector<SymbolId> stack{g.start()};
  reached[g.start()] = true;
  while (!stack.empty()) {
    const SymbolId nt = stack.back();
    stack.pop_back();
    if (surviving[nt].empty()) {
      throw DerivationError("nonterminal " + g.nonterminal_name(nt) +
                            " is reachable but has no remaining productions");
    }
    for (ProductionId id : surviving[nt]) {
      for (SymbolId c : g.production(id).child_nonterminals) {
        if (!reached[c]) {
          reached[c] = true;
          stack.push_back(c);
        }
      }
    }
  }
  std::vector<bool> productive(num_nt, false);
  for (bool changed = true; changed;) {
    changed = false;
    for (SymbolId nt = 0; nt < num_nt; ++nt) {
      if (productive[nt]) continue;
      for (ProductionId id : surviving[nt]) {
        bool ok = true;
        for (SymbolId c : g.production(id).child_nonterminals) ok = ok && productive[c];
        if (ok) {
          productive[nt] = changed = true;
          break;
        }
      }
    }
  }
  for (SymbolId nt = 0; nt < num_nt; ++nt) {
    if (reached[nt] && !productive[nt]) {
      throw DerivationError("nonterminal " + g.nonterminal_name(nt) + " derives no finite program");
    }
  }

  bool any_inlined = false;
  for (SymbolId nt = 0; nt < num_nt; ++nt) any_inlined = any_inlined || (inlined[nt] && reached[nt]);

  if (!any_excluded && !any_inlined) {
    search_ = base_;
    templates_.resize(g.num_productions());
    by_base_.resize(g.num_productions());
    for (const Production& p : g.productions()) {
      templates_[p.id].preorder.push_back({false, p.id});
      for (std::uint32_t i = 0; i < p.arity(); ++i) templates_[p.id].preorder.push_back({true, i});
      by_base_[p.id] = p.id;
      real_.push_back(*base_weights_[p.id]);
    }
  } else {
    // Keep every base symbol name so rendering is unchanged; drop nonterminals
    // that are unreachable or inlined.
    std::vector<std::optional<SymbolId>> nt_map(num_nt);
    std::vector<std::string> nt_names;
    for (SymbolId nt = 0; nt < num_nt; ++nt) {
      if (reached[nt] && !inlined[nt]) {
        nt_map[nt] = static_cast<SymbolId>(nt_names.size());
        nt_names.push_back(g.nonterminal_name(nt));
      }
    }
    std::vector<std::string> terminals;
    for (SymbolId t = 0; t < g.num_terminals(); ++t) terminals.push_back(g.terminal_text(t));

    std::vector<Production> prods;
    by_base_.assign(g.num_productions(), std::nullopt);
    std::function<void(ProductionId, Production&, ProductionTemplate&, double&, int)> expand;
    expand = [&](ProductionId id, Production& out, ProductionTemplate& tmpl, double& weight,
                 int depth) {
      if (depth > static_cast<int>(num_nt)) throw DerivationError("cyclic inlining");
      const Production& p = g.production(id);
      tmpl.preorder.push_back({false, id});
      weight += *base_weights_[id];
      for (const Symbol& s : p.rhs) {
        if (s.is_terminal()) {
          out.rhs.push_back(s);
        } else if (inlined[s.id]) {
          expand(surviving[s.id].front(), out, tmpl, weight, depth + 1);
        } else {
          const auto hole = static_cast<std::uint32_t>(out.child_nonterminals.size());
          tmpl.preorder.push_back({true, hole});
          out.rhs.push_back(Symbol::nonterminal(*nt_map[s.id]));
          out.child_nonterminals.push_back(*nt_map[s.id]);
        }
      }
    };
    for (const Production& p : g.productions()) {
      if (!base_weights_[p.id] || !nt_map[p.lhs]) continue;
      Production out;
      out.id = static_cast<ProductionId>(prods.size());
      out.lhs = *nt_map[p.lhs];
      out.operator_terminal = p.operator_terminal;
      ProductionTemplate tmpl;
      double weight = 0.0;
      expand(p.id, out, tmpl, weight, 0);
      by_base_[p.id] = out.id;
      prods.push_back(std::move(out));
      templates_.push_back(std::move(tmpl));
      real_.push_back(weight);
    }
    search_ = std::make_shared<const Grammar>(std::move(nt_names), std::move(terminals),
                                              *nt_map[g.start()], std::move(prods));
  }

  discrete_.reserve(real_.size());
  for (double w : real_) discrete_.push_back(discretize_weight(w, scale_));
}

double WeightedGrammar::real_weight(ProductionId id) const {
  if (id >= real_.size()) throw GrammarError("unknown production id " + std::to_string(id));
  return real_[id];
}

std::int64_t WeightedGrammar::discrete_weight(ProductionId id) const {
  if (id >= discrete_.size()) throw GrammarError("unknown production id " + std::to_string(id));
  return discrete_[id];
}

std::optional<ProductionId> WeightedGrammar::search_production_of(ProductionId base_id) const {
  if (base_id >= by_base_.size()) return std::nullopt;
  return by_base_[base_id];
}

Program WeightedGrammar::to_base(const Program& search_program) const {
  if (is_identity()) return search_program;
  std::vector<Program> kids;
  kids.reserve(search_program.children().size());
  for (const Program& c : search_program.children()) kids.push_back(to_base(c));
  const auto& items = origin(search_program.production()).preorder;
  std::size_t idx = 0;
  std::function<Program()> build = [&]() -> Program {
    const auto& item = items.at(idx++);
    if (item.hole) return kids.at(item.value);
    const Production& p = base_->production(item.value);
    std::vector<Program> children;
    children.reserve(p.arity());
    for (std::size_t i = 0; i < p.arity(); ++i) children.push_back(build());
    return Program(item.value, std::move(children));
  };
  return build();
}

std::optional<Program> WeightedGrammar::from_base(const Program& base_program) const {
  if (is_identity()) return base_program;
  const auto id = search_production_of(base_program.production());
  if (!id) return std::nullopt;
  const auto& items = templates_[*id].preorder;
  std::vector<std::optional<Program>> holes(search_->production(*id).arity());
  std::size_t idx = 0;
  std::function<bool(const Program&)> match = [&](const Program& node) {
    if (idx >= items.size() || items[idx].hole || items[idx].value != node.production()) {
      return false;
    }
    ++idx;
    for (const Program& c : node.children()) {
      if (idx >= items.size()) return false;
      if (items[idx].hole) {
        holes[items[idx].value] = from_base(c);
        if (!holes[items[idx].value]) return false;
        ++idx;
      } else if (!match(c)) {
        return false;
      }
    }
    return true;
  };
  if (!match(base_program)) return std::nullopt;
  std::vector<Program> children;
  for (auto& h : holes) children.push_back(std::move(*h));
  return Program(*id, std::move(children));
}

double real_cost(const WeightedGrammar& wg, const Program& p) {
  double total = wg.real_weight(p.production());
  for (const Program& c : p.children()) total += real_cost(wg, c);
  return total;
}

std::int64_t discrete_cost(const WeightedGrammar& wg, const Program& p) {
  std::int64_t total = wg.discrete_weight(p.production());
  for (const Program& c : p.children()) total += discrete_cost(wg, c);
  return total;
}

ProbabilisticGrammar::ProbabilisticGrammar(std::shared_ptr<const Grammar> grammar,
                                           std::vector<double> probabilities)
    : grammar_(std::move(grammar)), probs_(std::move(probabilities)) {
  if (probs_.size() != grammar_->num_productions()) {
    throw GrammarError("probability count does not match production count");
  }
  for (SymbolId nt = 0; nt < grammar_->num_nonterminals(); ++nt) {
    double sum = 0.0;
    for (ProductionId id : grammar_->productions_of(nt)) {
      const double p = probs_[id];
      if (!(p >= 0.0 && p <= 1.0)) throw GrammarError("probability outside [0,1]");
      sum += p;
    }
    if (std::fabs(sum - 1.0) > 1e-9) {
      throw GrammarError("probabilities of " + grammar_->nonterminal_name(nt) + " sum to " +
                         std::to_string(sum));
    }
  }
}

double program_probability(const ProbabilisticGrammar& pg, const Program& p) {
  const double own = pg.probability(p.production());
  if (own == 0.0) {
    throw DerivationError("program uses zero-probability production " +
                          pg.grammar().describe(p.production()));
  }
  double total = own;
  for (const Program& c : p.children()) total *= program_probability(pg, c);
  return total;
}

}  // namespace surrosynth

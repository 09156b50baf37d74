#pragma once

#include <algorithm>
#include <chrono>
#include <concepts>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "surrosynth/grammar.hpp"
#include "surrosynth/program.hpp"
#include "surrosynth/weighted_grammar.hpp"

namespace surrosynth {

using SteadyClock = std::chrono::steady_clock;

/// Domain semantics for search. `Value` is a program's evaluation signature
/// over all task inputs; `apply` computes the signature of a base-grammar
/// production from its children's signatures.
template <class S>
concept SearchSemantics =
    std::default_initializable<typename S::Value> && std::movable<typename S::Value> &&
    requires(const S& s, const typename S::Value& v, ProductionId id,
             std::span<const typename S::Value* const> args, typename S::Value& out) {
      { s.apply(id, args, out) } -> std::same_as<void>;
      { s.hash(v) } -> std::convertible_to<std::size_t>;
      { v == v } -> std::convertible_to<bool>;
    };

/// Cost-indexed program store, keyed by (cost, nonterminal). Entries keep
/// pointers to their children's entries, so programs are only materialized
/// on request.
template <class V>
class Bank {
 public:
  struct Entry {
    SymbolId nt = 0;
    ProductionId production = 0;
    std::int64_t cost = 0;
    std::vector<const Entry*> children;
    V value{};

    Program program() const {
      std::vector<Program> kids;
      kids.reserve(children.size());
      for (const Entry* c : children) kids.push_back(c->program());
      return Program(production, std::move(kids));
    }
  };

  explicit Bank(std::size_t num_nonterminals) : by_nt_(num_nonterminals) {}

  const Entry& add(Entry e) {
    PerNt& slot = by_nt_.at(e.nt);
    entries_.push_back(std::move(e));
    const Entry& stored = entries_.back();
    auto& list = slot.by_cost[stored.cost];
    if (list.empty()) {
      auto it = std::lower_bound(slot.costs.begin(), slot.costs.end(), stored.cost);
      slot.costs.insert(it, stored.cost);
    }
    list.push_back(&stored);
    max_cost_ = std::max(max_cost_, stored.cost);
    return stored;
  }

  std::span<const Entry* const> at(std::int64_t cost, SymbolId nt) const {
    const PerNt& slot = by_nt_.at(nt);
    auto it = slot.by_cost.find(cost);
    if (it == slot.by_cost.end()) return {};
    return it->second;
  }

  /// Costs with at least one entry for `nt`, ascending.
  std::span<const std::int64_t> costs(SymbolId nt) const { return by_nt_.at(nt).costs; }

  /// All entries in insertion order.
  const std::deque<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::int64_t max_cost() const { return max_cost_; }
  std::size_t num_nonterminals() const { return by_nt_.size(); }

 private:
  struct PerNt {
    std::unordered_map<std::int64_t, std::vector<const Entry*>> by_cost;
    std::vector<std::int64_t> costs;
  };
  std::deque<Entry> entries_;
  std::vector<PerNt> by_nt_;
  std::int64_t max_cost_ = 0;
};

/// Cursor over the programs of exactly one cost level whose immediate
/// subprograms are banked. Productions are visited in grammar order, child
/// cost tuples lexicographically, and bank entries in insertion order.
template <class V>
class NewPrograms {
 public:
  using Entry = typename Bank<V>::Entry;

  NewPrograms(const WeightedGrammar& wg, const Bank<V>& bank, std::int64_t level,
              const std::vector<bool>* active = nullptr)
      : wg_(&wg), bank_(&bank), level_(level), active_(active) {}

  /// Moves to the next candidate; false when the level is exhausted.
  bool next() {
    if (in_product_ && advance_product()) return true;
    in_product_ = false;
    while (true) {
      if (tuple_ + 1 < tuples_.size()) {
        ++tuple_;
        if (start_product()) return true;
        continue;
      }
      if (!next_production()) return false;
      tuple_ = static_cast<std::size_t>(-1);
    }
  }

  ProductionId production() const { return prod_; }
  SymbolId lhs() const { return wg_->grammar().production(prod_).lhs; }
  std::int64_t level() const { return level_; }
  std::span<const Entry* const> children() const { return children_; }

 private:
  bool next_production() {
    const auto& prods = wg_->grammar().productions();
    while (true) {
      prod_ = started_ ? prod_ + 1 : 0;
      started_ = true;
      if (prod_ >= prods.size()) {
        prod_ = static_cast<ProductionId>(prods.size());
        return false;
      }
      const Production& p = prods[prod_];
      if (active_ && !(*active_)[p.lhs]) continue;
      const std::int64_t rest = level_ - wg_->discrete_weight(prod_);
      if (rest < 0) continue;
      tuples_.clear();
      std::vector<std::int64_t> costs;
      build_tuples(p, 0, rest, costs);
      if (!tuples_.empty()) return true;
    }
  }

  void build_tuples(const Production& p, std::size_t i, std::int64_t rest,
                    std::vector<std::int64_t>& costs) {
    const std::size_t k = p.arity();
    if (i == k) {
      if (rest == 0) tuples_.push_back(costs);
      return;
    }
    const auto avail = bank_->costs(p.child_nonterminals[i]);
    if (i + 1 == k) {
      if (std::binary_search(avail.begin(), avail.end(), rest) && rest < level_) {
        costs.push_back(rest);
        tuples_.push_back(costs);
        costs.pop_back();
      }
      return;
    }
    for (std::int64_t c : avail) {
      if (c > rest || c >= level_) break;
      costs.push_back(c);
      build_tuples(p, i + 1, rest - c, costs);
      costs.pop_back();
    }
  }

  bool start_product() {
    const Production& p = wg_->grammar().production(prod_);
    const auto& costs = tuples_[tuple_];
    lists_.clear();
    for (std::size_t i = 0; i < p.arity(); ++i) {
      auto list = bank_->at(costs[i], p.child_nonterminals[i]);
      if (list.empty()) return false;
      lists_.push_back(list);
    }
    index_.assign(p.arity(), 0);
    children_.resize(p.arity());
    for (std::size_t i = 0; i < p.arity(); ++i) children_[i] = lists_[i][0];
    in_product_ = true;
    return true;
  }

  bool advance_product() {
    for (std::size_t i = index_.size(); i-- > 0;) {
      if (++index_[i] < lists_[i].size()) {
        children_[i] = lists_[i][index_[i]];
        for (std::size_t j = i + 1; j < index_.size(); ++j) {
          index_[j] = 0;
          children_[j] = lists_[j][0];
        }
        return true;
      }
    }
    return false;
  }

  const WeightedGrammar* wg_;
  const Bank<V>* bank_;
  std::int64_t level_;
  const std::vector<bool>* active_;
  bool started_ = false;
  ProductionId prod_ = 0;
  std::vector<std::vector<std::int64_t>> tuples_;
  std::size_t tuple_ = 0;
  bool in_product_ = false;
  std::vector<std::span<const Entry* const>> lists_;
  std::vector<std::size_t> index_;
  std::vector<const Entry*> children_;
};

/// Programs of exactly `level` built from the bank.
template <class V>
std::vector<Program> new_programs(const WeightedGrammar& wg, std::int64_t level, const Bank<V>& bank) {
  std::vector<Program> out;
  NewPrograms<V> cursor(wg, bank, level);
  while (cursor.next()) {
    std::vector<Program> kids;
    for (const auto* c : cursor.children()) kids.push_back(c->program());
    out.emplace_back(cursor.production(), std::move(kids));
  }
  return out;
}

struct SearchBudget {
  std::optional<std::int64_t> max_level;
  std::optional<SteadyClock::time_point> deadline;
  std::optional<std::uint64_t> max_candidates;

  static SearchBudget seconds(double s) {
    SearchBudget b;
    b.deadline = SteadyClock::now() + std::chrono::duration_cast<SteadyClock::duration>(
                                          std::chrono::duration<double>(s));
    return b;
  }
};

struct SearchStats {
  std::uint64_t enumerated = 0;  // candidates generated, including pruned ones
  std::uint64_t banked = 0;
  std::int64_t level_reached = 0;
  std::int64_t levels_completed = 0;
  double elapsed_ms = 0.0;
};

enum class StopReason { kNone, kExhausted, kMaxLevel, kDeadline, kMaxCandidates };

std::string to_string(StopReason reason);

/// Signature of a base-grammar program.
template <SearchSemantics Sem>
typename Sem::Value evaluate(const Sem& sem, const Program& p) {
  std::vector<typename Sem::Value> kids;
  kids.reserve(p.children().size());
  for (const Program& c : p.children()) kids.push_back(evaluate(sem, c));
  std::vector<const typename Sem::Value*> args;
  args.reserve(kids.size());
  for (const auto& k : kids) args.push_back(&k);
  typename Sem::Value out{};
  sem.apply(p.production(), args, out);
  return out;
}

template <SearchSemantics Sem>
typename Sem::Value signature(const Sem& sem, const Program& p) {
  return evaluate(sem, p);
}

/// Weighted bottom-up enumeration with observational-equivalence pruning.
///
/// Each call to next() produces one candidate of the current level (any
/// nonterminal reachable from the target), evaluates it, and banks it when
/// its signature is new for its nonterminal. The caller inspects the
/// candidate afterwards, so goal checks see every candidate, pruned or not.
/// Levels start at the cheapest nullary production and increase by one.
template <SearchSemantics Sem>
class BottomUpEnumerator {
 public:
  using Value = typename Sem::Value;
  using Entry = typename Bank<Value>::Entry;

  BottomUpEnumerator(const WeightedGrammar& wg, const Sem& sem, SymbolId target)
      : wg_(&wg),
        sem_(&sem),
        target_(target),
        bank_(wg.grammar().num_nonterminals()),
        seen_(wg.grammar().num_nonterminals()),
        active_(wg.grammar().reachable_from(target)),
        start_time_(SteadyClock::now()) {
    const Grammar& g = wg.grammar();
    std::optional<std::int64_t> min_nullary;
    for (const Production& p : g.productions()) {
      if (!active_[p.lhs]) continue;
      const std::int64_t w = wg.discrete_weight(p.id);
      max_weight_ = std::max(max_weight_, w);
      max_arity_ = std::max<std::int64_t>(max_arity_, static_cast<std::int64_t>(p.arity()));
      if (p.arity() == 0) min_nullary = std::min(min_nullary.value_or(w), w);
      const auto& items = wg.origin(p.id).preorder;
      bool direct = !items.empty() && !items[0].hole && items.size() == p.arity() + 1;
      for (std::size_t i = 1; direct && i < items.size(); ++i) {
        direct = items[i].hole && items[i].value == i - 1;
      }
      if (!direct) composite_.push_back(p.id);
    }
    std::sort(composite_.begin(), composite_.end());
    level_ = min_nullary.value_or(1);
    if (!min_nullary) stop_ = StopReason::kExhausted;
    cursor_.emplace(wg, bank_, level_, &active_);
  }

  /// Advances to the next candidate. Returns false once the budget is spent
  /// or the language is exhausted; stop_reason() says which.
  bool next(const SearchBudget& budget = {}) {
    if (stop_ == StopReason::kExhausted) return false;
    stop_ = StopReason::kNone;
    if (budget.max_candidates && stats_.enumerated >= *budget.max_candidates) {
      stop_ = StopReason::kMaxCandidates;
      return false;
    }
    if (budget.deadline && (stats_.enumerated & 1023u) == 0 && SteadyClock::now() >= *budget.deadline) {
      stop_ = StopReason::kDeadline;
      return false;
    }
    while (!cursor_->next()) {
      ++stats_.levels_completed;
      if (level_ + 1 > max_weight_ + max_arity_ * bank_.max_cost()) {
        stop_ = StopReason::kExhausted;
        return false;
      }
      if (budget.max_level && level_ + 1 > *budget.max_level) {
        stop_ = StopReason::kMaxLevel;
        return false;
      }
      if (budget.deadline && SteadyClock::now() >= *budget.deadline) {
        stop_ = StopReason::kDeadline;
        return false;
      }
      ++level_;
      cursor_.emplace(*wg_, bank_, level_, &active_);
    }
    if (budget.max_level && level_ > *budget.max_level) {
      stop_ = StopReason::kMaxLevel;
      return false;
    }
    ++stats_.enumerated;
    stats_.level_reached = level_;
    current_.nt = cursor_->lhs();
    current_.production = cursor_->production();
    current_.cost = level_;
    current_.children.assign(cursor_->children().begin(), cursor_->children().end());
    compute(current_);
    current_new_ = remember(current_);
    if (current_new_) {
      current_ref_ = &bank_.add(current_);
      seen_[current_ref_->nt].emplace(sem_->hash(current_ref_->value), current_ref_);
      ++stats_.banked;
    } else {
      current_ref_ = &current_;
    }
    return true;
  }

  const Entry& candidate() const { return *current_ref_; }
  bool candidate_is_new() const { return current_new_; }
  StopReason stop_reason() const { return stop_; }
  std::int64_t level() const { return level_; }
  SymbolId target() const { return target_; }
  const Bank<Value>& bank() const { return bank_; }
  const WeightedGrammar& weighted_grammar() const { return *wg_; }

  SearchStats stats() const {
    SearchStats s = stats_;
    s.elapsed_ms = std::chrono::duration<double, std::milli>(SteadyClock::now() - start_time_).count();
    return s;
  }

  /// The entry's program over the base grammar.
  Program base_program(const Entry& e) const { return wg_->to_base(e.program()); }

 private:
  bool remember(const Entry& e) const {
    const auto& index = seen_[e.nt];
    auto [lo, hi] = index.equal_range(sem_->hash(e.value));
    for (auto it = lo; it != hi; ++it) {
      if (it->second->value == e.value) return false;
    }
    return true;
  }

  void compute(Entry& e) {
    args_.clear();
    for (const Entry* c : e.children) args_.push_back(&c->value);
    if (!std::binary_search(composite_.begin(), composite_.end(), e.production)) {
      sem_->apply(wg_->origin(e.production).root(), args_, e.value);
      return;
    }
    const auto& items = wg_->origin(e.production).preorder;
    std::size_t idx = 0;
    std::vector<const Value*> holes(args_.begin(), args_.end());
    std::function<Value()> eval = [&]() -> Value {
      const auto& item = items.at(idx++);
      if (item.hole) return *holes.at(item.value);
      const Production& bp = wg_->base_grammar().production(item.value);
      std::vector<Value> kids;
      kids.reserve(bp.arity());
      for (std::size_t i = 0; i < bp.arity(); ++i) kids.push_back(eval());
      std::vector<const Value*> ptrs;
      for (const auto& k : kids) ptrs.push_back(&k);
      Value out{};
      sem_->apply(item.value, ptrs, out);
      return out;
    };
    e.value = eval();
  }

  const WeightedGrammar* wg_;
  const Sem* sem_;
  SymbolId target_;
  Bank<Value> bank_;
  std::vector<std::unordered_multimap<std::size_t, const Entry*>> seen_;
  std::vector<bool> active_;
  std::vector<ProductionId> composite_;
  std::int64_t max_weight_ = 1;
  std::int64_t max_arity_ = 0;
  std::int64_t level_ = 1;
  std::optional<NewPrograms<Value>> cursor_;
  Entry current_;
  const Entry* current_ref_ = nullptr;
  bool current_new_ = false;
  std::vector<const Value*> args_;
  SearchStats stats_;
  StopReason stop_ = StopReason::kNone;
  SteadyClock::time_point start_time_;
};

struct SearchOutcome {
  std::optional<Program> solution;  // over the base grammar
  SearchStats stats;
  StopReason stop = StopReason::kNone;
};

/// Returns the first candidate deriving from `target`
/// whose signature satisfies `is_goal`.
template <SearchSemantics Sem, class Goal>
SearchOutcome bottom_up_search(const WeightedGrammar& wg, const Sem& sem, SymbolId target,
                               Goal&& is_goal, const SearchBudget& budget = {}) {
  BottomUpEnumerator<Sem> search(wg, sem, target);
  SearchOutcome out;
  while (search.next(budget)) {
    const auto& c = search.candidate();
    if (c.nt == target && is_goal(c.value)) {
      out.solution = search.base_program(c);
      break;
    }
  }
  out.stats = search.stats();
  out.stop = search.stop_reason();
  return out;
}

}  // namespace surrosynth

#include "surrosynth/arc/synth.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace surrosynth::arc {

namespace {

SymbolId require_nonterminal(const WeightedGrammar& wg, std::string_view name) {
  auto nt = wg.grammar().find_nonterminal(name);
  if (!nt) throw GrammarError("weighted grammar has no " + std::string(name));
  return *nt;
}

// Flat object numbering, scene by scene.
std::vector<std::size_t> object_offsets(const ArcSemantics& sem) {
  std::vector<std::size_t> off{0};
  for (const auto& s : sem.scenes()) off.push_back(off.back() + s.objects.size());
  return off;
}

std::size_t hash_effects(const std::vector<std::int32_t>& v) {
  std::size_t h = 1469598103934665603ull;
  for (std::int32_t x : v) h = (h ^ static_cast<std::uint32_t>(x)) * 1099511628211ull;
  return h;
}

SearchBudget deadline_in(SteadyClock::time_point deadline) {
  SearchBudget b;
  b.deadline = deadline;
  return b;
}

}  // namespace

bool effect_matches(const Scene& scene, std::size_t i, const std::vector<Cell>& cells, const Grid& output) {
  if (output.height != scene.height || output.width != scene.width) return false;
  for (const Cell& c : cells) {
    if (output.at(c.row, c.col) != c.color) return false;
  }
  // Both lists are sorted by position.
  auto it = cells.begin();
  for (const Cell& old : scene.objects[i].cells) {
    while (it != cells.end() && (it->row < old.row || (it->row == old.row && it->col < old.col))) ++it;
    const bool kept = it != cells.end() && it->row == old.row && it->col == old.col;
    if (!kept && output.at(old.row, old.col) != scene.background) return false;
  }
  return true;
}

TransformSearch::TransformSearch(const WeightedGrammar& wg, const ArcSemantics& sem,
                                 const std::vector<Grid>& outputs)
    : sem_(&sem),
      outputs_(&outputs),
      enumerator_(wg, sem, require_nonterminal(wg, "$Transform")),
      target_(require_nonterminal(wg, "$Transform")) {
  if (outputs.size() != sem.scenes().size()) throw std::invalid_argument("one output grid per scene expected");
  for (std::size_t p = 0; p < sem.scenes().size(); ++p) {
    const Scene& s = sem.scenes()[p];
    for (std::size_t i = 0; i < s.objects.size(); ++i) {
      const bool target = !effect_matches(s, i, s.objects[i].cells, outputs[p]);
      is_target_.push_back(target);
      if (target) cover_.targets.push_back({static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(i)});
    }
  }
}

bool TransformSearch::step(const SearchBudget& budget) {
  const auto& scenes = sem_->scenes();
  while (enumerator_.next(budget)) {
    const auto& c = enumerator_.candidate();
    if (c.nt != target_ || !enumerator_.candidate_is_new()) continue;

    std::vector<std::int32_t> effects(sem_->num_contexts(), kUndef);
    std::vector<std::uint8_t> ok(sem_->num_contexts(), 0);
    std::vector<ObjectRef> covered;
    bool hits_target = false;
    std::size_t flat = 0;
    for (std::size_t p = 0; p < scenes.size(); ++p) {
      for (std::size_t i = 0; i < scenes[p].objects.size(); ++i, ++flat) {
        bool any = false;
        const std::size_t begin = sem_->block_begin(p, i);
        for (std::size_t k = begin; k < begin + sem_->block_size(p); ++k) {
          const std::int32_t e = sem_->effect(c.value[k], p, i);
          effects[k] = e;
          if (e == kUndef) continue;
          if (static_cast<std::size_t>(e) >= effect_ok_.size()) effect_ok_.resize(e + 1, -1);
          if (effect_ok_[e] < 0) effect_ok_[e] = effect_matches(scenes[p], i, sem_->effect_cells(e), (*outputs_)[p]);
          ok[k] = static_cast<std::uint8_t>(effect_ok_[e]);
          any = any || ok[k];
        }
        if (any) {
          covered.push_back({static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(i)});
          hits_target = hits_target || is_target_[flat];
        }
      }
    }
    if (!(hits_target || (cover_.targets.empty() && !covered.empty()))) continue;

    const std::size_t h = hash_effects(effects);
    auto [lo, hi] = seen_effects_.equal_range(h);
    bool repeat = false;
    for (auto it = lo; it != hi && !repeat; ++it) repeat = cover_.items[it->second].effects == effects;
    if (repeat) continue;
    seen_effects_.emplace(h, cover_.items.size());

    cover_.items.push_back(
        {enumerator_.base_program(c), c.cost, std::move(effects), std::move(ok), std::move(covered)});

    std::vector<ObjectRef> all;
    for (const auto& it : cover_.items) all.insert(all.end(), it.covered.begin(), it.covered.end());
    std::sort(all.begin(), all.end());
    cover_.complete = std::includes(all.begin(), all.end(), cover_.targets.begin(), cover_.targets.end());
    cover_.stats = enumerator_.stats();
    cover_.stop = StopReason::kNone;
    return true;
  }
  cover_.stats = enumerator_.stats();
  cover_.stop = enumerator_.stop_reason();
  return false;
}

TransformCover transform_search(const WeightedGrammar& wg, const ArcSemantics& sem,
                                const std::vector<Grid>& outputs, const SearchBudget& budget) {
  TransformSearch search(wg, sem, outputs);
  while (!search.cover().complete && search.step(budget)) {
  }
  TransformCover out = search.cover();
  out.stats = search.stats();
  return out;
}

FilterSearch::FilterSearch(const WeightedGrammar& wg, const ArcSemantics& sem)
    : sem_(&sem), enumerator_(wg, sem, require_nonterminal(wg, "$Filter")), target_(require_nonterminal(wg, "$Filter")) {}

bool FilterSearch::accepts(const ArcSemantics::Value& filter, const CoverItem& item,
                           const std::vector<FilterRole>& roles) const {
  const auto& scenes = sem_->scenes();
  std::size_t flat = 0;
  for (std::size_t p = 0; p < scenes.size(); ++p) {
    for (std::size_t i = 0; i < scenes[p].objects.size(); ++i, ++flat) {
      const FilterRole role = roles[flat];
      const std::size_t begin = sem_->block_begin(p, i);
      std::int32_t chosen = kUndef;
      bool selected = false;
      for (std::size_t k = begin; k < begin + sem_->block_size(p); ++k) {
        if (!filter[k]) continue;
        if (role == FilterRole::kForbid || !item.ok[k]) return false;
        if (selected && item.effects[k] != chosen) return false;
        chosen = item.effects[k];
        selected = true;
      }
      if (role == FilterRole::kMust && !selected) return false;
    }
  }
  return true;
}

std::optional<Program> FilterSearch::find(const CoverItem& item, const std::vector<FilterRole>& roles,
                                          const SearchBudget& budget) {
  for (const auto& e : enumerator_.bank().entries()) {
    if (e.nt == target_ && accepts(e.value, item, roles)) return enumerator_.base_program(e);
  }
  while (enumerator_.next(budget)) {
    const auto& c = enumerator_.candidate();
    if (c.nt == target_ && enumerator_.candidate_is_new() && accepts(c.value, item, roles)) {
      return enumerator_.base_program(c);
    }
  }
  return std::nullopt;
}

bool SolutionMap::complete() const {
  return !entries.empty() && std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.filter.has_value(); });
}

namespace {

// Targets go to the first listed item covering them.
std::vector<std::vector<FilterRole>> assign_roles(const ArcSemantics& sem, const TransformCover& cover,
                                                  const std::vector<std::size_t>& items) {
  const auto off = object_offsets(sem);
  std::vector<int> owner(off.back(), -1);
  std::vector<bool> is_target(off.back(), false);
  for (const auto& t : cover.targets) is_target[off[t.pair] + t.object] = true;
  for (std::size_t k = 0; k < items.size(); ++k) {
    for (const auto& o : cover.items[items[k]].covered) {
      const std::size_t flat = off[o.pair] + o.object;
      if (is_target[flat] && owner[flat] < 0) owner[flat] = static_cast<int>(k);
    }
  }
  std::vector<std::vector<FilterRole>> roles(items.size(), std::vector<FilterRole>(off.back(), FilterRole::kFree));
  for (std::size_t flat = 0; flat < owner.size(); ++flat) {
    if (!is_target[flat]) continue;
    for (std::size_t k = 0; k < items.size(); ++k) {
      roles[k][flat] = owner[flat] == static_cast<int>(k) ? FilterRole::kMust : FilterRole::kForbid;
    }
  }
  return roles;
}

}  // namespace

SolutionMap filter_search(const WeightedGrammar& wg, const ArcSemantics& sem, const TransformCover& cover,
                          const SearchBudget& budget) {
  SolutionMap out;
  if (cover.items.empty()) return out;
  std::vector<std::size_t> items(cover.items.size());
  std::iota(items.begin(), items.end(), 0);
  const auto roles = assign_roles(sem, cover, items);
  FilterSearch search(wg, sem);
  for (std::size_t k = 0; k < items.size(); ++k) {
    SearchBudget slice = budget;
    if (budget.deadline) {
      const auto now = SteadyClock::now();
      const auto left = *budget.deadline > now ? *budget.deadline - now : SteadyClock::duration::zero();
      slice.deadline = now + left / static_cast<long>(items.size() - k);
    }
    out.entries.push_back({cover.items[k].transform, search.find(cover.items[k], roles[k], slice)});
  }
  out.stats = search.stats();
  return out;
}

namespace {

struct Partition {
  std::vector<std::size_t> items;
  std::int64_t cost = 0;
};

std::vector<Partition> partitions(const ArcSemantics& sem, const TransformCover& cover, std::size_t max_rules,
                                  std::size_t limit) {
  std::vector<Partition> out;
  if (cover.items.empty()) return out;
  if (cover.targets.empty()) {
    out.push_back({{0}, cover.items[0].cost});
    return out;
  }
  const auto off = object_offsets(sem);
  std::vector<std::vector<bool>> covers(cover.items.size(), std::vector<bool>(off.back(), false));
  for (std::size_t k = 0; k < cover.items.size(); ++k) {
    for (const auto& o : cover.items[k].covered) covers[k][off[o.pair] + o.object] = true;
  }
  std::vector<std::size_t> targets;
  for (const auto& t : cover.targets) targets.push_back(off[t.pair] + t.object);

  // Collect more than `limit` so that the sort below sees small partitions
  // found late in the depth-first order.
  const std::size_t cap = limit * 8;
  std::vector<std::size_t> chosen;
  std::vector<int> owner(off.back(), -1);
  auto dfs = [&](auto&& self, std::int64_t cost) -> void {
    if (out.size() >= cap) return;
    auto open = std::find_if(targets.begin(), targets.end(), [&](std::size_t t) { return owner[t] < 0; });
    if (open == targets.end()) {
      out.push_back({chosen, cost});
      return;
    }
    if (chosen.size() == max_rules) return;
    for (std::size_t k = 0; k < cover.items.size(); ++k) {
      if (!covers[k][*open] || std::find(chosen.begin(), chosen.end(), k) != chosen.end()) continue;
      std::vector<std::size_t> claimed;
      for (std::size_t t : targets) {
        if (owner[t] < 0 && covers[k][t]) {
          owner[t] = static_cast<int>(chosen.size());
          claimed.push_back(t);
        }
      }
      chosen.push_back(k);
      self(self, cost + cover.items[k].cost);
      chosen.pop_back();
      for (std::size_t t : claimed) owner[t] = -1;
    }
  };
  dfs(dfs, 0);
  std::stable_sort(out.begin(), out.end(), [](const Partition& a, const Partition& b) {
    if (a.items.size() != b.items.size()) return a.items.size() < b.items.size();
    return a.cost < b.cost;
  });
  if (out.size() > limit) out.resize(limit);
  return out;
}

}  // namespace

ArcSynthResult synth_arc(const ArcTask& task, const WeightedGrammar& wg_transform, const WeightedGrammar& wg_filter,
                         const ArcSynthOptions& options) {
  const auto start = SteadyClock::now();
  const auto deadline = start + std::chrono::duration_cast<SteadyClock::duration>(
                                    std::chrono::duration<double>(options.timeout_s));
  ArcSynthResult result;
  const Grammar& grammar = wg_transform.base_grammar();
  if (wg_filter.base_grammar().num_productions() != grammar.num_productions()) {
    throw GrammarError("transform and filter grammars must share one base grammar");
  }

  std::vector<Scene> scenes;
  std::vector<Grid> outputs;
  for (const auto& pair : task.train) {
    scenes.push_back(abstract_scene(pair.input, options.dsl.abstraction));
    outputs.push_back(pair.output);
  }
  const ArcSemantics sem(grammar, std::move(scenes), options.dsl.variables.size());

  auto finish = [&](ArcSynthResult& r, const TransformSearch& ts, const FilterSearch* fs) {
    r.transform_candidates = ts.stats().enumerated;
    r.filter_candidates = fs ? fs->stats().enumerated : 0;
    r.elapsed_ms = std::chrono::duration<double, std::milli>(SteadyClock::now() - start).count();
  };

  // The transform language is finite, so it is enumerated completely; that
  // lets the partitions below prefer fewer transforms from the start.
  TransformSearch ts(wg_transform, sem, outputs);
  while (ts.step(deadline_in(deadline))) {
  }
  const TransformCover& cover = ts.cover();
  if (!cover.complete) {
    result.failure = ts.stop_reason() == StopReason::kDeadline ? "timeout in transform search"
                                                                : "no transforms cover every changed object";
    finish(result, ts, nullptr);
    return result;
  }

  FilterSearch fs(wg_filter, sem);
  std::map<std::pair<std::size_t, std::vector<FilterRole>>, std::optional<Program>> answered;
  for (const Partition& part : partitions(sem, cover, options.max_rules, options.max_partitions)) {
    if (SteadyClock::now() >= deadline) break;
    ++result.partitions_tried;
    const auto roles = assign_roles(sem, cover, part.items);
    std::vector<ArcRule> rules;
    for (std::size_t k = 0; k < part.items.size(); ++k) {
      auto key = std::make_pair(part.items[k], roles[k]);
      auto it = answered.find(key);
      if (it == answered.end()) {
        std::size_t pending = 0;
        for (std::size_t m = k; m < part.items.size(); ++m) pending += !answered.count({part.items[m], roles[m]});
        const auto now = SteadyClock::now();
        const auto left = deadline > now ? deadline - now : SteadyClock::duration::zero();
        SearchBudget slice;
        slice.deadline = now + left / static_cast<long>(std::max<std::size_t>(pending, 1));
        it = answered.emplace(std::move(key), fs.find(cover.items[part.items[k]], roles[k], slice)).first;
      }
      if (!it->second) break;
      rules.push_back({*it->second, cover.items[part.items[k]].transform});
    }
    if (rules.size() != part.items.size()) continue;

    // Rules run in sequence, so try each order until one fits every pair.
    std::vector<std::size_t> order(rules.size());
    std::iota(order.begin(), order.end(), 0);
    do {
      std::vector<ArcRule> ordered;
      for (std::size_t k : order) ordered.push_back(rules[k]);
      Program program = assemble_rule_program(grammar, ordered);
      bool fits = true;
      for (const auto& pair : task.train) {
        auto got = eval_rule_program(grammar, program, pair.input, options.dsl);
        if (!got || *got != pair.output) {
          fits = false;
          break;
        }
      }
      if (!fits) continue;
      result.program = program;
      result.text = render(grammar, program);
      result.test_correct = !task.test.empty();
      for (const auto& pair : task.test) {
        result.test_outputs.push_back(eval_rule_program(grammar, program, pair.input, options.dsl));
        result.test_correct = result.test_correct && result.test_outputs.back() == pair.output;
      }
      finish(result, ts, &fs);
      return result;
    } while (std::next_permutation(order.begin(), order.end()));
  }
  result.failure = SteadyClock::now() >= deadline ? "timeout in filter search" : "no partition admitted filters";
  finish(result, ts, &fs);
  return result;
}

}  // namespace surrosynth::arc

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "surrosynth/arc/dsl.hpp"
#include "surrosynth/search.hpp"
#include "surrosynth/weighted_grammar.hpp"

namespace surrosynth::arc {

struct ObjectRef {
  std::uint32_t pair = 0;
  std::uint32_t object = 0;

  friend auto operator<=>(const ObjectRef&, const ObjectRef&) = default;
};

/// Whether transforming object `i` of scene `p` into `cells` agrees with the
/// output grid: every new cell has the output's color and every vacated cell
/// is background in the output.
bool effect_matches(const Scene& scene, std::size_t i, const std::vector<Cell>& cells, const Grid& output);

/// A transform together with how it acts in every binding context.
struct CoverItem {
  Program transform;  // base-grammar derivation of $Transform
  std::int64_t cost = 0;
  std::vector<std::int32_t> effects;  // per context
  std::vector<std::uint8_t> ok;       // per context: effect matches the output
  std::vector<ObjectRef> covered;     // objects with at least one matching context
};

/// The map from transforms to the objects they transform correctly.
/// Targets are objects the output changes, i.e. where NoOp does not match.
struct TransformCover {
  std::vector<ObjectRef> targets;
  std::vector<CoverItem> items;
  bool complete = false;  // every target is covered by some item
  SearchStats stats;
  StopReason stop = StopReason::kNone;
};

/// Resumable transform enumeration over `$Transform`. Transforms whose
/// per-context effects repeat an earlier item are skipped.
class TransformSearch {
 public:
  TransformSearch(const WeightedGrammar& wg, const ArcSemantics& sem, const std::vector<Grid>& outputs);

  /// Advances to the next transform that covers a target (any object when
  /// there are no targets). False once the budget is spent or the language
  /// is exhausted.
  bool step(const SearchBudget& budget);

  const TransformCover& cover() const { return cover_; }
  StopReason stop_reason() const { return enumerator_.stop_reason(); }
  SearchStats stats() const { return enumerator_.stats(); }

 private:
  const ArcSemantics* sem_;
  const std::vector<Grid>* outputs_;
  BottomUpEnumerator<ArcSemantics> enumerator_;
  SymbolId target_;
  TransformCover cover_;
  std::vector<std::int8_t> effect_ok_;  // by effect id; -1 unknown
  std::unordered_multimap<std::size_t, std::size_t> seen_effects_;
  std::vector<std::uint8_t> is_target_;
};

/// Enumerates transforms in cost order until every target is covered.
TransformCover transform_search(const WeightedGrammar& wg, const ArcSemantics& sem,
                                const std::vector<Grid>& outputs, const SearchBudget& budget = {});

/// What a filter must do with each object when paired with one transform.
enum class FilterRole : std::uint8_t {
  kMust,    // select it, with all satisfying bindings giving one matching effect
  kForbid,  // never select it
  kFree,    // either leave it alone or transform it correctly
};

/// Resumable filter enumeration over `$Filter`, shared by all queries of a
/// task. Each query first scans the filters banked so far, then extends the
/// enumeration.
class FilterSearch {
 public:
  FilterSearch(const WeightedGrammar& wg, const ArcSemantics& sem);

  /// `roles` is indexed like the semantics' objects, scene by scene.
  std::optional<Program> find(const CoverItem& item, const std::vector<FilterRole>& roles,
                              const SearchBudget& budget);
  bool accepts(const ArcSemantics::Value& filter, const CoverItem& item,
               const std::vector<FilterRole>& roles) const;

  StopReason stop_reason() const { return enumerator_.stop_reason(); }
  SearchStats stats() const { return enumerator_.stats(); }

 private:
  const ArcSemantics* sem_;
  BottomUpEnumerator<ArcSemantics> enumerator_;
  SymbolId target_;
};

struct SolutionEntry {
  Program transform;
  std::optional<Program> filter;
};

/// Transform -> filter pairs; complete when every transform has a filter.
struct SolutionMap {
  std::vector<SolutionEntry> entries;
  SearchStats stats;

  bool complete() const;
};

/// Finds a filter for every item of `cover`. Each target goes to the first
/// item that covers it; that item's filter must select it and every other
/// item's filter must not. The deadline is split evenly over the pending
/// items.
SolutionMap filter_search(const WeightedGrammar& wg, const ArcSemantics& sem, const TransformCover& cover,
                          const SearchBudget& budget = {});

struct ArcSynthOptions {
  ArcDslConfig dsl;
  double timeout_s = 60.0;
  std::size_t max_rules = 3;
  std::size_t max_partitions = 500;
};

struct ArcSynthResult {
  std::optional<Program> program;  // over the task grammar
  std::string text;
  std::vector<std::optional<Grid>> test_outputs;
  bool test_correct = false;  // every test output reproduced
  std::uint64_t transform_candidates = 0;
  std::uint64_t filter_candidates = 0;
  std::size_t partitions_tried = 0;
  double elapsed_ms = 0.0;
  std::string failure;  // empty on success

  std::uint64_t enumerated() const { return transform_candidates + filter_candidates; }
};

/// Divide-and-conquer synthesis: enumerate transforms and their covers,
/// then try partitions of the targets into covers, fewest transforms and
/// lowest cost first, searching one filter per transform. A candidate rule
/// program is accepted only if it reproduces every training output; it is
/// then run on the test inputs. Both weighted grammars must be built over
/// build_arc_grammar(task, options.dsl).
ArcSynthResult synth_arc(const ArcTask& task, const WeightedGrammar& wg_transform,
                         const WeightedGrammar& wg_filter, const ArcSynthOptions& options = {});

}  // namespace surrosynth::arc

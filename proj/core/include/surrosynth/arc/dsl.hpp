#pragma once

#include <climits>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "surrosynth/arc/grid.hpp"
#include "surrosynth/arc/scene.hpp"
#include "surrosynth/grammar.hpp"
#include "surrosynth/program.hpp"

namespace surrosynth::arc {

struct ArcDslConfig {
  std::vector<std::string> variables = {"self", "other"};  // first one is the focus object
  AbstractionConfig abstraction;
};

/// Attribute values seen in the training inputs; they become literal
/// terminals of the task grammar.
struct LiteralPools {
  std::vector<int> sizes;
  std::vector<int> degrees;
  std::vector<int> widths;
  std::vector<int> heights;
};

LiteralPools literal_pools(const ArcTask& task, const AbstractionConfig& config = {});

/// The rule DSL in infix form, start symbol `$Program`:
///   $Program    -> $Rule | $Rule ; $Program
///   $Rule       -> if $Filter then $Transforms
///   $Filter     -> $Atom | $Atom && $Filter | $Atom || $Filter
///   $Atom       -> not ( $Atom ) | $X == $X | is_neighbor ( $Obj , $Obj )
///   $Transforms -> $Transform | $Transform ; $Transforms
/// with attribute, direction, axis and transform productions below those.
Grammar build_arc_grammar(const LiteralPools& pools, const std::vector<std::string>& variables);
std::shared_ptr<const Grammar> build_arc_grammar(const ArcTask& task, const ArcDslConfig& config = {});

inline constexpr std::int32_t kUndef = INT32_MIN;

/// Evaluation of DSL fragments over every binding context of a set of
/// scenes. A context is (scene, focus object, one object per further
/// variable); variables range over all objects of the scene, the focus
/// object included.
///
/// Values are per-context integers: object indices for `$Obj`, attribute
/// codes, 0/1 for filters, and interned action-sequence ids for transforms.
/// kUndef marks an undefined value; comparisons with it are false.
class ArcSemantics {
 public:
  using Value = std::vector<std::int32_t>;

  ArcSemantics(const Grammar& grammar, std::vector<Scene> scenes, std::size_t num_variables);

  void apply(ProductionId id, std::span<const Value* const> args, Value& out) const;
  std::size_t hash(const Value& v) const;

  const Grammar& grammar() const { return *grammar_; }
  const std::vector<Scene>& scenes() const { return scenes_; }
  std::size_t num_contexts() const { return ctx_scene_.size(); }
  std::size_t num_variables() const { return num_vars_; }

  /// Contexts with focus object `i` of scene `p` are the contiguous range
  /// [block_begin(p, i), block_begin(p, i) + block_size(p)).
  std::size_t block_begin(std::size_t p, std::size_t i) const { return scene_begin_[p] + i * block_size_[p]; }
  std::size_t block_size(std::size_t p) const { return block_size_[p]; }
  std::size_t context_scene(std::size_t k) const { return ctx_scene_[k]; }
  std::int32_t context_object(std::size_t k, std::size_t var) const { return ctx_vars_[k * num_vars_ + var]; }

  const std::vector<Action>& actions(std::int32_t id) const { return action_seqs_.at(static_cast<std::size_t>(id)); }

  /// Interned result of running action sequence `action_id` on object `i`
  /// of scene `p`; kUndef when `action_id` is.
  std::int32_t effect(std::int32_t action_id, std::size_t p, std::size_t i) const;
  const std::vector<Cell>& effect_cells(std::int32_t effect_id) const { return effects_.at(effect_id).cells; }
  std::size_t effect_object(std::int32_t effect_id) const { return effects_.at(effect_id).object; }

 private:
  enum class Kind : std::uint8_t {
    kChain,
    kVariable,
    kConst,
    kMin,
    kMax,
    kAttrOf,
    kDirOf,
    kAxisOf,
    kEq,
    kNeighbor,
    kNot,
    kAnd,
    kOr,
    kTransform,
    kSequence,
    kStructural,
  };
  struct Meaning {
    Kind kind = Kind::kStructural;
    std::int32_t value = 0;
    Attr attr = Attr::kColor;
    ActionOp op = ActionOp::kNoOp;
  };
  struct Effect {
    std::size_t scene = 0;
    std::size_t object = 0;
    std::vector<Cell> cells;
  };

  std::int32_t intern_actions(std::vector<Action> seq) const;

  const Grammar* grammar_;
  std::vector<Scene> scenes_;
  std::size_t num_vars_;
  std::vector<Meaning> meanings_;
  std::vector<std::size_t> scene_begin_;
  std::vector<std::size_t> block_size_;
  std::vector<std::uint32_t> ctx_scene_;
  std::vector<std::int32_t> ctx_vars_;

  mutable std::vector<std::vector<Action>> action_seqs_;
  mutable std::unordered_map<std::string, std::int32_t> action_index_;
  mutable std::vector<Effect> effects_;
  mutable std::unordered_map<std::string, std::int32_t> effect_index_;
  mutable std::unordered_map<std::uint64_t, std::int32_t> effect_cache_;
};

/// Runs a `$Program` derivation on a grid. Rules run in order; each rule
/// sees the objects as left by the previous one. Within a rule every focus
/// object is judged against the same pre-rule scene. Returns nullopt when
/// some object has satisfying bindings with differing effects, or when a
/// selected transform is undefined.
std::optional<Grid> eval_rule_program(const Grammar& grammar, const Program& program, const Grid& input,
                                      const ArcDslConfig& config = {});

/// One rule: filter and transforms as derivations of `$Filter` and
/// `$Transforms` (or `$Transform`).
struct ArcRule {
  Program filter;
  Program transforms;
};

/// Builds the `$Program` derivation for a list of rules.
Program assemble_rule_program(const Grammar& grammar, const std::vector<ArcRule>& rules);

}  // namespace surrosynth::arc

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "surrosynth/grammar.hpp"
#include "surrosynth/program.hpp"

namespace surrosynth::strings {

class TaskLoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Sort { kString, kInt, kBool };

std::string_view sort_name(Sort sort);  // "String", "Int", "Bool"
std::optional<Sort> sort_from_name(std::string_view name);

struct Undefined {
  friend bool operator==(Undefined, Undefined) { return true; }
};

using StrValue = std::variant<Undefined, std::string, std::int64_t, bool>;

bool is_undefined(const StrValue& v);
/// Examples-style rendering: strings raw, integers in decimal.
std::string display(const StrValue& v);
std::size_t hash_value(const StrValue& v);

enum class Op {
  kVariable,
  kLiteral,
  kChain,  // N -> M, evaluates to its child
  kConcat,
  kReplace,
  kSubstr,
  kIte,
  kIntToStr,
  kAt,
  kEq,
  kContains,
  kSuffixOf,
  kPrefixOf,
  kStrToInt,
  kAdd,
  kSub,
  kLength,
  kIndexOf,
};

/// Accepts SyGuS names (str.++, str.replace, str.len, ...) and the short
/// names of the union grammar (concat, replace, length, ...).
std::optional<Op> op_from_name(std::string_view name);
std::size_t op_arity(Op op);

/// Total semantics following SMT-LIB string conventions; undefined inputs
/// propagate.
StrValue apply_op(Op op, std::span<const StrValue* const> args);

struct StringArg {
  std::string name;
  Sort sort = Sort::kString;
};

struct StringExample {
  std::vector<StrValue> inputs;
  StrValue output;
};

struct StringTask {
  std::string name;
  std::string function_name = "f";
  std::vector<StringArg> args;
  Sort return_sort = Sort::kString;
  std::vector<StringExample> examples;
  std::string hint;  // natural-language specification, possibly empty
  std::shared_ptr<const Grammar> grammar;
  std::vector<Sort> nonterminal_sorts;  // indexed by grammar nonterminal id
};

/// SyGuS-style task: a synth-fun with its grammar, and constraints of the
/// form (= (f in...) out). Leading `;` comment lines become the hint.
StringTask load_sygus_task(std::string_view text, std::string name = "");
/// {"name", "args": [{"name", "sort"}], "return", "examples": [{"inputs", "output"}],
///  "literals": {"String": [...], "Int": [...]}, "hint"}; the grammar is the
/// full union grammar over the given variables and literals.
StringTask load_json_task(std::string_view text, std::string name = "");
/// Dispatches on extension: .json, otherwise s-expression.
StringTask load_string_task(const std::filesystem::path& path);

/// The union grammar as a synth-fun block.
std::string union_synth_fun(const std::string& function_name, const std::vector<StringArg>& args,
                            Sort return_sort, const std::vector<std::string>& string_literals,
                            const std::vector<std::int64_t>& int_literals);

/// The task's grammar written back as a synth-fun block.
std::string synth_fun_text(const StringTask& task);

/// The function body in a completion: the last item of a define-fun if one
/// is present, else the first complete expression. Unbalanced text is
/// returned trimmed, so it can still be lexed.
std::string extract_body(std::string_view completion);

/// Per-production meaning of a task grammar plus evaluation over examples.
class StringSemantics {
 public:
  using Value = std::vector<StrValue>;

  explicit StringSemantics(const StringTask& task);

  void apply(ProductionId id, std::span<const Value* const> args, Value& out) const;
  std::size_t hash(const Value& v) const;

  /// Expected outputs, in example order.
  const Value& goal() const { return goal_; }
  Sort sort_of(SymbolId nt) const { return sorts_.at(nt); }

  StrValue eval(const Program& p, std::size_t example) const;
  StrValue eval(const Program& p, const std::vector<StrValue>& inputs) const;

 private:
  struct Meaning {
    Op op = Op::kLiteral;
    std::size_t variable = 0;
    StrValue literal;
  };

  std::vector<std::vector<StrValue>> inputs_;
  std::vector<Meaning> meanings_;
  std::vector<Sort> sorts_;
  Value goal_;
};

}  // namespace surrosynth::strings

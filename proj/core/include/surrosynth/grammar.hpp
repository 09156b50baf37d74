#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace surrosynth {

using SymbolId = std::uint32_t;
using ProductionId = std::uint32_t;

class GrammarError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Symbol {
  enum class Kind : std::uint8_t { kTerminal, kNonterminal };

  Kind kind = Kind::kTerminal;
  SymbolId id = 0;

  static Symbol terminal(SymbolId id) { return {Kind::kTerminal, id}; }
  static Symbol nonterminal(SymbolId id) { return {Kind::kNonterminal, id}; }

  bool is_terminal() const { return kind == Kind::kTerminal; }
  bool is_nonterminal() const { return kind == Kind::kNonterminal; }

  friend bool operator==(const Symbol&, const Symbol&) = default;
};

/// A production `lhs -> rhs`. The optional operator terminal names the DSL
/// operator the production stands for and must occur in `rhs`.
struct Production {
  ProductionId id = 0;
  SymbolId lhs = 0;
  std::vector<Symbol> rhs;
  std::optional<SymbolId> operator_terminal;

  /// Nonterminals of `rhs` in order; a program node has one child per entry.
  std::vector<SymbolId> child_nonterminals;

  std::size_t arity() const { return child_nonterminals.size(); }
};

/// Immutable context-free grammar (N, Sigma, S, R). Production ids are the
/// positions in the production list and are stable across serialization.
class Grammar {
 public:
  Grammar(std::vector<std::string> nonterminals, std::vector<std::string> terminals,
          SymbolId start, std::vector<Production> productions);

  SymbolId start() const { return start_; }
  std::size_t num_nonterminals() const { return nonterminals_.size(); }
  std::size_t num_terminals() const { return terminals_.size(); }
  std::size_t num_productions() const { return productions_.size(); }

  const std::string& nonterminal_name(SymbolId nt) const { return nonterminals_.at(nt); }
  const std::string& terminal_text(SymbolId t) const { return terminals_.at(t); }
  std::optional<SymbolId> find_nonterminal(std::string_view name) const;
  std::optional<SymbolId> find_terminal(std::string_view text) const;

  std::span<const Production> productions() const { return productions_; }
  const Production& production(ProductionId id) const;
  std::span<const ProductionId> productions_of(SymbolId nt) const { return by_lhs_.at(nt); }

  /// Productions whose rhs mentions terminal `t` anywhere.
  std::span<const ProductionId> productions_mentioning(SymbolId t) const {
    return mentioning_.at(t);
  }
  /// Productions that declare `t` as their operator terminal.
  std::span<const ProductionId> productions_with_operator(SymbolId t) const {
    return by_operator_.at(t);
  }

  /// Nonterminals reachable from `from` (inclusive), as a membership mask.
  std::vector<bool> reachable_from(SymbolId from) const;

  /// Returns a copy with a different start symbol.
  Grammar with_start(SymbolId start) const;

  /// Human-readable production, e.g. `$S -> f( $S )`.
  std::string describe(ProductionId id) const;

 private:
  void validate() const;

  std::vector<std::string> nonterminals_;
  std::vector<std::string> terminals_;
  SymbolId start_;
  std::vector<Production> productions_;
  std::vector<std::vector<ProductionId>> by_lhs_;
  std::vector<std::vector<ProductionId>> mentioning_;
  std::vector<std::vector<ProductionId>> by_operator_;
  std::unordered_map<std::string, SymbolId> nonterminal_index_;
  std::unordered_map<std::string, SymbolId> terminal_index_;
};

/// Incremental construction using the file-format conventions: names starting
/// with `$` are nonterminals, everything else is a terminal literal. A leading
/// `$$` escapes a terminal that itself starts with `$`.
class GrammarBuilder {
 public:
  explicit GrammarBuilder(std::string start);

  /// Declares a nonterminal without adding productions (keeps declaration order).
  GrammarBuilder& declare(std::string_view nonterminal);

  GrammarBuilder& add(std::string_view lhs, const std::vector<std::string>& rhs,
                      std::optional<std::string> operator_terminal = std::nullopt);

  Grammar build() const;

  static bool is_nonterminal_name(std::string_view symbol);
  static std::string unescape_terminal(std::string_view symbol);
  static std::string escape_terminal(std::string_view text);

 private:
  SymbolId intern_nonterminal(std::string_view name);
  SymbolId intern_terminal(std::string_view text);

  std::string start_;
  std::vector<std::string> nonterminals_;
  std::vector<std::string> terminals_;
  std::unordered_map<std::string, SymbolId> nt_index_;
  std::unordered_map<std::string, SymbolId> t_index_;
  std::vector<Production> productions_;
};

}  // namespace surrosynth

#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "surrosynth/grammar.hpp"

namespace surrosynth {

/// A derivation tree: a production plus one child per nonterminal of its rhs.
/// Programs are immutable values; copies share structure.
class Program {
 public:
  Program(ProductionId production, std::vector<Program> children = {});

  ProductionId production() const { return node_->production; }
  std::span<const Program> children() const { return node_->children; }
  const Program& child(std::size_t i) const { return node_->children.at(i); }

  /// |P|: number of productions in the derivation.
  std::size_t size() const { return node_->size; }

  /// Preorder production ids (the leftmost derivation order).
  std::vector<ProductionId> trace() const;

  friend bool operator==(const Program& a, const Program& b);

 private:
  struct Node {
    ProductionId production;
    std::vector<Program> children;
    std::size_t size;
  };
  std::shared_ptr<const Node> node_;
};

/// Throws GrammarError unless `p` is a well-formed derivation of `from` in `g`.
void validate_program(const Grammar& g, const Program& p, SymbolId from);

/// Source text of a program. Tokens are separated by single spaces except
/// around brackets and commas, so the result lexes back to the same tokens.
std::string render(const Grammar& g, const Program& p);

/// Terminal sequence produced by the program.
std::vector<SymbolId> terminal_yield(const Grammar& g, const Program& p);

}  // namespace surrosynth

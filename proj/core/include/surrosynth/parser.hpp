#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "surrosynth/grammar.hpp"
#include "surrosynth/lexer.hpp"
#include "surrosynth/program.hpp"

namespace surrosynth {

struct ParseFailure {
  std::size_t token_index = 0;  // furthest token the parser reached
  std::size_t offset = 0;       // byte offset of that token in the source
  std::string message;
};

struct ParseOutcome {
  std::optional<Program> program;
  ParseFailure failure;  // meaningful only when !program

  explicit operator bool() const { return program.has_value(); }
};

/// Backtracking recursive-descent parser. Alternatives are tried in
/// production order and the first derivation that consumes the whole input
/// wins. Left-recursive cycles are cut (the two DSLs are not left-recursive).
class Parser {
 public:
  explicit Parser(const Grammar& grammar);

  ParseOutcome parse(std::string_view text) const;
  ParseOutcome parse(std::string_view text, SymbolId from) const;
  ParseOutcome parse_tokens(std::span<const Token> tokens, SymbolId from) const;

  /// Upper bound on parser steps before giving up on a pathological input.
  void set_step_limit(std::size_t steps) { step_limit_ = steps; }

 private:
  const Grammar* grammar_;
  Lexer lexer_;
  std::vector<std::vector<bool>> first_;  // [nonterminal][terminal]
  std::vector<bool> nullable_;
  std::size_t step_limit_ = 5'000'000;
};

ParseOutcome parse(const Grammar& grammar, std::string_view text);

}  // namespace surrosynth

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "surrosynth/grammar.hpp"

namespace surrosynth {

struct Token {
  SymbolId terminal = 0;
  std::size_t offset = 0;
  std::size_t length = 0;
};

struct SkippedSpan {
  std::size_t offset = 0;
  std::string text;
};

struct LexResult {
  std::vector<Token> tokens;
  std::vector<SkippedSpan> skipped;

  std::vector<SymbolId> terminals() const;
};

/// Longest-match tokenizer over a grammar's terminal alphabet.
///
/// Whitespace between tokens is skipped. A terminal ending in an identifier
/// character only matches when the next character is not one, so `self` does
/// not match inside `selfish`. Double-quoted literals are atomic: the whole
/// literal is either a terminal or a skipped span, never a source of tokens.
/// Characters no terminal accounts for are collected as skipped spans.
class Lexer {
 public:
  explicit Lexer(const Grammar& grammar);

  LexResult lex(std::string_view text) const;

 private:
  const Grammar* grammar_;
  // Terminal candidates bucketed by first byte, longest first.
  std::vector<std::vector<SymbolId>> by_first_;
};

LexResult lex(const Grammar& grammar, std::string_view text);

}  // namespace surrosynth

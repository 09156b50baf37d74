#include "surrosynth/lexer.hpp"

#include <algorithm>
#include <cctype>

namespace surrosynth {

namespace {

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

// End of a double-quoted literal starting at `pos` ("" escapes a quote), or
// npos when unterminated.
std::size_t quoted_end(std::string_view text, std::size_t pos) {
  std::size_t i = pos + 1;
  while (i < text.size()) {
    if (text[i] == '"') {
      if (i + 1 < text.size() && text[i + 1] == '"') {
        i += 2;
        continue;
      }
      return i + 1;
    }
    ++i;
  }
  return std::string_view::npos;
}

}  // namespace

std::vector<SymbolId> LexResult::terminals() const {
  std::vector<SymbolId> out;
  out.reserve(tokens.size());
  for (const Token& t : tokens) out.push_back(t.terminal);
  return out;
}

Lexer::Lexer(const Grammar& grammar) : grammar_(&grammar), by_first_(256) {
  for (SymbolId t = 0; t < grammar.num_terminals(); ++t) {
    const std::string& text = grammar.terminal_text(t);
    if (text.empty()) continue;
    by_first_[static_cast<unsigned char>(text[0])].push_back(t);
  }
  for (auto& bucket : by_first_) {
    std::stable_sort(bucket.begin(), bucket.end(), [&](SymbolId a, SymbolId b) {
      return grammar.terminal_text(a).size() > grammar.terminal_text(b).size();
    });
  }
}

LexResult Lexer::lex(std::string_view text) const {
  LexResult result;
  std::size_t pos = 0;
  std::size_t skip_start = std::string_view::npos;

  auto flush_skip = [&](std::size_t end) {
    if (skip_start == std::string_view::npos) return;
    result.skipped.push_back({skip_start, std::string(text.substr(skip_start, end - skip_start))});
    skip_start = std::string_view::npos;
  };

  while (pos < text.size()) {
    const char c = text[pos];
    if (is_space(c)) {
      flush_skip(pos);
      ++pos;
      continue;
    }
    if (c == '"') {
      flush_skip(pos);
      std::size_t end = quoted_end(text, pos);
      if (end == std::string_view::npos) end = text.size();
      std::string_view literal = text.substr(pos, end - pos);
      if (auto t = grammar_->find_terminal(literal)) {
        result.tokens.push_back({*t, pos, literal.size()});
      } else {
        result.skipped.push_back({pos, std::string(literal)});
      }
      pos = end;
      continue;
    }
    bool matched = false;
    for (SymbolId t : by_first_[static_cast<unsigned char>(c)]) {
      const std::string& term = grammar_->terminal_text(t);
      if (text.compare(pos, term.size(), term) != 0) continue;
      const std::size_t end = pos + term.size();
      if (is_ident_char(term.back()) && end < text.size() && is_ident_char(text[end])) continue;
      if (skip_start != std::string_view::npos) {
        // A terminal may not start in the middle of an identifier-like run.
        if (is_ident_char(c) && is_ident_char(text[pos - 1])) continue;
      }
      flush_skip(pos);
      result.tokens.push_back({t, pos, term.size()});
      pos = end;
      matched = true;
      break;
    }
    if (!matched) {
      if (skip_start == std::string_view::npos) skip_start = pos;
      ++pos;
    }
  }
  flush_skip(pos);
  return result;
}

LexResult lex(const Grammar& grammar, std::string_view text) { return Lexer(grammar).lex(text); }

}  // namespace surrosynth

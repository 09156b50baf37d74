#include "surrosynth/parser.hpp"

#include <functional>

namespace surrosynth {

namespace {

using Continuation = std::function<bool(const Program&, std::size_t)>;

class Descent {
 public:
  Descent(const Grammar& g, std::span<const Token> tokens, const std::vector<std::vector<bool>>& first,
          const std::vector<bool>& nullable, std::size_t step_limit)
      : g_(g), tokens_(tokens), first_(first), nullable_(nullable), step_limit_(step_limit) {}

  bool nonterminal(SymbolId nt, std::size_t pos, const Continuation& k) {
    for (const auto& [a, p] : active_) {
      if (a == nt && p == pos) return false;
    }
    if (pos < tokens_.size() && !first_[nt][tokens_[pos].terminal] && !nullable_[nt]) return false;
    active_.emplace_back(nt, pos);
    bool done = false;
    for (ProductionId id : g_.productions_of(nt)) {
      std::vector<Program> children;
      if (sequence(g_.production(id), 0, pos, children, k)) {
        done = true;
        break;
      }
      if (aborted_) break;
    }
    active_.pop_back();
    return done;
  }

  std::size_t furthest() const { return furthest_; }
  bool aborted() const { return aborted_; }

 private:
  bool sequence(const Production& prod, std::size_t i, std::size_t pos,
                std::vector<Program>& children, const Continuation& k) {
    if (++steps_ > step_limit_) {
      aborted_ = true;
      return false;
    }
    if (i == prod.rhs.size()) return k(Program(prod.id, children), pos);
    const Symbol& sym = prod.rhs[i];
    if (sym.is_terminal()) {
      if (pos >= tokens_.size() || tokens_[pos].terminal != sym.id) return false;
      furthest_ = std::max(furthest_, pos + 1);
      return sequence(prod, i + 1, pos + 1, children, k);
    }
    return nonterminal(sym.id, pos, [&](const Program& child, std::size_t next) {
      children.push_back(child);
      const bool r = sequence(prod, i + 1, next, children, k);
      children.pop_back();
      return r;
    });
  }

  const Grammar& g_;
  std::span<const Token> tokens_;
  const std::vector<std::vector<bool>>& first_;
  const std::vector<bool>& nullable_;
  std::size_t step_limit_;
  std::size_t steps_ = 0;
  std::size_t furthest_ = 0;
  bool aborted_ = false;
  std::vector<std::pair<SymbolId, std::size_t>> active_;
};

}  // namespace

Parser::Parser(const Grammar& grammar)
    : grammar_(&grammar),
      lexer_(grammar),
      first_(grammar.num_nonterminals(), std::vector<bool>(grammar.num_terminals(), false)),
      nullable_(grammar.num_nonterminals(), false) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (const Production& p : grammar.productions()) {
      bool all_nullable = true;
      for (const Symbol& s : p.rhs) {
        if (s.is_terminal()) {
          if (!first_[p.lhs][s.id]) {
            first_[p.lhs][s.id] = true;
            changed = true;
          }
          all_nullable = false;
          break;
        }
        for (SymbolId t = 0; t < grammar.num_terminals(); ++t) {
          if (first_[s.id][t] && !first_[p.lhs][t]) {
            first_[p.lhs][t] = true;
            changed = true;
          }
        }
        if (!nullable_[s.id]) {
          all_nullable = false;
          break;
        }
      }
      if (all_nullable && !nullable_[p.lhs]) {
        nullable_[p.lhs] = true;
        changed = true;
      }
    }
  }
}

ParseOutcome Parser::parse(std::string_view text) const { return parse(text, grammar_->start()); }

ParseOutcome Parser::parse(std::string_view text, SymbolId from) const {
  LexResult lexed = lexer_.lex(text);
  if (!lexed.skipped.empty()) {
    const SkippedSpan& s = lexed.skipped.front();
    std::size_t index = 0;
    while (index < lexed.tokens.size() && lexed.tokens[index].offset < s.offset) ++index;
    ParseOutcome out;
    out.failure = {index, s.offset, "unrecognized input '" + s.text + "'"};
    return out;
  }
  ParseOutcome out = parse_tokens(lexed.tokens, from);
  if (!out) {
    out.failure.offset = out.failure.token_index < lexed.tokens.size()
                             ? lexed.tokens[out.failure.token_index].offset
                             : text.size();
  }
  return out;
}

ParseOutcome Parser::parse_tokens(std::span<const Token> tokens, SymbolId from) const {
  Descent descent(*grammar_, tokens, first_, nullable_, step_limit_);
  ParseOutcome out;
  descent.nonterminal(from, 0, [&](const Program& p, std::size_t end) {
    if (end != tokens.size()) return false;
    out.program = p;
    return true;
  });
  if (!out.program) {
    const std::size_t at = std::min(descent.furthest(), tokens.size());
    out.failure.token_index = at;
    out.failure.offset = at < tokens.size() ? tokens[at].offset : 0;
    if (descent.aborted()) {
      out.failure.message = "parser step limit exceeded";
    } else if (at < tokens.size()) {
      out.failure.message =
          "unexpected token '" + grammar_->terminal_text(tokens[at].terminal) + "'";
    } else {
      out.failure.message = "unexpected end of input";
    }
  }
  return out;
}

ParseOutcome parse(const Grammar& grammar, std::string_view text) {
  return Parser(grammar).parse(text);
}

}  // namespace surrosynth

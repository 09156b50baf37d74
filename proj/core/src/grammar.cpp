#include "surrosynth/grammar.hpp"

#include <algorithm>
#include <sstream>

namespace surrosynth {

Grammar::Grammar(std::vector<std::string> nonterminals, std::vector<std::string> terminals,
                 SymbolId start, std::vector<Production> productions)
    : nonterminals_(std::move(nonterminals)),
      terminals_(std::move(terminals)),
      start_(start),
      productions_(std::move(productions)) {
  for (SymbolId i = 0; i < nonterminals_.size(); ++i) {
    if (!nonterminal_index_.emplace(nonterminals_[i], i).second) {
      throw GrammarError("duplicate nonterminal '" + nonterminals_[i] + "'");
    }
  }
  for (SymbolId i = 0; i < terminals_.size(); ++i) {
    if (!terminal_index_.emplace(terminals_[i], i).second) {
      throw GrammarError("duplicate terminal '" + terminals_[i] + "'");
    }
  }
  by_lhs_.resize(nonterminals_.size());
  mentioning_.resize(terminals_.size());
  by_operator_.resize(terminals_.size());
  for (ProductionId id = 0; id < productions_.size(); ++id) {
    Production& p = productions_[id];
    if (p.id != id) throw GrammarError("production ids must equal their list position");
    if (p.lhs >= nonterminals_.size()) throw GrammarError("production lhs out of range");
    p.child_nonterminals.clear();
    for (const Symbol& s : p.rhs) {
      if (s.is_nonterminal()) {
        if (s.id >= nonterminals_.size()) throw GrammarError("rhs nonterminal out of range");
        p.child_nonterminals.push_back(s.id);
      } else {
        if (s.id >= terminals_.size()) throw GrammarError("rhs terminal out of range");
        auto& m = mentioning_[s.id];
        if (m.empty() || m.back() != id) m.push_back(id);
      }
    }
    by_lhs_[p.lhs].push_back(id);
    if (p.operator_terminal) {
      if (*p.operator_terminal >= terminals_.size()) {
        throw GrammarError("operator terminal out of range");
      }
      by_operator_[*p.operator_terminal].push_back(id);
    }
  }
  validate();
}

void Grammar::validate() const {
  if (start_ >= nonterminals_.size()) throw GrammarError("start symbol is not a nonterminal");
  for (SymbolId nt = 0; nt < nonterminals_.size(); ++nt) {
    if (by_lhs_[nt].empty()) {
      throw GrammarError("nonterminal '" + nonterminals_[nt] + "' has no productions");
    }
  }
  for (const Production& p : productions_) {
    if (!p.operator_terminal) continue;
    const bool present = std::any_of(p.rhs.begin(), p.rhs.end(), [&](const Symbol& s) {
      return s.is_terminal() && s.id == *p.operator_terminal;
    });
    if (!present) {
      throw GrammarError("operator terminal of production " + std::to_string(p.id) +
                         " does not occur in its rhs");
    }
  }
}

std::optional<SymbolId> Grammar::find_nonterminal(std::string_view name) const {
  auto it = nonterminal_index_.find(std::string(name));
  if (it == nonterminal_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<SymbolId> Grammar::find_terminal(std::string_view text) const {
  auto it = terminal_index_.find(std::string(text));
  if (it == terminal_index_.end()) return std::nullopt;
  return it->second;
}

const Production& Grammar::production(ProductionId id) const {
  if (id >= productions_.size()) {
    throw GrammarError("unknown production id " + std::to_string(id));
  }
  return productions_[id];
}

std::vector<bool> Grammar::reachable_from(SymbolId from) const {
  std::vector<bool> seen(nonterminals_.size(), false);
  std::vector<SymbolId> stack{from};
  seen.at(from) = true;
  while (!stack.empty()) {
    SymbolId nt = stack.back();
    stack.pop_back();
    for (ProductionId id : by_lhs_[nt]) {
      for (SymbolId child : productions_[id].child_nonterminals) {
        if (!seen[child]) {
          seen[child] = true;
          stack.push_back(child);
        }
      }
    }
  }
  return seen;
}

Grammar Grammar::with_start(SymbolId start) const {
  return Grammar(nonterminals_, terminals_, start, productions_);
}

std::string Grammar::describe(ProductionId id) const {
  const Production& p = production(id);
  std::ostringstream out;
  out << nonterminals_[p.lhs] << " ->";
  for (const Symbol& s : p.rhs) {
    out << ' ' << (s.is_terminal() ? terminals_[s.id] : nonterminals_[s.id]);
  }
  return out.str();
}

// ---------------------------------------------------------------------------

GrammarBuilder::GrammarBuilder(std::string start) : start_(std::move(start)) {
  if (!is_nonterminal_name(start_)) {
    throw GrammarError("start symbol '" + start_ + "' must be a $-prefixed nonterminal");
  }
  intern_nonterminal(start_);
}

bool GrammarBuilder::is_nonterminal_name(std::string_view symbol) {
  return symbol.size() > 1 && symbol[0] == '$' && symbol[1] != '$';
}

std::string GrammarBuilder::unescape_terminal(std::string_view symbol) {
  if (symbol.size() >= 2 && symbol[0] == '$' && symbol[1] == '$') {
    return std::string(symbol.substr(1));
  }
  return std::string(symbol);
}

std::string GrammarBuilder::escape_terminal(std::string_view text) {
  if (!text.empty() && text[0] == '$') return "$" + std::string(text);
  return std::string(text);
}

SymbolId GrammarBuilder::intern_nonterminal(std::string_view name) {
  auto [it, inserted] =
      nt_index_.emplace(std::string(name), static_cast<SymbolId>(nonterminals_.size()));
  if (inserted) nonterminals_.emplace_back(name);
  return it->second;
}

SymbolId GrammarBuilder::intern_terminal(std::string_view text) {
  auto [it, inserted] =
      t_index_.emplace(std::string(text), static_cast<SymbolId>(terminals_.size()));
  if (inserted) terminals_.emplace_back(text);
  return it->second;
}

GrammarBuilder& GrammarBuilder::declare(std::string_view nonterminal) {
  if (!is_nonterminal_name(nonterminal)) {
    throw GrammarError("'" + std::string(nonterminal) + "' is not a nonterminal name");
  }
  intern_nonterminal(nonterminal);
  return *this;
}

GrammarBuilder& GrammarBuilder::add(std::string_view lhs, const std::vector<std::string>& rhs,
                                    std::optional<std::string> operator_terminal) {
  if (!is_nonterminal_name(lhs)) {
    throw GrammarError("production lhs '" + std::string(lhs) + "' is not a nonterminal");
  }
  Production p;
  p.id = static_cast<ProductionId>(productions_.size());
  p.lhs = intern_nonterminal(lhs);
  for (const std::string& sym : rhs) {
    if (sym.empty()) throw GrammarError("empty symbol in production rhs");
    if (is_nonterminal_name(sym)) {
      p.rhs.push_back(Symbol::nonterminal(intern_nonterminal(sym)));
    } else {
      p.rhs.push_back(Symbol::terminal(intern_terminal(unescape_terminal(sym))));
    }
  }
  if (operator_terminal) {
    auto it = t_index_.find(unescape_terminal(*operator_terminal));
    if (it == t_index_.end()) {
      throw GrammarError("operator terminal '" + *operator_terminal + "' not in rhs of " +
                         std::string(lhs) + " production");
    }
    p.operator_terminal = it->second;
  }
  productions_.push_back(std::move(p));
  return *this;
}

Grammar GrammarBuilder::build() const {
  return Grammar(nonterminals_, terminals_, nt_index_.at(start_), productions_);
}

}  // namespace surrosynth

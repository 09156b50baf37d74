#include "surrosynth/program.hpp"

#include <cctype>

namespace surrosynth {

Program::Program(ProductionId production, std::vector<Program> children) {
  std::size_t size = 1;
  for (const Program& c : children) size += c.size();
  node_ = std::make_shared<const Node>(Node{production, std::move(children), size});
}

std::vector<ProductionId> Program::trace() const {
  std::vector<ProductionId> out;
  out.reserve(size());
  std::vector<const Program*> stack{this};
  while (!stack.empty()) {
    const Program* p = stack.back();
    stack.pop_back();
    out.push_back(p->production());
    auto kids = p->children();
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(&*it);
  }
  return out;
}

bool operator==(const Program& a, const Program& b) {
  if (a.node_ == b.node_) return true;
  if (a.production() != b.production() || a.size() != b.size()) return false;
  auto ak = a.children();
  auto bk = b.children();
  for (std::size_t i = 0; i < ak.size(); ++i) {
    if (!(ak[i] == bk[i])) return false;
  }
  return true;
}

void validate_program(const Grammar& g, const Program& p, SymbolId from) {
  const Production& prod = g.production(p.production());
  if (prod.lhs != from) {
    throw GrammarError("production " + std::to_string(prod.id) + " does not derive from " +
                       g.nonterminal_name(from));
  }
  if (p.children().size() != prod.arity()) {
    throw GrammarError("production " + std::to_string(prod.id) + " expects " +
                       std::to_string(prod.arity()) + " children, got " +
                       std::to_string(p.children().size()));
  }
  for (std::size_t i = 0; i < prod.arity(); ++i) {
    validate_program(g, p.child(i), prod.child_nonterminals[i]);
  }
}

namespace {

void collect_yield(const Grammar& g, const Program& p, std::vector<SymbolId>& out,
                   std::vector<bool>* glue_left) {
  const Production& prod = g.production(p.production());
  std::size_t child = 0;
  for (std::size_t i = 0; i < prod.rhs.size(); ++i) {
    const Symbol& s = prod.rhs[i];
    if (s.is_terminal()) {
      if (glue_left) {
        // An opening bracket directly following an operator name inside the
        // same production is a call: `name(`.
        const std::string& text = g.terminal_text(s.id);
        bool glue = text == ")" || text == ",";
        if (text == "(" && i > 0 && prod.rhs[i - 1].is_terminal()) {
          const std::string& prev = g.terminal_text(prod.rhs[i - 1].id);
          glue = !prev.empty() && (std::isalnum(static_cast<unsigned char>(prev.back())) ||
                                   prev.back() == '_');
        }
        glue_left->push_back(glue);
      }
      out.push_back(s.id);
    } else {
      collect_yield(g, p.child(child++), out, glue_left);
    }
  }
}

}  // namespace

std::vector<SymbolId> terminal_yield(const Grammar& g, const Program& p) {
  std::vector<SymbolId> out;
  collect_yield(g, p, out, nullptr);
  return out;
}

std::string render(const Grammar& g, const Program& p) {
  std::vector<SymbolId> tokens;
  std::vector<bool> glue;
  collect_yield(g, p, tokens, &glue);
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& text = g.terminal_text(tokens[i]);
    if (i > 0 && !glue[i] && out.back() != '(') out.push_back(' ');
    out += text;
  }
  return out;
}

}  // namespace surrosynth

#pragma once

#include <algorithm>
#include <limits>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "surrosynth/grammar.hpp"
#include "surrosynth/program.hpp"

namespace surrosynth::testing {

// S -> a | f( S ) | g( S , S )
inline std::shared_ptr<const Grammar> tiny_grammar() {
  GrammarBuilder b("$S");
  b.add("$S", {"a"});
  b.add("$S", {"f(", "$S", ")"}, "f(");
  b.add("$S", {"g(", "$S", ",", "$S", ")"}, "g(");
  return std::make_shared<const Grammar>(b.build());
}

// Random derivation of `nt`; below `depth` 0 only minimum-height rules are used.
class ProgramSampler {
 public:
  explicit ProgramSampler(const Grammar& g) : g_(g), height_(g.num_nonterminals(), kInf) {
    for (bool changed = true; changed;) {
      changed = false;
      for (const Production& p : g.productions()) {
        const int h = rule_height(p);
        if (h < height_[p.lhs]) {
          height_[p.lhs] = h;
          changed = true;
        }
      }
    }
  }

  Program sample(SymbolId nt, std::mt19937_64& rng, int depth) const {
    std::vector<ProductionId> options;
    for (ProductionId id : g_.productions_of(nt)) {
      const int h = rule_height(g_.production(id));
      if (h == kInf) continue;
      if (depth > 0 || h == height_[nt]) options.push_back(id);
    }
    const ProductionId id =
        options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
    std::vector<Program> kids;
    for (SymbolId c : g_.production(id).child_nonterminals) kids.push_back(sample(c, rng, depth - 1));
    return Program(id, std::move(kids));
  }

 private:
  static constexpr int kInf = std::numeric_limits<int>::max() / 2;

  int rule_height(const Production& p) const {
    int h = 1;
    for (SymbolId c : p.child_nonterminals) h = std::max(h, height_[c] == kInf ? kInf : height_[c] + 1);
    return h;
  }

  const Grammar& g_;
  std::vector<int> height_;
};

}  // namespace surrosynth::testing

namespace surrosynth::testing {

// Tiny-grammar semantics: a signature is the rendered text.
struct RenderSemantics {
  using Value = std::string;
  void apply(ProductionId id, std::span<const Value* const> args, Value& out) const {
    switch (id) {
      case 0: out = "a"; break;
      case 1: out = "f(" + *args[0] + ")"; break;
      default: out = "g(" + *args[0] + "," + *args[1] + ")"; break;
    }
  }
  std::size_t hash(const Value& v) const { return std::hash<std::string>{}(v); }
};

// Tiny-grammar semantics with many collisions: a is the input, f(x) = 2x+1
// and g(x, y) = x + y, all modulo 5, evaluated on several inputs.
struct ModularSemantics {
  using Value = std::vector<int>;
  std::vector<int> inputs{0, 1, 2, 3};

  void apply(ProductionId id, std::span<const Value* const> args, Value& out) const {
    out.resize(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      switch (id) {
        case 0: out[i] = inputs[i] % 5; break;
        case 1: out[i] = (2 * (*args[0])[i] + 1) % 5; break;
        default: out[i] = ((*args[0])[i] + (*args[1])[i]) % 5; break;
      }
    }
  }
  std::size_t hash(const Value& v) const {
    std::size_t h = 0;
    for (int x : v) h = h * 31 + static_cast<std::size_t>(x);
    return h;
  }
};

}  // namespace surrosynth::testing

#include "surrosynth/grammar_io.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace surrosynth {

using nlohmann::json;

namespace {

std::string symbol_name(const Grammar& g, const Symbol& s) {
  return s.is_terminal() ? GrammarBuilder::escape_terminal(g.terminal_text(s.id))
                         : g.nonterminal_name(s.id);
}

json grammar_json(const Grammar& g) {
  json nts = json::array();
  for (SymbolId nt = 0; nt < g.num_nonterminals(); ++nt) nts.push_back(g.nonterminal_name(nt));
  json prods = json::array();
  for (const Production& p : g.productions()) {
    json rhs = json::array();
    for (const Symbol& s : p.rhs) rhs.push_back(symbol_name(g, s));
    json entry = {{"lhs", g.nonterminal_name(p.lhs)}, {"rhs", rhs}};
    if (p.operator_terminal) {
      entry["operator_terminal"] = GrammarBuilder::escape_terminal(g.terminal_text(*p.operator_terminal));
    }
    prods.push_back(std::move(entry));
  }
  return {{"start", g.nonterminal_name(g.start())}, {"nonterminals", nts}, {"productions", prods}};
}

Grammar grammar_from(const json& j) {
  try {
    GrammarBuilder b(j.at("start").get<std::string>());
    if (j.contains("nonterminals")) {
      for (const auto& nt : j.at("nonterminals")) b.declare(nt.get<std::string>());
    }
    for (const auto& p : j.at("productions")) {
      std::optional<std::string> op;
      if (p.contains("operator_terminal") && !p.at("operator_terminal").is_null()) {
        op = p.at("operator_terminal").get<std::string>();
      }
      b.add(p.at("lhs").get<std::string>(), p.at("rhs").get<std::vector<std::string>>(), op);
    }
    return b.build();
  } catch (const json::exception& e) {
    throw GrammarError(std::string("malformed grammar JSON: ") + e.what());
  }
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw GrammarError(std::string("invalid JSON: ") + e.what());
  }
}

ProductionId production_key(const std::string& key, std::size_t count) {
  std::size_t used = 0;
  unsigned long id = 0;
  try {
    id = std::stoul(key, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != key.size() || id >= count) {
    throw GrammarError("'" + key + "' is not a production id");
  }
  return static_cast<ProductionId>(id);
}

}  // namespace

std::string grammar_to_json(const Grammar& g) { return grammar_json(g).dump(2) + "\n"; }

Grammar grammar_from_json(std::string_view text) { return grammar_from(parse_json(text)); }

std::string weighted_grammar_to_json(const WeightedGrammar& wg) {
  json weights = json::object();
  for (ProductionId id = 0; id < wg.base_grammar().num_productions(); ++id) {
    if (auto w = wg.base_weight(id)) weights[std::to_string(id)] = *w;
  }
  json j = {{"grammar", grammar_json(wg.base_grammar())}, {"scale", wg.scale()}, {"weights", weights}};
  return j.dump(2) + "\n";
}

WeightedGrammar weighted_grammar_from_json(std::string_view text) {
  const json j = parse_json(text);
  auto g = std::make_shared<const Grammar>(grammar_from(j.at("grammar")));
  std::vector<std::optional<double>> weights(g->num_productions());
  try {
    for (const auto& [key, value] : j.at("weights").items()) {
      weights[production_key(key, weights.size())] = value.get<double>();
    }
    return WeightedGrammar(g, std::move(weights), j.value("scale", 1.0));
  } catch (const json::exception& e) {
    throw GrammarError(std::string("malformed weighted grammar: ") + e.what());
  }
}

std::string probabilistic_grammar_to_json(const ProbabilisticGrammar& pg) {
  json probs = json::object();
  for (ProductionId id = 0; id < pg.grammar().num_productions(); ++id) {
    probs[std::to_string(id)] = pg.probability(id);
  }
  json j = {{"grammar", grammar_json(pg.grammar())}, {"probabilities", probs}};
  return j.dump(2) + "\n";
}

ProbabilisticGrammar probabilistic_grammar_from_json(std::string_view text) {
  const json j = parse_json(text);
  auto g = std::make_shared<const Grammar>(grammar_from(j.at("grammar")));
  std::vector<double> probs(g->num_productions(), 0.0);
  try {
    for (const auto& [key, value] : j.at("probabilities").items()) {
      probs[production_key(key, probs.size())] = value.get<double>();
    }
  } catch (const json::exception& e) {
    throw GrammarError(std::string("malformed probabilistic grammar: ") + e.what());
  }
  return ProbabilisticGrammar(g, std::move(probs));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

Grammar load_grammar(const std::filesystem::path& path) {
  return grammar_from_json(read_text_file(path));
}

}  // namespace surrosynth

#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

#include "surrosynth/grammar.hpp"
#include "surrosynth/weighted_grammar.hpp"

namespace surrosynth {

// Grammar files are JSON:
//   {"start": "$S",
//    "nonterminals": ["$S", ...],                       (optional, fixes order)
//    "productions": [{"lhs": "$S", "rhs": ["f(", "$S", ")"], "operator_terminal": "f("}, ...]}
// Weighted and probabilistic grammars wrap the base grammar:
//   {"grammar": {...}, "scale": 100, "weights": {"0": 1.0, ...}}
//   {"grammar": {...}, "probabilities": {"0": 0.5, ...}}
// A production missing from "weights" is excluded from the search grammar.

std::string grammar_to_json(const Grammar& g);
Grammar grammar_from_json(std::string_view text);

std::string weighted_grammar_to_json(const WeightedGrammar& wg);
WeightedGrammar weighted_grammar_from_json(std::string_view text);

std::string probabilistic_grammar_to_json(const ProbabilisticGrammar& pg);
ProbabilisticGrammar probabilistic_grammar_from_json(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

Grammar load_grammar(const std::filesystem::path& path);

}  // namespace surrosynth

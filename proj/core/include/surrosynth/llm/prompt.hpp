#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "surrosynth/arc/grid.hpp"
#include "surrosynth/grammar.hpp"
#include "surrosynth/string_domain.hpp"

namespace surrosynth::llm {

enum class Domain { kArc, kString };

std::string to_string(Domain domain);
Domain domain_from_string(std::string_view name);

enum class ResponseFormat { kFreeText, kStructured };

/// One chat request, sampled `n` times.
struct PromptSpec {
  std::string system;
  std::string user;
  std::string model = "gpt-4o";
  double temperature = 1.0;
  int max_tokens = 4000;
  int n = 10;
  ResponseFormat format = ResponseFormat::kFreeText;
  Domain domain = Domain::kString;
};

class PromptTooLargeError : public std::runtime_error {
 public:
  PromptTooLargeError(std::size_t estimated_tokens, std::size_t budget);
  std::size_t estimated_tokens() const { return estimated_; }

 private:
  std::size_t estimated_;
};

struct PromptOptions {
  std::string model = "gpt-4o";
  int n = 10;
  /// Upper bound on the estimated size of system plus user text.
  std::size_t token_budget = 32000;
};

/// Sampling defaults: ARC uses temperature 1 and 4000 tokens with a JSON
/// response; strings use temperature 0.5 and free text.
PromptSpec default_spec(Domain domain, const PromptOptions& options = {});

/// Rough token count, about four characters per token.
std::size_t estimate_tokens(std::string_view text);

/// The grammar as `$A ::= alt | alt` lines, one nonterminal per line.
std::string grammar_listing(const Grammar& grammar);

struct ArcDemonstration {
  arc::ArcTask task;
  std::string description;
  std::string code;
};

/// JSON list of {"task": path relative to the file, "description", "code"}.
std::vector<ArcDemonstration> load_arc_demonstrations(const std::filesystem::path& path);

/// Grammar listing, then the demonstrations (omitted when empty), then the
/// test task's training pairs. The model is asked for
/// {"nl_description": ..., "code": ...}.
PromptSpec build_arc_prompt(const arc::ArcTask& task, const Grammar& grammar,
                            const std::vector<ArcDemonstration>& demonstrations,
                            const PromptOptions& options = {});

/// Grammar, natural-language hint, examples as `in -> out` lines, and an
/// open define-fun header for the model to complete. Demonstrations are
/// (task, solution body) pairs shown before the query in the same layout.
PromptSpec build_string_prompt(const strings::StringTask& task,
                               const std::vector<std::pair<strings::StringTask, std::string>>& demonstrations = {},
                               const PromptOptions& options = {});

}  // namespace surrosynth::llm

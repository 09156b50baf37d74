#include "surrosynth/llm/prompt.hpp"

#include <nlohmann/json.hpp>
#include <sstream>

#include "surrosynth/grammar_io.hpp"

namespace surrosynth::llm {
namespace {

const char* kArcSystem =
    "You solve visual reasoning puzzles by writing programs in a small rule language.\n"
    "Answer with a single JSON object and nothing else.\n";

const char* kArcIntro =
    "Each puzzle is a few pairs of character grids. Every character is a color letter "
    "(O black, B blue, R red, G green, Y yellow, X grey, F fuchsia, A orange, C cyan, W brown). "
    "A hidden program turns each input grid into its output grid by acting on the objects in it, "
    "where an object is a connected group of same-colored non-black cells.\n\n"
    "Write the program in the following language. The answer must derive from $Program.\n\n";

const char* kArcAnswerShape =
    "Reply with a JSON object of this form:\n"
    "{\n"
    "    \"nl_description\": \"what the program does\",\n"
    "    \"code\": \"the program\"\n"
    "}\n\n";

const char* kStringSystem =
    "You write short SyGuS solutions. Complete the function definition so that it uses only the "
    "given grammar and agrees with the examples. Output only the s-expression.\n";

std::string signature(const strings::StringTask& task) {
  std::string s = "(define-fun " + task.function_name + " (";
  for (std::size_t i = 0; i < task.args.size(); ++i) {
    if (i) s += " ";
    s += "(" + task.args[i].name + " " + std::string(strings::sort_name(task.args[i].sort)) + ")";
  }
  return s + ") " + std::string(strings::sort_name(task.return_sort));
}

void write_string_task(std::ostringstream& out, const strings::StringTask& task) {
  out << "[GRAMMAR]\n" << strings::synth_fun_text(task) << "\n\n";
  if (!task.hint.empty()) out << "[NATURAL LANGUAGE SPECIFICATION]\n" << task.hint << "\n\n";
  out << "[EXAMPLES]\n";
  for (const auto& ex : task.examples) {
    for (std::size_t i = 0; i < ex.inputs.size(); ++i) out << (i ? ", " : "") << strings::display(ex.inputs[i]);
    out << " -> " << strings::display(ex.output) << "\n";
  }
  out << "\n[SOLUTION]\n" << signature(task);
}

void write_pairs(std::ostringstream& out, const std::vector<arc::ArcPair>& pairs) {
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    out << "PAIR " << k + 1 << "\nINPUT GRID:\n" << arc::format_grid(pairs[k].input);
    out << "OUTPUT GRID:\n" << arc::format_grid(pairs[k].output) << "\n";
  }
}

void check_budget(const PromptSpec& spec, std::size_t budget) {
  const std::size_t tokens = estimate_tokens(spec.system) + estimate_tokens(spec.user);
  if (tokens > budget) throw PromptTooLargeError(tokens, budget);
}

}  // namespace

std::string to_string(Domain domain) { return domain == Domain::kArc ? "arc" : "string"; }

Domain domain_from_string(std::string_view name) {
  if (name == "arc") return Domain::kArc;
  if (name == "string") return Domain::kString;
  throw std::invalid_argument("unknown domain: " + std::string(name));
}

PromptTooLargeError::PromptTooLargeError(std::size_t estimated_tokens, std::size_t budget)
    : std::runtime_error("prompt too large: about " + std::to_string(estimated_tokens) + " tokens, budget " +
                         std::to_string(budget)),
      estimated_(estimated_tokens) {}

PromptSpec default_spec(Domain domain, const PromptOptions& options) {
  PromptSpec spec;
  spec.domain = domain;
  spec.model = options.model;
  spec.n = options.n;
  if (spec.n < 1) throw std::invalid_argument("sample count must be at least 1");
  if (domain == Domain::kArc) {
    spec.temperature = 1.0;
    spec.max_tokens = 4000;
    spec.format = ResponseFormat::kStructured;
  } else {
    spec.temperature = 0.5;
    spec.max_tokens = 1000;
    spec.format = ResponseFormat::kFreeText;
  }
  return spec;
}

std::size_t estimate_tokens(std::string_view text) { return (text.size() + 3) / 4; }

std::string grammar_listing(const Grammar& grammar) {
  std::ostringstream out;
  for (SymbolId nt = 0; nt < grammar.num_nonterminals(); ++nt) {
    if (grammar.productions_of(nt).empty()) continue;
    out << grammar.nonterminal_name(nt) << " ::=";
    bool first = true;
    for (ProductionId id : grammar.productions_of(nt)) {
      out << (first ? " " : " | ");
      first = false;
      const Production& p = grammar.production(id);
      for (std::size_t i = 0; i < p.rhs.size(); ++i) {
        const Symbol& s = p.rhs[i];
        out << (i ? " " : "") << (s.is_terminal() ? grammar.terminal_text(s.id) : grammar.nonterminal_name(s.id));
      }
    }
    out << "\n";
  }
  return out.str();
}

std::vector<ArcDemonstration> load_arc_demonstrations(const std::filesystem::path& path) {
  const auto j = nlohmann::json::parse(read_text_file(path));
  std::vector<ArcDemonstration> out;
  for (const auto& d : j) {
    out.push_back({arc::load_arc_task(path.parent_path() / d.at("task").get<std::string>()),
                   d.at("description").get<std::string>(), d.at("code").get<std::string>()});
  }
  return out;
}

PromptSpec build_arc_prompt(const arc::ArcTask& task, const Grammar& grammar,
                            const std::vector<ArcDemonstration>& demonstrations, const PromptOptions& options) {
  PromptSpec spec = default_spec(Domain::kArc, options);
  spec.system = kArcSystem;
  std::ostringstream out;
  out << kArcIntro << "```\n" << grammar_listing(grammar) << "```\n\n";
  if (!demonstrations.empty()) {
    out << "Solved examples follow.\n\n";
    for (std::size_t k = 0; k < demonstrations.size(); ++k) {
      const auto& d = demonstrations[k];
      out << "## DEMONSTRATION TASK " << k + 1 << "\n\n### INPUT\n";
      write_pairs(out, d.task.train);
      const nlohmann::json answer = {{"nl_description", d.description}, {"code", d.code}};
      out << "### EXPECTED OUTPUT\n" << answer.dump(4) << "\n\n";
    }
  }
  out << kArcAnswerShape << "## TEST TASK\n\n";
  write_pairs(out, task.train);
  spec.user = out.str();
  check_budget(spec, options.token_budget);
  return spec;
}

PromptSpec build_string_prompt(const strings::StringTask& task,
                               const std::vector<std::pair<strings::StringTask, std::string>>& demonstrations,
                               const PromptOptions& options) {
  PromptSpec spec = default_spec(Domain::kString, options);
  spec.system = kStringSystem;
  std::ostringstream out;
  for (const auto& [demo, body] : demonstrations) {
    write_string_task(out, demo);
    out << "\n  " << body << ")\n\n";
  }
  write_string_task(out, task);
  out << "\n";
  spec.user = out.str();
  check_budget(spec, options.token_budget);
  return spec;
}

}  // namespace surrosynth::llm

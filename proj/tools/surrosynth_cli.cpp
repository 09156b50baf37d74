#include <CLI11.hpp>
#include <iostream>

#include <nlohmann/json.hpp>

#include "surrosynth/arc/dsl.hpp"
#include "surrosynth/grammar_io.hpp"
#include "surrosynth/harness.hpp"

namespace fs = std::filesystem;
using namespace surrosynth;

namespace {

struct Options {
  std::string domain = "string";
  std::vector<std::string> tasks;
  std::string mode = "uniform";
  int samples = 10;
  double smoothing = 1.0;
  double scale = 100.0;
  double timeout = 600.0;
  std::string cache = "cache";
  std::string out = "out";
  std::string model = "gpt-4o";
  std::string endpoint;
  std::string demos;
  bool offline = false;
  std::size_t workers = 1;
  std::string label;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--domain", o.domain, "arc or string")->check(CLI::IsMember({"arc", "string"}));
  cmd->add_option("--mode", o.mode, "uniform, strict, non-strict or binary")
      ->check(CLI::IsMember({"uniform", "strict", "non-strict", "binary"}));
  cmd->add_option("--samples", o.samples, "completions per task")->check(CLI::PositiveNumber);
  cmd->add_option("--smoothing", o.smoothing, "additive smoothing of the fit")->check(CLI::NonNegativeNumber);
  cmd->add_option("--scale", o.scale, "weight scale before rounding")->check(CLI::PositiveNumber);
  cmd->add_option("--timeout", o.timeout, "seconds per task")->check(CLI::PositiveNumber);
  cmd->add_option("--cache", o.cache, "completion cache directory");
  cmd->add_option("--model", o.model, "model id, also the cache key");
  cmd->add_option("--endpoint", o.endpoint, "endpoint config (JSON)")->check(CLI::ExistingFile);
  cmd->add_option("--demos", o.demos, "ARC demonstration list (JSON)")->check(CLI::ExistingFile);
  cmd->add_flag("--offline", o.offline, "use the cache only");
}

harness::RunConfig to_config(const Options& o) {
  harness::RunConfig c;
  c.domain = llm::domain_from_string(o.domain);
  for (const auto& t : o.tasks) c.tasks.emplace_back(t);
  c.mode = harness::mode_from_string(o.mode);
  c.samples = o.samples;
  c.smoothing = o.smoothing;
  c.scale = o.scale;
  c.timeout_s = o.timeout;
  c.cache_dir = o.cache;
  c.out_dir = o.out;
  c.model = o.model;
  if (!o.endpoint.empty()) c.endpoint = llm::load_endpoint_config(o.endpoint);
  if (o.offline) c.endpoint.offline = true;
  if (!o.demos.empty()) c.demonstrations = fs::path(o.demos);
  c.workers = o.workers;
  c.label = o.label;
  harness::validate(c);
  return c;
}

void print_task(const harness::TaskReport& t) {
  std::cout << t.task << ": " << t.status;
  if (!t.program.empty()) std::cout << "  " << t.program;
  if (t.n) std::cout << "  [" << t.n_parsed << "/" << t.n << " parsed]";
  std::cout << "  " << t.enumerated << " candidates, " << t.elapsed_ms / 1000.0 << " s";
  if (!t.error.empty()) std::cout << "  (" << t.error << ")";
  std::cout << "\n";
}

int cmd_run(const Options& o) {
  const auto config = to_config(o);
  const auto report = harness::run(config);
  for (const auto& t : report.tasks) print_task(t);
  harness::write_outputs(report, config.out_dir);
  std::cout << report.solved() << "/" << report.tasks.size() << " solved; reports in " << config.out_dir << "\n";
  return 0;
}

int cmd_solve(const Options& o) {
  const auto config = to_config(o);
  const auto r = harness::run_task(config, config.tasks.at(0));
  print_task(r);
  return 0;
}

int cmd_learn(const Options& o) {
  const auto config = to_config(o);
  const auto g = harness::learn_guidance(config, config.tasks.at(0));
  std::cerr << g.n_parsed << "/" << g.n << " completions parsed\n";
  if (!g.sampling_error.empty()) std::cerr << g.sampling_error << "\n";
  const std::string text = weighted_grammar_to_json(g.grammar);
  if (o.out == "-") {
    std::cout << text << "\n";
  } else {
    write_text_file(o.out, text);
  }
  return 0;
}

int cmd_prompt(const Options& o) {
  const auto config = to_config(o);
  const fs::path path = config.tasks.at(0);
  llm::PromptOptions options;
  options.model = config.model;
  options.n = config.samples;
  llm::PromptSpec spec;
  if (config.domain == llm::Domain::kArc) {
    const auto task = arc::load_arc_task(path);
    std::vector<llm::ArcDemonstration> demos;
    if (config.demonstrations) {
      for (auto& d : llm::load_arc_demonstrations(*config.demonstrations)) {
        if (d.task.name != task.name) demos.push_back(std::move(d));
      }
    }
    spec = llm::build_arc_prompt(task, *arc::build_arc_grammar(task), demos, options);
  } else {
    spec = llm::build_string_prompt(strings::load_string_task(path), {}, options);
  }
  std::cout << "=== system ===\n" << spec.system << "\n=== user ===\n" << spec.user;
  return 0;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& out) {
  std::vector<std::pair<std::string, std::vector<harness::TaskReport>>> series;
  for (const auto& dir : inputs) {
    auto tasks = harness::read_timings(read_text_file(fs::path(dir) / "timings.jsonl"));
    const std::string label = tasks.empty() || tasks[0].label.empty() ? fs::path(dir).filename().string() : tasks[0].label;
    series.emplace_back(label, std::move(tasks));
  }
  const std::string csv = harness::solved_over_time_csv(series);
  if (out == "-") {
    std::cout << csv;
  } else {
    write_text_file(out, csv);
  }
  return 0;
}

int cmd_import(const std::string& file, const std::string& cache_dir, const std::string& model) {
  const auto j = nlohmann::json::parse(read_text_file(file));
  const auto domain = llm::domain_from_string(j.value("domain", std::string("string")));
  const std::string task = j.at("task").get<std::string>();
  llm::CompletionCache cache(cache_dir);
  const auto records =
      harness::records_from_texts(task, model, domain, j.at("completions").get<std::vector<std::string>>());
  for (const auto& r : records) cache.append(r);
  std::cout << records.size() << " completions for " << task << " in " << cache.file_for(task, model) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grammar-guided program synthesis driver"};
  app.require_subcommand(1);
  Options o;

  auto* run = app.add_subcommand("run", "run a task suite and write reports");
  add_common(run, o);
  run->add_option("--tasks", o.tasks, "task files or directories")->required();
  run->add_option("--out", o.out, "report directory");
  run->add_option("--workers", o.workers, "parallel tasks")->check(CLI::PositiveNumber);
  run->add_option("--label", o.label, "series name in reports");

  auto* solve = app.add_subcommand("solve", "solve one task");
  add_common(solve, o);
  solve->add_option("task", o.tasks, "task file")->required()->expected(1);

  auto* learn = app.add_subcommand("learn", "learn and write the weighted grammar of one task");
  add_common(learn, o);
  learn->add_option("task", o.tasks, "task file")->required()->expected(1);
  learn->add_option("--out", o.out, "output file, - for stdout")->default_val("-");

  auto* prompt = app.add_subcommand("prompt", "print the prompt for one task");
  add_common(prompt, o);
  prompt->add_option("task", o.tasks, "task file")->required()->expected(1);

  std::vector<std::string> report_inputs;
  std::string report_out = "-";
  auto* report = app.add_subcommand("report", "merge run directories into one solved-over-time table");
  report->add_option("runs", report_inputs, "run output directories")->required();
  report->add_option("--out", report_out, "CSV file, - for stdout");

  std::string import_file, import_cache = "cache", import_model = "gpt-4o";
  auto* import = app.add_subcommand("import", "add plain completion texts to the cache");
  import->add_option("completions", import_file, "JSON {task, domain, completions}")->required()->check(CLI::ExistingFile);
  import->add_option("--cache", import_cache, "cache directory");
  import->add_option("--model", import_model, "model id to file them under");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(o);
    if (*solve) return cmd_solve(o);
    if (*learn) return cmd_learn(o);
    if (*prompt) return cmd_prompt(o);
    if (*report) return cmd_report(report_inputs, report_out);
    if (*import) return cmd_import(import_file, import_cache, import_model);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

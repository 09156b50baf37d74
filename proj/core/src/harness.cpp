#include "surrosynth/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <map>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "surrosynth/arc/synth.hpp"
#include "surrosynth/grammar_io.hpp"
#include "surrosynth/pcfg_learn.hpp"
#include "surrosynth/search.hpp"
#include "surrosynth/string_domain.hpp"

namespace surrosynth::harness {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t).count();
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

LearnMode learn_mode(Mode mode) {
  switch (mode) {
    case Mode::kStrict: return LearnMode::kStrict;
    case Mode::kBinary: return LearnMode::kBinary;
    default: return LearnMode::kNonStrict;
  }
}

std::string label_of(const RunConfig& config) {
  return config.label.empty() ? to_string(config.mode) : config.label;
}

// The loaded task in whichever domain, with what prompting needs.
struct LoadedTask {
  std::string id;
  std::shared_ptr<const Grammar> grammar;
  std::optional<arc::ArcTask> arc;
  std::optional<strings::StringTask> str;
};

LoadedTask load_task(const RunConfig& config, const fs::path& path) {
  LoadedTask t;
  t.id = path.stem().string();
  if (config.domain == llm::Domain::kArc) {
    t.arc = arc::load_arc_task(path);
    t.grammar = arc::build_arc_grammar(*t.arc);
  } else {
    t.str = strings::load_string_task(path);
    t.grammar = t.str->grammar;
  }
  return t;
}

llm::PromptSpec build_spec(const RunConfig& config, const LoadedTask& t) {
  llm::PromptOptions options;
  options.model = config.model;
  options.n = config.samples;
  if (t.arc) {
    std::vector<llm::ArcDemonstration> demos;
    if (config.demonstrations) {
      for (auto& d : llm::load_arc_demonstrations(*config.demonstrations)) {
        if (d.task.name != t.id) demos.push_back(std::move(d));
      }
    }
    return llm::build_arc_prompt(*t.arc, *t.grammar, demos, options);
  }
  return llm::build_string_prompt(*t.str, {}, options);
}

Guidance guidance_for(const RunConfig& config, const LoadedTask& t) {
  if (config.mode == Mode::kUniform) return Guidance(WeightedGrammar::uniform(t.grammar));
  const auto t0 = Clock::now();
  llm::CompletionCache cache(config.cache_dir);
  std::vector<llm::CompletionRecord> records;
  std::string sampling_error;
  try {
    records = llm::sample(t.id, build_spec(config, t), config.endpoint, cache);
  } catch (const llm::SamplingError& e) {
    records = e.partial();
    sampling_error = e.what();
  }
  const double sample_ms = ms_since(t0);
  const auto t1 = Clock::now();
  const LearnMode mode = learn_mode(config.mode);
  const CompletionSet set = llm::to_completion_set(t.id, records, *t.grammar, mode);
  Guidance g(learn(t.grammar, set, mode, config.smoothing, config.scale));
  g.n = set.n();
  g.n_parsed = set.n_parsed();
  g.validity = set.validity();
  g.sampling_error = sampling_error;
  g.sample_ms = sample_ms;
  g.learn_ms = ms_since(t1);
  return g;
}

void search_string(const LoadedTask& t, const WeightedGrammar& wg,
                   Clock::time_point deadline, TaskReport& r) {
  const strings::StringSemantics sem(*t.str);
  SearchBudget budget;
  budget.deadline = deadline;
  const auto outcome = bottom_up_search(
      wg, sem, wg.grammar().start(), [&](const strings::StringSemantics::Value& v) { return v == sem.goal(); },
      budget);
  r.search_ms = outcome.stats.elapsed_ms;
  r.level_reached = outcome.stats.level_reached;
  r.enumerated = outcome.stats.enumerated;
  r.banked = outcome.stats.banked;
  if (outcome.solution) {
    r.solved = true;
    r.status = "solved";
    r.program = render(*t.grammar, *outcome.solution);
  } else {
    r.status = outcome.stop == StopReason::kDeadline ? "timeout" : "exhausted";
  }
}

void search_arc(const LoadedTask& t, const WeightedGrammar& wg,
                Clock::time_point deadline, TaskReport& r) {
  arc::ArcSynthOptions options;
  options.timeout_s = std::max(0.0, std::chrono::duration<double>(deadline - Clock::now()).count());
  const auto result = arc::synth_arc(*t.arc, wg, wg, options);
  r.search_ms = result.elapsed_ms;
  r.enumerated = result.enumerated();
  if (result.program) {
    r.program = result.text;
    if (!t.arc->test.empty()) r.test_correct = result.test_correct;
    r.solved = t.arc->test.empty() || result.test_correct;
    r.status = r.solved ? "solved" : "unsolved";
  } else {
    r.status = Clock::now() >= deadline ? "timeout" : "exhausted";
  }
}

}  // namespace

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::kUniform: return "uniform";
    case Mode::kStrict: return "strict";
    case Mode::kNonStrict: return "non-strict";
    case Mode::kBinary: return "binary";
  }
  return "";
}

Mode mode_from_string(std::string_view name) {
  if (name == "uniform") return Mode::kUniform;
  if (name == "strict") return Mode::kStrict;
  if (name == "non-strict") return Mode::kNonStrict;
  if (name == "binary") return Mode::kBinary;
  throw std::invalid_argument("unknown mode: " + std::string(name));
}

void validate(const RunConfig& config) {
  if (!(config.timeout_s > 0)) throw std::invalid_argument("timeout must be positive");
  if (config.samples < 1) throw std::invalid_argument("sample count must be at least 1");
  if (config.workers < 1) throw std::invalid_argument("worker count must be at least 1");
  if (!(config.smoothing >= 0)) throw std::invalid_argument("smoothing must be non-negative");
  if (!(config.scale > 0)) throw std::invalid_argument("scale must be positive");
}

std::size_t RunReport::solved() const {
  return static_cast<std::size_t>(std::count_if(tasks.begin(), tasks.end(), [](const auto& t) { return t.solved; }));
}

std::vector<fs::path> collect_tasks(llm::Domain domain, const std::vector<fs::path>& paths) {
  auto wanted = [&](const fs::path& p) {
    const auto ext = p.extension();
    return domain == llm::Domain::kArc ? ext == ".txt" : (ext == ".sl" || ext == ".json");
  };
  std::vector<fs::path> out;
  for (const auto& p : paths) {
    if (fs::is_directory(p)) {
      for (const auto& e : fs::directory_iterator(p)) {
        if (e.is_regular_file() && wanted(e.path())) out.push_back(e.path());
      }
    } else {
      out.push_back(p);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

Guidance learn_guidance(const RunConfig& config, const fs::path& task_path) {
  validate(config);
  return guidance_for(config, load_task(config, task_path));
}

TaskReport run_task(const RunConfig& config, const fs::path& task_path) {
  TaskReport r;
  r.task = task_path.stem().string();
  r.label = label_of(config);
  const auto start = Clock::now();
  const auto deadline =
      start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(config.timeout_s));
  try {
    const LoadedTask t = load_task(config, task_path);
    r.task = t.id;
    const Guidance g = guidance_for(config, t);
    r.n = g.n;
    r.n_parsed = g.n_parsed;
    r.validity = g.validity;
    r.error = g.sampling_error;
    r.sample_ms = g.sample_ms;
    r.learn_ms = g.learn_ms;
    // Elapsed time ends when the search stops; freeing its bank afterwards
    // is not charged to the task.
    const double before_search = ms_since(start);
    if (t.arc) {
      search_arc(t, g.grammar, deadline, r);
    } else {
      search_string(t, g.grammar, deadline, r);
    }
    r.elapsed_ms = before_search + r.search_ms;
  } catch (const std::exception& e) {
    r.status = "error";
    r.error = e.what();
    r.elapsed_ms = ms_since(start);
  }
  return r;
}

RunReport run(const RunConfig& config) {
  validate(config);
  const auto paths = collect_tasks(config.domain, config.tasks);
  RunReport report;
  report.label = label_of(config);
  report.tasks.resize(paths.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < paths.size(); i = next++) report.tasks[i] = run_task(config, paths[i]);
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < std::min(config.workers, paths.size()); ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return report;
}

std::string report_jsonl(const RunReport& report) {
  std::string out;
  for (const auto& t : report.tasks) {
    json j = {{"task", t.task},
              {"label", t.label},
              {"status", t.status},
              {"solved", t.solved},
              {"program", t.program},
              {"n", t.n},
              {"n_parsed", t.n_parsed},
              {"validity", t.validity},
              {"level_reached", t.level_reached},
              {"enumerated", t.enumerated},
              {"banked", t.banked},
              {"error", t.error}};
    if (t.test_correct) j["test_correct"] = *t.test_correct;
    out += j.dump() + "\n";
  }
  return out;
}

std::string timings_jsonl(const RunReport& report) {
  std::string out;
  for (const auto& t : report.tasks) {
    out += json{{"task", t.task},           {"label", t.label},         {"solved", t.solved},
                {"sample_ms", t.sample_ms}, {"learn_ms", t.learn_ms},   {"search_ms", t.search_ms},
                {"elapsed_ms", t.elapsed_ms}}
               .dump() +
           "\n";
  }
  return out;
}

std::vector<TaskReport> read_timings(std::string_view jsonl) {
  std::vector<TaskReport> out;
  std::istringstream in{std::string(jsonl)};
  for (std::string line; std::getline(in, line);) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json j = json::parse(line);
    TaskReport t;
    t.task = j.at("task").get<std::string>();
    t.label = j.value("label", std::string());
    t.solved = j.at("solved").get<bool>();
    t.sample_ms = j.value("sample_ms", 0.0);
    t.learn_ms = j.value("learn_ms", 0.0);
    t.search_ms = j.value("search_ms", 0.0);
    t.elapsed_ms = j.at("elapsed_ms").get<double>();
    out.push_back(std::move(t));
  }
  return out;
}

std::string tasks_csv(const RunReport& report) {
  std::ostringstream out;
  out << "task,solved,time_s\n";
  for (const auto& t : report.tasks) out << t.task << "," << (t.solved ? 1 : 0) << "," << t.elapsed_ms / 1000.0 << "\n";
  return out.str();
}

std::string solved_over_time_csv(const std::vector<std::pair<std::string, std::vector<TaskReport>>>& series) {
  std::ostringstream out;
  out << "series,time_s,solved\n";
  auto ordered = series;
  std::stable_sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [name, tasks] : ordered) {
    std::vector<std::pair<double, std::string>> times;
    for (const auto& t : tasks) {
      if (t.solved) times.emplace_back(t.elapsed_ms / 1000.0, t.task);
    }
    std::sort(times.begin(), times.end());
    for (std::size_t k = 0; k < times.size(); ++k) out << name << "," << times[k].first << "," << k + 1 << "\n";
  }
  return out.str();
}

void write_outputs(const RunReport& report, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  write_text_file(out_dir / "report.jsonl", report_jsonl(report));
  write_text_file(out_dir / "timings.jsonl", timings_jsonl(report));
  write_text_file(out_dir / "tasks.csv", tasks_csv(report));
  write_text_file(out_dir / "solved_over_time.csv", solved_over_time_csv({{report.label, report.tasks}}));
}

std::vector<llm::CompletionRecord> records_from_texts(const std::string& task_id, const std::string& model,
                                                      llm::Domain domain, const std::vector<std::string>& texts) {
  std::vector<llm::CompletionRecord> out;
  const std::string now = utc_now();
  for (std::size_t i = 0; i < texts.size(); ++i) {
    out.push_back({task_id, static_cast<int>(i), texts[i],
                   llm::extract_code(texts[i], llm::ResponseFormat::kFreeText, domain), now, model});
  }
  return out;
}

}  // namespace surrosynth::harness

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "surrosynth/llm/sampling.hpp"
#include "surrosynth/weighted_grammar.hpp"

namespace surrosynth::harness {

namespace fs = std::filesystem;

enum class Mode { kUniform, kStrict, kNonStrict, kBinary };

std::string to_string(Mode mode);
Mode mode_from_string(std::string_view name);

struct RunConfig {
  llm::Domain domain = llm::Domain::kString;
  std::vector<fs::path> tasks;  // task files or directories of them
  Mode mode = Mode::kUniform;
  int samples = 10;
  double smoothing = 1.0;
  double scale = 100.0;
  double timeout_s = 600.0;  // per task, sampling and learning included
  fs::path cache_dir = "cache";
  fs::path out_dir = "out";
  std::string model = "gpt-4o";
  llm::EndpointConfig endpoint;
  std::optional<fs::path> demonstrations;  // ARC in-context examples
  std::size_t workers = 1;
  std::string label;  // series name in plots; the mode name when empty
};

/// Throws std::invalid_argument for a non-positive timeout, sample count
/// or worker count.
void validate(const RunConfig& config);

struct TaskReport {
  std::string task;
  std::string label;
  bool solved = false;
  std::string status;  // solved, unsolved, timeout, exhausted, error
  std::string program;
  std::optional<bool> test_correct;  // ARC: test outputs reproduced
  std::size_t n = 0;
  std::size_t n_parsed = 0;
  double validity = 0.0;
  std::int64_t level_reached = 0;
  std::uint64_t enumerated = 0;
  std::uint64_t banked = 0;
  std::string error;
  double sample_ms = 0.0;
  double learn_ms = 0.0;
  double search_ms = 0.0;
  double elapsed_ms = 0.0;
};

struct RunReport {
  std::string label;
  std::vector<TaskReport> tasks;

  std::size_t solved() const;
};

/// Task files named by `paths`, directories expanded (ARC: .txt, strings:
/// .sl and .json), sorted by path.
std::vector<fs::path> collect_tasks(llm::Domain domain, const std::vector<fs::path>& paths);

/// Samples (through the cache) and learns the task's weighted grammar.
/// Uniform mode skips sampling.
struct Guidance {
  explicit Guidance(WeightedGrammar wg) : grammar(std::move(wg)) {}

  WeightedGrammar grammar;
  std::size_t n = 0;
  std::size_t n_parsed = 0;
  double validity = 0.0;
  std::string sampling_error;
  double sample_ms = 0.0;
  double learn_ms = 0.0;
};
Guidance learn_guidance(const RunConfig& config, const fs::path& task_path);

/// One task end to end; never throws, failures land in the report.
TaskReport run_task(const RunConfig& config, const fs::path& task_path);

/// All tasks on a pool of config.workers threads; reports in task order.
RunReport run(const RunConfig& config);

/// One JSON object per task without timing fields, so that reruns against
/// the same cache give identical bytes.
std::string report_jsonl(const RunReport& report);
/// Timing fields per task, keyed by task and label.
std::string timings_jsonl(const RunReport& report);
/// Reads timings_jsonl output back (only the fields it writes).
std::vector<TaskReport> read_timings(std::string_view jsonl);

/// `task,solved,time_s`, one row per task.
std::string tasks_csv(const RunReport& report);
/// `series,time_s,solved`: the cumulative solved count at each solve time,
/// per series, ordered by series then time.
std::string solved_over_time_csv(const std::vector<std::pair<std::string, std::vector<TaskReport>>>& series);

/// Writes report.jsonl, timings.jsonl, tasks.csv and solved_over_time.csv.
void write_outputs(const RunReport& report, const fs::path& out_dir);

/// Cache records for completions given as plain texts (fixture import).
std::vector<llm::CompletionRecord> records_from_texts(const std::string& task_id, const std::string& model,
                                                      llm::Domain domain, const std::vector<std::string>& texts);

}  // namespace surrosynth::harness

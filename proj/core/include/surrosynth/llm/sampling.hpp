#pragma once

#include <cstddef>
#include <filesystem>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "surrosynth/llm/prompt.hpp"
#include "surrosynth/pcfg_learn.hpp"

namespace surrosynth::llm {

struct CompletionRecord {
  std::string task_id;
  int index = 0;
  std::string raw;
  std::string code;  // what gets parsed; empty when nothing could be extracted
  std::string timestamp;
  std::string model;

  friend bool operator==(const CompletionRecord&, const CompletionRecord&) = default;
};

std::string record_to_json(const CompletionRecord& record);
CompletionRecord record_from_json(std::string_view line);

/// Longest ``` fenced block of `text`, or all of it (trimmed) when there is none.
std::string strip_fences(std::string_view text);

/// Structured responses yield the `code` field of the JSON object in the
/// text, or "" if there is none. Free text yields strip_fences(); for the
/// string domain that is further reduced to the function body.
std::string extract_code(std::string_view raw, ResponseFormat format, Domain domain);

/// Append-only JSONL store, one file per (task, model). Appends are
/// serialized; records with an index already on file are not written again.
class CompletionCache {
 public:
  explicit CompletionCache(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path file_for(const std::string& task_id, const std::string& model) const;
  /// Records by increasing index; the first record of an index wins.
  std::vector<CompletionRecord> load(const std::string& task_id, const std::string& model) const;
  void append(const CompletionRecord& record);

 private:
  std::filesystem::path dir_;
  std::mutex mutex_;
};

struct EndpointConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string token_env = "OPENAI_API_KEY";
  int batch_size = 10;
  int max_concurrency = 1;
  int max_retries = 5;
  double initial_backoff_s = 1.0;
  double max_backoff_s = 60.0;
  double request_timeout_s = 120.0;
  bool offline = false;  // never touch the network; a cache miss is an error
};

/// JSON object with any of the field names above.
EndpointConfig endpoint_config_from_json(std::string_view text);
EndpointConfig load_endpoint_config(const std::filesystem::path& path);

class SamplingError : public std::runtime_error {
 public:
  SamplingError(const std::string& message, std::vector<CompletionRecord> partial)
      : std::runtime_error(message), partial_(std::move(partial)) {}
  const std::vector<CompletionRecord>& partial() const { return partial_; }

 private:
  std::vector<CompletionRecord> partial_;
};

struct SampleStats {
  std::size_t from_cache = 0;
  std::size_t requests = 0;  // HTTP requests issued, retries included
  std::size_t retries = 0;
};

/// Returns records 0..spec.n-1 for the task. Cached records are reused;
/// the rest are requested in batches of endpoint.batch_size, each retried
/// with exponential backoff (honoring Retry-After on 429). New records are
/// cached before returning. Throws SamplingError with everything obtained
/// so far if some batch cannot be completed.
std::vector<CompletionRecord> sample(const std::string& task_id, const PromptSpec& spec,
                                     const EndpointConfig& endpoint, CompletionCache& cache,
                                     SampleStats* stats = nullptr);

/// Parses each record's code from the grammar's start symbol.
CompletionSet to_completion_set(const std::string& task_id, const std::vector<CompletionRecord>& records,
                                const Grammar& grammar, LearnMode mode);

}  // namespace surrosynth::llm

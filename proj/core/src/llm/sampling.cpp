#include "surrosynth/llm/sampling.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <map>
#include <set>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "surrosynth/grammar_io.hpp"

namespace surrosynth::llm {
namespace {

using nlohmann::json;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string safe_name(std::string_view s) {
  std::string out;
  for (char c : s) out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' ? c : '_');
  return out;
}

struct Endpoint {
  std::string host;  // scheme://host[:port]
  std::string path;  // request path of the chat-completions call
};

Endpoint split_url(const std::string& base) {
  const auto scheme = base.find("://");
  const auto slash = base.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  Endpoint e;
  e.host = base.substr(0, slash);
  std::string prefix = slash == std::string::npos ? "" : base.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  e.path = prefix + "/chat/completions";
  return e;
}

json request_body(const PromptSpec& spec, int n) {
  json body = {{"model", spec.model},
               {"messages",
                json::array({{{"role", "system"}, {"content", spec.system}},
                             {{"role", "user"}, {"content", spec.user}}})},
               {"temperature", spec.temperature},
               {"max_tokens", spec.max_tokens},
               {"n", n}};
  if (spec.format == ResponseFormat::kStructured) body["response_format"] = {{"type", "json_object"}};
  return body;
}

// Outcome of one HTTP attempt: the texts received, or why none were.
struct Attempt {
  std::vector<std::string> texts;
  bool retryable = false;
  double retry_after_s = -1;
  std::string error;
};

Attempt request_once(const Endpoint& ep, const EndpointConfig& cfg, const std::string& token, const json& body) {
  Attempt a;
  httplib::Client client(ep.host);
  const auto secs = std::chrono::duration<double>(cfg.request_timeout_s);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(secs));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(secs));
  httplib::Headers headers;
  if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);
  auto res = client.Post(ep.path, headers, body.dump(), "application/json");
  if (!res) {
    a.retryable = true;
    a.error = "request failed: " + httplib::to_string(res.error());
    return a;
  }
  if (res->status != 200) {
    a.error = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200);
    a.retryable = res->status == 429 || res->status >= 500;
    if (res->has_header("Retry-After")) {
      try {
        a.retry_after_s = std::stod(res->get_header_value("Retry-After"));
      } catch (const std::exception&) {
      }
    }
    return a;
  }
  try {
    const json reply = json::parse(res->body);
    for (const auto& choice : reply.at("choices")) {
      const auto& content = choice.at("message").at("content");
      a.texts.push_back(content.is_string() ? content.get<std::string>() : "");
    }
  } catch (const std::exception& e) {
    a.retryable = true;
    a.error = std::string("malformed reply: ") + e.what();
  }
  return a;
}

}  // namespace

std::string record_to_json(const CompletionRecord& r) {
  return json{{"task_id", r.task_id}, {"index", r.index}, {"model", r.model},
              {"timestamp", r.timestamp}, {"raw", r.raw}, {"code", r.code}}
      .dump();
}

CompletionRecord record_from_json(std::string_view line) {
  const json j = json::parse(line);
  return {j.at("task_id").get<std::string>(), j.at("index").get<int>(),      j.at("raw").get<std::string>(),
          j.at("code").get<std::string>(),    j.at("timestamp").get<std::string>(), j.at("model").get<std::string>()};
}

std::string strip_fences(std::string_view text) {
  std::string_view best;
  bool found = false;
  std::size_t pos = 0;
  while (true) {
    const auto open = text.find("```", pos);
    if (open == std::string_view::npos) break;
    const auto line_end = text.find('\n', open);
    if (line_end == std::string_view::npos) break;
    const auto close = text.find("```", line_end);
    if (close == std::string_view::npos) break;
    const auto block = text.substr(line_end + 1, close - line_end - 1);
    if (!found || block.size() > best.size()) best = block;
    found = true;
    pos = close + 3;
  }
  return trim(found ? best : text);
}

std::string extract_code(std::string_view raw, ResponseFormat format, Domain domain) {
  const std::string text = strip_fences(raw);
  if (format == ResponseFormat::kStructured) {
    const auto open = text.find('{');
    const auto close = text.rfind('}');
    if (open == std::string::npos || close == std::string::npos || close < open) return "";
    const json j = json::parse(text.substr(open, close - open + 1), nullptr, false);
    if (!j.is_object() || !j.contains("code") || !j["code"].is_string()) return "";
    return trim(j["code"].get<std::string>());
  }
  if (domain == Domain::kString) return strings::extract_body(text);
  return text;
}

CompletionCache::CompletionCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::filesystem::path CompletionCache::file_for(const std::string& task_id, const std::string& model) const {
  return dir_ / (safe_name(task_id) + "__" + safe_name(model) + ".jsonl");
}

std::vector<CompletionRecord> CompletionCache::load(const std::string& task_id, const std::string& model) const {
  std::map<int, CompletionRecord> by_index;
  std::ifstream in(file_for(task_id, model));
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    CompletionRecord r;
    try {
      r = record_from_json(line);
    } catch (const std::exception&) {
      continue;  // a torn final line from an interrupted append
    }
    if (r.task_id == task_id && r.model == model) by_index.emplace(r.index, std::move(r));
  }
  std::vector<CompletionRecord> out;
  for (auto& [_, r] : by_index) out.push_back(std::move(r));
  return out;
}

void CompletionCache::append(const CompletionRecord& record) {
  std::lock_guard lock(mutex_);
  for (const auto& r : load(record.task_id, record.model)) {
    if (r.index == record.index) return;
  }
  std::filesystem::create_directories(dir_);
  std::ofstream out(file_for(record.task_id, record.model), std::ios::app);
  out << record_to_json(record) << "\n";
  if (!out) throw std::runtime_error("cannot append to " + file_for(record.task_id, record.model).string());
}

EndpointConfig endpoint_config_from_json(std::string_view text) {
  const json j = json::parse(text);
  EndpointConfig c;
  c.base_url = j.value("base_url", c.base_url);
  c.token_env = j.value("token_env", c.token_env);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.max_concurrency = j.value("max_concurrency", c.max_concurrency);
  c.max_retries = j.value("max_retries", c.max_retries);
  c.initial_backoff_s = j.value("initial_backoff_s", c.initial_backoff_s);
  c.max_backoff_s = j.value("max_backoff_s", c.max_backoff_s);
  c.request_timeout_s = j.value("request_timeout_s", c.request_timeout_s);
  c.offline = j.value("offline", c.offline);
  if (c.batch_size < 1 || c.max_concurrency < 1 || c.max_retries < 0) {
    throw std::invalid_argument("endpoint config: batch_size and max_concurrency must be positive");
  }
  return c;
}

EndpointConfig load_endpoint_config(const std::filesystem::path& path) {
  return endpoint_config_from_json(read_text_file(path));
}

std::vector<CompletionRecord> sample(const std::string& task_id, const PromptSpec& spec,
                                     const EndpointConfig& endpoint, CompletionCache& cache, SampleStats* stats) {
  if (spec.n < 1) throw std::invalid_argument("sample count must be at least 1");
  std::vector<CompletionRecord> have;
  for (auto& r : cache.load(task_id, spec.model)) {
    if (r.index < spec.n) have.push_back(std::move(r));
  }
  SampleStats local;
  local.from_cache = have.size();
  std::vector<int> missing;
  {
    std::set<int> present;
    for (const auto& r : have) present.insert(r.index);
    for (int i = 0; i < spec.n; ++i) {
      if (!present.count(i)) missing.push_back(i);
    }
  }
  if (missing.empty()) {
    if (stats) *stats = local;
    return have;
  }
  if (endpoint.offline) {
    throw SamplingError("cache holds " + std::to_string(have.size()) + " of " + std::to_string(spec.n) +
                            " completions for " + task_id + " and sampling is offline",
                        have);
  }

  std::vector<std::vector<int>> batches;
  for (std::size_t i = 0; i < missing.size(); i += endpoint.batch_size) {
    batches.emplace_back(missing.begin() + i,
                         missing.begin() + std::min(missing.size(), i + std::size_t(endpoint.batch_size)));
  }
  const Endpoint ep = split_url(endpoint.base_url);
  const char* token_value = std::getenv(endpoint.token_env.c_str());
  const std::string token = token_value ? token_value : "";

  std::mutex mutex;
  std::vector<CompletionRecord> fresh;
  std::string first_error;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t b = next++; b < batches.size(); b = next++) {
      std::vector<int> todo = batches[b];
      int failures = 0;
      double backoff = endpoint.initial_backoff_s;
      while (!todo.empty()) {
        const Attempt a = request_once(ep, endpoint, token, request_body(spec, static_cast<int>(todo.size())));
        {
          std::lock_guard lock(mutex);
          ++local.requests;
        }
        if (!a.texts.empty()) {
          const std::size_t got = std::min(a.texts.size(), todo.size());
          for (std::size_t k = 0; k < got; ++k) {
            CompletionRecord r{task_id, todo[k], a.texts[k], extract_code(a.texts[k], spec.format, spec.domain),
                               utc_now(), spec.model};
            cache.append(r);
            std::lock_guard lock(mutex);
            fresh.push_back(std::move(r));
          }
          todo.erase(todo.begin(), todo.begin() + static_cast<std::ptrdiff_t>(got));
          failures = 0;
          backoff = endpoint.initial_backoff_s;
          continue;
        }
        const std::string error = a.error.empty() ? "empty reply" : a.error;
        if ((!a.retryable && !a.error.empty()) || failures >= endpoint.max_retries) {
          std::lock_guard lock(mutex);
          if (first_error.empty()) first_error = error;
          break;
        }
        ++failures;
        {
          std::lock_guard lock(mutex);
          ++local.retries;
        }
        const double wait = std::min(endpoint.max_backoff_s, a.retry_after_s >= 0 ? a.retry_after_s : backoff);
        std::this_thread::sleep_for(std::chrono::duration<double>(wait));
        backoff = std::min(endpoint.max_backoff_s, backoff * 2);
      }
    }
  };
  const std::size_t width = std::min<std::size_t>(endpoint.max_concurrency, batches.size());
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < width; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();

  for (auto& r : fresh) have.push_back(std::move(r));
  std::sort(have.begin(), have.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
  if (stats) *stats = local;
  if (!first_error.empty()) throw SamplingError("sampling " + task_id + ": " + first_error, std::move(have));
  return have;
}

CompletionSet to_completion_set(const std::string& task_id, const std::vector<CompletionRecord>& records,
                                const Grammar& grammar, LearnMode mode) {
  std::vector<std::string> texts;
  texts.reserve(records.size());
  for (const auto& r : records) texts.push_back(r.code);
  return make_completion_set(task_id, std::move(texts), grammar, mode);
}

}  // namespace surrosynth::llm

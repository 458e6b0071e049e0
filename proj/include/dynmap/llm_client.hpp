#pragma once

#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dynmap/task.hpp"

namespace dynmap {

struct MenuItem {
  std::string name;
  std::string description;
};

// Item names are unique after case-folding and trimming.
class Menu {
 public:
  Menu() = default;
  explicit Menu(std::vector<MenuItem> items);

  void add(MenuItem item);
  const std::vector<MenuItem>& items() const { return items_; }
  const MenuItem* find(std::string_view name) const;
  bool empty() const { return items_.empty(); }

 private:
  std::vector<MenuItem> items_;
};

// Spoken summary of the menu, e.g. "Today we have cola, a chilled soda, and ...".
std::string menu_description(const Menu& menu);

// Deterministic stand-in for a language-model parser. Pattern table, in order:
// serve phrases plus the longest menu item -> serve_order; clean phrases ->
// clean_table; menu questions -> describe_menu; anything else -> casual_chat.
ParsedTask rule_parse(std::string_view utterance, const Menu& menu, const TaskRegistry& registry);

// Decodes `task=<name>; slots=<k:v,...>`. Unknown names, schema mismatches and
// garbage all map to casual_chat with confidence 0.
ParsedTask parse_understand_line(std::string_view text, const TaskRegistry& registry);

enum class BackendMode { Rules, Remote, Stub };

std::string to_string(BackendMode mode);
BackendMode parse_backend_mode(std::string_view label);

struct BackendConfig {
  BackendMode mode = BackendMode::Rules;
  std::string endpoint;
  std::string model;
  double temperature = 0.0;
  double timeout_seconds = 30.0;
  int max_retries = 3;
  std::string api_key_env = "LLM_API_KEY";

  void validate() const;
};

struct ChatMessage {
  std::string role;
  std::string content;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct HttpRequest {
  std::string url;
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;
  double timeout_seconds = 30.0;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

// Connection-level failure (refused, reset, timed out).
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse post(const HttpRequest& request) = 0;
};

// cpp-httplib backed transport; http and https endpoints.
class HttpTransport : public Transport {
 public:
  HttpResponse post(const HttpRequest& request) override;
};

// Records every request; replies from a queue of canned outcomes. An outcome
// with status < 0 is raised as a TransportError.
class RecordingTransport : public Transport {
 public:
  void push(HttpResponse response);
  void push_failure(std::string what);
  HttpResponse post(const HttpRequest& request) override;

  std::vector<HttpRequest> requests() const;
  std::size_t count() const;

 private:
  mutable std::mutex mutex_;
  std::deque<std::pair<HttpResponse, std::string>> queue_;
  std::vector<HttpRequest> requests_;
};

// Chat-completion client for an OpenAI-compatible endpoint
// (POST <endpoint>/v1/chat/completions). In stub mode it never touches the
// transport: replies come from a script and requests are recorded.
class ChatClient {
 public:
  using Sleeper = std::function<void(double seconds)>;

  explicit ChatClient(BackendConfig config, std::shared_ptr<Transport> transport = nullptr,
                      Sleeper sleeper = nullptr);

  std::string complete(const std::vector<ChatMessage>& messages);

  const BackendConfig& config() const { return config_; }

  // Stub mode.
  void script(std::string content);
  std::vector<std::vector<ChatMessage>> recorded() const;

  // One line per attempt, e.g. "attempt 1: transport error: ...".
  std::vector<std::string> attempt_log() const;

  std::string request_body(const std::vector<ChatMessage>& messages) const;

 private:
  std::string complete_remote(const std::vector<ChatMessage>& messages);

  BackendConfig config_;
  std::shared_ptr<Transport> transport_;
  Sleeper sleeper_;
  mutable std::mutex mutex_;
  std::deque<std::string> script_;
  std::vector<std::vector<ChatMessage>> recorded_;
  std::vector<std::string> attempts_;
};

// Extracts choices[0].message.content; throws ProtocolError otherwise.
std::string parse_completion_body(std::string_view body);

}  // namespace dynmap

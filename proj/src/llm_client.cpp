#include "dynmap/llm_client.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <json.hpp>
#include <thread>

#include "dynmap/errors.hpp"
#include "dynmap/text.hpp"

namespace dynmap {

Menu::Menu(std::vector<MenuItem> items) {
  for (auto& item : items) add(std::move(item));
}

void Menu::add(MenuItem item) {
  item.name = text::trim(item.name);
  if (item.name.empty()) throw ParameterError("menu item needs a name");
  if (find(item.name)) throw ParameterError("duplicate menu item '" + item.name + "'");
  items_.push_back(std::move(item));
}

const MenuItem* Menu::find(std::string_view name) const {
  const std::string key = text::normalize(name);
  for (const auto& item : items_) {
    if (text::normalize(item.name) == key) return &item;
  }
  return nullptr;
}

std::string menu_description(const Menu& menu) {
  if (menu.empty()) return "I'm sorry, the menu is empty right now.";
  std::string out = "Today we have ";
  const auto& items = menu.items();
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += (i + 1 == items.size()) ? (items.size() > 2 ? ", and " : " and ") : ", ";
    out += items[i].name;
    if (!items[i].description.empty()) out += " (" + items[i].description + ")";
  }
  return out + ".";
}

namespace {

// Lower-case words separated by single spaces; punctuation other than
// apostrophes and hyphens becomes a separator.
std::string tokenize(std::string_view s) {
  std::string cleaned;
  cleaned.reserve(s.size());
  for (char ch : s) {
    const auto uch = static_cast<unsigned char>(ch);
    cleaned.push_back(std::isalnum(uch) || ch == '\'' || ch == '-' ? static_cast<char>(std::tolower(uch)) : ' ');
  }
  return text::normalize(cleaned);
}

bool contains_phrase(const std::string& haystack, const std::string& phrase) {
  if (phrase.empty()) return false;
  const std::string padded = " " + haystack + " ";
  return padded.find(" " + phrase + " ") != std::string::npos;
}

bool contains_any(const std::string& haystack, std::initializer_list<const char*> phrases) {
  return std::any_of(phrases.begin(), phrases.end(),
                     [&](const char* p) { return contains_phrase(haystack, p); });
}

ParsedTask fallback_chat(double confidence) { return {"casual_chat", {}, confidence}; }

}  // namespace

ParsedTask rule_parse(std::string_view utterance, const Menu& menu, const TaskRegistry& registry) {
  const std::string words = tokenize(utterance);

  if (registry.find("serve_order") &&
      contains_any(words, {"bring", "serve", "can i have", "could i have", "can i get",
                           "could i get", "i'd like", "i would like", "i'll have", "i want",
                           "give me", "get me"})) {
    const MenuItem* best = nullptr;
    std::size_t best_len = 0;
    for (const auto& item : menu.items()) {
      const std::string name = tokenize(item.name);
      if (name.size() > best_len && contains_phrase(words, name)) {
        best = &item;
        best_len = name.size();
      }
    }
    if (best) return {"serve_order", {{"item", best->name}}, 1.0};
  }
  if (registry.find("clean_table") && contains_any(words, {"clean", "clear", "take away"})) {
    return {"clean_table", {}, 1.0};
  }
  if (registry.find("describe_menu") &&
      contains_any(words, {"menu", "what do you have", "recommend"})) {
    return {"describe_menu", {}, 1.0};
  }
  return fallback_chat(0.5);
}

ParsedTask parse_understand_line(std::string_view raw, const TaskRegistry& registry) {
  std::string line;
  for (const auto& candidate : text::split(raw, '\n')) {
    line = text::trim(candidate);
    if (!line.empty()) break;
  }
  const auto semi = line.find(';');
  if (line.rfind("task=", 0) != 0 || semi == std::string::npos) return fallback_chat(0.0);
  const std::string name = text::trim(std::string_view(line).substr(5, semi - 5));
  const std::string rest = text::trim(std::string_view(line).substr(semi + 1));
  if (rest.rfind("slots=", 0) != 0) return fallback_chat(0.0);

  const TaskRepresentation* rep = registry.find(name);
  if (!rep) return fallback_chat(0.0);

  ParsedTask task{name, {}, 1.0};
  const std::string slot_text = text::trim(std::string_view(rest).substr(6));
  if (!slot_text.empty()) {
    for (const auto& pair : text::split(slot_text, ',')) {
      const auto colon = pair.find(':');
      if (colon == std::string::npos) return fallback_chat(0.0);
      const std::string key = text::trim(std::string_view(pair).substr(0, colon));
      const std::string value = text::trim(std::string_view(pair).substr(colon + 1));
      if (key.empty() || value.empty() || task.slots.contains(key)) return fallback_chat(0.0);
      task.slots[key] = value;
    }
  }
  if (task.slots.size() != rep->slots.size()) return fallback_chat(0.0);
  for (const auto& slot : rep->slots) {
    if (!task.slots.contains(slot)) return fallback_chat(0.0);
  }
  return task;
}

std::string to_string(BackendMode mode) {
  switch (mode) {
    case BackendMode::Rules:
      return "rules";
    case BackendMode::Remote:
      return "remote";
    case BackendMode::Stub:
      return "stub";
  }
  return "rules";
}

BackendMode parse_backend_mode(std::string_view label) {
  if (label == "rules") return BackendMode::Rules;
  if (label == "remote") return BackendMode::Remote;
  if (label == "stub") return BackendMode::Stub;
  throw ParameterError("unknown backend mode '" + std::string(label) + "'");
}

void BackendConfig::validate() const {
  if (!(temperature >= 0.0 && temperature <= 2.0)) throw ParameterError("temperature must lie in [0, 2]");
  if (max_retries < 0) throw ParameterError("max_retries must be non-negative");
  if (!(timeout_seconds > 0.0)) throw ParameterError("timeout must be positive");
  if (mode == BackendMode::Remote && (endpoint.empty() || model.empty())) {
    throw ParameterError("remote backend needs an endpoint and a model");
  }
}

void RecordingTransport::push(HttpResponse response) {
  std::lock_guard lock(mutex_);
  queue_.emplace_back(std::move(response), std::string());
}

void RecordingTransport::push_failure(std::string what) {
  std::lock_guard lock(mutex_);
  queue_.emplace_back(HttpResponse{-1, {}}, std::move(what));
}

HttpResponse RecordingTransport::post(const HttpRequest& request) {
  std::lock_guard lock(mutex_);
  requests_.push_back(request);
  if (queue_.empty()) throw TransportError("no scripted response");
  auto [response, failure] = std::move(queue_.front());
  queue_.pop_front();
  if (response.status < 0) throw TransportError(failure);
  return response;
}

std::vector<HttpRequest> RecordingTransport::requests() const {
  std::lock_guard lock(mutex_);
  return requests_;
}

std::size_t RecordingTransport::count() const {
  std::lock_guard lock(mutex_);
  return requests_.size();
}

ChatClient::ChatClient(BackendConfig config, std::shared_ptr<Transport> transport, Sleeper sleeper)
    : config_(std::move(config)), transport_(std::move(transport)), sleeper_(std::move(sleeper)) {
  config_.validate();
  if (!sleeper_) {
    sleeper_ = [](double s) { std::this_thread::sleep_for(std::chrono::duration<double>(s)); };
  }
  if (config_.mode == BackendMode::Remote && !transport_) transport_ = std::make_shared<HttpTransport>();
}

void ChatClient::script(std::string content) {
  std::lock_guard lock(mutex_);
  script_.push_back(std::move(content));
}

std::vector<std::vector<ChatMessage>> ChatClient::recorded() const {
  std::lock_guard lock(mutex_);
  return recorded_;
}

std::vector<std::string> ChatClient::attempt_log() const {
  std::lock_guard lock(mutex_);
  return attempts_;
}

std::string ChatClient::request_body(const std::vector<ChatMessage>& messages) const {
  nlohmann::json msgs = nlohmann::json::array();
  for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
  return nlohmann::json{{"model", config_.model},
                        {"messages", msgs},
                        {"temperature", config_.temperature}}
      .dump();
}

std::string ChatClient::complete(const std::vector<ChatMessage>& messages) {
  switch (config_.mode) {
    case BackendMode::Rules:
      throw ParameterError("the rules backend does not serve chat completions");
    case BackendMode::Stub: {
      std::lock_guard lock(mutex_);
      recorded_.push_back(messages);
      if (script_.empty()) throw BackendUnavailableError("stub script exhausted");
      std::string reply = std::move(script_.front());
      script_.pop_front();
      return reply;
    }
    case BackendMode::Remote:
      return complete_remote(messages);
  }
  throw ParameterError("unsupported backend mode");
}

std::string ChatClient::complete_remote(const std::vector<ChatMessage>& messages) {
  HttpRequest request;
  std::string base = config_.endpoint;
  while (!base.empty() && base.back() == '/') base.pop_back();
  request.url = base + "/v1/chat/completions";
  request.body = request_body(messages);
  request.timeout_seconds = config_.timeout_seconds;
  request.headers.emplace_back("Content-Type", "application/json");
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
    request.headers.emplace_back("Authorization", std::string("Bearer ") + key);
  }

  const int attempts = 1 + config_.max_retries;
  std::string last_error;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    if (attempt > 1) sleeper_(0.25 * std::pow(2.0, attempt - 2));
    HttpResponse response;
    try {
      response = transport_->post(request);
    } catch (const TransportError& e) {
      last_error = std::string("transport error: ") + e.what();
      std::lock_guard lock(mutex_);
      attempts_.push_back("attempt " + std::to_string(attempt) + ": " + last_error);
      continue;
    }
    {
      std::lock_guard lock(mutex_);
      attempts_.push_back("attempt " + std::to_string(attempt) + ": HTTP " +
                          std::to_string(response.status));
    }
    if (response.status == 429 || response.status >= 500) {
      last_error = "HTTP " + std::to_string(response.status);
      continue;
    }
    if (response.status < 200 || response.status >= 300) {
      throw BackendUnavailableError("chat endpoint answered HTTP " + std::to_string(response.status));
    }
    return parse_completion_body(response.body);
  }
  throw BackendUnavailableError("chat endpoint unavailable after " + std::to_string(attempts) +
                                " attempts (" + last_error + ")");
}

std::string parse_completion_body(std::string_view body) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error&) {
    throw ProtocolError("completion body is not JSON");
  }
  if (!doc.is_object() || !doc.contains("choices") || !doc["choices"].is_array() ||
      doc["choices"].empty()) {
    throw ProtocolError("completion body has no choices");
  }
  const auto& first = doc["choices"][0];
  if (!first.is_object() || !first.contains("message") || !first["message"].is_object() ||
      !first["message"].contains("content") || !first["message"]["content"].is_string()) {
    throw ProtocolError("first choice has no message content");
  }
  return first["message"]["content"].get<std::string>();
}

}  // namespace dynmap

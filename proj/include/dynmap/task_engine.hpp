#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "dynmap/llm_client.hpp"
#include "dynmap/task.hpp"

namespace dynmap {

// Understanding and response prompts share the base byte-for-byte and differ
// only after kFormatMarker.
struct PromptPair {
  std::string base;
  std::string understand_prompt;
  std::string respond_prompt;
};

inline constexpr std::string_view kFormatMarker = "### Output format\n";

PromptPair build_prompts(const std::string& environment, const TaskRegistry& registry,
                         const Menu& menu);

// Read-only context shared by both pipeline branches.
struct PipelineContext {
  const TaskRegistry& registry;
  const Menu& menu;
  PromptPair prompts;
};

// A parser/responder. The parallel pipeline calls respond() with no access to
// the understanding result; the sequential pipeline calls respond_informed().
class Backend {
 public:
  virtual ~Backend() = default;
  virtual ParsedTask understand(const std::string& utterance, const PipelineContext& ctx) = 0;
  virtual std::string respond(const std::string& utterance, const PipelineContext& ctx) = 0;
  virtual std::string respond_informed(const std::string& utterance, const PipelineContext& ctx,
                                       const ParsedTask& understood) = 0;
};

class RuleBackend : public Backend {
 public:
  ParsedTask understand(const std::string& utterance, const PipelineContext& ctx) override;
  std::string respond(const std::string& utterance, const PipelineContext& ctx) override;
  std::string respond_informed(const std::string& utterance, const PipelineContext& ctx,
                               const ParsedTask& understood) override;
};

// Language-model backend over ChatClient (remote or stub mode).
class ChatBackend : public Backend {
 public:
  explicit ChatBackend(std::shared_ptr<ChatClient> client) : client_(std::move(client)) {}

  ParsedTask understand(const std::string& utterance, const PipelineContext& ctx) override;
  std::string respond(const std::string& utterance, const PipelineContext& ctx) override;
  std::string respond_informed(const std::string& utterance, const PipelineContext& ctx,
                               const ParsedTask& understood) override;

 private:
  std::shared_ptr<ChatClient> client_;
};

// Canned reply for a parsed task, as spoken by the rule backend.
std::string canned_response(const ParsedTask& task, const Menu& menu);

inline constexpr std::string_view kApologyLine =
    "I'm sorry, I could not prepare a reply just now. I will still take care of your request.";

enum class PipelineMode { Parallel, Sequential };

std::string to_string(PipelineMode mode);
PipelineMode parse_pipeline_mode(std::string_view label);

struct HandleResult {
  ParsedTask task;
  std::string response;
  bool understand_fell_back = false;
  bool respond_fell_back = false;
};

// Parallel: understanding runs on a worker thread while the response is
// generated from the utterance alone. Sequential: understanding first, then a
// response that sees the parsed task. Failures degrade to the rule parser and
// the apology line; the call itself never throws on backend errors.
HandleResult handle(const std::string& utterance, Backend& backend, const PipelineContext& ctx,
                    PipelineMode mode);

// Turns a failed skill into a spoken request for help. Templates per skill
// kind; a chat client, when given, is tried first.
class BypassServer {
 public:
  BypassServer() = default;
  explicit BypassServer(std::shared_ptr<ChatClient> client) : client_(std::move(client)) {}

  std::string help(const SkillInvocation& failed, const SkillResult& result) const;

 private:
  std::shared_ptr<ChatClient> client_;
};

// Offline template; never empty.
std::string bypass_template(const SkillInvocation& failed, const SkillResult& result);

class SkillRunner {
 public:
  virtual ~SkillRunner() = default;
  virtual SkillResult run(const SkillInvocation& invocation) = 0;
};

enum class OutcomeState { Completed, CompletedWithAssist, Failed };

std::string to_string(OutcomeState state);

struct TraceEntry {
  SkillInvocation invocation;
  SkillResult result;
  bool recovery = false;
};

struct TaskOutcome {
  OutcomeState state = OutcomeState::Completed;
  std::vector<TraceEntry> trace;
  std::vector<std::string> help_messages;
};

// Runs the representation's skills in order. A failed skill with a recovery
// entry triggers a help message and the recovery steps, then execution
// resumes; any other failure aborts.
TaskOutcome execute(const ParsedTask& task, const TaskRegistry& registry, SkillRunner& runner,
                    const BypassServer& bypass,
                    const std::map<std::string, std::string>& variables = {});

// Text form of an outcome, one line per skill, for logs and golden files.
std::string format_outcome(const TaskOutcome& outcome);

}  // namespace dynmap

#include "dynmap/task_engine.hpp"

#include <algorithm>
#include <future>

#include "dynmap/errors.hpp"
#include "dynmap/text.hpp"

namespace dynmap {

PromptPair build_prompts(const std::string& environment, const TaskRegistry& registry,
                         const Menu& menu) {
  if (text::trim(environment).empty()) throw ParameterError("environment description is empty");
  if (registry.size() == 0) throw ParameterError("task registry is empty");

  std::string base = "You are the task assistant of a service robot.\n\nEnvironment:\n";
  base += text::trim(environment) + "\n\nTask representations:\n";
  int n = 1;
  for (const auto& rep : registry.representations()) {
    base += std::to_string(n++) + ". " + rep.name + "(";
    for (std::size_t i = 0; i < rep.slots.size(); ++i) base += (i ? ", " : "") + rep.slots[i];
    base += ")";
    if (!rep.description.empty()) base += ": " + rep.description;
    base += ". Skills: ";
    for (std::size_t i = 0; i < rep.skills.size(); ++i) {
      base += (i ? " -> " : "") + to_string(rep.skills[i].kind) + "(" + rep.skills[i].argument + ")";
    }
    base += "\n";
  }
  base += "\nMenu:\n";
  if (menu.empty()) base += "(empty)\n";
  for (const auto& item : menu.items()) {
    base += "- " + item.name;
    if (!item.description.empty()) base += ": " + item.description;
    base += "\n";
  }
  base += "\n";

  PromptPair pair;
  pair.base = base;
  pair.understand_prompt = base + std::string(kFormatMarker) +
                           "Reply with exactly one line of the form "
                           "task=<name>; slots=<key:value,...> naming one task representation "
                           "above. Use casual_chat when no task applies.\n";
  pair.respond_prompt = base + std::string(kFormatMarker) +
                        "Reply to the customer with one short, friendly conversational "
                        "sentence.\n";
  return pair;
}

std::string canned_response(const ParsedTask& task, const Menu& menu) {
  if (task.name == "serve_order") {
    auto it = task.slots.find("item");
    const std::string item = it == task.slots.end() ? std::string("order") : it->second;
    return "Certainly! I will bring you the " + item + " right away.";
  }
  if (task.name == "clean_table") return "Of course. I will clear your table now.";
  if (task.name == "describe_menu") return menu_description(menu);
  if (task.name == "casual_chat") return "Thank you! Please call me whenever you need anything.";
  return "Certainly, I will take care of that.";
}

ParsedTask RuleBackend::understand(const std::string& utterance, const PipelineContext& ctx) {
  return rule_parse(utterance, ctx.menu, ctx.registry);
}

// The response path reads the utterance on its own; it never sees the
// understanding branch's result.
std::string RuleBackend::respond(const std::string& utterance, const PipelineContext& ctx) {
  return canned_response(rule_parse(utterance, ctx.menu, ctx.registry), ctx.menu);
}

std::string RuleBackend::respond_informed(const std::string&, const PipelineContext& ctx,
                                          const ParsedTask& understood) {
  return canned_response(understood, ctx.menu);
}

ParsedTask ChatBackend::understand(const std::string& utterance, const PipelineContext& ctx) {
  const std::string reply =
      client_->complete({{"system", ctx.prompts.understand_prompt}, {"user", utterance}});
  return parse_understand_line(reply, ctx.registry);
}

std::string ChatBackend::respond(const std::string& utterance, const PipelineContext& ctx) {
  return text::trim(client_->complete({{"system", ctx.prompts.respond_prompt}, {"user", utterance}}));
}

std::string ChatBackend::respond_informed(const std::string& utterance, const PipelineContext& ctx,
                                          const ParsedTask& understood) {
  return text::trim(client_->complete(
      {{"system", ctx.prompts.respond_prompt},
       {"system", "The request was understood as: " + format_understand_line(understood)},
       {"user", utterance}}));
}

std::string to_string(PipelineMode mode) {
  return mode == PipelineMode::Parallel ? "parallel" : "sequential";
}

PipelineMode parse_pipeline_mode(std::string_view label) {
  if (label == "parallel") return PipelineMode::Parallel;
  if (label == "sequential") return PipelineMode::Sequential;
  throw ParameterError("unknown pipeline mode '" + std::string(label) + "'");
}

namespace {

struct Understood {
  ParsedTask task;
  bool fell_back = false;
};

Understood understand_or_fallback(const std::string& utterance, Backend& backend,
                                  const PipelineContext& ctx) {
  try {
    ParsedTask task = backend.understand(utterance, ctx);
    if (ctx.registry.find(task.name)) return {std::move(task), false};
  } catch (const std::exception&) {
  }
  return {rule_parse(utterance, ctx.menu, ctx.registry), true};
}

template <typename F>
std::pair<std::string, bool> respond_or_apologize(F&& produce) {
  try {
    std::string reply = produce();
    if (!text::trim(reply).empty()) return {std::move(reply), false};
  } catch (const std::exception&) {
  }
  return {std::string(kApologyLine), true};
}

}  // namespace

HandleResult handle(const std::string& utterance, Backend& backend, const PipelineContext& ctx,
                    PipelineMode mode) {
  HandleResult out;
  if (mode == PipelineMode::Parallel) {
    auto understanding = std::async(std::launch::async, [&utterance, &backend, &ctx] {
      return understand_or_fallback(utterance, backend, ctx);
    });
    // Runs on this thread while understanding proceeds; inputs are the
    // utterance and the shared context only.
    auto [response, apologized] =
        respond_or_apologize([&] { return backend.respond(utterance, ctx); });
    Understood u = understanding.get();
    out.task = std::move(u.task);
    out.understand_fell_back = u.fell_back;
    out.response = std::move(response);
    out.respond_fell_back = apologized;
  } else {
    Understood u = understand_or_fallback(utterance, backend, ctx);
    auto [response, apologized] =
        respond_or_apologize([&] { return backend.respond_informed(utterance, ctx, u.task); });
    out.task = std::move(u.task);
    out.understand_fell_back = u.fell_back;
    out.response = std::move(response);
    out.respond_fell_back = apologized;
  }
  return out;
}

namespace {

std::string readable(std::string s) {
  std::replace(s.begin(), s.end(), '_', ' ');
  return s;
}

}  // namespace

std::string bypass_template(const SkillInvocation& failed, const SkillResult& result) {
  static const std::string generic = "I need some help to continue my task. Could you assist me?";
  if (text::trim(result.reason).empty()) return generic;
  const std::string arg = readable(text::trim(failed.argument));
  if (arg.empty()) return generic;
  switch (failed.kind) {
    case SkillKind::Detect:
      return "I could not find the " + arg + ". Could you place it in my hand?";
    case SkillKind::Grasp:
      return "I could not pick up the " + arg + ". Could you hand it to me?";
    case SkillKind::Navigate:
      return "I could not reach the " + arg + ". Could you clear the way for me?";
    case SkillKind::Place:
      return "I could not put down the " + arg + ". Could you take it from my hand?";
    case SkillKind::FindPlacement:
      return "I could not find space on the table. Could you make some room for me?";
    case SkillKind::HandOver:
      return "I could not receive the " + arg + ". Could you try handing it to me again?";
    case SkillKind::Speak:
      break;
  }
  return generic;
}

std::string BypassServer::help(const SkillInvocation& failed, const SkillResult& result) const {
  if (client_ && !text::trim(result.reason).empty()) {
    try {
      const std::string reply = text::trim(client_->complete(
          {{"system",
            "You are a service robot that asks nearby people for help. Reply with one polite "
            "sentence that states what failed and asks for specific help. Example: I could not "
            "find the orange juice. Could you place it in my hand?"},
           {"user", "Failed skill: " + to_string(failed) + ". Failure details: " + result.reason}}));
      if (!reply.empty()) return reply;
    } catch (const std::exception&) {
    }
  }
  return bypass_template(failed, result);
}

std::string to_string(OutcomeState state) {
  switch (state) {
    case OutcomeState::Completed:
      return "COMPLETED";
    case OutcomeState::CompletedWithAssist:
      return "COMPLETED_WITH_ASSIST";
    case OutcomeState::Failed:
      return "FAILED";
  }
  return "FAILED";
}

TaskOutcome execute(const ParsedTask& task, const TaskRegistry& registry, SkillRunner& runner,
                    const BypassServer& bypass, const std::map<std::string, std::string>& variables) {
  const TaskRepresentation& rep = registry.get(task.name);
  for (const auto& slot : rep.slots) {
    if (!task.slots.contains(slot)) {
      throw ParameterError("task '" + task.name + "' is missing slot '" + slot + "'");
    }
  }
  std::map<std::string, std::string> vars = variables;
  for (const auto& [k, v] : task.slots) vars[k] = v;

  // Bind the whole main sequence before running anything.
  std::vector<SkillInvocation> plan;
  plan.reserve(rep.skills.size());
  for (const auto& spec : rep.skills) plan.push_back({spec.kind, bind_template(spec.argument, vars)});

  TaskOutcome outcome;
  bool assisted = false;
  for (const auto& inv : plan) {
    SkillResult result = runner.run(inv);
    outcome.trace.push_back({inv, result, false});
    if (result.ok) continue;

    auto recovery = rep.recovery.find(inv.kind);
    if (recovery == rep.recovery.end()) {
      outcome.state = OutcomeState::Failed;
      return outcome;
    }
    const std::string message = bypass.help(inv, result);
    outcome.help_messages.push_back(message);
    auto recovery_vars = vars;
    recovery_vars["help"] = message;
    for (const auto& spec : recovery->second) {
      SkillInvocation step{spec.kind, bind_template(spec.argument, recovery_vars)};
      SkillResult step_result = runner.run(step);
      outcome.trace.push_back({step, step_result, true});
      if (!step_result.ok) {
        outcome.state = OutcomeState::Failed;
        return outcome;
      }
    }
    assisted = true;
  }
  outcome.state = assisted ? OutcomeState::CompletedWithAssist : OutcomeState::Completed;
  return outcome;
}

std::string format_outcome(const TaskOutcome& outcome) {
  std::string out;
  for (const auto& e : outcome.trace) {
    out += e.recovery ? "  + " : "  - ";
    out += to_string(e.invocation) + " -> ";
    out += e.result.ok ? "OK" : "FAILED(" + e.result.reason + ")";
    out += "\n";
  }
  for (const auto& h : outcome.help_messages) out += "  help: " + h + "\n";
  out += "  outcome: " + to_string(outcome.state) + "\n";
  return out;
}

}  // namespace dynmap

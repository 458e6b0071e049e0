#include <doctest.h>

#include <stdexcept>

#include "dynmap/errors.hpp"
#include "dynmap/task_engine.hpp"
#include "suites.hpp"

using namespace dynmap;

namespace {

const Menu& drinks() {
  static const Menu menu(std::vector<MenuItem>{{"cola", "chilled"}, {"orange juice", ""}});
  return menu;
}

struct Fixture {
  TaskRegistry registry = default_registry();
  PipelineContext ctx{registry, drinks(), build_prompts("A small cafe with two tables.", registry, drinks())};
};

class FlakyBackend : public Backend {
 public:
  bool fail_understand = false;
  bool fail_respond = false;

  ParsedTask understand(const std::string&, const PipelineContext&) override {
    if (fail_understand) throw BackendUnavailableError("down");
    return {"describe_menu", {}, 1.0};
  }
  std::string respond(const std::string&, const PipelineContext&) override {
    if (fail_respond) throw std::runtime_error("down");
    return "blind reply";
  }
  std::string respond_informed(const std::string&, const PipelineContext&, const ParsedTask& t) override {
    if (fail_respond) throw std::runtime_error("down");
    return "informed " + t.name;
  }
};

// Fails the listed invocations (by position) and records everything it runs.
class ScriptedRunner : public SkillRunner {
 public:
  std::vector<int> failing;
  std::vector<SkillInvocation> ran;

  SkillResult run(const SkillInvocation& inv) override {
    const int index = static_cast<int>(ran.size());
    ran.push_back(inv);
    for (int f : failing) {
      if (f == index) return SkillResult::failure("not found");
    }
    return SkillResult::success();
  }
};

}  // namespace

TEST_CASE("both prompts share the base and differ only after the marker") {
  const Fixture f;
  const PromptPair& p = f.ctx.prompts;
  CHECK(p.understand_prompt.substr(0, p.base.size()) == p.base);
  CHECK(p.respond_prompt.substr(0, p.base.size()) == p.base);
  CHECK(p.understand_prompt.substr(p.base.size(), kFormatMarker.size()) == kFormatMarker);
  CHECK(p.respond_prompt.substr(p.base.size(), kFormatMarker.size()) == kFormatMarker);
  CHECK(p.understand_prompt != p.respond_prompt);
  CHECK(p.base.find("serve_order(item)") != std::string::npos);
  CHECK(p.base.find("- cola: chilled\n") != std::string::npos);
  CHECK(p.base.find(kFormatMarker) == std::string::npos);
  CHECK_THROWS_AS(build_prompts("  ", f.registry, drinks()), ParameterError);
  CHECK_THROWS_AS(build_prompts("cafe", TaskRegistry{}, drinks()), ParameterError);
}

TEST_CASE("the rule backend answers both modes") {
  Fixture f;
  RuleBackend backend;
  for (PipelineMode mode : {PipelineMode::Parallel, PipelineMode::Sequential}) {
    const HandleResult r = handle("bring me a cola", backend, f.ctx, mode);
    CHECK(r.task == ParsedTask{"serve_order", {{"item", "cola"}}, 1.0});
    CHECK(r.response == "Certainly! I will bring you the cola right away.");
    CHECK_FALSE(r.understand_fell_back);
    CHECK_FALSE(r.respond_fell_back);
  }
  CHECK(parse_pipeline_mode("sequential") == PipelineMode::Sequential);
  CHECK_THROWS_AS(parse_pipeline_mode("batch"), ParameterError);
}

TEST_CASE("parallel responses never see the parsed task, sequential ones do") {
  Fixture f;
  FlakyBackend backend;
  CHECK(handle("menu?", backend, f.ctx, PipelineMode::Parallel).response == "blind reply");
  CHECK(handle("menu?", backend, f.ctx, PipelineMode::Sequential).response == "informed describe_menu");
}

TEST_CASE("backend failures degrade instead of throwing") {
  Fixture f;
  FlakyBackend backend;
  backend.fail_understand = true;
  for (PipelineMode mode : {PipelineMode::Parallel, PipelineMode::Sequential}) {
    const HandleResult r = handle("could I have an orange juice", backend, f.ctx, mode);
    CHECK(r.understand_fell_back);
    CHECK(r.task == ParsedTask{"serve_order", {{"item", "orange juice"}}, 1.0});
  }
  backend.fail_understand = false;
  backend.fail_respond = true;
  for (PipelineMode mode : {PipelineMode::Parallel, PipelineMode::Sequential}) {
    const HandleResult r = handle("menu?", backend, f.ctx, mode);
    CHECK(r.respond_fell_back);
    CHECK(r.response == kApologyLine);
    CHECK(r.task.name == "describe_menu");
  }
}

TEST_CASE("the chat backend uses the matching prompt for each branch") {
  Fixture f;
  BackendConfig cfg;
  cfg.mode = BackendMode::Stub;
  auto client = std::make_shared<ChatClient>(cfg);
  client->script("task=serve_order; slots=item:cola");
  client->script("  Coming right up!  ");
  ChatBackend backend(client);
  const HandleResult r = handle("a cola please", backend, f.ctx, PipelineMode::Sequential);
  CHECK(r.task == ParsedTask{"serve_order", {{"item", "cola"}}, 1.0});
  CHECK(r.response == "Coming right up!");
  const auto calls = client->recorded();
  REQUIRE(calls.size() == 2);
  CHECK(calls[0][0].content == f.ctx.prompts.understand_prompt);
  CHECK(calls[1][0].content == f.ctx.prompts.respond_prompt);
  CHECK(calls[1][1].content == "The request was understood as: task=serve_order; slots=item:cola");
}

TEST_CASE("parallel branches overlap and sequential ones do not") {
  const suites::LatchStats s = suites::latch_runs(20);
  CHECK(s.runs == 20);
  CHECK(s.parallel_ok == 20);
  CHECK(s.sequential_ok == 20);
}

TEST_CASE("help templates name the failed object") {
  const SkillResult fail = SkillResult::failure("not found");
  CHECK(bypass_template({SkillKind::Detect, "orange juice"}, fail) ==
        "I could not find the orange juice. Could you place it in my hand?");
  CHECK(bypass_template({SkillKind::Navigate, "kitchen_table"}, fail) ==
        "I could not reach the kitchen table. Could you clear the way for me?");
  CHECK(bypass_template({SkillKind::FindPlacement, "table_1"}, fail) ==
        "I could not find space on the table. Could you make some room for me?");
  const std::string generic = "I need some help to continue my task. Could you assist me?";
  CHECK(bypass_template({SkillKind::Speak, "hello"}, fail) == generic);
  CHECK(bypass_template({SkillKind::Grasp, "cup"}, SkillResult::failure("")) == generic);
  CHECK(bypass_template({SkillKind::Grasp, " "}, fail) == generic);
}

TEST_CASE("the bypass server prefers the chat client and falls back to templates") {
  BackendConfig cfg;
  cfg.mode = BackendMode::Stub;
  auto client = std::make_shared<ChatClient>(cfg);
  client->script("Please help me find the cola.");
  const BypassServer server(client);
  const SkillInvocation inv{SkillKind::Detect, "cola"};
  CHECK(server.help(inv, SkillResult::failure("not found")) == "Please help me find the cola.");
  CHECK(server.help(inv, SkillResult::failure("not found")) ==
        "I could not find the cola. Could you place it in my hand?");
  CHECK(BypassServer().help(inv, SkillResult::failure("not found")) ==
        "I could not find the cola. Could you place it in my hand?");
}

TEST_CASE("execution runs the plan and recovers from a failed detect") {
  const TaskRegistry reg = default_registry();
  const ParsedTask order{"serve_order", {{"item", "cola"}}, 1.0};
  ScriptedRunner clean;
  CHECK(execute(order, reg, clean, BypassServer()).state == OutcomeState::Completed);
  CHECK(clean.ran.size() == 7);
  CHECK(clean.ran[6] == SkillInvocation{SkillKind::Speak, "Here is your cola. Enjoy!"});

  ScriptedRunner detect_fails;
  detect_fails.failing = {1};
  const TaskOutcome out = execute(order, reg, detect_fails, BypassServer());
  CHECK(out.state == OutcomeState::CompletedWithAssist);
  REQUIRE(out.trace.size() == 9);
  CHECK(out.trace[2].recovery);
  CHECK(out.trace[2].invocation ==
        SkillInvocation{SkillKind::Speak, "I could not find the cola. Could you place it in my hand?"});
  CHECK(out.trace[3].invocation == SkillInvocation{SkillKind::HandOver, "cola"});
  CHECK_FALSE(out.trace[4].recovery);
  CHECK(format_outcome(out) ==
        "  - navigate(kitchen_table) -> OK\n"
        "  - detect(cola) -> FAILED(not found)\n"
        "  + speak(I could not find the cola. Could you place it in my hand?) -> OK\n"
        "  + hand_over(cola) -> OK\n"
        "  - grasp(cola) -> OK\n"
        "  - navigate(caller_table) -> OK\n"
        "  - find_placement(caller_table) -> OK\n"
        "  - place(cola) -> OK\n"
        "  - speak(Here is your cola. Enjoy!) -> OK\n"
        "  help: I could not find the cola. Could you place it in my hand?\n"
        "  outcome: COMPLETED_WITH_ASSIST\n");
}

TEST_CASE("failures without recovery, or inside recovery, abort") {
  const TaskRegistry reg = default_registry();
  const ParsedTask order{"serve_order", {{"item", "cola"}}, 1.0};
  ScriptedRunner grasp_fails;
  grasp_fails.failing = {2};
  const TaskOutcome a = execute(order, reg, grasp_fails, BypassServer());
  CHECK(a.state == OutcomeState::Failed);
  CHECK(a.trace.size() == 3);
  CHECK(a.help_messages.empty());

  ScriptedRunner handover_fails;
  handover_fails.failing = {1, 3};
  const TaskOutcome b = execute(order, reg, handover_fails, BypassServer());
  CHECK(b.state == OutcomeState::Failed);
  CHECK(b.trace.size() == 4);
  CHECK(b.help_messages.size() == 1);
}

TEST_CASE("execution checks slots and execution variables") {
  const TaskRegistry reg = default_registry();
  ScriptedRunner runner;
  CHECK_THROWS_AS(execute({"serve_order", {}, 1.0}, reg, runner, BypassServer()), ParameterError);
  CHECK_THROWS_AS(execute({"casual_chat", {}, 1.0}, reg, runner, BypassServer()), ParameterError);
  CHECK(runner.ran.empty());
  CHECK_THROWS_AS(execute({"dance", {}, 1.0}, reg, runner, BypassServer()), NotFoundError);
  execute({"casual_chat", {}, 1.0}, reg, runner, BypassServer(), {{"response", "Hi there!"}});
  CHECK(runner.ran.back() == SkillInvocation{SkillKind::Speak, "Hi there!"});
}

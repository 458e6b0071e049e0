#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dynmap {

enum class SkillKind { Navigate, Detect, Grasp, Place, FindPlacement, Speak, HandOver };

std::string to_string(SkillKind kind);
SkillKind parse_skill_kind(std::string_view label);

// `argument` is a template; `{name}` placeholders are filled from task slots
// and execution variables (help, response, menu_description).
struct SkillSpec {
  SkillKind kind;
  std::string argument;

  friend bool operator==(const SkillSpec&, const SkillSpec&) = default;
};

struct SkillInvocation {
  SkillKind kind;
  std::string argument;

  friend bool operator==(const SkillInvocation&, const SkillInvocation&) = default;
};

std::string to_string(const SkillInvocation& inv);  // e.g. detect(orange juice)

struct SkillResult {
  bool ok = true;
  std::string reason;

  static SkillResult success() { return {true, {}}; }
  static SkillResult failure(std::string why) { return {false, std::move(why)}; }
};

struct TaskRepresentation {
  std::string name;
  std::string description;
  std::vector<std::string> slots;
  std::vector<SkillSpec> skills;
  // Failed skill kind -> skills spliced in after asking a human for help.
  std::map<SkillKind, std::vector<SkillSpec>> recovery;
};

class TaskRegistry {
 public:
  void add(TaskRepresentation rep);
  const TaskRepresentation* find(std::string_view name) const;
  const TaskRepresentation& get(std::string_view name) const;
  const std::vector<TaskRepresentation>& representations() const { return reps_; }
  std::size_t size() const { return reps_.size(); }

 private:
  std::vector<TaskRepresentation> reps_;
};

// Placeholders available beyond a representation's own slots.
inline const std::vector<std::string>& execution_variables() {
  static const std::vector<std::string> vars{"help", "response", "menu_description"};
  return vars;
}

// Throws ParameterError when the representation breaks a structural rule.
void validate(const TaskRepresentation& rep);

// serve_order, clean_table, describe_menu, casual_chat.
TaskRegistry default_registry();

// JSON override: {"representations": [{"name", "description", "slots": [...],
// "skills": [{"kind", "arg"}], "recovery": {"<kind>": [{"kind", "arg"}]}}]}
TaskRegistry parse_registry(std::string_view json_text);
std::string dump_registry(const TaskRegistry& registry);

struct ParsedTask {
  std::string name;
  std::map<std::string, std::string> slots;
  double confidence = 0.0;

  friend bool operator==(const ParsedTask&, const ParsedTask&) = default;
};

// `task=<name>; slots=<k:v,...>`
std::string format_understand_line(const ParsedTask& task);

// Fills `{name}` placeholders. Throws ParameterError on an unbound name.
std::string bind_template(std::string_view tmpl, const std::map<std::string, std::string>& vars);

}  // namespace dynmap

#include "dynmap/task.hpp"

#include <algorithm>
#include <json.hpp>
#include <set>

#include "dynmap/errors.hpp"

namespace dynmap {

namespace {

constexpr SkillKind kAllKinds[] = {SkillKind::Navigate, SkillKind::Detect,
                                   SkillKind::Grasp,    SkillKind::Place,
                                   SkillKind::FindPlacement, SkillKind::Speak,
                                   SkillKind::HandOver};

std::vector<std::string> placeholders(std::string_view tmpl) {
  std::vector<std::string> names;
  std::size_t pos = 0;
  while ((pos = tmpl.find('{', pos)) != std::string_view::npos) {
    const auto end = tmpl.find('}', pos);
    if (end == std::string_view::npos) throw ParameterError("unterminated placeholder in '" + std::string(tmpl) + "'");
    names.emplace_back(tmpl.substr(pos + 1, end - pos - 1));
    pos = end + 1;
  }
  return names;
}

nlohmann::json spec_to_json(const SkillSpec& s) {
  return {{"kind", to_string(s.kind)}, {"arg", s.argument}};
}

SkillSpec spec_from_json(const nlohmann::json& j) {
  return {parse_skill_kind(j.at("kind").get<std::string>()), j.value("arg", std::string())};
}

}  // namespace

std::string to_string(SkillKind kind) {
  switch (kind) {
    case SkillKind::Navigate:
      return "navigate";
    case SkillKind::Detect:
      return "detect";
    case SkillKind::Grasp:
      return "grasp";
    case SkillKind::Place:
      return "place";
    case SkillKind::FindPlacement:
      return "find_placement";
    case SkillKind::Speak:
      return "speak";
    case SkillKind::HandOver:
      return "hand_over";
  }
  return "unknown";
}

SkillKind parse_skill_kind(std::string_view label) {
  for (SkillKind k : kAllKinds) {
    if (to_string(k) == label) return k;
  }
  throw ParameterError("unknown skill kind '" + std::string(label) + "'");
}

std::string to_string(const SkillInvocation& inv) {
  return to_string(inv.kind) + "(" + inv.argument + ")";
}

void validate(const TaskRepresentation& rep) {
  if (rep.name.empty()) throw ParameterError("task representation needs a name");
  if (rep.skills.empty()) throw ParameterError("task '" + rep.name + "' has no skills");
  std::set<std::string> known(rep.slots.begin(), rep.slots.end());
  known.insert(execution_variables().begin(), execution_variables().end());
  auto check = [&](const SkillSpec& s) {
    for (const auto& p : placeholders(s.argument)) {
      if (!known.contains(p)) {
        throw ParameterError("task '" + rep.name + "' uses unknown placeholder {" + p + "}");
      }
    }
  };
  for (const auto& s : rep.skills) check(s);
  for (const auto& [kind, steps] : rep.recovery) {
    const bool listed = std::any_of(rep.skills.begin(), rep.skills.end(),
                                    [kind = kind](const SkillSpec& s) { return s.kind == kind; });
    if (!listed) {
      throw ParameterError("task '" + rep.name + "' has recovery for unlisted skill " +
                           to_string(kind));
    }
    if (steps.empty()) throw ParameterError("task '" + rep.name + "' has an empty recovery");
    for (const auto& s : steps) check(s);
  }
}

void TaskRegistry::add(TaskRepresentation rep) {
  validate(rep);
  if (find(rep.name)) throw ParameterError("duplicate task representation '" + rep.name + "'");
  reps_.push_back(std::move(rep));
}

const TaskRepresentation* TaskRegistry::find(std::string_view name) const {
  for (const auto& r : reps_) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

const TaskRepresentation& TaskRegistry::get(std::string_view name) const {
  if (const auto* r = find(name)) return *r;
  throw NotFoundError("no task representation '" + std::string(name) + "'");
}

TaskRegistry default_registry() {
  using K = SkillKind;
  TaskRegistry reg;
  reg.add({"serve_order",
           "bring an item from the menu to the calling table",
           {"item"},
           {{K::Navigate, "kitchen_table"},
            {K::Detect, "{item}"},
            {K::Grasp, "{item}"},
            {K::Navigate, "caller_table"},
            {K::FindPlacement, "caller_table"},
            {K::Place, "{item}"},
            {K::Speak, "Here is your {item}. Enjoy!"}},
           {{K::Detect, {{K::Speak, "{help}"}, {K::HandOver, "{item}"}}}}});
  reg.add({"clean_table",
           "collect a used dish from the calling table and return it to the kitchen",
           {},
           {{K::Navigate, "caller_table"},
            {K::Detect, "dish"},
            {K::Grasp, "dish"},
            {K::Navigate, "kitchen_table"},
            {K::Place, "dish"}},
           {}});
  reg.add({"describe_menu",
           "tell the customer what is on the menu",
           {},
           {{K::Speak, "{menu_description}"}},
           {}});
  reg.add({"casual_chat", "reply conversationally", {}, {{K::Speak, "{response}"}}, {}});
  return reg;
}

TaskRegistry parse_registry(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("registry is not valid JSON: ") + e.what());
  }
  TaskRegistry reg;
  try {
    for (const auto& j : doc.at("representations")) {
      TaskRepresentation rep;
      rep.name = j.at("name").get<std::string>();
      rep.description = j.value("description", std::string());
      rep.slots = j.value("slots", std::vector<std::string>{});
      for (const auto& s : j.at("skills")) rep.skills.push_back(spec_from_json(s));
      if (j.contains("recovery")) {
        for (const auto& [kind, steps] : j.at("recovery").items()) {
          auto& out = rep.recovery[parse_skill_kind(kind)];
          for (const auto& s : steps) out.push_back(spec_from_json(s));
        }
      }
      reg.add(std::move(rep));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("registry schema violation: ") + e.what());
  }
  if (reg.size() == 0) throw ParseError("registry defines no representations");
  return reg;
}

std::string dump_registry(const TaskRegistry& registry) {
  nlohmann::json reps = nlohmann::json::array();
  for (const auto& rep : registry.representations()) {
    nlohmann::json j;
    j["name"] = rep.name;
    j["description"] = rep.description;
    j["slots"] = rep.slots;
    j["skills"] = nlohmann::json::array();
    for (const auto& s : rep.skills) j["skills"].push_back(spec_to_json(s));
    if (!rep.recovery.empty()) {
      nlohmann::json rec = nlohmann::json::object();
      for (const auto& [kind, steps] : rep.recovery) {
        auto& arr = rec[to_string(kind)] = nlohmann::json::array();
        for (const auto& s : steps) arr.push_back(spec_to_json(s));
      }
      j["recovery"] = rec;
    }
    reps.push_back(j);
  }
  return nlohmann::json{{"representations", reps}}.dump(2) + "\n";
}

std::string format_understand_line(const ParsedTask& task) {
  std::string line = "task=" + task.name + "; slots=";
  bool first = true;
  for (const auto& [k, v] : task.slots) {
    if (!first) line += ",";
    line += k + ":" + v;
    first = false;
  }
  return line;
}

std::string bind_template(std::string_view tmpl, const std::map<std::string, std::string>& vars) {
  std::string out;
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const auto open = tmpl.find('{', pos);
    if (open == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    out.append(tmpl.substr(pos, open - pos));
    const auto close = tmpl.find('}', open);
    if (close == std::string_view::npos) throw ParameterError("unterminated placeholder");
    const std::string name(tmpl.substr(open + 1, close - open - 1));
    auto it = vars.find(name);
    if (it == vars.end()) throw ParameterError("unbound placeholder {" + name + "}");
    out += it->second;
    pos = close + 1;
  }
  return out;
}

}  // namespace dynmap

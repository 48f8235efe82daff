#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "viewseek/bench.hpp"

namespace viewseek {

using Json = nlohmann::json;

/// Throws Error(Io) when the file cannot be read or written.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

Json to_json(const SceneSpec& scene);
SceneSpec scene_from_json(const Json& j);
Json to_json(const GoalSpec& goal);
GoalSpec goal_from_json(const Json& j);

Json suite_to_json(const std::vector<SuiteRecord>& suite);
std::vector<SuiteRecord> suite_from_json(const Json& j);
std::string dump_suite(const std::vector<SuiteRecord>& suite);

Json to_json(const EpisodeResult& r);
EpisodeResult result_from_json(const Json& j);
Json results_to_json(const std::vector<EpisodeResult>& results);
std::vector<EpisodeResult> results_from_json(const Json& j);

Json to_json(const EfeBreakdown& e);
Json to_json(const EpisodeTrace& trace);
Json to_json(const ExplorationResult& r);

/// Config document with optional "noise", "planner", "belief" and "env" blocks;
/// missing keys keep their defaults. Throws Error(Config) on bad values.
AgentContext context_from_json(const Json& j);
Json to_json(const AgentContext& ctx);

}  // namespace viewseek

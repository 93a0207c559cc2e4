#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "rowpomdp/harness.hpp"
#include "rowpomdp/scenario.hpp"

namespace rowpomdp {

using Json = nlohmann::json;

/// File or format problem; the message names the file.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kSuiteSchema = "rowpomdp.suite/1";
inline constexpr const char* kEpisodeSchema = "rowpomdp.episode/1";

void to_json(Json& j, const Scenario& s);
void from_json(const Json& j, Scenario& s);
void to_json(Json& j, const VehicleState& v);
void to_json(Json& j, const Observation& o);
void to_json(Json& j, const ScenarioConfig& c);

struct SuiteFile {
  std::uint64_t seed = 0;
  ScenarioConfig config;
  std::vector<Scenario> scenarios;
};

void write_suite(const std::filesystem::path& path, const SuiteFile& suite);
SuiteFile read_suite(const std::filesystem::path& path);

/// One JSON object per episode, written on a single line.
Json episode_to_json(const EpisodeResult& e);
/// Restores everything the reports need; observations are not read back.
EpisodeResult episode_from_json(const Json& j);

void write_episodes(const std::filesystem::path& path, const std::vector<EpisodeResult>& episodes);
std::vector<EpisodeResult> read_episodes(const std::filesystem::path& path);

/// YAML run configuration. Unknown keys and ill-typed values throw
/// InvalidConfig naming the key; omitted keys keep their defaults.
RunConfig config_from_yaml(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
std::string config_to_yaml(const RunConfig& cfg);

/// Writes `text` to `path`, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace rowpomdp

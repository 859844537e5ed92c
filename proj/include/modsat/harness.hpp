#pragma once

#include "modsat/checkpoint.hpp"
#include "modsat/codesign_env.hpp"
#include "modsat/ga.hpp"
#include "modsat/morphology.hpp"
#include "modsat/td3.hpp"

#include "json.hpp"

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace modsat {

namespace fs = std::filesystem;
using nlohmann::json;

/// Errors surfaced to the CLI with a stable machine-readable kind.
class HarnessError : public std::runtime_error {
 public:
  HarnessError(std::string kind, const std::string& message) : std::runtime_error(message), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

struct RunConfig {
  std::string algo = "rl";
  int dims = 3;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6};
  long budget = 200000;
  std::string out = "runs";
  int jobs = 1;
  EpisodeConfig episode;
  TrainerConfig trainer;
  GaConfig ga;

  /// Throws HarnessError("invalid_config", ...).
  void validate() const;
  /// Episode config with dims applied and defaults resolved.
  EpisodeConfig resolved_episode() const;
};

/// Flat JSON view of every setting.
json to_json(const RunConfig& cfg);
/// Applies the keys present in `j`; unknown keys are rejected.
void apply_json(RunConfig& cfg, const json& j);
/// Applies one `key=value` override; the value is parsed as JSON when
/// possible and taken as a string otherwise.
void apply_override(RunConfig& cfg, const std::string& assignment);
RunConfig load_config_file(const fs::path& path);

json morphology_to_json(const Morphology& m);
Morphology morphology_from_json(const json& j);

inline constexpr const char* kCurveHeader = "env_steps,mean_return,std_return,mean_final_theta_err_deg";
void write_curve_csv(const fs::path& path, const std::vector<CurvePoint>& curve);
std::vector<CurvePoint> read_curve_csv(const fs::path& path);

/// Row-wise mean over seeds of mean_return and theta error; std_return is
/// the across-seed standard deviation of mean_return.
std::vector<CurvePoint> aggregate_curves(const std::vector<std::vector<CurvePoint>>& per_seed);

fs::path seed_dir(const fs::path& run_dir, std::uint64_t seed);

/// Set by the CLI's SIGINT handler; training loops poll it and persist a
/// partial checkpoint before returning.
std::atomic<bool>& stop_flag();

struct TrainSummary {
  fs::path run_dir;
  std::vector<fs::path> curve_files;
  fs::path aggregate_file;
  bool interrupted = false;
};

/// Trains every seed (in parallel up to cfg.jobs) and writes per-seed curve
/// CSV, checkpoint and config snapshot plus an aggregate CSV.
TrainSummary cmd_train(const RunConfig& cfg);

/// Deterministic evaluation of a checkpoint. Episode seeds are derived
/// from `seed`.
json cmd_eval(const fs::path& checkpoint, int episodes, std::uint64_t seed, const fs::path& trace_out = {});

/// Writes the designed morphology JSON to `out` and its text rendering to
/// `out` + ".txt"; returns the rendering.
std::string cmd_export_morphology(const fs::path& checkpoint, const fs::path& out);

struct CompareSummary {
  int seeds = 0;
  int rl_wins = 0;
  int ga_wins = 0;
  int ties = 0;
  double rl_final_mean = 0.0;
  double ga_final_mean = 0.0;
  /// First env step where the RL mean curve reaches the GA final mean (-1: never).
  long rl_steps_to_ga_final = -1;
  /// First env step where the GA mean curve reaches its own final value.
  long ga_steps_to_final = -1;
  std::string line() const;
};

CompareSummary cmd_compare(const fs::path& rl_dir, const fs::path& ga_dir, const fs::path& out);

/// Environment/trainer configs stored in a checkpoint's metadata.
EpisodeConfig episode_from_checkpoint(const Checkpoint& ckpt);

}  // namespace modsat

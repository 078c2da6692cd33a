#pragma once

// Settings shared by the CLI subcommands. A JSON config file supplies
// defaults; command-line flags override them. Keys mirror the flag names:
//
//   {
//     "system": "duffing",            // pitchfork | duffing | vanderpol | lotka-volterra
//     "ic": [0.1, 0.0],               // one IC; or "ics": [[0.1, 0.0], [0.2, 0.0]]
//     "T": 15,                        // one time; or "times": [11, 12, 13]
//     "epochs": 25000, "n_col": 1024, "fast": false,
//     "learning_rate": 0.001, "hidden": [50, 50, 50, 50],
//     "seed": 0, "seeds": 10, "workers": 1,
//     "regularize": true, "c0": 1.0, "eps": 0.01, "gamma": 0.5, "no_ls": false,
//     "threshold": 0.15, "out": "results", "timing": false
//   }

#include "pinnstab/harness.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pinnstab {

struct RunSettings {
  std::string system = "pitchfork";
  std::vector<StateVec> ics;
  std::vector<double> times;
  std::optional<int> epochs;
  std::optional<int> n_col;
  bool fast = false;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  int seeds = 10;
  std::vector<int> hidden{50, 50, 50, 50};
  bool regularize = false;
  RegularizationConfig reg;
  int workers = 1;
  double threshold = 0.15;
  std::string out = "results";
  bool timing = false;

  /// Epoch and collocation budget: explicit values win over the profile.
  Profile profile() const;
  /// Base training configuration (first IC and T when present).
  TrainingConfig training_config() const;
  ExperimentSpec experiment_spec() const;
};

/// Applies the keys present in a JSON document to `settings`.
void apply_settings_json(RunSettings& settings, const std::string& json_text);
RunSettings load_settings(const std::filesystem::path& path, RunSettings defaults = {});

/// "0.1,0" -> state vector.
StateVec parse_state(const std::string& text);
/// "11,12,13" or "1:20" (inclusive integer range) -> list.
std::vector<double> parse_list(const std::string& text);
/// "0.1,0;0.2,0" -> list of states.
std::vector<StateVec> parse_states(const std::string& text);

}  // namespace pinnstab

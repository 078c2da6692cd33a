#include "pinnstab/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>

namespace pinnstab {

Profile RunSettings::profile() const {
  Profile p = fast ? Profile::fast() : Profile::full();
  if (epochs) p.n_epochs = *epochs;
  if (n_col) p.n_collocation = *n_col;
  return p;
}

TrainingConfig RunSettings::training_config() const {
  TrainingConfig cfg;
  cfg.system = system;
  const SystemDynamics sys = SystemDynamics::from_name(system);
  cfg.x0 = ics.empty() ? StateVec(StateVec::Zero(sys.dimension())) : ics.front();
  if (!times.empty()) cfg.T = times.front();
  const Profile p = profile();
  cfg.n_epochs = p.n_epochs;
  cfg.n_collocation = p.n_collocation;
  cfg.learning_rate = learning_rate;
  cfg.seed = seed;
  cfg.architecture.hidden = hidden;
  if (regularize) cfg.regularization = reg;
  return cfg;
}

ExperimentSpec RunSettings::experiment_spec() const {
  ExperimentSpec spec;
  spec.system = system;
  spec.ics = ics;
  spec.times = times;
  spec.seeds = seeds;
  spec.base = training_config();
  spec.base.regularization.reset();
  spec.master_seed = seed;
  spec.workers = workers;
  spec.criterion.threshold = threshold;
  spec.arms = {Arm::unmodified(), reg.include_ls ? Arm::regularized(reg) : Arm::se_only(reg)};
  return spec;
}

namespace {

StateVec state_from_json(const nlohmann::json& j) {
  if (j.is_number()) return StateVec::Constant(1, j.get<double>());
  const auto v = j.get<std::vector<double>>();
  if (v.empty() || v.size() > 2) throw std::invalid_argument("config: states need 1 or 2 components");
  StateVec s(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) s(static_cast<Eigen::Index>(i)) = v[i];
  return s;
}

}  // namespace

void apply_settings_json(RunSettings& s, const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
  static const char* known[] = {"system", "ic",   "ics",    "T",     "times",      "epochs", "n_col",
                                "fast",   "learning_rate", "seed", "seeds", "hidden", "regularize",
                                "c0",     "eps",  "gamma",  "no_ls", "workers",    "threshold", "out", "timing"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known))
      throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  try {
    if (j.contains("system")) s.system = j["system"].get<std::string>();
    if (j.contains("ic")) s.ics = {state_from_json(j["ic"])};
    if (j.contains("ics")) {
      s.ics.clear();
      for (const auto& e : j["ics"]) s.ics.push_back(state_from_json(e));
    }
    if (j.contains("T")) s.times = {j["T"].get<double>()};
    if (j.contains("times")) s.times = j["times"].get<std::vector<double>>();
    if (j.contains("epochs")) s.epochs = j["epochs"].get<int>();
    if (j.contains("n_col")) s.n_col = j["n_col"].get<int>();
    if (j.contains("fast")) s.fast = j["fast"].get<bool>();
    if (j.contains("learning_rate")) s.learning_rate = j["learning_rate"].get<double>();
    if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("seeds")) s.seeds = j["seeds"].get<int>();
    if (j.contains("hidden")) s.hidden = j["hidden"].get<std::vector<int>>();
    if (j.contains("regularize")) s.regularize = j["regularize"].get<bool>();
    if (j.contains("c0")) s.reg.c0 = j["c0"].get<double>();
    if (j.contains("eps")) s.reg.epsilon = j["eps"].get<double>();
    if (j.contains("gamma")) s.reg.gamma = j["gamma"].get<double>();
    if (j.contains("no_ls")) s.reg.include_ls = !j["no_ls"].get<bool>();
    if (j.contains("workers")) s.workers = j["workers"].get<int>();
    if (j.contains("threshold")) s.threshold = j["threshold"].get<double>();
    if (j.contains("out")) s.out = j["out"].get<std::string>();
    if (j.contains("timing")) s.timing = j["timing"].get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
}

RunSettings load_settings(const std::filesystem::path& path, RunSettings defaults) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  apply_settings_json(defaults, buf.str());
  return defaults;
}

StateVec parse_state(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    std::size_t used = 0;
    v.push_back(std::stod(item, &used));
    if (used != item.size()) throw std::invalid_argument("bad number '" + item + "'");
  }
  if (v.empty() || v.size() > 2) throw std::invalid_argument("state '" + text + "' needs 1 or 2 components");
  StateVec s(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) s(static_cast<Eigen::Index>(i)) = v[i];
  return s;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  if (text.empty()) return out;
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    const int lo = std::stoi(text.substr(0, colon));
    const int hi = std::stoi(text.substr(colon + 1));
    for (int v = lo; v <= hi; ++v) out.push_back(v);
    return out;
  }
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(std::stod(item));
  return out;
}

std::vector<StateVec> parse_states(const std::string& text) {
  std::vector<StateVec> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ';');)
    if (!item.empty()) out.push_back(parse_state(item));
  return out;
}

}  // namespace pinnstab

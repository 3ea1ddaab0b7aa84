#include "helmsweep/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "helmsweep/distsim.hpp"
#include "json.hpp"

namespace helmsweep {

namespace {

using Json = nlohmann::json;

template <typename T>
T Get(const Json& value, std::string_view key) {
  try {
    return value.get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError("config key '" + std::string(key) + "': " + e.what());
  }
}

Json ToJson(const ExperimentConfig& c) {
  Json j;
  j["model"] = c.model;
  j["velocity_file"] = c.velocity_file;
  j["velocity_header"] = c.velocity_header;
  j["dims"] = c.dims;
  j["points_per_wavelength"] = c.points_per_wavelength;
  j["omega"] = c.omega;
  j["wavelengths"] = c.wavelengths;
  j["gamma"] = c.gamma;
  j["pml_amplitude"] = c.pml_amplitude;
  j["pml_exponent"] = c.pml_exponent;
  j["pml_faces"] = c.pml_faces;
  j["alpha"] = c.alpha;
  j["planes_per_panel"] = c.planes_per_panel;
  j["leaf_cutoff"] = c.leaf_cutoff;
  j["selective_inversion"] = c.selective_inversion;
  j["threads"] = c.threads;
  j["forcings"] = c.forcings;
  j["restart"] = c.restart;
  j["tol"] = c.tol;
  j["max_iters"] = c.max_iters;
  j["sim_grid"] = c.sim_grid;
  j["output"] = c.output;
  j["seed"] = c.seed;
  j["timing"] = c.timing;
  return j;
}

}  // namespace

void ExperimentConfig::Validate() const {
  const ModelKind kind = ParseModelKind(model);
  if (kind == ModelKind::kGridded &&
      (velocity_file.empty() || velocity_header.empty())) {
    throw ConfigError("gridded model needs velocity_file and velocity_header");
  }
  for (Int n : dims) {
    if (n < 1) throw ConfigError("dims must be positive");
  }
  if (dims[0] * dims[1] * dims[2] > 2'000'000) {
    throw ConfigError("grid exceeds the 2e6 node cap");
  }
  if (!(points_per_wavelength > 0)) {
    throw ConfigError("points_per_wavelength must be positive");
  }
  if (omega < 0 || wavelengths < 0) {
    throw ConfigError("omega and wavelengths must be non-negative");
  }
  if (gamma < 0) throw ConfigError("gamma must be non-negative");
  if (pml_amplitude < 0) throw ConfigError("pml_amplitude must be non-negative");
  if (pml_exponent < 0) throw ConfigError("pml_exponent must be non-negative");
  if (alpha < 0) throw ConfigError("alpha must be non-negative");
  for (int face = 0; face < 6; ++face) {
    if (pml_faces[face] && gamma >= dims[face / 2]) {
      throw ConfigError("gamma must be smaller than every PML-faced dimension");
    }
  }
  if (planes_per_panel < 1) throw ConfigError("planes_per_panel must be >= 1");
  if (leaf_cutoff < 1) throw ConfigError("leaf_cutoff must be >= 1");
  if (threads < 0) throw ConfigError("threads must be non-negative");
  if (forcings.empty()) throw ConfigError("at least one forcing is required");
  ForcingKinds();
  if (restart < 1) throw ConfigError("restart must be >= 1");
  if (!(tol > 0)) throw ConfigError("tol must be positive");
  if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (!sim_grid.empty()) distsim::ParseGrid(sim_grid);
  if (timing != "wall" && timing != "none") {
    throw ConfigError("timing must be 'wall' or 'none'");
  }
}

double ExperimentConfig::ResolvedOmega(double min_speed,
                                       const Point& extents) const {
  if (omega > 0) return omega;
  const double per_side =
      wavelengths > 0
          ? wavelengths
          : static_cast<double>(*std::max_element(dims.begin(), dims.end())) /
                points_per_wavelength;
  const double side = *std::max_element(extents.begin(), extents.end());
  return 2 * std::numbers::pi * min_speed * per_side / side;
}

std::vector<ForcingKind> ExperimentConfig::ForcingKinds() const {
  std::vector<ForcingKind> kinds;
  for (const std::string& name : forcings) kinds.push_back(ParseForcing(name));
  return kinds;
}

ExperimentConfig ParseConfig(std::string_view json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "model") c.model = Get<std::string>(value, key);
    else if (key == "velocity_file") c.velocity_file = Get<std::string>(value, key);
    else if (key == "velocity_header") c.velocity_header = Get<std::string>(value, key);
    else if (key == "dims") c.dims = Get<std::array<Int, 3>>(value, key);
    else if (key == "points_per_wavelength") c.points_per_wavelength = Get<double>(value, key);
    else if (key == "omega") c.omega = Get<double>(value, key);
    else if (key == "wavelengths") c.wavelengths = Get<double>(value, key);
    else if (key == "gamma") c.gamma = Get<Int>(value, key);
    else if (key == "pml_amplitude") c.pml_amplitude = Get<double>(value, key);
    else if (key == "pml_exponent") c.pml_exponent = Get<int>(value, key);
    else if (key == "pml_faces") c.pml_faces = Get<std::array<bool, 6>>(value, key);
    else if (key == "alpha") c.alpha = Get<double>(value, key);
    else if (key == "planes_per_panel") c.planes_per_panel = Get<Int>(value, key);
    else if (key == "leaf_cutoff") c.leaf_cutoff = Get<Int>(value, key);
    else if (key == "selective_inversion") c.selective_inversion = Get<bool>(value, key);
    else if (key == "threads") c.threads = Get<Int>(value, key);
    else if (key == "forcings") c.forcings = Get<std::vector<std::string>>(value, key);
    else if (key == "restart") c.restart = Get<Int>(value, key);
    else if (key == "tol") c.tol = Get<double>(value, key);
    else if (key == "max_iters") c.max_iters = Get<Int>(value, key);
    else if (key == "sim_grid") c.sim_grid = Get<std::string>(value, key);
    else if (key == "output") c.output = Get<std::string>(value, key);
    else if (key == "seed") c.seed = Get<std::uint64_t>(value, key);
    else if (key == "timing") c.timing = Get<std::string>(value, key);
    else throw ConfigError("unknown config key '" + key + "'");
  }
  c.Validate();
  return c;
}

ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream text;
  text << in.rdbuf();
  return ParseConfig(text.str());
}

std::string SerializeConfig(const ExperimentConfig& config) {
  return ToJson(config).dump(2);
}

}  // namespace helmsweep

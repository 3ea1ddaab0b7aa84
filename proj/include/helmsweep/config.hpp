#ifndef HELMSWEEP_CONFIG_HPP_
#define HELMSWEEP_CONFIG_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "helmsweep/types.hpp"
#include "helmsweep/velocity.hpp"

namespace helmsweep {

// Everything one experiment needs. Serialized as a JSON object whose keys are
// the field names below; unknown keys are rejected.
struct ExperimentConfig {
  std::string model = "homogeneous";
  // Gridded models only.
  std::string velocity_file;
  std::string velocity_header;

  std::array<Int, 3> dims{16, 16, 16};
  double points_per_wavelength = 10;
  // Angular frequency; when zero it follows from 'wavelengths', and when that
  // is zero too, from max(dims) / points_per_wavelength wavelengths per side.
  double omega = 0;
  double wavelengths = 0;

  Int gamma = 2;
  double pml_amplitude = 0.65;
  int pml_exponent = 3;
  // x1 low, x1 high, x2 low, x2 high, x3 low, x3 high
  std::array<bool, 6> pml_faces{true, true, true, true, true, true};
  double alpha = 6.283185307179586;

  Int planes_per_panel = 4;
  Int leaf_cutoff = 32;
  bool selective_inversion = true;
  Int threads = 0;

  std::vector<std::string> forcings{"f0"};
  Int restart = 20;
  double tol = 1e-5;
  Int max_iters = 500;

  // "RxC"; empty disables the distributed-layout simulation.
  std::string sim_grid;
  // Output prefix; empty writes nothing.
  std::string output;
  std::uint64_t seed = 1;
  // "wall" records elapsed seconds; "none" writes zeros so outputs depend on
  // the configuration only.
  std::string timing = "wall";

  // Checks every field against the preconditions of the modules it feeds.
  void Validate() const;

  // Angular frequency after resolving 'wavelengths' and the default.
  double ResolvedOmega(double min_speed, const Point& extents) const;
  std::vector<ForcingKind> ForcingKinds() const;
};

ExperimentConfig ParseConfig(std::string_view json_text);
ExperimentConfig LoadConfig(const std::string& path);
std::string SerializeConfig(const ExperimentConfig& config);

}  // namespace helmsweep

#endif  // HELMSWEEP_CONFIG_HPP_

#ifndef HELMSWEEP_VELOCITY_HPP_
#define HELMSWEEP_VELOCITY_HPP_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "helmsweep/types.hpp"

namespace helmsweep {

enum class ModelKind {
  kHomogeneous,
  kBarrier,
  kWedge,
  kTwoLayer,
  kWaveguide,
  kGridded,
};

std::string_view ModelKindName(ModelKind kind);
ModelKind ParseModelKind(std::string_view name);

// A wave-speed field over an axis-aligned box [0,L1]x[0,L2]x[0,L3].
//
// The analytic models live on the unit cube. Gridded models carry a 3D array
// of samples (i1 fastest) placed at j*L/(n-1) along each axis and are looked
// up by nearest sample.
class VelocityModel {
 public:
  static VelocityModel Analytic(ModelKind kind);
  static VelocityModel Gridded(std::array<Int, 3> dims, Point extents,
                               std::vector<double> speeds);

  // Reads a flat little-endian float32 file plus a text header holding
  // "n1 n2 n3" followed by "L1 L2 L3".
  static VelocityModel LoadGridded(const std::filesystem::path& data_path,
                                   const std::filesystem::path& header_path);

  ModelKind Kind() const { return kind_; }
  const Point& Extents() const { return extents_; }
  const std::array<Int, 3>& GridDims() const { return grid_dims_; }

  // Wave speed at a point of the closed box. Throws DomainError outside it.
  double SpeedAt(const Point& x) const;

  double MinSpeed() const { return min_speed_; }
  double MaxSpeed() const { return max_speed_; }

  // 2*pi*c_min/omega.
  double MinWavelength(double omega) const;

  bool Contains(const Point& x) const;

 private:
  VelocityModel() = default;

  ModelKind kind_ = ModelKind::kHomogeneous;
  Point extents_{1.0, 1.0, 1.0};
  std::array<Int, 3> grid_dims_{0, 0, 0};
  std::vector<double> samples_;
  double min_speed_ = 1.0;
  double max_speed_ = 1.0;
};

enum class ForcingKind {
  kSingleShot,    // f0
  kThreeShot,     // f1
  kGaussianBeam,  // f2
  kPlaneWave,     // f3
};

std::string_view ForcingName(ForcingKind kind);
ForcingKind ParseForcing(std::string_view name);

struct Forcing {
  ForcingKind kind = ForcingKind::kSingleShot;
  std::array<Point, 3> centers{{{0.5, 0.5, 0.1}, {0.25, 0.25, 0.1},
                                {0.75, 0.75, 0.5}}};
  Point direction{1.0, 1.0, -1.0};  // normalized by MakeForcing
  Int resolution = 1;               // n: shot amplitude and width

  void Validate() const;
};

// Standard forcing with the reference shot centers and direction (1,1,-1)/sqrt(3).
Forcing MakeForcing(ForcingKind kind, Int resolution);

// Evaluates the forcing at a point of the unit cube. Callers on scaled boxes
// pass proportional coordinates x/L.
Complex ForcingAt(const Forcing& forcing, const Point& x, double omega);

// Polynomial takeoff for the PML damping profile. With layer thickness
// delta = gamma*h and exponent p,
//
//   sigma(t) = (2*pi*C/delta) * (min(t,delta)/delta)^p,   t >= 0,
//
// so the integrated damping through the layer, 2*pi*C/(p+1), does not depend
// on the grid spacing.
struct PmlProfile {
  Int gamma = 0;
  double amplitude = 0;
  int exponent = 3;
  double spacing = 1;

  double Thickness() const { return static_cast<double>(gamma) * spacing; }
  void Validate() const;
};

double PmlSigma(const PmlProfile& profile, double depth_into_layer);

}  // namespace helmsweep

#endif  // HELMSWEEP_VELOCITY_HPP_

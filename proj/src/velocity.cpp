#include "helmsweep/velocity.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

namespace helmsweep {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

double SquaredDistance(const Point& a, const Point& b) {
  double sum = 0;
  for (int k = 0; k < 3; ++k) {
    const double diff = a[k] - b[k];
    sum += diff * diff;
  }
  return sum;
}

double Dot(const Point& a, const Point& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

double ShotAt(const Point& x, const Point& center, Int n) {
  const double nd = static_cast<double>(n);
  return nd * std::exp(-10.0 * nd * SquaredDistance(x, center));
}

void CheckUnitCube(const Point& x) {
  for (double v : x) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw DomainError("forcing point lies outside the unit cube");
    }
  }
}

}  // namespace

std::string_view ModelKindName(ModelKind kind) {
  switch (kind) {
    case ModelKind::kHomogeneous:
      return "homogeneous";
    case ModelKind::kBarrier:
      return "barrier";
    case ModelKind::kWedge:
      return "wedge";
    case ModelKind::kTwoLayer:
      return "two-layer";
    case ModelKind::kWaveguide:
      return "waveguide";
    case ModelKind::kGridded:
      return "gridded";
  }
  return "unknown";
}

ModelKind ParseModelKind(std::string_view name) {
  for (ModelKind kind :
       {ModelKind::kHomogeneous, ModelKind::kBarrier, ModelKind::kWedge,
        ModelKind::kTwoLayer, ModelKind::kWaveguide, ModelKind::kGridded}) {
    if (ModelKindName(kind) == name) return kind;
  }
  throw ConfigError("unknown velocity model '" + std::string(name) + "'");
}

VelocityModel VelocityModel::Analytic(ModelKind kind) {
  VelocityModel model;
  model.kind_ = kind;
  switch (kind) {
    case ModelKind::kHomogeneous:
      model.min_speed_ = model.max_speed_ = 1.0;
      break;
    case ModelKind::kBarrier:
      model.min_speed_ = 1.0;
      model.max_speed_ = 1e10;
      break;
    case ModelKind::kWedge:
      model.min_speed_ = 1.5;
      model.max_speed_ = 3.0;
      break;
    case ModelKind::kTwoLayer:
      model.min_speed_ = 1.0;
      model.max_speed_ = 4.0;
      break;
    case ModelKind::kWaveguide:
      model.min_speed_ = 1.25 * (1.0 - 0.4);
      model.max_speed_ = 1.25;
      break;
    case ModelKind::kGridded:
      throw ConfigError("gridded models need sample data");
  }
  return model;
}

VelocityModel VelocityModel::Gridded(std::array<Int, 3> dims, Point extents,
                                     std::vector<double> speeds) {
  for (int k = 0; k < 3; ++k) {
    if (dims[k] < 1) throw ConfigError("gridded model dims must be >= 1");
    if (!(extents[k] > 0)) {
      throw ConfigError("gridded model extents must be positive");
    }
  }
  if (static_cast<Int>(speeds.size()) != dims[0] * dims[1] * dims[2]) {
    throw ConfigError("gridded model sample count does not match dims");
  }
  const auto [lo, hi] = std::minmax_element(speeds.begin(), speeds.end());
  if (!(*lo > 0) || !std::isfinite(*hi)) {
    throw ConfigError("gridded wave speeds must be finite and positive");
  }
  VelocityModel model;
  model.kind_ = ModelKind::kGridded;
  model.grid_dims_ = dims;
  model.extents_ = extents;
  model.min_speed_ = *lo;
  model.max_speed_ = *hi;
  model.samples_ = std::move(speeds);
  return model;
}

VelocityModel VelocityModel::LoadGridded(
    const std::filesystem::path& data_path,
    const std::filesystem::path& header_path) {
  std::ifstream header(header_path);
  if (!header) {
    throw ConfigError("cannot open velocity header " + header_path.string());
  }
  std::array<Int, 3> dims{};
  Point extents{};
  if (!(header >> dims[0] >> dims[1] >> dims[2] >> extents[0] >> extents[1] >>
        extents[2])) {
    throw ConfigError("malformed velocity header " + header_path.string());
  }
  for (Int d : dims) {
    if (d < 1) throw ConfigError("gridded model dims must be >= 1");
  }
  const Int count = dims[0] * dims[1] * dims[2];

  std::ifstream data(data_path, std::ios::binary);
  if (!data) {
    throw ConfigError("cannot open velocity data " + data_path.string());
  }
  std::vector<unsigned char> raw(static_cast<size_t>(count) * 4);
  data.read(reinterpret_cast<char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
  if (data.gcount() != static_cast<std::streamsize>(raw.size())) {
    throw ConfigError("velocity data is shorter than its header declares");
  }
  std::vector<double> speeds(count);
  for (Int i = 0; i < count; ++i) {
    const unsigned char* b = raw.data() + 4 * i;
    const std::uint32_t bits = std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) |
                               (std::uint32_t(b[2]) << 16) |
                               (std::uint32_t(b[3]) << 24);
    speeds[i] = static_cast<double>(std::bit_cast<float>(bits));
  }
  return Gridded(dims, extents, std::move(speeds));
}

bool VelocityModel::Contains(const Point& x) const {
  for (int k = 0; k < 3; ++k) {
    if (!(x[k] >= 0.0 && x[k] <= extents_[k])) return false;
  }
  return true;
}

double VelocityModel::SpeedAt(const Point& x) const {
  if (!Contains(x)) throw DomainError("point lies outside the velocity box");
  switch (kind_) {
    case ModelKind::kHomogeneous:
      return 1.0;
    case ModelKind::kBarrier:
      if (x[1] >= 0.25 && x[1] <= 0.3 && x[2] <= 0.75) return 1e10;
      return 1.0;
    case ModelKind::kWedge:
      if (x[2] <= 0.4 + 0.1 * x[1]) return 2.0;
      if (x[2] <= 0.8 - 0.2 * x[1]) return 1.5;
      return 3.0;
    case ModelKind::kTwoLayer:
      return x[1] < 0.5 ? 4.0 : 1.0;
    case ModelKind::kWaveguide: {
      const double r2 = (x[0] - 0.5) * (x[0] - 0.5) + (x[1] - 0.5) * (x[1] - 0.5);
      return 1.25 * (1.0 - 0.4 * std::exp(-32.0 * r2));
    }
    case ModelKind::kGridded: {
      std::array<Int, 3> j{};
      for (int k = 0; k < 3; ++k) {
        const Int n = grid_dims_[k];
        if (n == 1) continue;
        const double t = x[k] / extents_[k] * static_cast<double>(n - 1);
        j[k] = std::clamp<Int>(std::llround(t), 0, n - 1);
      }
      return samples_[j[0] + grid_dims_[0] * (j[1] + grid_dims_[1] * j[2])];
    }
  }
  return 1.0;
}

double VelocityModel::MinWavelength(double omega) const {
  if (!(omega > 0)) throw DomainError("omega must be positive");
  return kTwoPi * min_speed_ / omega;
}

std::string_view ForcingName(ForcingKind kind) {
  switch (kind) {
    case ForcingKind::kSingleShot:
      return "f0";
    case ForcingKind::kThreeShot:
      return "f1";
    case ForcingKind::kGaussianBeam:
      return "f2";
    case ForcingKind::kPlaneWave:
      return "f3";
  }
  return "unknown";
}

ForcingKind ParseForcing(std::string_view name) {
  for (ForcingKind kind :
       {ForcingKind::kSingleShot, ForcingKind::kThreeShot,
        ForcingKind::kGaussianBeam, ForcingKind::kPlaneWave}) {
    if (ForcingName(kind) == name) return kind;
  }
  throw ConfigError("unknown forcing '" + std::string(name) + "'");
}

void Forcing::Validate() const {
  if (std::abs(std::sqrt(Dot(direction, direction)) - 1.0) > 1e-12) {
    throw ConfigError("forcing direction must be a unit vector");
  }
  for (const Point& c : centers) {
    for (double v : c) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw ConfigError("shot centers must lie inside the unit cube");
      }
    }
  }
  if (resolution < 1) throw ConfigError("forcing resolution must be >= 1");
}

Forcing MakeForcing(ForcingKind kind, Int resolution) {
  Forcing forcing;
  forcing.kind = kind;
  forcing.resolution = resolution;
  const double inv = 1.0 / std::sqrt(3.0);
  forcing.direction = {inv, inv, -inv};
  forcing.Validate();
  return forcing;
}

Complex ForcingAt(const Forcing& forcing, const Point& x, double omega) {
  CheckUnitCube(x);
  const Int n = forcing.resolution;
  switch (forcing.kind) {
    case ForcingKind::kSingleShot:
      return {ShotAt(x, forcing.centers[0], n), 0.0};
    case ForcingKind::kThreeShot: {
      double sum = 0;
      for (const Point& c : forcing.centers) sum += ShotAt(x, c, n);
      return {sum, 0.0};
    }
    case ForcingKind::kGaussianBeam: {
      const double envelope =
          std::exp(-4.0 * omega * SquaredDistance(x, forcing.centers[2]));
      return std::polar(envelope, omega * Dot(x, forcing.direction));
    }
    case ForcingKind::kPlaneWave:
      return std::polar(1.0, omega * Dot(x, forcing.direction));
  }
  return {};
}

void PmlProfile::Validate() const {
  if (gamma < 0) throw ConfigError("PML size must be nonnegative");
  if (!(amplitude >= 0)) throw ConfigError("PML amplitude must be nonnegative");
  if (exponent < 1) throw ConfigError("PML exponent must be >= 1");
  if (!(spacing > 0)) throw ConfigError("grid spacing must be positive");
}

double PmlSigma(const PmlProfile& profile, double depth_into_layer) {
  if (!(depth_into_layer >= 0)) {
    throw DomainError("PML depth must be nonnegative");
  }
  const double thickness = profile.Thickness();
  if (profile.gamma == 0 || profile.amplitude == 0 || depth_into_layer == 0) {
    return 0.0;
  }
  const double t = std::min(depth_into_layer, thickness) / thickness;
  return kTwoPi * profile.amplitude / thickness * std::pow(t, profile.exponent);
}

}  // namespace helmsweep

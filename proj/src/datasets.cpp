#include "madm/datasets.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <vector>

#include "madm/error.hpp"
#include "madm/random.hpp"

namespace madm {

std::string to_string(DatasetName name) {
  switch (name) {
    case DatasetName::Spiral: return "spiral";
    case DatasetName::Funnel: return "funnel";
    case DatasetName::Sierpinski: return "sierpinski";
    case DatasetName::Pinwheel: return "pinwheel";
    case DatasetName::Checkerboard: return "checkerboard";
  }
  return "unknown";
}

DatasetName dataset_name_from_string(const std::string& name) {
  if (name == "spiral") return DatasetName::Spiral;
  if (name == "funnel") return DatasetName::Funnel;
  if (name == "sierpinski") return DatasetName::Sierpinski;
  if (name == "pinwheel") return DatasetName::Pinwheel;
  if (name == "checkerboard") return DatasetName::Checkerboard;
  throw ConfigError("unknown dataset '" + name +
                    "' (expected spiral, funnel, sierpinski, pinwheel, checkerboard)");
}

bool checkerboard_occupied(const Eigen::Vector2d& p) {
  if (!(std::abs(p.x()) <= 2.0 && std::abs(p.y()) <= 2.0)) return false;
  const auto cx = static_cast<long>(std::floor(p.x()));
  const auto cy = static_cast<long>(std::floor(p.y()));
  return ((cx + cy) % 2 + 2) % 2 == 0;
}

BoundingBox bounding_box(const Eigen::Matrix2Xd& points) {
  return {points.rowwise().minCoeff(), points.rowwise().maxCoeff()};
}

namespace {

Eigen::Vector2d spiral_point(Rng& rng) {
  const double theta = SpiralForm::theta_min + (SpiralForm::theta_max - SpiralForm::theta_min) * rng.uniform();
  const double rho = SpiralForm::a * theta;
  return {rho * std::cos(theta) + SpiralForm::noise * rng.normal(),
          rho * std::sin(theta) + SpiralForm::noise * rng.normal()};
}

// Neal's funnel marginals: y ~ N(0, 1), x | y ~ N(0, exp(y)).
Eigen::Vector2d funnel_point(Rng& rng) {
  const double y = rng.normal();
  const double x = std::exp(0.5 * y) * rng.normal();
  return {x, y};
}

Eigen::Vector2d sierpinski_point(Rng& rng) {
  const auto& v = SierpinskiForm::vertices;
  // Uniform start in the triangle via reflected barycentric coordinates.
  double a = rng.uniform();
  double b = rng.uniform();
  if (a + b > 1.0) {
    a = 1.0 - a;
    b = 1.0 - b;
  }
  Eigen::Vector2d p{v[0][0] + a * (v[1][0] - v[0][0]) + b * (v[2][0] - v[0][0]),
                    v[0][1] + a * (v[1][1] - v[0][1]) + b * (v[2][1] - v[0][1])};
  for (int i = 0; i < SierpinskiForm::iterations; ++i) {
    const auto k = static_cast<int>(rng.uniform() * 3.0);
    p = 0.5 * (p + Eigen::Vector2d{v[k][0], v[k][1]});
  }
  return p;
}

Eigen::Vector2d pinwheel_point(Rng& rng) {
  const auto blade = static_cast<int>(rng.uniform() * PinwheelForm::blades);
  const double radial = 1.0 + PinwheelForm::radial_std * rng.normal();
  const double tangential = PinwheelForm::tangential_std * rng.normal();
  const double angle = 2.0 * std::numbers::pi * blade / PinwheelForm::blades + PinwheelForm::rate * std::exp(radial);
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return PinwheelForm::scale * Eigen::Vector2d{c * radial - s * tangential, s * radial + c * tangential};
}

Eigen::Vector2d checkerboard_point(Rng& rng) {
  const double x = 4.0 * rng.uniform() - 2.0;
  const double shift = rng.uniform() < 0.5 ? 0.0 : 2.0;
  const auto column = static_cast<long>(std::floor(x));
  const double y = rng.uniform() - shift + static_cast<double>(((column % 2) + 2) % 2);
  return {x, y};
}

}  // namespace

Dataset2D generate_dataset(DatasetName name, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw DomainError("generate_dataset: n must be at least 1");
  Rng rng(seed, 0xda7a5e7ULL);
  Dataset2D out;
  out.name = name;
  out.points.resize(2, static_cast<Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::Vector2d p;
    switch (name) {
      case DatasetName::Spiral: p = spiral_point(rng); break;
      case DatasetName::Funnel: p = funnel_point(rng); break;
      case DatasetName::Sierpinski: p = sierpinski_point(rng); break;
      case DatasetName::Pinwheel: p = pinwheel_point(rng); break;
      case DatasetName::Checkerboard: p = checkerboard_point(rng); break;
    }
    out.points.col(static_cast<Index>(i)) = p;
  }
  out.bounds = bounding_box(out.points);
  return out;
}

Dataset2D generate_dataset(const std::string& name, std::size_t n, std::uint64_t seed) {
  return generate_dataset(dataset_name_from_string(name), n, seed);
}

void save_dataset_csv(const Dataset2D& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  char line[96];
  for (Index i = 0; i < data.points.cols(); ++i) {
    std::snprintf(line, sizeof line, "%.17g,%.17g\n", data.points(0, i), data.points(1, i));
    out << line;
  }
}

Dataset2D load_dataset_csv(const std::filesystem::path& path, DatasetName name) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::vector<double> xs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected x,y");
    try {
      xs.push_back(std::stod(line.substr(0, comma)));
      xs.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": malformed number");
    }
  }
  if (xs.empty()) throw ConfigError(path.string() + ": no points");
  Dataset2D out;
  out.name = name;
  out.points = Eigen::Map<Eigen::Matrix2Xd>(xs.data(), 2, static_cast<Index>(xs.size() / 2));
  if (!out.points.allFinite()) throw ConfigError(path.string() + ": non-finite coordinates");
  out.bounds = bounding_box(out.points);
  return out;
}

}  // namespace madm

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include "madm/linalg.hpp"

namespace madm {

enum class DatasetName { Spiral, Funnel, Sierpinski, Pinwheel, Checkerboard };

std::string to_string(DatasetName name);
DatasetName dataset_name_from_string(const std::string& name);

struct BoundingBox {
  Eigen::Vector2d lo;
  Eigen::Vector2d hi;

  bool contains(const Eigen::Vector2d& p) const {
    return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
  }
};

// A 2D point cloud, one point per column.
struct Dataset2D {
  DatasetName name = DatasetName::Checkerboard;
  Eigen::Matrix2Xd points;
  BoundingBox bounds;

  std::size_t size() const { return static_cast<std::size_t>(points.cols()); }
};

// Archimedean spiral rho = a * theta with isotropic Gaussian jitter.
struct SpiralForm {
  static constexpr double a = 0.5 / 3.141592653589793;
  static constexpr double theta_min = 0.5 * 3.141592653589793;
  static constexpr double theta_max = 4.0 * 3.141592653589793;
  static constexpr double noise = 0.03;
};

struct SierpinskiForm {
  static constexpr int iterations = 10;
  static constexpr double vertices[3][2] = {{-2.0, -1.5}, {2.0, -1.5}, {0.0, 1.96410161513775}};
};

struct PinwheelForm {
  static constexpr int blades = 5;
  static constexpr double radial_std = 0.3;
  static constexpr double tangential_std = 0.1;
  static constexpr double rate = 0.25;
  static constexpr double scale = 1.5;
};

// True when p lies in an occupied cell of the [-2, 2]^2 checkerboard.
bool checkerboard_occupied(const Eigen::Vector2d& p);

/// Deterministic generator for the named 2D dataset.
Dataset2D generate_dataset(DatasetName name, std::size_t n, std::uint64_t seed);
Dataset2D generate_dataset(const std::string& name, std::size_t n, std::uint64_t seed);

// CSV with two columns x,y and no header, 17 significant digits.
void save_dataset_csv(const Dataset2D& data, const std::filesystem::path& path);
Dataset2D load_dataset_csv(const std::filesystem::path& path, DatasetName name = DatasetName::Checkerboard);

BoundingBox bounding_box(const Eigen::Matrix2Xd& points);

}  // namespace madm

#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace strainmech {

using Vector3d = Eigen::Vector3d;
using Vector8d = Eigen::Matrix<double, 8, 1>;
using Matrix2d = Eigen::Matrix2d;
using Matrix3d = Eigen::Matrix3d;
using Matrix8d = Eigen::Matrix<double, 8, 8>;
using Matrix38d = Eigen::Matrix<double, 3, 8>;
using VectorXd = Eigen::VectorXd;

// Thrown for invalid problem definitions (bad geometry, misaligned regions,
// inconsistent targets). Maps to CLI exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when equilibrium or adjoint solves fail beyond recovery.
// Maps to CLI exit code 3.
struct SolverError : std::runtime_error {
  explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown on unwritable outputs or unreadable inputs. Maps to CLI exit code 4.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace strainmech

#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace riemspline {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Thrown when a metric is not positive definite at an evaluation point.
class DegenerateMetricError : public std::runtime_error {
 public:
  DegenerateMetricError(double eigenvalue, double largest)
      : std::runtime_error("degenerate metric: eigenvalue " + std::to_string(eigenvalue) +
                           " (largest " + std::to_string(largest) + ")"),
        eigenvalue(eigenvalue),
        largest(largest) {}
  double eigenvalue;
  double largest;
};

/// Thrown when an integrated state stops being finite.
class BlowUpError : public std::runtime_error {
 public:
  explicit BlowUpError(double time)
      : std::runtime_error("blow-up: non-finite state at t = " + std::to_string(time)), time(time) {}
  double time;
};

/// Scenario / parameter file errors, with the offending line when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line(line) {}
  int line;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense rank-3 array with all extents equal to dim.
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(int dim) : dim_(dim), v_(static_cast<size_t>(dim) * dim * dim, 0.0) {}

  int dim() const { return dim_; }
  double& operator()(int a, int b, int c) { return v_[static_cast<size_t>((a * dim_ + b) * dim_ + c)]; }
  double operator()(int a, int b, int c) const { return v_[static_cast<size_t>((a * dim_ + b) * dim_ + c)]; }

  double max_abs() const {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
  }

  Tensor3& operator+=(const Tensor3& o) {
    for (size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
    return *this;
  }
  Tensor3& operator*=(double s) {
    for (double& x : v_) x *= s;
    return *this;
  }
  friend Tensor3 operator-(const Tensor3& a, const Tensor3& b) {
    Tensor3 r(a.dim_);
    for (size_t i = 0; i < a.v_.size(); ++i) r.v_[i] = a.v_[i] - b.v_[i];
    return r;
  }
  friend Tensor3 operator+(const Tensor3& a, const Tensor3& b) {
    Tensor3 r(a.dim_);
    for (size_t i = 0; i < a.v_.size(); ++i) r.v_[i] = a.v_[i] + b.v_[i];
    return r;
  }
  friend Tensor3 operator*(double s, const Tensor3& a) {
    Tensor3 r = a;
    r *= s;
    return r;
  }
  friend Tensor3 operator/(const Tensor3& a, double s) {
    Tensor3 r = a;
    r *= 1.0 / s;
    return r;
  }

 private:
  int dim_ = 0;
  std::vector<double> v_;
};

/// Dense rank-4 array with all extents equal to dim.
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(int dim) : dim_(dim), v_(static_cast<size_t>(dim) * dim * dim * dim, 0.0) {}

  int dim() const { return dim_; }
  double& operator()(int a, int b, int c, int d) {
    return v_[static_cast<size_t>(((a * dim_ + b) * dim_ + c) * dim_ + d)];
  }
  double operator()(int a, int b, int c, int d) const {
    return v_[static_cast<size_t>(((a * dim_ + b) * dim_ + c) * dim_ + d)];
  }

  double max_abs() const {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
  }

 private:
  int dim_ = 0;
  std::vector<double> v_;
};

enum class LogLevel { quiet = 0, info = 1, debug = 2 };

/// Log level from RIEMSPLINE_LOG (quiet|info|debug), default info.
LogLevel log_level();
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace riemspline

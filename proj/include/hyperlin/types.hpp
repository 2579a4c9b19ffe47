#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace hyperlin {

// Upper bound on every working dimension. Foliation grids live on X x X_-,
// so this caps the phase space at four dimensions.
inline constexpr int kMaxDim = 8;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
using IndexSet = std::vector<int>;

struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const Vec& x, double slack = 0.0) const;
  double half_width(int axis) const { return 0.5 * (hi[axis] - lo[axis]); }

  static Box centered(int dim, double half_width);
  static Box product(const Box& a, const Box& b);
};

// Structure-of-arrays point batch: coordinate c of point i is data[c * count + i].
struct PointBatch {
  int dim = 0;
  std::size_t count = 0;
  std::vector<double> data;

  PointBatch() = default;
  PointBatch(int d, std::size_t n) : dim(d), count(n), data(static_cast<std::size_t>(d) * n, 0.0) {}

  double* coord(int c) { return data.data() + static_cast<std::size_t>(c) * count; }
  const double* coord(int c) const { return data.data() + static_cast<std::size_t>(c) * count; }
  Vec point(std::size_t i) const;
  void set_point(std::size_t i, const Vec& x);
};

Vec gather(const Vec& x, const IndexSet& idx);
void scatter(Vec& x, const IndexSet& idx, const Vec& part);
Mat gather(const Mat& a, const IndexSet& rows, const IndexSet& cols);
IndexSet complement(const IndexSet& idx, int n);
IndexSet concat(const IndexSet& a, const IndexSet& b);

}  // namespace hyperlin

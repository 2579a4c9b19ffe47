#pragma once

#include "hyperlin/types.hpp"

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace hyperlin {

// Values of a map R^dim -> R^codim on a uniform tensor grid, evaluated by
// multilinear interpolation.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(Box box, std::vector<int> resolution, int codim);

  static GridFunction sample(const Box& box, const std::vector<int>& resolution, int codim,
                             const std::function<Vec(const Vec&)>& f);

  int dim() const { return box_.dim(); }
  int codim() const { return codim_; }
  const Box& box() const { return box_; }
  const std::vector<int>& resolution() const { return res_; }
  long node_count() const { return nodes_; }
  double spacing(int axis) const { return h_[axis]; }
  long stride(int axis) const { return stride_[axis]; }

  Vec node(long index) const;
  std::vector<int> node_multi_index(long index) const;
  long node_index(const std::vector<int>& multi) const;
  Vec value(long index) const;
  void set_value(long index, const Vec& v);
  double* raw(long index) { return values_.data() + index * codim_; }
  const double* raw(long index) const { return values_.data() + index * codim_; }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  // Throws OutsideBox when x lies outside the box (with a relative slack of 1e-9).
  Vec eval(const Vec& x) const;
  // Linear extrapolation from the boundary cells.
  Vec eval_extrapolated(const Vec& x) const;
  // Central differences of the interpolant with the grid step (one-sided at the edges).
  Mat derivative(const Vec& x) const;
  // Tensor Catmull-Rom interpolation: C^1, exact on quadratics, with
  // quadratically extrapolated ghost nodes; outside the box the boundary
  // cubic is continued. The derivative is that of the same interpolant.
  Vec eval_cubic(const Vec& x) const;
  Mat derivative_cubic(const Vec& x) const;
  // Batched interpolation of every component through the dispatched kernel.
  void eval_batch(const PointBatch& points, PointBatch& out) const;

  void write_csv(std::ostream& os) const;
  static GridFunction read_csv(std::istream& is);
  void save(const std::string& path) const;
  static GridFunction load(const std::string& path);

 private:
  void init();
  void cubic(const Vec& x, Vec* value, Mat* jac) const;

  Box box_;
  std::vector<int> res_;
  int codim_ = 0;
  long nodes_ = 0;
  std::vector<double> h_;
  std::vector<double> inv_h_;
  std::vector<long> stride_;
  std::vector<double> values_;
};

// Uniform nodes on [lo, hi] with n points.
std::vector<double> linspace(double lo, double hi, int n);

}  // namespace hyperlin

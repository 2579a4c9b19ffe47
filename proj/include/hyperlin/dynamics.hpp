#pragma once

#include "hyperlin/types.hpp"

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace hyperlin::dynamics {

// A map F fixing the origin, with linear part Lambda = DF(O).
class Map {
 public:
  Map(Mat linear, Box domain);
  virtual ~Map() = default;

  int dim() const { return static_cast<int>(linear_.rows()); }
  const Mat& linear() const { return linear_; }
  const Box& domain() const { return domain_; }

  virtual Vec eval(const Vec& x) const = 0;
  // Central differences unless overridden.
  virtual Mat jacobian(const Vec& x) const;
  // out holds dim components per point.
  virtual void eval_batch(const PointBatch& in, PointBatch& out) const;
  // out holds dim*dim components per point, row-major.
  virtual void jacobian_batch(const PointBatch& in, PointBatch& out) const;
  // Radius beyond which F coincides with its linear part (infinite if never).
  virtual double linear_beyond() const { return std::numeric_limits<double>::infinity(); }

  Vec nonlinear(const Vec& x) const { return eval(x) - linear_ * x; }

 private:
  Mat linear_;
  Box domain_;
};

using MapPtr = std::shared_ptr<const Map>;

Box unbounded_box(int dim);

struct PolyTerm {
  double coef = 0.0;
  std::vector<int> exponents;
  int output = 0;
};

// Polynomial map given as a list of monomials; the derivative is symbolic and
// batch evaluation goes through the dispatched SIMD kernel.
class PolynomialMap : public Map {
 public:
  PolynomialMap(int dim, std::vector<PolyTerm> terms, Box domain);
  PolynomialMap(int dim, std::vector<PolyTerm> terms) : PolynomialMap(dim, std::move(terms), unbounded_box(dim)) {}

  Vec eval(const Vec& x) const override;
  Mat jacobian(const Vec& x) const override;
  void eval_batch(const PointBatch& in, PointBatch& out) const override;
  void jacobian_batch(const PointBatch& in, PointBatch& out) const override;
  const std::vector<PolyTerm>& terms() const { return terms_; }

 private:
  struct Flat {
    int outputs = 0;
    std::vector<double> coef;
    std::vector<int> output;
    std::vector<int> exponents;
  };
  static Flat flatten(int dim, int outputs, const std::vector<PolyTerm>& terms);
  static Vec eval_flat(const Flat& p, int dim, const Vec& x);
  void batch(const Flat& p, const PointBatch& in, PointBatch& out) const;

  std::vector<PolyTerm> terms_;
  Flat value_;
  Flat deriv_;
};

// Map given by closures; jacobian falls back to finite differences when absent.
class FunctionMap : public Map {
 public:
  using Eval = std::function<Vec(const Vec&)>;
  using Jac = std::function<Mat(const Vec&)>;
  FunctionMap(Mat linear, Eval f, Jac df = nullptr, Box domain = {});

  Vec eval(const Vec& x) const override { return f_(x); }
  Mat jacobian(const Vec& x) const override;

 private:
  Eval f_;
  Jac df_;
};

// z -> M^{-1} F(M z): the map expressed in the coordinates x = M z.
class BasisChangedMap : public Map {
 public:
  BasisChangedMap(MapPtr inner, Mat basis, Mat basis_inv);
  Vec eval(const Vec& z) const override;
  Mat jacobian(const Vec& z) const override;

 private:
  MapPtr inner_;
  Mat basis_;
  Mat basis_inv_;
};

// x_I -> pi_I F(x_I embedded with zeros elsewhere).
class RestrictedMap : public Map {
 public:
  RestrictedMap(MapPtr inner, IndexSet idx);
  Vec eval(const Vec& x) const override;
  Mat jacobian(const Vec& x) const override;

 private:
  Vec embed(const Vec& x) const;
  MapPtr inner_;
  IndexSet idx_;
};

struct NewtonOptions {
  int max_iter = 50;
  double tol = 1e-15;
};

// F^{-1} by damped Newton seeded with Lambda^{-1} z. When the inner map is
// linear outside a ball, preimages landing there are returned exactly.
class InverseMap : public Map {
 public:
  explicit InverseMap(MapPtr inner, NewtonOptions opts = {});
  Vec eval(const Vec& z) const override;
  Mat jacobian(const Vec& z) const override;
  double linear_beyond() const override;

 private:
  MapPtr inner_;
  Mat lin_inv_;
  NewtonOptions opts_;
};

// The kernel q(t) = exp(1/(t(t-1))) on (0,1), zero elsewhere.
double bump_kernel(double t);
// Normalised primitive of q: 0 for s <= 0, 1 for s >= 1.
double bump_primitive(double s);
// u(x1, x2) = bump_primitive(x1 / |x2|); undefined at the origin.
double bump_u(double x1, double x2);

// C-infinity radial cutoff: 1 on r <= r0, 0 on r >= r1.
class RadialCutoff {
 public:
  RadialCutoff(double r0, double r1);
  double value(double r) const;
  double slope(double r) const;
  double r0() const { return r0_; }
  double r1() const { return r1_; }

 private:
  double r0_;
  double r1_;
};

// Lambda x + cutoff(|x|) (F(x) - Lambda x), defined on all of R^n.
class BumpModifiedMap : public Map {
 public:
  BumpModifiedMap(MapPtr inner, double r0, double r1);
  Vec eval(const Vec& x) const override;
  Mat jacobian(const Vec& x) const override;
  void eval_batch(const PointBatch& in, PointBatch& out) const override;
  void jacobian_batch(const PointBatch& in, PointBatch& out) const override;
  double linear_beyond() const override { return cutoff_.r1(); }
  const RadialCutoff& cutoff() const { return cutoff_; }

 private:
  MapPtr inner_;
  RadialCutoff cutoff_;
};

struct BumpModification {
  double r0 = 0.0;
  double r1 = 0.0;
  double eta = 0.0;      // sup ||DF_mod - Lambda||_2 over the sample
  double eta_inf = 0.0;  // same in the max-row-sum norm
  std::shared_ptr<const BumpModifiedMap> map;
};

struct NonlinearitySize {
  double eta = 0.0;      // sup ||DF - Lambda||_2
  double eta_inf = 0.0;  // sup ||DF - Lambda||_inf
};
// Sampled over the ball of the given radius.
NonlinearitySize sample_nonlinearity(const Map& map, double radius);

BumpModification bump_modify(const MapPtr& map, double r0, double r1, double eta_target);

Vec iterate(const Map& map, const Vec& x, int k);
Mat iterate_derivative(const Map& map, const Vec& x, int k);

Mat finite_difference_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, double step);

// Residual checks on a map model: F(O), DF(O) against Lambda.
double origin_residual(const Map& map);
double linear_part_residual(const Map& map);

}  // namespace hyperlin::dynamics

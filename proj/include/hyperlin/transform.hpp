#pragma once

#include "hyperlin/dynamics.hpp"
#include "hyperlin/grid.hpp"
#include "hyperlin/types.hpp"

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace hyperlin::transform {

struct NewtonSettings {
  int max_iter = 50;
  double tol = 1e-14;  // max-norm residual, relative to max(1, |y|)
};

// Coordinate change y = T(x) on R^dim.
class Transform {
 public:
  Transform(int dim, std::string label) : dim_(dim), label_(std::move(label)) {}
  virtual ~Transform() = default;

  int dim() const { return dim_; }
  const std::string& label() const { return label_; }

  virtual std::string kind() const = 0;
  virtual Vec forward(const Vec& x) const = 0;
  // Damped Newton from the identity seed unless the kind knows better.
  virtual Vec inverse(const Vec& y) const;
  virtual Mat derivative(const Vec& x) const = 0;
  // Writes its data into dir and one manifest line.
  virtual void save(const std::string& dir, const std::string& stem, std::ostream& manifest) const = 0;

 private:
  int dim_;
  std::string label_;
};

using TransformPtr = std::shared_ptr<const Transform>;

// Solves t.forward(x) = y by damped Newton with step halving.
Vec newton_inverse(const Transform& t, const Vec& y, const Vec& seed, const NewtonSettings& s = {});

class LinearTransform : public Transform {
 public:
  LinearTransform(Mat m, Mat m_inv, std::string label = "linear");
  std::string kind() const override { return "linear"; }
  Vec forward(const Vec& x) const override { return m_ * x; }
  Vec inverse(const Vec& y) const override { return m_inv_ * y; }
  Mat derivative(const Vec&) const override { return m_; }
  void save(const std::string& dir, const std::string& stem, std::ostream& manifest) const override;
  const Mat& matrix() const { return m_; }

 private:
  Mat m_;
  Mat m_inv_;
};

// x_T -> x_T - g(x_S), identity elsewhere, with g interpolated C^1 so that
// values and derivative agree. Exactly invertible.
class ShearTransform : public Transform {
 public:
  ShearTransform(int dim, IndexSet target, IndexSet source, GridFunction g, std::string label);
  std::string kind() const override { return "shear"; }
  Vec forward(const Vec& x) const override;
  Vec inverse(const Vec& y) const override;
  Mat derivative(const Vec& x) const override;
  void save(const std::string& dir, const std::string& stem, std::ostream& manifest) const override;
  const GridFunction& graph() const { return g_; }
  Vec graph_value(const Vec& source_coords) const { return g_.eval_cubic(source_coords); }

 private:
  IndexSet target_;
  IndexSet source_;
  GridFunction g_;
};

// Replaces coordinate blocks by cubic-interpolated grid functions of the whole input x; the
// remaining coordinates pass through. Inverse by Newton.
class ReplaceTransform : public Transform {
 public:
  struct Block {
    IndexSet idx;
    GridFunction g;  // dim() inputs, idx.size() outputs
  };
  ReplaceTransform(int dim, std::vector<Block> blocks, std::string label, NewtonSettings newton = {});
  std::string kind() const override { return "replace"; }
  Vec forward(const Vec& x) const override;
  Vec inverse(const Vec& y) const override;
  Mat derivative(const Vec& x) const override;
  void save(const std::string& dir, const std::string& stem, std::ostream& manifest) const override;
  const std::vector<Block>& blocks() const { return blocks_; }

 private:
  std::vector<Block> blocks_;
  NewtonSettings newton_;
};

// Independent transforms on disjoint coordinate blocks.
class BlockTransform : public Transform {
 public:
  struct Part {
    IndexSet idx;
    TransformPtr t;
  };
  BlockTransform(int dim, std::vector<Part> parts, std::string label);
  std::string kind() const override { return "block"; }
  Vec forward(const Vec& x) const override;
  Vec inverse(const Vec& y) const override;
  Mat derivative(const Vec& x) const override;
  void save(const std::string& dir, const std::string& stem, std::ostream& manifest) const override;
  const std::vector<Part>& parts() const { return parts_; }

 private:
  std::vector<Part> parts_;
};

// Applies its members in order: forward(x) = t_k(...t_1(x)).
class Chain : public Transform {
 public:
  Chain(int dim, std::vector<TransformPtr> members, std::string label = "chain");
  std::string kind() const override { return "chain"; }
  Vec forward(const Vec& x) const override;
  Vec inverse(const Vec& y) const override;
  Mat derivative(const Vec& x) const override;
  void save(const std::string& dir, const std::string& stem, std::ostream& manifest) const override;
  const std::vector<TransformPtr>& members() const { return members_; }

  // Writes dir/manifest.txt plus member files.
  void save_dir(const std::string& dir) const;
  static std::shared_ptr<const Chain> load_dir(const std::string& dir);

 private:
  std::vector<TransformPtr> members_;
};

std::shared_ptr<const Chain> identity_chain(int dim);

// Closures, for oracles in tests and analytic reference conjugacies.
class AnalyticTransform : public Transform {
 public:
  using Fn = std::function<Vec(const Vec&)>;
  using Jac = std::function<Mat(const Vec&)>;
  AnalyticTransform(int dim, Fn forward, Fn inverse, Jac derivative, std::string label);
  std::string kind() const override { return "analytic"; }
  Vec forward(const Vec& x) const override { return f_(x); }
  Vec inverse(const Vec& y) const override;
  Mat derivative(const Vec& x) const override;
  void save(const std::string& dir, const std::string& stem, std::ostream& manifest) const override;

 private:
  Fn f_;
  Fn inv_;
  Jac df_;
};

// T o F o T^{-1} with the given linear part; the jacobian uses the chain rule.
class ConjugatedMap : public dynamics::Map {
 public:
  ConjugatedMap(dynamics::MapPtr inner, TransformPtr t, Mat linear);
  Vec eval(const Vec& x) const override;
  Mat jacobian(const Vec& x) const override;

 private:
  dynamics::MapPtr inner_;
  TransformPtr t_;
};

}  // namespace hyperlin::transform

#pragma once

#include "hyperlin/dynamics.hpp"
#include "hyperlin/grid.hpp"
#include "hyperlin/types.hpp"

#include <vector>

namespace hyperlin::lp {

struct LPParameters {
  double gamma1 = 0.0;  // 0 selects automatically
  double gamma2 = 0.0;
  int N = 8;            // stored sequence length q_0..q_N
  int K_tail = 32;      // truncation of the backward sums
  double tol = 1e-12;
  int max_iter = 200;
  double eta_inf = 0.0;           // sup ||Df||_inf; sampled when 0
  double derivative_tol = 1e-5;   // allowed |FD(q_0) - w_0| at probe nodes
  double derivative_step = 1e-6;
};

// Product grid over (x, y) with x in R^n and y in the contracting coordinates.
struct Omega {
  Box x_box;
  std::vector<int> x_res;
  Box y_box;
  std::vector<int> y_res;

  static Omega centered(int n, int c, double half_width, int x_res, int y_res);
  Box box() const { return Box::product(x_box, y_box); }
  std::vector<int> resolution() const;
};

using Sequence = std::vector<Vec>;     // q_0..q_K, each in R^n
using MatSequence = std::vector<Mat>;  // w_k = D_(x,y) q_k, each n x (n + c)

struct IterationLog {
  int iteration = 0;
  double delta_v = 0.0;  // sup_k gamma1^-k |v_k - v_k'|_inf over nodes
  double delta_w = 0.0;  // same with gamma2 for w
  double ratio_v = 0.0;  // delta_v / previous delta_v
};

// Orbit data of one base point, reused by every Picard sweep.
struct Node {
  Vec x;
  Vec y;
  std::vector<Vec> orbit;       // F^k(x)
  std::vector<Mat> orbit_jac;   // DF^k(x)
  std::vector<Vec> f_orbit;     // f(F^k x), f = F - Lambda
  std::vector<Mat> df_orbit;    // Df(F^k x)
  std::vector<bool> linear_at;  // F = Lambda near F^k x
};

// T and S of the Lyapunov-Perron problem for the leaves through x along the
// contracting coordinates C; E are the expanding coordinates.
class LPProblem {
 public:
  LPProblem(dynamics::MapPtr map, IndexSet contracting, IndexSet expanding, LPParameters params);

  int n() const { return n_; }
  int c() const { return static_cast<int>(c_idx_.size()); }
  const IndexSet& contracting() const { return c_idx_; }
  const IndexSet& expanding() const { return e_idx_; }
  const LPParameters& params() const { return params_; }
  const dynamics::Map& map() const { return *map_; }
  double gamma1() const { return gamma1_; }
  double gamma2() const { return gamma2_; }
  double eta_inf() const { return eta_inf_; }
  // eta/gamma1 [1/(1 - |L_C|/gamma1) + (gamma1 |L_E^-1|)/(1 - gamma1 |L_E^-1|)] in max norms.
  double contraction_estimate() const { return contraction_estimate_; }
  // (gamma1 |L_E^-1|)^{K+1} / (1 - gamma1 |L_E^-1|) * eta.
  double tail_bound() const { return tail_bound_; }

  Node make_node(const Vec& x, const Vec& y) const;
  Sequence apply_T(const Node& node, const Sequence& v) const;
  MatSequence apply_S(const Node& node, const Sequence& v, const MatSequence& w) const;
  Sequence zero_sequence() const;
  MatSequence zero_mat_sequence() const;
  double norm_v(const Sequence& a, const Sequence& b) const;
  double norm_w(const MatSequence& a, const MatSequence& b) const;

  struct NodeSolution {
    Sequence v;
    MatSequence w;
    std::vector<double> delta_v;
    std::vector<double> delta_w;
  };
  // Picard iteration of (T, S) from v = w = 0.
  NodeSolution solve_node(const Node& node) const;

 private:
  dynamics::MapPtr map_;
  IndexSet c_idx_;
  IndexSet e_idx_;
  LPParameters params_;
  int n_;
  int K_;
  Mat lam_c_;
  Mat lam_e_inv_;
  double linear_radius_;
  double gamma1_ = 0.0;
  double gamma2_ = 0.0;
  double eta_inf_ = 0.0;
  double contraction_estimate_ = 0.0;
  double tail_bound_ = 0.0;
};

struct FoliationResult {
  IndexSet contracting;
  IndexSet expanding;
  Omega omega;
  GridFunction h;                // (x, y) -> expanding coordinates of the leaf point
  std::vector<GridFunction> q;   // q_0..q_N over (x, y)
  GridFunction dq0;              // row-major n x (n + c)
  std::vector<IterationLog> log;
  int iterations = 0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double eta_inf = 0.0;
  double contraction_estimate = 0.0;
  double measured_contraction = 0.0;  // largest per-iteration ratio above the noise floor
  double tail_bound = 0.0;
  double derivative_mismatch = 0.0;
  double fixed_point_residual_v = 0.0;
  double fixed_point_residual_w = 0.0;

  // The leaf through x, evaluated at contracting coordinates y.
  Vec leaf_point(const Vec& x, const Vec& y) const;
  Vec q0(const Vec& x, const Vec& y) const;
  Mat Dq0(const Vec& x, const Vec& y) const;
};

FoliationResult solve_foliation(const LPProblem& problem, const Omega& omega);
FoliationResult stable_foliation(const dynamics::MapPtr& map, const IndexSet& stable, const IndexSet& unstable,
                                 const LPParameters& params, const Omega& omega);
// Stable foliation of the Newton-inverted map with the roles of the index sets swapped.
FoliationResult unstable_foliation(const dynamics::MapPtr& map, const IndexSet& stable, const IndexSet& unstable,
                                   const LPParameters& params, const Omega& omega);

// max over samples and n <= N of |F^n(x + q_0) - F^n(x) - q_n|.
double verify_lp_equivalence(const dynamics::Map& map, const FoliationResult& fol, const std::vector<Vec>& xy_samples);

struct FoliationProperties {
  double b1 = 0.0;  // |pi_C(x + q_0(x, y)) - y| at nodes
  double b2 = 0.0;  // |h(x, pi_C x) - pi_E x| at nodes
  double b4 = 0.0;  // invariance residual on interior samples
};
FoliationProperties foliation_properties(const dynamics::Map& map, const FoliationResult& fol, int samples,
                                         unsigned seed);

struct DqHolder {
  double exponent = 1.0;
  double predicted = 0.0;
  bool constant = false;
};
DqHolder holder_check_Dq0(const FoliationResult& fol, double predicted_beta, unsigned seed);

}  // namespace hyperlin::lp

#pragma once

#include "hyperlin/dynamics.hpp"
#include "hyperlin/grid.hpp"
#include "hyperlin/types.hpp"

#include <vector>

namespace hyperlin::graphs {

struct GraphSettings {
  double tol = 1e-15;  // max-norm change between sweeps
  int max_iter = 4000;
};

struct GraphResult {
  GridFunction g;
  int iterations = 0;
  double last_delta = 0.0;
  double residual = 0.0;  // invariance residual on nodes whose image stays on the grid
  bool jet_closure = false;
};

// Graph w -> (u, v) of the invariant manifold tangent to the W coordinates for a
// stage whose W-component is linear, pi_w F(x) = C w with C contracting more
// weakly than the (u, v) block. The graph transform reads h at C^{-1} w, which
// leaves the box near its boundary; there h is continued by the quadratic jet
// solving C^T M_c C - sum_d L_cd M_d = Q_c.
GraphResult slow_graph(const dynamics::Map& stage, const IndexSet& uv, const IndexSet& w, const Box& wbox,
                       const std::vector<int>& resolution, const GraphSettings& settings = {});

// Graph g: S -> E of the manifold tangent to S, where Lambda contracts S and
// expands E: g <- Lambda_E^{-1} [g(pi_S F(y, g y)) - f_E(y, g y)].
GraphResult stable_graph(const dynamics::Map& map, const IndexSet& s, const IndexSet& e, const Box& sbox,
                         const std::vector<int>& resolution, const GraphSettings& settings = {});

}  // namespace hyperlin::graphs

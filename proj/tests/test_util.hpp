#pragma once

#include <cmath>

#include <Eigen/Core>

#include "netctl/network.hpp"
#include "netctl/precision.hpp"

namespace netctl {
namespace test {

/// Network whose adjacency() reproduces `a` exactly: off-diagonal entries
/// become edges, the diagonal becomes the noise with zero shift.
inline Network network_from_matrix(const Eigen::MatrixXd& a) {
  Network net;
  net.n = a.rows();
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      if (i != j && a(i, j) != 0.0) net.edges.push_back({j, i, a(i, j)});
    }
  }
  net.noise = a.diagonal();
  net.shift = 0.0;
  net.meta.source = "matrix";
  return net;
}

/// Directed chain 0 -> 1 -> ... -> n-1 with unit weights and diagonal
/// -1, -2, ..., -n.
inline Network chain_network(Index n) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i) a(i, i) = -1.0 - static_cast<double>(i);
  for (Index i = 1; i < n; ++i) a(i, i - 1) = 1.0;
  return network_from_matrix(a);
}

template <typename Scalar>
double relative_error(const Scalar& value, const Scalar& reference) {
  using std::abs;
  return to_double(abs(value - reference) / abs(reference));
}

}  // namespace test
}  // namespace netctl

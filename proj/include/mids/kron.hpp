#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace mids {

/// Column-major stacking of a matrix into a vector.
[[nodiscard]] Eigen::VectorXd vec(const Eigen::MatrixXd& M);

/// Inverse of vec for a rows x cols matrix.
[[nodiscard]] Eigen::MatrixXd unvec(const Eigen::VectorXd& v, Eigen::Index rows, Eigen::Index cols);

/// Kronecker product with the usual block layout [a_11 B, a_12 B, ...].
[[nodiscard]] Eigen::MatrixXd kron(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

/// The m x n matrix X = [x_1, ..., x_n] whose columns are the agents' opinions,
/// so that x = vec(X) for an agent-major stacked vector.
[[nodiscard]] inline Eigen::Map<const Eigen::MatrixXd> agent_columns(const Eigen::VectorXd& x,
                                                                     std::size_t m) {
    const auto rows = static_cast<Eigen::Index>(m);
    return {x.data(), rows, x.size() / rows};
}

}  // namespace mids

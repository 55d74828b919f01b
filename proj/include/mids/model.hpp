#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>

#include "mids/error.hpp"

namespace mids {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Entries of W in [-kTolNeg, 0) are treated as rounding dust and clamped to zero.
inline constexpr double kTolNeg = 1e-12;
/// Row sums of W within kTolRow of one are accepted and rescaled.
inline constexpr double kTolRow = 1e-9;

/// Unvalidated model data as read from a file or assembled by hand.
struct ModelCandidate {
    Matrix W;
    Vector lambda;           // diagonal of the susceptibility matrix
    Matrix C;
    std::optional<Matrix> D; // identity when absent
    Vector u;                // stacked agent-major: u_1 (m entries), u_2, ...
};

/// Validated Friedkin-Johnsen network with issue coupling matrix C.
///
/// Instances only come out of validate_model() / normalize_model(), so holding one
/// means every invariant (row-stochastic W, susceptibilities in [0,1], consistent
/// dimensions) has already been checked.
class NetworkModel {
public:
    [[nodiscard]] std::size_t n() const noexcept { return static_cast<std::size_t>(W_.rows()); }
    [[nodiscard]] std::size_t m() const noexcept { return static_cast<std::size_t>(C_.rows()); }
    [[nodiscard]] std::size_t dim() const noexcept { return n() * m(); }

    [[nodiscard]] const Matrix& W() const noexcept { return W_; }
    [[nodiscard]] const Vector& lambda() const noexcept { return lambda_; }
    [[nodiscard]] const Matrix& C() const noexcept { return C_; }
    [[nodiscard]] const Matrix& D() const noexcept { return D_; }
    [[nodiscard]] const Vector& u() const noexcept { return u_; }

    /// Lambda * W as a dense matrix.
    [[nodiscard]] Matrix LW() const { return lambda_.asDiagonal() * W_; }
    [[nodiscard]] bool has_identity_D() const;
    [[nodiscard]] bool has_identity_C() const;

    /// Prejudice of agent i (a view into u).
    [[nodiscard]] auto prejudice(std::size_t i) const {
        return u_.segment(static_cast<Eigen::Index>(i * m()), static_cast<Eigen::Index>(m()));
    }

    /// Round-trips back to raw data (used to derive variants of a model).
    [[nodiscard]] ModelCandidate candidate() const;

    /// Same network with a different coupling matrix, re-validated.
    [[nodiscard]] NetworkModel with_C(const Matrix& C) const;
    /// Same network with different prejudices, re-validated.
    [[nodiscard]] NetworkModel with_u(const Vector& u) const;

    friend bool operator==(const NetworkModel& a, const NetworkModel& b);

private:
    friend NetworkModel validate_model(const ModelCandidate& raw);
    friend NetworkModel normalize_model(const NetworkModel& model);

    NetworkModel() = default;

    Matrix W_;
    Vector lambda_;
    Matrix C_;
    Matrix D_;
    Vector u_;
};

/// Checks dimensions, stochasticity of W and susceptibility bounds.
/// Negative dust in W becomes exact zero; rows within tolerance are rescaled to sum 1.
/// Throws Error{NonStochasticRow | BadSusceptibility | DimensionMismatch | NonFiniteEntry}.
[[nodiscard]] NetworkModel validate_model(const ModelCandidate& raw);

/// Canonical form: totally stubborn agents (lambda_ii = 0) get row e_i in W.
/// A stubborn agent (lambda_ii < 1) with w_ii = 1 gets lambda_ii = 0 when that leaves
/// the trajectory unchanged, i.e. when C = I and D = I. Self-loops with lambda_ii = 1
/// stay oblivious.
[[nodiscard]] NetworkModel normalize_model(const NetworkModel& model);

/// One stacked opinion vector at step k.
struct OpinionState {
    std::size_t k = 0;
    Vector x;
};

}  // namespace mids

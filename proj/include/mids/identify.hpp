#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "mids/model.hpp"

namespace mids {

enum class ConstraintSet { Unconstrained, RowStochastic, InfNormBall };
enum class Objective { SumSquares, SumAbs, MaxAbs };

[[nodiscard]] std::string to_string(ConstraintSet s);
[[nodiscard]] std::string to_string(Objective o);

/// Observations x(1), ..., x(T) of the synchronous dynamics started at x(0) = u.
struct FiniteHorizon {
    std::vector<Vector> observations;
};

/// Observed stationary opinion x'.
struct InfiniteHorizon {
    Vector steady_state;
};

/// Estimation of C with W, Lambda and u known.
struct IdentificationProblem {
    Matrix W;
    Vector lambda;
    Vector u;
    std::size_t m = 1;
    std::variant<FiniteHorizon, InfiniteHorizon> data;
    ConstraintSet constraint = ConstraintSet::RowStochastic;
    Objective objective = Objective::SumSquares;
};

/// Residual eps(c) = b - G c with c = vec(C).
struct Regressors {
    Matrix G;
    Vector b;
};

/// Stacks [Lambda W X(j-1)^T kron I_m] c + eps_j = x(j) - ((I - Lambda) kron I_m) u
/// over j (a single block for steady-state data). Throws DimensionMismatch.
[[nodiscard]] Regressors assemble_regressors(const IdentificationProblem& problem);

/// Euclidean projection of vec(C) onto the constraint set, row by row.
[[nodiscard]] Vector project(const Vector& c, std::size_t m, ConstraintSet set);

/// Projection of v onto {x >= 0, sum x = radius}.
[[nodiscard]] Vector project_simplex(const Vector& v, double radius = 1.0);
/// Projection of v onto {|x|_1 <= radius}.
[[nodiscard]] Vector project_l1_ball(const Vector& v, double radius = 1.0);

struct IdentificationResult {
    Matrix C;
    /// Norm of the optimal residual: |eps|_2 for SumSquares, |eps|_1 for SumAbs,
    /// |eps|_inf for MaxAbs.
    double residual = 0.0;
    double objective_value = 0.0;
    std::size_t iterations = 0;
    double projected_gradient_norm = 0.0;
    bool converged = false;
    /// Subgradient runs (SumAbs, MaxAbs) carry no optimality certificate.
    bool approximate = false;
    double condition_number = 0.0;
    std::size_t rank = 0;
    /// rho(Lambda W) rho(C) < 1 for the estimate.
    bool stable_estimate = false;
    std::vector<double> history;
};

inline constexpr std::size_t kMaxSolverIterations = 200'000;
inline constexpr double kProjectedGradientTol = 1e-9;
inline constexpr double kArmijo = 1e-4;

struct SolverOptions {
    std::size_t max_iterations = kMaxSolverIterations;
    double tolerance = kProjectedGradientTol;
    /// Keep the objective value of every accepted iterate in `history`.
    bool record_history = false;
};

/// Projected gradient with Armijo backtracking for SumSquares; projected subgradient
/// with diminishing steps and best-iterate tracking for SumAbs and MaxAbs.
/// Non-convergence is reported through `converged`, not thrown.
[[nodiscard]] IdentificationResult solve(const IdentificationProblem& problem,
                                         const SolverOptions& options = {});

/// f(b - G c) for the chosen objective (sum of squares, sum of magnitudes, or max).
[[nodiscard]] double objective_value(const Regressors& r, const Vector& c, Objective obj);

}  // namespace mids

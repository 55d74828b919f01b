#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mids/graph.hpp"
#include "mids/model.hpp"
#include "mids/spectra.hpp"

namespace mids {

enum class Termination { StepCap, Converged, Diverged };

[[nodiscard]] std::string to_string(Termination t);

struct Trajectory {
    std::vector<OpinionState> states;  // k = 0..K
    Termination termination = Termination::StepCap;

    [[nodiscard]] const Vector& final_state() const { return states.back().x; }
};

inline constexpr double kDefaultConvTol = 1e-10;
inline constexpr double kDivergenceBound = 1e12;

/// Stacked initial condition (I_n kron D) u.
[[nodiscard]] Vector initial_state(const NetworkModel& model);

/// One synchronous update x_i <- lambda_ii C sum_j w_ij x_j + (1 - lambda_ii) u_i,
/// computed agent-wise without forming the nm x nm Kronecker matrix.
[[nodiscard]] Vector step(const NetworkModel& model, const Vector& x);

/// Iterates step() from initial_state() until the sup-norm increment drops below
/// conv_tol, max_steps is hit, or the sup norm exceeds kDivergenceBound.
[[nodiscard]] Trajectory simulate(const NetworkModel& model, std::size_t max_steps,
                                  double conv_tol = kDefaultConvTol);

/// Limit of x(k). Stable models use a direct LU solve of
/// (I - Lambda W kron C) x = ((I - Lambda) kron I) u; models with oblivious agents
/// use the block formula with C*, W22* (and D).
/// Throws NotConvergent when the analysis says the limit does not exist.
[[nodiscard]] Vector limit_opinion(const NetworkModel& model, const AgentClassification& cls,
                                   const SpectralReport& spec);

/// Convenience: classify, analyze, then limit_opinion.
[[nodiscard]] Vector limit_opinion(const NetworkModel& model);

/// Stationary opinion of the all-stubborn surrogate with alpha * Lambda in place of
/// Lambda: (I - alpha Lambda W)^-1 (I - alpha Lambda) u, per issue.
/// Requires alpha in [0, 1) and C = I (or m = 1 with C = [1]).
[[nodiscard]] Vector alpha_approximation(const NetworkModel& model, double alpha);

struct SeriesDecomposition {
    Vector series;       // sum_k (Lambda W)^k (I - Lambda) u
    Vector limit_part;   // A* u
};

/// Closed form of the prejudice series and the A* u term, for C = I.
/// Throws NotRegular when Lambda W has no limit.
[[nodiscard]] SeriesDecomposition stationary_series(const NetworkModel& model,
                                                    const AgentClassification& cls,
                                                    const SpectralReport& spec);

}  // namespace mids

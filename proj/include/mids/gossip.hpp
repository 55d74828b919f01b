#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mids/graph.hpp"
#include "mids/model.hpp"

namespace mids {

/// Identity of the pseudo-random generator used by run(); recorded in run metadata.
inline constexpr const char* kGossipGenerator = "std::mt19937_64";

/// Sub-seed of replication r: the splitmix64 finalizer applied to
/// seed + (r + 1) * 0x9E3779B97F4A7C15.
[[nodiscard]] std::uint64_t mix64(std::uint64_t seed, std::uint64_t r) noexcept;

/// Randomized protocol: at every step one arc (i, j) of G[W] is drawn uniformly and
///   x_i <- (1 - g1_ij - g2_ij) x_i + g1_ij C x_j + g2_ij u_i,
/// all other agents keep their opinions.
struct GossipConfig {
    Matrix gamma1;
    Matrix gamma2;
    std::uint64_t seed = 0;
    std::uint64_t steps = 1'000'000;
    std::size_t replications = 1;
    /// Steps at which Cesaro averages are recorded; empty means the default log grid.
    std::vector<std::uint64_t> checkpoints;
    /// Sample deviation from the deterministic limit is tracked over the final window.
    std::uint64_t tail_window = 10'000;
    /// Worker threads for replications; 0 picks the hardware concurrency.
    unsigned threads = 0;
};

/// Gamma1 = Lambda W, Gamma2 = (I - Lambda) W. Needs rho(Lambda W) < 1, row-stochastic C
/// and D = I. Throws ObliviousAgentsPresent, NonStochasticC or InvalidArgument.
[[nodiscard]] GossipConfig default_config(const NetworkModel& model);

/// Throws InvalidGossipConfig (or the model errors of default_config) when the
/// coefficient matrices break the conditions of the ergodicity result.
void validate_config(const NetworkModel& model, const GossipConfig& config);

/// Maps the scalar protocol x_i <- h_i((1 - g_ij) x_i + g_ij x_j) + (1 - h_i) u_i onto
/// Gamma1 = h_i g_ij, Gamma2 = 1 - h_i on arcs. Requires (1 - h_i) d_i = 1 - lambda_ii and
/// h_i g_ij = lambda_ii w_ij (i != j), d_i the out-degree. Throws CorollaryConditionsViolated.
[[nodiscard]] GossipConfig from_scalar_gossip(const NetworkModel& model, const Vector& h,
                                              const Matrix& gamma);

/// 1, 2, 5, 10, 20, 50, ... up to steps, plus steps itself.
[[nodiscard]] std::vector<std::uint64_t> log_grid(std::uint64_t steps);

struct GossipCheckpoint {
    std::uint64_t k = 0;
    Vector sum;          // sum_{l=0}^{k} x(l), compensated
    Vector mean;         // sum / (k + 1)
    double dist2 = 0.0;  // |mean - x'|_2
    double dist_inf = 0.0;
};

struct ReplicationStats {
    std::uint64_t seed = 0;
    Vector final_sample;
    Vector cesaro;
    std::vector<GossipCheckpoint> checkpoints;
    /// max over the last tail_window steps of |x(k) - x'|_inf
    double tail_max_deviation = 0.0;
};

struct GossipRunStats {
    std::string generator = kGossipGenerator;
    std::uint64_t master_seed = 0;
    std::size_t arc_count = 0;
    Vector reference;  // deterministic limit x'_C
    std::vector<ReplicationStats> replications;

    /// Median over replications of the Cesaro distance at checkpoint index c.
    [[nodiscard]] double median_dist_inf(std::size_t c) const;
    [[nodiscard]] double median_dist2(std::size_t c) const;
};

/// Runs config.replications independent sample paths from x(0) = u. Replication r uses
/// seed mix64(config.seed, r); results are ordered by r regardless of threading.
[[nodiscard]] GossipRunStats run(const NetworkModel& model, const GossipConfig& config);

/// Exact one-step means: E x(k+1) = EP E x(k) + Ev. With the default coefficients
/// EP = I - alpha (I - Lambda W kron C), Ev = alpha ((I - Lambda) kron I) u, alpha = 1/|E|.
[[nodiscard]] std::pair<Matrix, Vector> expected_step_matrices(const NetworkModel& model,
                                                               const GossipConfig& config);

}  // namespace mids

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mids/identify.hpp"
#include "mids/model.hpp"

namespace mids::fixtures {

/// Four-agent influence matrix of the Friedkin-Johnsen small-group experiment.
[[nodiscard]] Matrix small_group_W();
/// Prejudices [25,25, 25,15, 75,-50, 85,5] on two issues.
[[nodiscard]] Vector small_group_u();

[[nodiscard]] Matrix coupling_positive();  // [[0.8, 0.2], [0.3, 0.7]]
[[nodiscard]] Matrix coupling_negative();  // [[0.8, -0.2], [-0.3, 0.7]]

/// small_group_W with Lambda = I - diag W and the given coupling.
[[nodiscard]] ModelCandidate small_group(const Matrix& C);
/// Same network and prejudices with Lambda = I (DeGroot averaging).
[[nodiscard]] ModelCandidate small_group_degroot(const Matrix& C);

/// 51 agents: a totally stubborn leader (prejudice [100, -100]) and ten groups of five.
/// Each group's local leader is the only member listening outside the group: the first
/// one keeps 0.1 and gives 0.9 to the leader, the others keep 0.5 and give 0.5 to the
/// previous local leader. Remaining members listen to themselves, their local leader and
/// each other with random positive weights. Lambda = I - diag W, C = [[0.9,0.1],[0.1,0.9]],
/// other prejudices uniform in [-10, 10].
[[nodiscard]] ModelCandidate hierarchy(std::uint64_t seed, std::size_t groups = 10, std::size_t group_size = 5);

inline constexpr std::uint64_t kHierarchySeed = 51;

/// Steady-state identification data: x' = [35,11, 35,10, 75,-50, 53,5].
[[nodiscard]] IdentificationProblem steady_state_identification();
/// Three observed rounds of the synchronous dynamics.
[[nodiscard]] IdentificationProblem finite_horizon_identification();

struct NamedFixture {
    std::string file;
    std::string json_text;
};

/// Every bundled fixture as (file name, pretty-printed JSON).
[[nodiscard]] std::vector<NamedFixture> all(std::uint64_t hierarchy_seed = kHierarchySeed);

}  // namespace mids::fixtures

#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "mids/model.hpp"

namespace mids {

/// Arc (i, j) means agent i listens to agent j (w_ij > 0).
struct Arc {
    std::uint32_t from = 0;
    std::uint32_t to = 0;
    friend bool operator==(const Arc&, const Arc&) = default;
};

/// Interaction graph G[W]; arcs are kept in lexicographic (from, to) order.
class InteractionGraph {
public:
    InteractionGraph(std::size_t n, std::vector<Arc> arcs);

    [[nodiscard]] std::size_t node_count() const noexcept { return n_; }
    [[nodiscard]] const std::vector<Arc>& arcs() const noexcept { return arcs_; }
    [[nodiscard]] std::size_t arc_count() const noexcept { return arcs_.size(); }
    [[nodiscard]] std::size_t out_degree(std::size_t i) const { return offsets_[i + 1] - offsets_[i]; }
    [[nodiscard]] bool has_arc(std::size_t i, std::size_t j) const;

private:
    std::size_t n_;
    std::vector<Arc> arcs_;
    std::vector<std::size_t> offsets_;  // CSR row pointers into arcs_
};

[[nodiscard]] InteractionGraph build_graph(const NetworkModel& model);

/// Graph of a plain non-negative matrix (arc where the entry is positive).
[[nodiscard]] InteractionGraph graph_of(const Matrix& A);

enum class AgentStatus { TotallyStubborn, Stubborn, InfluencedByStubborn, Oblivious };

[[nodiscard]] std::string_view to_string(AgentStatus s) noexcept;

struct AgentClassification {
    std::vector<AgentStatus> status;
    /// permutation[p] = original index of the agent placed at position p;
    /// non-oblivious agents first, each group in ascending original order.
    std::vector<std::size_t> permutation;
    std::size_t n_prime = 0;

    [[nodiscard]] std::vector<std::size_t> oblivious() const;
    [[nodiscard]] bool has_oblivious() const noexcept { return n_prime < status.size(); }
};

/// Stubborn agents are those with lambda_ii < 1. An agent with a walk to a stubborn
/// agent is influenced by it; everybody else is oblivious.
[[nodiscard]] AgentClassification classify_agents(const NetworkModel& model,
                                                  const InteractionGraph& graph);

/// W, Lambda reordered by the classification permutation and split as
///   W = [W11 W12; W21 W22], Lambda = diag(lambda1, lambda2),
/// with n_prime rows in the first block. W21 is zero by construction.
struct BlockDecomposition {
    Matrix W11, W12, W21, W22;
    Vector lambda1, lambda2;
};

[[nodiscard]] BlockDecomposition decompose(const NetworkModel& model,
                                           const AgentClassification& cls);

/// Largest index set J whose principal submatrix of A is row-stochastic.
/// Empty iff rho(A) < 1. Throws NotSubstochastic.
[[nodiscard]] std::vector<std::size_t> maximal_stochastic_subset(const Matrix& A);

}  // namespace mids

#include "mids/graph.hpp"

#include <algorithm>
#include <deque>
#include <string>

namespace mids {

InteractionGraph::InteractionGraph(std::size_t n, std::vector<Arc> arcs)
    : n_(n), arcs_(std::move(arcs)), offsets_(n + 1, 0) {
    std::sort(arcs_.begin(), arcs_.end(), [](const Arc& a, const Arc& b) {
        return a.from != b.from ? a.from < b.from : a.to < b.to;
    });
    for (const auto& a : arcs_) {
        if (a.from >= n || a.to >= n) {
            throw Error(ErrorCode::InvalidArgument, "arc endpoint out of range");
        }
        ++offsets_[a.from + 1];
    }
    for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] += offsets_[i];
}

bool InteractionGraph::has_arc(std::size_t i, std::size_t j) const {
    auto first = arcs_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]);
    auto last = arcs_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]);
    return std::binary_search(first, last, Arc{static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)},
                              [](const Arc& a, const Arc& b) { return a.to < b.to; });
}

InteractionGraph graph_of(const Matrix& A) {
    std::vector<Arc> arcs;
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < A.cols(); ++j) {
            if (A(i, j) > 0.0) {
                arcs.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
            }
        }
    }
    return InteractionGraph(static_cast<std::size_t>(A.rows()), std::move(arcs));
}

InteractionGraph build_graph(const NetworkModel& model) { return graph_of(model.W()); }

std::string_view to_string(AgentStatus s) noexcept {
    switch (s) {
        case AgentStatus::TotallyStubborn: return "totally_stubborn";
        case AgentStatus::Stubborn: return "stubborn";
        case AgentStatus::InfluencedByStubborn: return "influenced_by_stubborn";
        case AgentStatus::Oblivious: return "oblivious";
    }
    return "unknown";
}

std::vector<std::size_t> AgentClassification::oblivious() const {
    return {permutation.begin() + static_cast<std::ptrdiff_t>(n_prime), permutation.end()};
}

AgentClassification classify_agents(const NetworkModel& model, const InteractionGraph& graph) {
    const std::size_t n = model.n();

    // Reverse adjacency: who listens to j.
    std::vector<std::vector<std::size_t>> listeners(n);
    for (const auto& a : graph.arcs()) listeners[a.to].push_back(a.from);

    AgentClassification cls;
    cls.status.assign(n, AgentStatus::Oblivious);
    std::vector<char> reached(n, 0);
    std::deque<std::size_t> queue;
    for (std::size_t i = 0; i < n; ++i) {
        const double l = model.lambda()(static_cast<Eigen::Index>(i));
        if (l < 1.0) {
            cls.status[i] = l == 0.0 ? AgentStatus::TotallyStubborn : AgentStatus::Stubborn;
            reached[i] = 1;
            queue.push_back(i);
        }
    }
    while (!queue.empty()) {
        const std::size_t j = queue.front();
        queue.pop_front();
        for (std::size_t i : listeners[j]) {
            if (!reached[i]) {
                reached[i] = 1;
                cls.status[i] = AgentStatus::InfluencedByStubborn;
                queue.push_back(i);
            }
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (reached[i]) cls.permutation.push_back(i);
    }
    cls.n_prime = cls.permutation.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (!reached[i]) cls.permutation.push_back(i);
    }
    return cls;
}

BlockDecomposition decompose(const NetworkModel& model, const AgentClassification& cls) {
    const auto n = static_cast<Eigen::Index>(model.n());
    const auto np = static_cast<Eigen::Index>(cls.n_prime);
    Matrix P(n, n);
    Vector l(n);
    for (Eigen::Index p = 0; p < n; ++p) {
        const auto i = static_cast<Eigen::Index>(cls.permutation[static_cast<std::size_t>(p)]);
        l(p) = model.lambda()(i);
        for (Eigen::Index q = 0; q < n; ++q) {
            P(p, q) = model.W()(i, static_cast<Eigen::Index>(cls.permutation[static_cast<std::size_t>(q)]));
        }
    }
    BlockDecomposition b;
    b.W11 = P.topLeftCorner(np, np);
    b.W12 = P.topRightCorner(np, n - np);
    b.W21 = P.bottomLeftCorner(n - np, np);
    b.W22 = P.bottomRightCorner(n - np, n - np);
    b.lambda1 = l.head(np);
    b.lambda2 = l.tail(n - np);
    return b;
}

std::vector<std::size_t> maximal_stochastic_subset(const Matrix& A) {
    const Eigen::Index n = A.rows();
    if (A.cols() != n) throw Error(ErrorCode::DimensionMismatch, "matrix must be square");
    for (Eigen::Index i = 0; i < n; ++i) {
        if ((A.row(i).array() < -kTolNeg).any()) {
            throw Error(ErrorCode::NotSubstochastic, "negative entry in row " + std::to_string(i));
        }
        if (A.row(i).sum() > 1.0 + kTolRow) {
            throw Error(ErrorCode::NotSubstochastic, "row " + std::to_string(i) + " sums above 1");
        }
    }

    std::vector<char> alive(static_cast<std::size_t>(n), 1);
    bool changed = true;
    while (changed) {
        changed = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!alive[static_cast<std::size_t>(i)]) continue;
            double kept = 0.0;
            bool leaks = false;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (A(i, j) <= 0.0) continue;
                if (alive[static_cast<std::size_t>(j)]) {
                    kept += A(i, j);
                } else {
                    leaks = true;
                }
            }
            if (leaks || kept < 1.0 - kTolRow) {
                alive[static_cast<std::size_t>(i)] = 0;
                changed = true;
            }
        }
    }
    std::vector<std::size_t> J;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (alive[static_cast<std::size_t>(i)]) J.push_back(static_cast<std::size_t>(i));
    }
    return J;
}

}  // namespace mids

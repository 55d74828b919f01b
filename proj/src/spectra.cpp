#include "mids/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mids {

namespace {

constexpr int kMaxSquarings = 60;
constexpr double kSquaringTol = 1e-12;
// Eigenvalues this close to the unit circle are treated as lying on it.
constexpr double kUnitCircleTol = 1e-9;

double inf_norm(const Matrix& M) {
    return M.size() == 0 ? 0.0 : M.cwiseAbs().rowwise().sum().maxCoeff();
}

// Tarjan's algorithm, iterative. Returns the component id of every node;
// ids are assigned in reverse topological order of the condensation.
std::vector<std::size_t> strongly_connected_components(const InteractionGraph& g,
                                                       std::size_t& count) {
    const std::size_t n = g.node_count();
    constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
    std::vector<std::vector<std::size_t>> adj(n);
    for (const auto& a : g.arcs()) adj[a.from].push_back(a.to);

    std::vector<std::size_t> index(n, kUnset), low(n, 0), comp(n, kUnset);
    std::vector<char> on_stack(n, 0);
    std::vector<std::size_t> stack;
    std::vector<std::pair<std::size_t, std::size_t>> call;  // (node, next child position)
    std::size_t next_index = 0;
    count = 0;

    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != kUnset) continue;
        call.emplace_back(root, 0);
        while (!call.empty()) {
            auto& [v, pos] = call.back();
            if (pos == 0 && index[v] == kUnset) {
                index[v] = low[v] = next_index++;
                stack.push_back(v);
                on_stack[v] = 1;
            }
            if (pos < adj[v].size()) {
                const std::size_t w = adj[v][pos++];
                if (index[w] == kUnset) {
                    call.emplace_back(w, 0);
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            if (low[v] == index[v]) {
                std::size_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    comp[w] = count;
                } while (w != v);
                ++count;
            }
            const std::size_t done = v;
            call.pop_back();
            if (!call.empty()) {
                auto& parent = call.back().first;
                low[parent] = std::min(low[parent], low[done]);
            }
        }
    }
    return comp;
}

}  // namespace

Matrix balance(const Matrix& A) {
    constexpr double radix = 2.0;
    constexpr double sqrdx = radix * radix;
    Matrix B = A;
    const Eigen::Index n = B.rows();
    bool done = false;
    while (!done) {
        done = true;
        for (Eigen::Index i = 0; i < n; ++i) {
            double c = 0.0;
            double r = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j == i) continue;
                c += std::abs(B(j, i));
                r += std::abs(B(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            double g = r / radix;
            double f = 1.0;
            const double s = c + r;
            while (c < g) {
                f *= radix;
                c *= sqrdx;
            }
            g = r * radix;
            while (c > g) {
                f /= radix;
                c /= sqrdx;
            }
            if ((c + r) / f < 0.95 * s) {
                done = false;
                B.row(i) /= f;
                B.col(i) *= f;
            }
        }
    }
    return B;
}

std::vector<std::complex<double>> eigenvalues(const Matrix& A) {
    if (A.rows() != A.cols()) throw Error(ErrorCode::DimensionMismatch, "eigenvalues: matrix not square");
    if (A.rows() > kMaxEigenDim) {
        throw Error(ErrorCode::InvalidArgument, "eigenvalues: dimension above " + std::to_string(kMaxEigenDim));
    }
    if (!A.allFinite()) throw Error(ErrorCode::NonFiniteEntry, "eigenvalues: non-finite entries");
    if (A.rows() == 0) return {};

    Eigen::EigenSolver<Matrix> solver;
    solver.setMaxIterations(static_cast<Eigen::Index>(100) * A.rows());
    solver.compute(balance(A), /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorCode::NoConvergence, "eigenvalues: QR iteration did not converge");
    }
    const auto& ev = solver.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

bool is_row_stochastic(const Matrix& A, double tol) {
    if (A.rows() != A.cols()) return false;
    if ((A.array() < -kTolNeg).any()) return false;
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        if (std::abs(A.row(i).sum() - 1.0) > tol) return false;
    }
    return true;
}

double spectral_radius(const Matrix& A) {
    if (A.rows() > 0 && is_row_stochastic(A)) return 1.0;
    double rho = 0.0;
    for (const auto& z : eigenvalues(A)) rho = std::max(rho, std::abs(z));
    return rho;
}

Regularity is_regular(const Matrix& A) {
    if (!is_row_stochastic(A)) throw Error(ErrorCode::NotStochastic, "is_regular: matrix is not row-stochastic");
    const auto g = graph_of(A);
    const std::size_t n = g.node_count();
    std::size_t ncomp = 0;
    const auto comp = strongly_connected_components(g, ncomp);

    std::vector<char> closed(ncomp, 1);
    for (const auto& a : g.arcs()) {
        if (comp[a.from] != comp[a.to]) closed[comp[a.from]] = 0;
    }

    std::vector<std::vector<std::size_t>> adj(n);
    for (const auto& a : g.arcs()) adj[a.from].push_back(a.to);

    Regularity r;
    r.regular = true;
    constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
    std::vector<std::size_t> level(n, kUnset);
    for (std::size_t root = 0; root < n; ++root) {
        const std::size_t c = comp[root];
        if (!closed[c] || level[root] != kUnset) continue;
        ++r.closed_classes;
        // Closed class: BFS from root stays inside it.
        std::vector<std::size_t> members{root};
        level[root] = 0;
        for (std::size_t head = 0; head < members.size(); ++head) {
            const std::size_t v = members[head];
            for (std::size_t w : adj[v]) {
                if (level[w] == kUnset) {
                    level[w] = level[v] + 1;
                    members.push_back(w);
                }
            }
        }
        std::size_t period = 0;
        for (std::size_t v : members) {
            for (std::size_t w : adj[v]) {
                const auto diff = static_cast<long long>(level[v]) + 1 - static_cast<long long>(level[w]);
                period = std::gcd(period, static_cast<std::size_t>(diff < 0 ? -diff : diff));
            }
        }
        if (period != 1) r.regular = false;
    }
    r.fully_regular = r.regular && r.closed_classes == 1;
    return r;
}

std::optional<Matrix> try_limit_general(const Matrix& A) {
    double rho = 0.0;
    for (const auto& z : eigenvalues(A)) {
        const double mag = std::abs(z);
        if (mag > 1.0 + kUnitCircleTol) return std::nullopt;
        if (mag > 1.0 - kUnitCircleTol && std::abs(z - 1.0) > kUnitCircleTol) return std::nullopt;
        rho = std::max(rho, mag);
    }
    if (rho < 1.0 - kTolSpec) return Matrix::Zero(A.rows(), A.cols());

    Matrix P = A;
    for (int s = 0; s < kMaxSquarings; ++s) {
        Matrix Q = P * P;
        if (!Q.allFinite()) return std::nullopt;
        if (inf_norm(Q - P) < kSquaringTol) return Q;
        P = std::move(Q);
    }
    // Bounded powers always settle well within the budget; growth means a Jordan block at 1.
    return std::nullopt;
}

Matrix limit_power(const Matrix& A, LimitMode mode) {
    switch (mode) {
        case LimitMode::Contractive:
            if (spectral_radius(A) >= 1.0 - kTolSpec) {
                throw Error(ErrorCode::NotRegular, "limit_power: spectral radius is not below 1");
            }
            return Matrix::Zero(A.rows(), A.cols());
        case LimitMode::General: {
            auto L = try_limit_general(A);
            if (!L) throw Error(ErrorCode::NotRegular, "limit_power: powers of the matrix do not converge");
            return *L;
        }
        case LimitMode::RowStochastic:
            break;
    }

    if (!is_regular(A).regular) throw Error(ErrorCode::NotRegular, "limit_power: stochastic matrix is periodic");
    Matrix P = A;
    for (int s = 0; s < kMaxSquarings; ++s) {
        Matrix Q = P * P;
        const bool settled = inf_norm(Q - P) < kSquaringTol;
        P = std::move(Q);
        if (settled) {
            for (Eigen::Index i = 0; i < P.rows(); ++i) P.row(i) /= P.row(i).sum();
            return P;
        }
    }
    throw Error(ErrorCode::NoConvergence, "limit_power: squaring budget exhausted");
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Stable: return "stable";
        case Verdict::Convergent: return "convergent";
        case Verdict::Divergent: return "divergent";
    }
    return "unknown";
}

SpectralReport analyze_spectrum(const NetworkModel& model, const AgentClassification& cls) {
    SpectralReport rep;
    const Matrix LW = model.LW();
    const bool oblivious = cls.has_oblivious();
    // With oblivious agents Lambda W has a stochastic principal block, so rho = 1 exactly.
    rep.rho_LW = oblivious ? 1.0 : spectral_radius(LW);
    rep.rho_C = spectral_radius(model.C());
    rep.stable = rep.rho_LW * rep.rho_C < 1.0 - kTolSpec;

    rep.C_star = try_limit_general(model.C());
    rep.regular_C = rep.C_star.has_value();

    const auto n = static_cast<Eigen::Index>(model.n());
    const auto np = static_cast<Eigen::Index>(cls.n_prime);

    if (!oblivious) {
        rep.A_star = Matrix::Zero(n, n);
    } else {
        const auto blocks = decompose(model, cls);
        const auto reg = is_regular(blocks.W22);
        rep.regular_W22 = reg.regular;
        rep.fully_regular_W22 = reg.fully_regular;
        if (reg.regular) {
            rep.W22_star = limit_power(blocks.W22, LimitMode::RowStochastic);

            // lim (Lambda W)^k = [0, (I - L11 W11)^-1 L11 W12 W22*; 0, W22*] in permuted order.
            const Matrix L11W11 = blocks.lambda1.asDiagonal() * blocks.W11;
            const Matrix top = (Matrix::Identity(np, np) - L11W11)
                                   .partialPivLu()
                                   .solve(blocks.lambda1.asDiagonal() * blocks.W12 * *rep.W22_star);
            Matrix Aperm = Matrix::Zero(n, n);
            Aperm.topRightCorner(np, n - np) = top;
            Aperm.bottomRightCorner(n - np, n - np) = *rep.W22_star;
            Matrix A(n, n);
            for (Eigen::Index p = 0; p < n; ++p) {
                for (Eigen::Index q = 0; q < n; ++q) {
                    A(static_cast<Eigen::Index>(cls.permutation[static_cast<std::size_t>(p)]),
                      static_cast<Eigen::Index>(cls.permutation[static_cast<std::size_t>(q)])) = Aperm(p, q);
                }
            }
            rep.A_star = std::move(A);
        } else if (rep.C_star && rep.C_star->isZero(0.0)) {
            rep.W22_star = Matrix::Zero(n - np, n - np);
            rep.W22_star_forced_zero = true;
        }
    }

    if (rep.stable) {
        rep.verdict = Verdict::Stable;
        rep.clause = (!oblivious && rep.rho_C <= 1.0) ? "no oblivious agents" : "rho(LW)*rho(C) < 1";
    } else if (!oblivious) {
        rep.verdict = Verdict::Divergent;
        rep.clause = "rho(LW)*rho(C) >= 1";
    } else if (!rep.regular_C) {
        rep.verdict = Verdict::Divergent;
        rep.clause = "C not regular";
    } else if (rep.C_star->isZero(0.0) || *rep.regular_W22) {
        rep.verdict = Verdict::Convergent;
        rep.clause = rep.C_star->isZero(0.0) ? "C regular and C* = 0" : "C regular and W22 regular";
    } else {
        rep.verdict = Verdict::Divergent;
        rep.clause = "W22 not regular";
    }
    return rep;
}

}  // namespace mids

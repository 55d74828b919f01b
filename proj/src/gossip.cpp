#include "mids/gossip.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include "mids/dynamics.hpp"
#include "mids/kron.hpp"
#include "mids/spectra.hpp"

namespace mids {

namespace {

constexpr double kCoefTol = 1e-9;

[[noreturn]] void bad_config(const std::string& what) {
    throw Error(ErrorCode::InvalidGossipConfig, what);
}

void check_model(const NetworkModel& model) {
    if (!model.has_identity_D()) {
        throw Error(ErrorCode::InvalidArgument, "gossip protocol requires D = I");
    }
    if (!is_row_stochastic(model.C())) {
        throw Error(ErrorCode::NonStochasticC, "gossip protocol requires a row-stochastic C");
    }
    if (!maximal_stochastic_subset(model.LW()).empty()) {
        throw Error(ErrorCode::ObliviousAgentsPresent, "rho(Lambda W) = 1: oblivious agents present");
    }
}

// Unbiased draw from [0, bound) by multiply-shift with rejection (Lemire).
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
    using u128 = unsigned __int128;
    std::uint64_t x = rng();
    u128 prod = static_cast<u128>(x) * bound;
    auto low = static_cast<std::uint64_t>(prod);
    if (low < bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        while (low < threshold) {
            x = rng();
            prod = static_cast<u128>(x) * bound;
            low = static_cast<std::uint64_t>(prod);
        }
    }
    return static_cast<std::uint64_t>(prod >> 64);
}

struct Kahan {
    std::vector<double> sum, comp;
    explicit Kahan(std::size_t d) : sum(d, 0.0), comp(d, 0.0) {}
    void add(std::size_t i, double v) {
        const double y = v - comp[i];
        const double t = sum[i] + y;
        comp[i] = (t - sum[i]) - y;
        sum[i] = t;
    }
};

struct ArcCoef {
    std::size_t i, j;
    double keep, g1, g2;
};

ReplicationStats run_one(const NetworkModel& model, const std::vector<ArcCoef>& arcs,
                         const GossipConfig& config, const std::vector<std::uint64_t>& grid,
                         const Vector& reference, std::uint64_t seed) {
    const std::size_t m = model.m();
    const std::size_t d = model.dim();
    const Matrix& C = model.C();
    const Vector& u = model.u();

    std::vector<double> x(u.data(), u.data() + d);
    std::vector<double> cx(m);
    // Agent i has held its current value since step since[i]; the running sum covers
    // all steps before that.
    std::vector<std::uint64_t> since(model.n(), 0);
    Kahan acc(d);

    ReplicationStats out;
    out.seed = seed;
    std::mt19937_64 rng(seed);

    auto snapshot = [&](std::uint64_t k) {
        GossipCheckpoint cp;
        cp.k = k;
        cp.sum.resize(static_cast<Eigen::Index>(d));
        for (std::size_t a = 0; a < model.n(); ++a) {
            const auto held = static_cast<double>(k + 1 - since[a]);
            for (std::size_t p = 0; p < m; ++p) {
                const std::size_t c = a * m + p;
                // Compensated total without disturbing the running accumulator.
                const double y = x[c] * held - acc.comp[c];
                cp.sum(static_cast<Eigen::Index>(c)) = acc.sum[c] + y;
            }
        }
        cp.mean = cp.sum / static_cast<double>(k + 1);
        cp.dist2 = (cp.mean - reference).norm();
        cp.dist_inf = (cp.mean - reference).lpNorm<Eigen::Infinity>();
        return cp;
    };

    auto deviation = [&] {
        double dev = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            dev = std::max(dev, std::abs(x[c] - reference(static_cast<Eigen::Index>(c))));
        }
        return dev;
    };

    const std::uint64_t steps = config.steps;
    const std::uint64_t tail_start = steps > config.tail_window ? steps - config.tail_window : 0;
    std::size_t next_cp = 0;
    if (!grid.empty() && grid.front() == 0) out.checkpoints.push_back(snapshot(0)), ++next_cp;
    if (tail_start == 0) out.tail_max_deviation = deviation();

    const auto n_arcs = static_cast<std::uint64_t>(arcs.size());
    for (std::uint64_t k = 0; k < steps; ++k) {
        const ArcCoef& a = arcs[bounded(rng, n_arcs)];
        // x(k+1) differs from x(k) only in agent a.i.
        if (a.g1 != 0.0 || a.g2 != 0.0) {
            const std::size_t bi = a.i * m;
            const std::size_t bj = a.j * m;
            for (std::size_t p = 0; p < m; ++p) {
                double s = 0.0;
                for (std::size_t q = 0; q < m; ++q) {
                    s += C(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) * x[bj + q];
                }
                cx[p] = s;
            }
            const auto held = static_cast<double>(k + 1 - since[a.i]);
            for (std::size_t p = 0; p < m; ++p) {
                acc.add(bi + p, x[bi + p] * held);
                x[bi + p] = a.keep * x[bi + p] + a.g1 * cx[p] + a.g2 * u(static_cast<Eigen::Index>(bi + p));
            }
            since[a.i] = k + 1;
        }
        const std::uint64_t now = k + 1;
        if (now > tail_start) out.tail_max_deviation = std::max(out.tail_max_deviation, deviation());
        while (next_cp < grid.size() && grid[next_cp] == now) {
            out.checkpoints.push_back(snapshot(now));
            ++next_cp;
        }
    }

    out.final_sample = Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(d));
    out.cesaro = out.checkpoints.empty() || out.checkpoints.back().k != steps
                     ? snapshot(steps).mean
                     : out.checkpoints.back().mean;
    return out;
}

double median(std::vector<double> v) {
    if (v.empty()) return std::nan("");
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    if (v.size() % 2 == 1) return v[mid];
    const double hi = v[mid];
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

}  // namespace

std::uint64_t mix64(std::uint64_t seed, std::uint64_t r) noexcept {
    std::uint64_t z = seed + (r + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

GossipConfig default_config(const NetworkModel& model) {
    check_model(model);
    GossipConfig cfg;
    cfg.gamma1 = model.LW();
    cfg.gamma2 = (Vector::Ones(static_cast<Eigen::Index>(model.n())) - model.lambda()).asDiagonal() * model.W();
    validate_config(model, cfg);
    return cfg;
}

void validate_config(const NetworkModel& model, const GossipConfig& config) {
    check_model(model);
    const auto n = static_cast<Eigen::Index>(model.n());
    if (config.gamma1.rows() != n || config.gamma1.cols() != n || config.gamma2.rows() != n ||
        config.gamma2.cols() != n) {
        bad_config("Gamma1 and Gamma2 must be n x n");
    }
    if (config.replications == 0) bad_config("replications must be positive");
    const auto graph = build_graph(model);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double g1 = config.gamma1(i, j);
            const double g2 = config.gamma2(i, j);
            if (!(g1 >= 0.0 && g2 >= 0.0)) bad_config("negative coefficient at (" + std::to_string(i) + "," + std::to_string(j) + ")");
            if (g1 + g2 > 1.0 + kCoefTol) bad_config("gamma1 + gamma2 exceeds 1 at (" + std::to_string(i) + "," + std::to_string(j) + ")");
            if (!graph.has_arc(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) && (g1 != 0.0 || g2 != 0.0)) {
                bad_config("non-zero coefficient off the interaction graph at (" + std::to_string(i) + "," + std::to_string(j) + ")");
            }
        }
        const double target = 1.0 - model.lambda()(i);
        if (std::abs(config.gamma2.row(i).sum() - target) > kCoefTol) {
            bad_config("row " + std::to_string(i) + " of Gamma2 sums to " + std::to_string(config.gamma2.row(i).sum()) +
                       ", expected 1 - lambda = " + std::to_string(target));
        }
    }
}

GossipConfig from_scalar_gossip(const NetworkModel& model, const Vector& h, const Matrix& gamma) {
    if (model.m() != 1) throw Error(ErrorCode::InvalidArgument, "scalar gossip mapping needs m = 1");
    const auto n = static_cast<Eigen::Index>(model.n());
    if (h.size() != n || gamma.rows() != n || gamma.cols() != n) {
        throw Error(ErrorCode::DimensionMismatch, "h must have n entries and gamma be n x n");
    }
    const auto graph = build_graph(model);
    auto violated = [](const std::string& what) { throw Error(ErrorCode::CorollaryConditionsViolated, what); };

    GossipConfig cfg;
    cfg.gamma1 = Matrix::Zero(n, n);
    cfg.gamma2 = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        if (!(h(i) >= 0.0 && h(i) <= 1.0)) violated("h_" + std::to_string(i) + " outside [0,1]");
        const double l = model.lambda()(i);
        const auto d = static_cast<double>(graph.out_degree(ii));
        if (std::abs((1.0 - h(i)) * d - (1.0 - l)) > kCoefTol) {
            violated("(1 - h_i) d_i != 1 - lambda_ii for agent " + std::to_string(i));
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            if (!(gamma(i, j) >= 0.0 && gamma(i, j) <= 1.0)) violated("gamma entry outside [0,1]");
            if (i != j && std::abs(h(i) * gamma(i, j) - l * model.W()(i, j)) > kCoefTol) {
                violated("h_i gamma_ij != lambda_ii w_ij at (" + std::to_string(i) + "," + std::to_string(j) + ")");
            }
            if (graph.has_arc(ii, static_cast<std::size_t>(j))) {
                cfg.gamma1(i, j) = h(i) * gamma(i, j);
                cfg.gamma2(i, j) = 1.0 - h(i);
            }
        }
    }
    validate_config(model, cfg);
    return cfg;
}

std::vector<std::uint64_t> log_grid(std::uint64_t steps) {
    std::vector<std::uint64_t> grid;
    for (std::uint64_t decade = 1; decade <= steps; decade *= 10) {
        for (std::uint64_t f : {1, 2, 5}) {
            if (f * decade <= steps) grid.push_back(f * decade);
        }
        if (decade > steps / 10) break;
    }
    if (grid.empty() || grid.back() != steps) grid.push_back(steps);
    return grid;
}

double GossipRunStats::median_dist_inf(std::size_t c) const {
    std::vector<double> v;
    for (const auto& r : replications) v.push_back(r.checkpoints.at(c).dist_inf);
    return median(std::move(v));
}

double GossipRunStats::median_dist2(std::size_t c) const {
    std::vector<double> v;
    for (const auto& r : replications) v.push_back(r.checkpoints.at(c).dist2);
    return median(std::move(v));
}

GossipRunStats run(const NetworkModel& model, const GossipConfig& config) {
    validate_config(model, config);
    const auto graph = build_graph(model);

    std::vector<ArcCoef> arcs;
    arcs.reserve(graph.arc_count());
    for (const auto& a : graph.arcs()) {
        const double g1 = config.gamma1(a.from, a.to);
        const double g2 = config.gamma2(a.from, a.to);
        arcs.push_back({a.from, a.to, 1.0 - g1 - g2, g1, g2});
    }

    std::vector<std::uint64_t> grid = config.checkpoints.empty() ? log_grid(config.steps) : config.checkpoints;
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    if (!grid.empty() && grid.back() > config.steps) {
        throw Error(ErrorCode::InvalidArgument, "checkpoint beyond the step count");
    }

    GossipRunStats stats;
    stats.master_seed = config.seed;
    stats.arc_count = arcs.size();
    stats.reference = limit_opinion(model);
    stats.replications.resize(config.replications);

    unsigned workers = config.threads != 0 ? config.threads : std::max(1U, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, config.replications));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t r = next++; r < config.replications; r = next++) {
            stats.replications[r] = run_one(model, arcs, config, grid, stats.reference, mix64(config.seed, r));
        }
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    return stats;
}

std::pair<Matrix, Vector> expected_step_matrices(const NetworkModel& model, const GossipConfig& config) {
    const auto graph = build_graph(model);
    const auto n = static_cast<Eigen::Index>(model.n());
    const auto m = static_cast<Eigen::Index>(model.m());
    const double alpha = 1.0 / static_cast<double>(graph.arc_count());

    Matrix G1 = Matrix::Zero(n, n);
    Matrix G2 = Matrix::Zero(n, n);
    for (const auto& a : graph.arcs()) {
        G1(a.from, a.to) = config.gamma1(a.from, a.to);
        G2(a.from, a.to) = config.gamma2(a.from, a.to);
    }
    const Vector out_rate = (G1 + G2).rowwise().sum();
    const Vector prejudice_rate = G2.rowwise().sum();
    const Matrix Im = Matrix::Identity(m, m);

    Matrix EP = Matrix::Identity(n * m, n * m) -
                alpha * (kron(Matrix(out_rate.asDiagonal()), Im) - kron(G1, model.C()));
    Vector Ev = alpha * (kron(Matrix(prejudice_rate.asDiagonal()), Im) * model.u());
    return {std::move(EP), std::move(Ev)};
}

}  // namespace mids

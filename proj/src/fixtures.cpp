#include "mids/fixtures.hpp"

#include <random>

#include "mids/io.hpp"

namespace mids::fixtures {

namespace {

Vector stacked(std::initializer_list<double> values) {
    Vector v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values) v(i++) = x;
    return v;
}

// 53 random mantissa bits; avoids implementation-defined distributions.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

Matrix small_group_W() {
    Matrix W(4, 4);
    W << 0.220, 0.120, 0.360, 0.300,
         0.147, 0.215, 0.344, 0.294,
         0.0,   0.0,   1.0,   0.0,
         0.090, 0.178, 0.446, 0.286;
    return W;
}

Vector small_group_u() { return stacked({25, 25, 25, 15, 75, -50, 85, 5}); }

Matrix coupling_positive() {
    Matrix C(2, 2);
    C << 0.8, 0.2, 0.3, 0.7;
    return C;
}

Matrix coupling_negative() {
    Matrix C(2, 2);
    C << 0.8, -0.2, -0.3, 0.7;
    return C;
}

ModelCandidate small_group(const Matrix& C) {
    ModelCandidate c;
    c.W = small_group_W();
    c.lambda = Vector::Ones(4) - c.W.diagonal();
    c.C = C;
    c.u = small_group_u();
    return c;
}

ModelCandidate small_group_degroot(const Matrix& C) {
    ModelCandidate c = small_group(C);
    c.lambda = Vector::Ones(4);
    return c;
}

ModelCandidate hierarchy(std::uint64_t seed, std::size_t groups, std::size_t group_size) {
    std::mt19937_64 rng(seed);
    const auto n = static_cast<Eigen::Index>(1 + groups * group_size);
    Matrix W = Matrix::Zero(n, n);
    W(0, 0) = 1.0;
    for (std::size_t g = 0; g < groups; ++g) {
        const auto lead = static_cast<Eigen::Index>(1 + g * group_size);
        if (g == 0) {
            W(lead, lead) = 0.1;
            W(lead, 0) = 0.9;
        } else {
            W(lead, lead) = 0.5;
            W(lead, lead - static_cast<Eigen::Index>(group_size)) = 0.5;
        }
        for (std::size_t k = 1; k < group_size; ++k) {
            const Eigen::Index i = lead + static_cast<Eigen::Index>(k);
            double total = 0.0;
            for (std::size_t q = 0; q < group_size; ++q) {
                const Eigen::Index j = lead + static_cast<Eigen::Index>(q);
                W(i, j) = 0.05 + unit(rng);
                total += W(i, j);
            }
            W.row(i) /= total;
            // Re-absorb rounding so the row sums to one up to the last ulp.
            W(i, i) = 1.0 - (W.row(i).sum() - W(i, i));
        }
    }

    ModelCandidate c;
    c.W = W;
    c.lambda = Vector::Ones(n) - W.diagonal();
    c.C = Matrix(2, 2);
    c.C << 0.9, 0.1, 0.1, 0.9;
    c.u.resize(2 * n);
    c.u(0) = 100.0;
    c.u(1) = -100.0;
    for (Eigen::Index i = 2; i < 2 * n; ++i) c.u(i) = -10.0 + 20.0 * unit(rng);
    return c;
}

IdentificationProblem steady_state_identification() {
    IdentificationProblem p;
    p.W = small_group_W();
    p.lambda = Vector::Ones(4) - p.W.diagonal();
    p.u = small_group_u();
    p.m = 2;
    p.data = InfiniteHorizon{stacked({35, 11, 35, 10, 75, -50, 53, 5})};
    return p;
}

IdentificationProblem finite_horizon_identification() {
    IdentificationProblem p = steady_state_identification();
    p.data = FiniteHorizon{{
        stacked({42.80, 14.05, 43.59, 12.51, 75, -50, 61.49, 7.18}),
        stacked({41.31, 13.37, 41.45, 11.43, 75, -50, 55.48, 6.45}),
        stacked({41.74, 12.30, 40.41, 10.84, 75, -50, 58.99, 6.02}),
    }};
    return p;
}

std::vector<NamedFixture> all(std::uint64_t hierarchy_seed) {
    const Matrix I2 = Matrix::Identity(2, 2);
    auto model = [](const ModelCandidate& c) { return io::model_to_json(c).dump(2) + "\n"; };
    auto ident = [](const IdentificationProblem& p) { return io::identification_to_json(p).dump(2) + "\n"; };
    return {
        {"fj4_independent.json", model(small_group(I2))},
        {"fj4_coupled.json", model(small_group(coupling_positive()))},
        {"fj4_opposed.json", model(small_group(coupling_negative()))},
        {"degroot4_independent.json", model(small_group_degroot(I2))},
        {"degroot4_coupled.json", model(small_group_degroot(coupling_positive()))},
        {"degroot4_opposed.json", model(small_group_degroot(coupling_negative()))},
        {"hierarchy51.json", model(hierarchy(hierarchy_seed))},
        {"identify_steady_state.json", ident(steady_state_identification())},
        {"identify_finite_horizon.json", ident(finite_horizon_identification())},
    };
}

}  // namespace mids::fixtures

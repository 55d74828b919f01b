#include <doctest.h>

#include "mids/dynamics.hpp"
#include "mids/error.hpp"
#include "mids/fixtures.hpp"
#include "mids/identify.hpp"
#include "mids/kron.hpp"
#include "support.hpp"

using namespace mids;

namespace {

Matrix mat2(double a, double b, double c, double d) {
    Matrix M(2, 2);
    M << a, b, c, d;
    return M;
}

// Residual of the update written out directly: x(j) - (Lambda W kron C) x(j-1) - ((I - Lambda) kron I) u.
Vector direct_residual(const IdentificationProblem& p, const Matrix& C) {
    const auto n = p.W.rows();
    const auto m = static_cast<Eigen::Index>(p.m);
    const Matrix P = test::kron_naive(p.lambda.asDiagonal() * p.W, C);
    const Vector b = test::kron_naive(Matrix((Vector::Ones(n) - p.lambda).asDiagonal()), Matrix::Identity(m, m)) * p.u;
    if (const auto* f = std::get_if<FiniteHorizon>(&p.data)) {
        Vector out(static_cast<Eigen::Index>(f->observations.size()) * n * m);
        Vector prev = p.u;
        for (std::size_t j = 0; j < f->observations.size(); ++j) {
            out.segment(static_cast<Eigen::Index>(j) * n * m, n * m) = f->observations[j] - P * prev - b;
            prev = f->observations[j];
        }
        return out;
    }
    const Vector& xs = std::get<InfiniteHorizon>(p.data).steady_state;
    return xs - P * xs - b;
}

IdentificationProblem synthetic(test::Rng& rng, std::size_t n, std::size_t m, const Matrix& C0, std::size_t T) {
    ModelCandidate raw = test::random_stable_candidate(rng, n, m, C0);
    const auto model = validate_model(raw);
    IdentificationProblem p;
    p.W = model.W();
    p.lambda = model.lambda();
    p.u = model.u();
    p.m = m;
    if (T == 0) {
        p.data = InfiniteHorizon{limit_opinion(model)};
    } else {
        FiniteHorizon f;
        Vector x = model.u();
        for (std::size_t j = 0; j < T; ++j) {
            x = step(model, x);
            f.observations.push_back(x);
        }
        p.data = f;
    }
    return p;
}

Vector random_feasible(test::Rng& rng, std::size_t m, ConstraintSet set) {
    const auto mm = static_cast<Eigen::Index>(m);
    if (set == ConstraintSet::RowStochastic) return vec(test::random_stochastic(rng, mm, 0.7));
    if (set == ConstraintSet::InfNormBall) {
        Matrix C = test::random_matrix(rng, mm, mm);
        for (Eigen::Index i = 0; i < mm; ++i) C.row(i) /= std::max(1.0, C.row(i).lpNorm<1>()) * test::uniform(rng, 1.0, 1.5);
        return vec(C);
    }
    return vec(test::random_matrix(rng, mm, mm, -2, 2));
}

}  // namespace

TEST_SUITE("identify") {

TEST_CASE("vec stacks columns") {
    CHECK(vec(mat2(1, 0, 2, 1)) == Vector((Vector(4) << 1, 2, 0, 1).finished()));
    CHECK(vec(Matrix::Identity(2, 2)) == Vector((Vector(4) << 1, 0, 0, 1).finished()));
    test::Rng rng(1);
    const Matrix M = test::random_matrix(rng, 3, 4);
    CHECK(unvec(vec(M), 3, 4) == M);
    CHECK_THROWS_AS((void)unvec(vec(M), 5, 2), Error);
}

TEST_CASE("kron: block layout and the vec identities") {
    test::Rng rng(2);
    const Matrix A = test::random_matrix(rng, 3, 2);
    CHECK(kron(A, Matrix::Identity(1, 1)) == A);
    const Matrix B = test::random_matrix(rng, 2, 4);
    CHECK((kron(A, B) - test::kron_naive(A, B)).cwiseAbs().maxCoeff() == 0.0);
    for (int t = 0; t < 100; ++t) {
        const Matrix X = test::random_matrix(rng, 2, 3);
        const Matrix Y = test::random_matrix(rng, 3, 2);
        const Matrix Z = test::random_matrix(rng, 2, 2);
        CHECK(test::max_abs_diff(vec(X * Y * Z), kron(Z.transpose(), X) * vec(Y)) <= 1e-12);
        // vec(XY) = (I kron X) vec Y = (Y^T kron I) vec X
        const Vector v = vec(X * Y);
        CHECK(test::max_abs_diff(v, kron(Matrix::Identity(2, 2), X) * vec(Y)) <= 1e-12);
        CHECK(test::max_abs_diff(v, kron(Y.transpose(), Matrix::Identity(2, 2)) * vec(X)) <= 1e-12);
    }
}

TEST_CASE("steady-state regressors have the expected shape") {
    const auto p = fixtures::steady_state_identification();
    const auto r = assemble_regressors(p);
    CHECK(r.G.rows() == 8);
    CHECK(r.G.cols() == 4);
}

TEST_CASE("with C = I the residual is the plain one-step residual") {
    test::Rng rng(3);
    auto p = synthetic(rng, 5, 2, test::random_row_stochastic_C(rng, 2), 3);
    const auto r = assemble_regressors(p);
    const Vector eps = r.b - r.G * vec(Matrix::Identity(2, 2));
    ModelCandidate c;
    c.W = p.W;
    c.lambda = p.lambda;
    c.C = Matrix::Identity(2, 2);
    c.u = p.u;
    const auto model = validate_model(c);
    const auto& obs = std::get<FiniteHorizon>(p.data).observations;
    Vector prev = p.u;
    for (std::size_t j = 0; j < obs.size(); ++j) {
        CHECK(test::max_abs_diff(eps.segment(static_cast<Eigen::Index>(j) * 10, 10), obs[j] - step(model, prev)) <= 1e-12);
        prev = obs[j];
    }
}

TEST_CASE("noiseless synthetic data have zero residual at the true C") {
    test::Rng rng(4);
    for (std::size_t T : {0U, 1U, 4U}) {
        const Matrix C0 = test::random_row_stochastic_C(rng, 3);
        const auto p = synthetic(rng, 6, 3, C0, T);
        const auto r = assemble_regressors(p);
        CHECK((r.b - r.G * vec(C0)).lpNorm<Eigen::Infinity>() <= 1e-10);
    }
}

TEST_CASE("regressor identity against direct Kronecker substitution") {
    test::Rng rng(5);
    for (int t = 0; t < 60; ++t) {
        const std::size_t m = test::pick(rng, 1, 3);
        auto p = synthetic(rng, test::pick(rng, 2, 6), m, test::random_row_stochastic_C(rng, m), t % 3);
        const auto r = assemble_regressors(p);
        for (auto set : {ConstraintSet::RowStochastic, ConstraintSet::InfNormBall}) {
            const Vector c = random_feasible(rng, m, set);
            const Vector eps = r.b - r.G * c;
            CHECK(test::max_abs_diff(eps, direct_residual(p, unvec(c, static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m)))) <= 1e-12 * std::max(1.0, eps.lpNorm<Eigen::Infinity>()));
        }
    }
}

TEST_CASE("regressor errors") {
    auto p = fixtures::steady_state_identification();
    std::get<InfiniteHorizon>(p.data).steady_state.conservativeResize(7);
    CHECK_THROWS_AS((void)assemble_regressors(p), Error);
    p = fixtures::finite_horizon_identification();
    std::get<FiniteHorizon>(p.data).observations.clear();
    CHECK_THROWS_AS((void)assemble_regressors(p), Error);
    // Steady-state data need a stable network.
    p = fixtures::steady_state_identification();
    p.lambda.setOnes();
    try {
        (void)assemble_regressors(p);
        FAIL("expected NotConvergent");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotConvergent);
    }
}

TEST_CASE("projection examples") {
    CHECK(test::max_abs_diff(project_simplex(Vector::Constant(2, 0.6)), Vector::Constant(2, 0.5)) <= 1e-15);
    const Vector in = (Vector(3) << 0.2, 0.5, 0.3).finished();
    CHECK(test::max_abs_diff(project_simplex(in), in) <= 1e-15);
    CHECK(project_l1_ball((Vector(2) << 2, 0).finished()) == (Vector(2) << 1, 0).finished());
    const Vector inside = (Vector(2) << 0.3, -0.4).finished();
    CHECK(project_l1_ball(inside) == inside);
    CHECK(project_l1_ball((Vector(2) << -3, 1).finished()) == (Vector(2) << -1, 0).finished());
    CHECK(project(vec(mat2(3, 1, 1, 1)), 2, ConstraintSet::Unconstrained) == vec(mat2(3, 1, 1, 1)));
}

TEST_CASE("projections are idempotent and obtuse") {
    test::Rng rng(6);
    for (int t = 0; t < 500; ++t) {
        const std::size_t m = test::pick(rng, 1, 5);
        const auto set = t % 2 == 0 ? ConstraintSet::RowStochastic : ConstraintSet::InfNormBall;
        const Vector v = test::random_vector(rng, static_cast<Eigen::Index>(m * m), -3, 3);
        const Vector p = project(v, m, set);
        CHECK(test::max_abs_diff(project(p, m, set), p) <= 1e-14);
        const Matrix P = unvec(p, static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
        for (Eigen::Index i = 0; i < P.rows(); ++i) {
            if (set == ConstraintSet::RowStochastic) {
                CHECK(P.row(i).minCoeff() >= 0.0);
                CHECK(std::abs(P.row(i).sum() - 1.0) <= 1e-12);
            } else {
                CHECK(P.row(i).lpNorm<1>() <= 1.0 + 1e-12);
            }
        }
        for (int s = 0; s < 5; ++s) {
            const Vector z = random_feasible(rng, m, set);
            // Variational inequality: <v - p, z - p> <= 0; hence |p - z| <= |v - z|.
            CHECK((v - p).dot(z - p) <= 1e-12);
            CHECK((p - z).norm() <= (v - z).norm() + 1e-12);
        }
    }
}

TEST_CASE("steady-state example: row-stochastic estimate") {
    const auto res = solve(fixtures::steady_state_identification());
    CHECK(res.converged);
    CHECK_FALSE(res.approximate);
    CHECK((res.C - mat2(0.7562, 0.2438, 0.3032, 0.6968)).cwiseAbs().maxCoeff() <= 5e-3);
    CHECK(std::abs(res.residual - 0.9322) <= 1e-3);
    CHECK(res.rank == 4);
    CHECK(res.stable_estimate);
    CHECK(res.projected_gradient_norm < kProjectedGradientTol);
}

TEST_CASE("finite-horizon example: row-stochastic estimate") {
    const auto res = solve(fixtures::finite_horizon_identification());
    CHECK(res.converged);
    CHECK((res.C - mat2(0.8181, 0.1819, 0.2983, 0.7017)).cwiseAbs().maxCoeff() <= 5e-3);
}

TEST_CASE("unconstrained estimate never has a larger residual") {
    auto p = fixtures::steady_state_identification();
    const auto stoch = solve(p);
    p.constraint = ConstraintSet::Unconstrained;
    const auto free = solve(p);
    CHECK(free.converged);
    CHECK(free.residual <= stoch.residual + 1e-9);
    // Unconstrained least squares has a closed form.
    const auto r = assemble_regressors(p);
    const Vector ls = r.G.colPivHouseholderQr().solve(r.b);
    CHECK(test::max_abs_diff(vec(free.C), ls) <= 1e-6);
}

TEST_CASE("noiseless interior C0 is recovered") {
    test::Rng rng(7);
    for (int t = 0; t < 20; ++t) {
        const std::size_t m = test::pick(rng, 2, 3);
        Matrix C0 = test::random_row_stochastic_C(rng, m);
        C0 = 0.8 * C0 + 0.2 / static_cast<double>(m) * Matrix::Ones(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
        for (std::size_t T : {0U, 3U}) {
            auto p = synthetic(rng, 6, m, C0, T);
            const auto res = solve(p);
            CHECK(res.converged);
            CHECK((res.C - C0).cwiseAbs().maxCoeff() <= 1e-6);
        }
    }
}

TEST_CASE("2x2 row-stochastic optimum agrees with a brute-force grid") {
    for (const auto& p : {fixtures::steady_state_identification(), fixtures::finite_horizon_identification()}) {
        const auto r = assemble_regressors(p);
        const auto res = solve(p);
        double best = std::numeric_limits<double>::infinity();
        for (int a = 0; a <= 1000; ++a)
            for (int b = 0; b <= 1000; ++b) {
                const double c11 = a * 1e-3, c21 = b * 1e-3;
                const Vector c = vec(mat2(c11, 1 - c11, c21, 1 - c21));
                best = std::min(best, objective_value(r, c, Objective::SumSquares));
            }
        // The grid can only be worse than the true optimum, and by at most its resolution.
        CHECK(res.objective_value <= best + 1e-9);
        CHECK(best - res.objective_value <= 5e-3 * best + 1e-5);
    }
}

TEST_CASE("objective is non-increasing along the iterations") {
    test::Rng rng(8);
    for (int t = 0; t < 20; ++t) {
        const std::size_t m = test::pick(rng, 2, 3);
        auto p = synthetic(rng, 5, m, test::random_row_stochastic_C(rng, m), t % 2 == 0 ? 0 : 2);
        // Perturb the data so the optimum has a non-zero residual.
        if (auto* f = std::get_if<FiniteHorizon>(&p.data)) {
            for (auto& x : f->observations) x += test::random_vector(rng, x.size(), -0.05, 0.05);
        } else {
            auto& xs = std::get<InfiniteHorizon>(p.data).steady_state;
            xs += test::random_vector(rng, xs.size(), -0.05, 0.05);
        }
        for (auto set : {ConstraintSet::RowStochastic, ConstraintSet::InfNormBall, ConstraintSet::Unconstrained}) {
            p.constraint = set;
            SolverOptions o;
            o.record_history = true;
            const auto res = solve(p, o);
            for (std::size_t k = 1; k < res.history.size(); ++k)
                CHECK(res.history[k] <= res.history[k - 1] + 1e-12 * std::max(1.0, res.history[k - 1]));
        }
    }
}

TEST_CASE("first-order optimality certificate for the squared residual") {
    test::Rng rng(9);
    std::vector<IdentificationProblem> problems = {fixtures::steady_state_identification(), fixtures::finite_horizon_identification()};
    for (int t = 0; t < 6; ++t) {
        auto p = synthetic(rng, 5, 3, test::random_row_stochastic_C(rng, 3), 2);
        for (auto& x : std::get<FiniteHorizon>(p.data).observations) x += test::random_vector(rng, x.size(), -0.1, 0.1);
        problems.push_back(p);
    }
    for (auto p : problems) {
        for (auto set : {ConstraintSet::RowStochastic, ConstraintSet::InfNormBall}) {
            p.constraint = set;
            const auto res = solve(p);
            REQUIRE(res.converged);
            const auto r = assemble_regressors(p);
            const Vector c = vec(res.C);
            const Vector grad = 2.0 * r.G.transpose() * (r.G * c - r.b);
            for (int s = 0; s < 1000; ++s) {
                const Vector z = random_feasible(rng, p.m, set);
                CHECK(grad.dot(z - c) >= -1e-7);
            }
        }
    }
}

TEST_CASE("estimate lies exactly in the constraint set") {
    auto p = fixtures::finite_horizon_identification();
    for (auto obj : {Objective::SumSquares, Objective::SumAbs, Objective::MaxAbs}) {
        p.objective = obj;
        p.constraint = ConstraintSet::RowStochastic;
        const auto res = solve(p);
        CHECK(res.C.minCoeff() >= 0.0);
        CHECK(std::abs(res.C.row(0).sum() - 1.0) <= 1e-15);
        CHECK(std::abs(res.C.row(1).sum() - 1.0) <= 1e-15);
        p.constraint = ConstraintSet::InfNormBall;
        const auto res2 = solve(p);
        CHECK(res2.C.cwiseAbs().rowwise().sum().maxCoeff() <= 1.0 + 1e-15);
    }
}

TEST_CASE("sum-abs and max-abs objectives improve on the least-squares point in their own norm") {
    for (auto p : {fixtures::steady_state_identification(), fixtures::finite_horizon_identification()}) {
        const auto r = assemble_regressors(p);
        const Vector ls = vec(solve(p).C);
        for (auto obj : {Objective::SumAbs, Objective::MaxAbs}) {
            p.objective = obj;
            const auto res = solve(p);
            CHECK(res.approximate);
            CHECK(res.objective_value <= objective_value(r, ls, obj) + 1e-9);
            CHECK(res.residual == res.objective_value);
        }
    }
}

TEST_CASE("sum-abs estimate is near-optimal against a grid") {
    auto p = fixtures::steady_state_identification();
    p.objective = Objective::SumAbs;
    const auto r = assemble_regressors(p);
    const auto res = solve(p);
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a <= 1000; ++a)
        for (int b = 0; b <= 1000; ++b) {
            const double c11 = a * 1e-3, c21 = b * 1e-3;
            best = std::min(best, objective_value(r, vec(mat2(c11, 1 - c11, c21, 1 - c21)), Objective::SumAbs));
        }
    CHECK(res.objective_value <= best + 1e-3);
}

TEST_CASE("rank-deficient regressors are reported, not hidden") {
    // All agents share the same steady state: X' has identical columns, G has rank m.
    IdentificationProblem p;
    p.W = Matrix::Constant(3, 3, 1.0 / 3);
    p.lambda = Vector::Constant(3, 0.5);
    p.m = 2;
    p.u = Vector::Zero(6);
    for (int i = 0; i < 3; ++i) p.u.segment(2 * i, 2) << 1.0, 2.0;
    p.data = InfiniteHorizon{p.u};
    const auto res = solve(p);
    CHECK(res.rank == 2);
    CHECK(res.condition_number > 1e12);
}

}  // TEST_SUITE

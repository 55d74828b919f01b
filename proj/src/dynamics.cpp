#include "mids/dynamics.hpp"

#include <cmath>

#include "mids/kron.hpp"

namespace mids {

namespace {

Vector solve_dense(const Matrix& A, const Vector& b) {
    Eigen::PartialPivLU<Matrix> lu(A);
    const double rcond = lu.rcond();
    if (!(rcond > 1e-14)) {
        throw Error(ErrorCode::SingularSystem, "linear system is numerically singular (rcond " +
                                                   std::to_string(rcond) + ")");
    }
    return lu.solve(b);
}

void require_identity_coupling(const NetworkModel& model, const char* what) {
    if (!model.has_identity_C()) {
        throw Error(ErrorCode::InvalidArgument, std::string(what) + " requires C = I");
    }
}

// Scatter a vector given in permuted agent order back to original agent order.
Vector unpermute(const Vector& xp, const std::vector<std::size_t>& perm, std::size_t m) {
    Vector x(xp.size());
    const auto mm = static_cast<Eigen::Index>(m);
    for (std::size_t p = 0; p < perm.size(); ++p) {
        x.segment(static_cast<Eigen::Index>(perm[p]) * mm, mm) =
            xp.segment(static_cast<Eigen::Index>(p) * mm, mm);
    }
    return x;
}

Vector permute(const Vector& x, const std::vector<std::size_t>& perm, std::size_t m) {
    Vector xp(x.size());
    const auto mm = static_cast<Eigen::Index>(m);
    for (std::size_t p = 0; p < perm.size(); ++p) {
        xp.segment(static_cast<Eigen::Index>(p) * mm, mm) =
            x.segment(static_cast<Eigen::Index>(perm[p]) * mm, mm);
    }
    return xp;
}

}  // namespace

std::string to_string(Termination t) {
    switch (t) {
        case Termination::StepCap: return "step-cap";
        case Termination::Converged: return "converged";
        case Termination::Diverged: return "diverged";
    }
    return "unknown";
}

Vector initial_state(const NetworkModel& model) {
    if (model.has_identity_D()) return model.u();
    const Matrix X = model.D() * agent_columns(model.u(), model.m());
    return vec(X);
}

Vector step(const NetworkModel& model, const Vector& x) {
    const std::size_t m = model.m();
    const auto X = agent_columns(x, m);
    const auto U = agent_columns(model.u(), m);
    // Column i of X W^T is sum_j w_ij x_j.
    Matrix next = model.C() * (X * model.W().transpose());
    const Vector& l = model.lambda();
    for (Eigen::Index i = 0; i < next.cols(); ++i) {
        next.col(i) = l(i) * next.col(i) + (1.0 - l(i)) * U.col(i);
    }
    return vec(next);
}

Trajectory simulate(const NetworkModel& model, std::size_t max_steps, double conv_tol) {
    if (!(conv_tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "conv_tol must be positive");
    Trajectory traj;
    traj.states.push_back({0, initial_state(model)});
    for (std::size_t k = 0; k < max_steps; ++k) {
        const Vector& x = traj.states.back().x;
        Vector next = step(model, x);
        const double delta = (next - x).lpNorm<Eigen::Infinity>();
        const double size = next.lpNorm<Eigen::Infinity>();
        traj.states.push_back({k + 1, std::move(next)});
        if (!std::isfinite(size) || size > kDivergenceBound) {
            traj.termination = Termination::Diverged;
            return traj;
        }
        if (delta < conv_tol) {
            traj.termination = Termination::Converged;
            return traj;
        }
    }
    traj.termination = Termination::StepCap;
    return traj;
}

Vector limit_opinion(const NetworkModel& model, const AgentClassification& cls,
                     const SpectralReport& spec) {
    const auto n = static_cast<Eigen::Index>(model.n());
    const auto m = static_cast<Eigen::Index>(model.m());
    const Matrix Im = Matrix::Identity(m, m);

    if (spec.stable) {
        const Matrix A = Matrix::Identity(n * m, n * m) - kron(model.LW(), model.C());
        const Vector one_minus_l = Vector::Ones(n) - model.lambda();
        const Vector rhs = kron(Matrix(one_minus_l.asDiagonal()), Im) * model.u();
        return solve_dense(A, rhs);
    }
    if (spec.verdict != Verdict::Convergent) {
        throw Error(ErrorCode::NotConvergent, "model is not convergent (" + spec.clause + ")");
    }

    // Oblivious agents present, C regular and W22* defined (possibly forced to zero).
    const auto blocks = decompose(model, cls);
    const auto np = static_cast<Eigen::Index>(cls.n_prime);
    const Eigen::Index no = n - np;
    const Matrix& Cs = *spec.C_star;
    const Matrix& W22s = *spec.W22_star;
    const Matrix CsD = Cs * model.D();

    const Vector up = permute(model.u(), cls.permutation, model.m());
    const Vector u1 = up.head(np * m);
    const Vector u2 = up.tail(no * m);

    const Vector x2 = kron(W22s, CsD) * u2;
    Vector x1(np * m);
    if (np > 0) {
        const Matrix L11W11 = blocks.lambda1.asDiagonal() * blocks.W11;
        const Matrix L11W12W22s = blocks.lambda1.asDiagonal() * blocks.W12 * W22s;
        const Vector one_minus_l1 = Vector::Ones(np) - blocks.lambda1;
        const Vector rhs = kron(Matrix(one_minus_l1.asDiagonal()), Im) * u1 +
                           kron(L11W12W22s, model.C() * CsD) * u2;
        x1 = solve_dense(Matrix::Identity(np * m, np * m) - kron(L11W11, model.C()), rhs);
    }
    Vector xp(n * m);
    xp << x1, x2;
    return unpermute(xp, cls.permutation, model.m());
}

Vector limit_opinion(const NetworkModel& model) {
    const auto cls = classify_agents(model, build_graph(model));
    return limit_opinion(model, cls, analyze_spectrum(model, cls));
}

Vector alpha_approximation(const NetworkModel& model, double alpha) {
    if (!(alpha >= 0.0 && alpha < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "alpha must lie in [0, 1)");
    }
    require_identity_coupling(model, "alpha_approximation");
    const auto n = static_cast<Eigen::Index>(model.n());
    const Matrix A = Matrix::Identity(n, n) - alpha * model.LW();
    const Matrix B = Matrix::Identity(n, n) - alpha * Matrix(model.lambda().asDiagonal());
    // Each issue evolves independently when C = I: solve with the n x m prejudice matrix.
    const Matrix Ut = agent_columns(model.u(), model.m()).transpose();
    Eigen::PartialPivLU<Matrix> lu(A);
    if (!(lu.rcond() > 1e-14)) throw Error(ErrorCode::SingularSystem, "alpha_approximation: singular system");
    const Matrix Xt = lu.solve(B * Ut);
    return vec(Xt.transpose());
}

SeriesDecomposition stationary_series(const NetworkModel& model, const AgentClassification& cls,
                                      const SpectralReport& spec) {
    require_identity_coupling(model, "stationary_series");
    if (!spec.A_star) throw Error(ErrorCode::NotRegular, "Lambda W is not regular (" + spec.clause + ")");

    const auto n = static_cast<Eigen::Index>(model.n());
    const auto np = static_cast<Eigen::Index>(cls.n_prime);
    const std::size_t m = model.m();
    const auto blocks = decompose(model, cls);

    const Matrix Up = agent_columns(permute(model.u(), cls.permutation, m), m).transpose();  // n x m
    Matrix Sp = Matrix::Zero(n, static_cast<Eigen::Index>(m));
    if (np > 0) {
        const Matrix A = Matrix::Identity(np, np) - blocks.lambda1.asDiagonal() * blocks.W11;
        const Vector one_minus_l1 = Vector::Ones(np) - blocks.lambda1;
        Sp.topRows(np) = A.partialPivLu().solve(one_minus_l1.asDiagonal() * Up.topRows(np));
    }
    SeriesDecomposition out;
    out.series = unpermute(vec(Sp.transpose()), cls.permutation, m);
    const Matrix U = agent_columns(model.u(), m).transpose();
    out.limit_part = vec((*spec.A_star * U).transpose());
    return out;
}

}  // namespace mids

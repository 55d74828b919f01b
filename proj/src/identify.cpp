#include "mids/identify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mids/graph.hpp"
#include "mids/kron.hpp"
#include "mids/spectra.hpp"

namespace mids {

namespace {

// Subgradient schedule: restarts from the best iterate with a halved radius.
constexpr std::size_t kSubgradientPhases = 20;

NetworkModel skeleton(const IdentificationProblem& p) {
    ModelCandidate c;
    c.W = p.W;
    c.lambda = p.lambda;
    c.C = Matrix::Identity(static_cast<Eigen::Index>(p.m), static_cast<Eigen::Index>(p.m));
    c.u = p.u;
    return validate_model(c);
}

double operator_norm_sq(const Matrix& H) {
    // 50 power iterations on G^T G.
    if (H.size() == 0) return 0.0;
    Vector v = Vector::Ones(H.cols()).normalized();
    double est = 0.0;
    for (int it = 0; it < 50; ++it) {
        Vector w = H * v;
        const double nw = w.norm();
        if (nw == 0.0) return 0.0;
        est = nw;
        v = w / nw;
    }
    return est;
}

Vector subgradient(const Regressors& r, const Vector& c, Objective obj) {
    const Vector res = r.b - r.G * c;
    if (obj == Objective::SumAbs) {
        return -(r.G.transpose() * res.array().sign().matrix());
    }
    Eigen::Index k = 0;
    res.cwiseAbs().maxCoeff(&k);
    const double sgn = res(k) >= 0.0 ? 1.0 : -1.0;
    return -sgn * r.G.row(k).transpose();
}

}  // namespace

std::string to_string(ConstraintSet s) {
    switch (s) {
        case ConstraintSet::Unconstrained: return "none";
        case ConstraintSet::RowStochastic: return "stochastic";
        case ConstraintSet::InfNormBall: return "infnorm";
    }
    return "unknown";
}

std::string to_string(Objective o) {
    switch (o) {
        case Objective::SumSquares: return "sumsquares";
        case Objective::SumAbs: return "sumabs";
        case Objective::MaxAbs: return "maxabs";
    }
    return "unknown";
}

Regressors assemble_regressors(const IdentificationProblem& problem) {
    const NetworkModel model = skeleton(problem);
    const std::size_t m = problem.m;
    const auto d = static_cast<Eigen::Index>(model.dim());
    const auto mm = static_cast<Eigen::Index>(m);
    const Matrix LW = model.LW();
    const Matrix Im = Matrix::Identity(mm, mm);
    const Vector one_minus_l = Vector::Ones(static_cast<Eigen::Index>(model.n())) - model.lambda();
    const Vector prejudice_term = kron(Matrix(one_minus_l.asDiagonal()), Im) * model.u();

    auto block = [&](const Vector& prev) {
        const Matrix X = agent_columns(prev, m);
        return kron(LW * X.transpose(), Im);
    };
    auto check = [&](const Vector& x) {
        if (x.size() != d) {
            throw Error(ErrorCode::DimensionMismatch, "observation has " + std::to_string(x.size()) +
                                                          " entries, expected " + std::to_string(d));
        }
        if (!x.allFinite()) throw Error(ErrorCode::NonFiniteEntry, "observation has non-finite entries");
    };

    Regressors r;
    if (const auto* fin = std::get_if<FiniteHorizon>(&problem.data)) {
        const auto T = static_cast<Eigen::Index>(fin->observations.size());
        if (T == 0) throw Error(ErrorCode::DimensionMismatch, "finite horizon needs T >= 1 observations");
        r.G.resize(T * d, mm * mm);
        r.b.resize(T * d);
        Vector prev = model.u();
        for (Eigen::Index j = 0; j < T; ++j) {
            const Vector& x = fin->observations[static_cast<std::size_t>(j)];
            check(x);
            r.G.middleRows(j * d, d) = block(prev);
            r.b.segment(j * d, d) = x - prejudice_term;
            prev = x;
        }
    } else {
        const Vector& xs = std::get<InfiniteHorizon>(problem.data).steady_state;
        check(xs);
        if (!maximal_stochastic_subset(LW).empty()) {
            throw Error(ErrorCode::NotConvergent, "steady-state identification needs rho(Lambda W) < 1");
        }
        r.G = block(xs);
        r.b = xs - prejudice_term;
    }
    return r;
}

Vector project_simplex(const Vector& v, double radius) {
    std::vector<double> s(v.data(), v.data() + v.size());
    std::sort(s.begin(), s.end(), std::greater<>());
    double cumsum = 0.0;
    double theta = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) {
        cumsum += s[j];
        const double t = (cumsum - radius) / static_cast<double>(j + 1);
        if (s[j] - t > 0.0) theta = t;
    }
    return (v.array() - theta).cwiseMax(0.0);
}

Vector project_l1_ball(const Vector& v, double radius) {
    if (v.lpNorm<1>() <= radius) return v;
    const Vector w = project_simplex(v.cwiseAbs(), radius);
    return w.array() * v.array().sign();
}

Vector project(const Vector& c, std::size_t m, ConstraintSet set) {
    if (set == ConstraintSet::Unconstrained) return c;
    const auto mm = static_cast<Eigen::Index>(m);
    Matrix C = unvec(c, mm, mm);
    for (Eigen::Index i = 0; i < mm; ++i) {
        const Vector row = C.row(i).transpose();
        C.row(i) = (set == ConstraintSet::RowStochastic ? project_simplex(row) : project_l1_ball(row)).transpose();
    }
    return vec(C);
}

double objective_value(const Regressors& r, const Vector& c, Objective obj) {
    const Vector res = r.b - r.G * c;
    switch (obj) {
        case Objective::SumSquares: return res.squaredNorm();
        case Objective::SumAbs: return res.lpNorm<1>();
        case Objective::MaxAbs: return res.size() == 0 ? 0.0 : res.lpNorm<Eigen::Infinity>();
    }
    return 0.0;
}

IdentificationResult solve(const IdentificationProblem& problem, const SolverOptions& options) {
    const Regressors r = assemble_regressors(problem);
    const std::size_t m = problem.m;
    const auto mm = static_cast<Eigen::Index>(m);
    const ConstraintSet set = problem.constraint;

    IdentificationResult out;
    const Eigen::JacobiSVD<Matrix> svd(r.G);
    const Vector& sv = svd.singularValues();
    if (sv.size() > 0) {
        const double smax = sv(0);
        const double cutoff = static_cast<double>(std::max(r.G.rows(), r.G.cols())) *
                              std::numeric_limits<double>::epsilon() * smax;
        out.rank = static_cast<std::size_t>((sv.array() > cutoff).count());
        const double smin = r.G.rows() >= r.G.cols() ? sv(sv.size() - 1) : 0.0;
        out.condition_number = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    }

    const Matrix H = r.G.transpose() * r.G;
    const Vector Gtb = r.G.transpose() * r.b;
    const double lip = operator_norm_sq(H);
    // The gradient 2(Hc - G^T b) has Lipschitz constant 2 ||G||^2.
    const double t0 = lip > 0.0 ? 0.5 / lip : 1.0;

    Vector c = project(vec(Matrix::Identity(mm, mm)), m, set);

    if (problem.objective == Objective::SumSquares) {
        auto grad = [&](const Vector& x) -> Vector { return 2.0 * (H * x - Gtb); };
        double f = objective_value(r, c, Objective::SumSquares);
        if (options.record_history) out.history.push_back(f);
        std::size_t it = 0;
        for (; it < options.max_iterations; ++it) {
            const Vector g = grad(c);
            out.projected_gradient_norm = (c - project(c - t0 * g, m, set)).norm() / t0;
            if (out.projected_gradient_norm < options.tolerance) {
                out.converged = true;
                break;
            }
            double t = t0;
            bool accepted = false;
            for (int halvings = 0; halvings < 60; ++halvings, t *= 0.5) {
                const Vector step = project(c - t * g, m, set) - c;
                if (step.isZero(0.0)) break;
                // Exact change of a quadratic: g.step + step' H step.
                const double slope = g.dot(step);
                const double change = slope + step.dot(H * step);
                // Near the optimum the projection's rounding in step (~eps per entry) times |g|
                // swamps the true slope; below that level the test carries no information.
                const double noise = 64.0 * std::numeric_limits<double>::epsilon() *
                                     (g.cwiseAbs().dot(step.cwiseAbs()) + g.cwiseAbs().sum() * c.cwiseAbs().maxCoeff());
                if (change <= kArmijo * slope + noise) {
                    c += step;
                    f = std::max(0.0, f + change);
                    accepted = true;
                    break;
                }
            }
            if (options.record_history) out.history.push_back(objective_value(r, c, Objective::SumSquares));
            if (!accepted) break;  // no representable descent step left
        }
        out.iterations = it;
    } else {
        out.approximate = true;
        Vector best = c;
        double best_f = objective_value(r, c, problem.objective);
        if (options.record_history) out.history.push_back(best_f);
        double radius = std::max(1.0, c.norm());
        const std::size_t per_phase = std::max<std::size_t>(1, options.max_iterations / kSubgradientPhases);
        std::size_t it = 0;
        for (std::size_t phase = 0; phase < kSubgradientPhases && it < options.max_iterations; ++phase) {
            c = best;
            for (std::size_t k = 0; k < per_phase && it < options.max_iterations; ++k, ++it) {
                const Vector g = subgradient(r, c, problem.objective);
                const double gn = g.norm();
                if (gn == 0.0) break;
                c = project(c - (radius / std::sqrt(static_cast<double>(k + 1))) * (g / gn), m, set);
                const double fc = objective_value(r, c, problem.objective);
                if (fc < best_f) {
                    best_f = fc;
                    best = c;
                }
                if (options.record_history) out.history.push_back(best_f);
            }
            radius *= 0.5;
        }
        c = best;
        out.iterations = it;
        out.converged = true;
        out.projected_gradient_norm = std::numeric_limits<double>::quiet_NaN();
    }

    c = project(c, m, set);
    out.C = unvec(c, mm, mm);
    out.objective_value = objective_value(r, c, problem.objective);
    out.residual = problem.objective == Objective::SumSquares ? std::sqrt(out.objective_value)
                                                              : out.objective_value;
    const NetworkModel model = skeleton(problem);
    const Matrix LW = model.LW();
    if (LW.rows() <= kMaxEigenDim) {
        out.stable_estimate = spectral_radius(LW) * spectral_radius(out.C) < 1.0 - kTolSpec;
    }
    return out;
}

}  // namespace mids

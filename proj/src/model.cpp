#include "mids/model.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace mids {

namespace {

void require_finite(const Matrix& M, const char* name) {
    if (!M.allFinite()) {
        throw Error(ErrorCode::NonFiniteEntry, std::string(name) + " has non-finite entries");
    }
}

std::string dims(Eigen::Index r, Eigen::Index c) {
    return std::to_string(r) + "x" + std::to_string(c);
}

}  // namespace

bool NetworkModel::has_identity_D() const {
    return D_ == Matrix::Identity(D_.rows(), D_.cols());
}

bool NetworkModel::has_identity_C() const {
    return C_ == Matrix::Identity(C_.rows(), C_.cols());
}

ModelCandidate NetworkModel::candidate() const {
    ModelCandidate c;
    c.W = W_;
    c.lambda = lambda_;
    c.C = C_;
    c.D = D_;
    c.u = u_;
    return c;
}

NetworkModel NetworkModel::with_C(const Matrix& C) const {
    auto c = candidate();
    c.C = C;
    return validate_model(c);
}

NetworkModel NetworkModel::with_u(const Vector& u) const {
    auto c = candidate();
    c.u = u;
    return validate_model(c);
}

bool operator==(const NetworkModel& a, const NetworkModel& b) {
    auto same = [](const Matrix& x, const Matrix& y) {
        return x.rows() == y.rows() && x.cols() == y.cols() && x == y;
    };
    return same(a.W_, b.W_) && same(a.lambda_, b.lambda_) && same(a.C_, b.C_) &&
           same(a.D_, b.D_) && same(a.u_, b.u_);
}

NetworkModel validate_model(const ModelCandidate& raw) {
    const Eigen::Index n = raw.W.rows();
    if (n == 0 || raw.W.cols() != n) {
        throw Error(ErrorCode::DimensionMismatch, "W must be square and non-empty, got " +
                                                      dims(raw.W.rows(), raw.W.cols()));
    }
    const Eigen::Index m = raw.C.rows();
    if (m == 0 || raw.C.cols() != m) {
        throw Error(ErrorCode::DimensionMismatch, "C must be square and non-empty, got " +
                                                      dims(raw.C.rows(), raw.C.cols()));
    }
    if (raw.lambda.size() != n) {
        throw Error(ErrorCode::DimensionMismatch, "Lambda has " + std::to_string(raw.lambda.size()) +
                                                      " entries, expected " + std::to_string(n));
    }
    if (raw.D && (raw.D->rows() != m || raw.D->cols() != m)) {
        throw Error(ErrorCode::DimensionMismatch,
                    "D must be " + dims(m, m) + ", got " + dims(raw.D->rows(), raw.D->cols()));
    }
    if (raw.u.size() != n * m) {
        throw Error(ErrorCode::DimensionMismatch, "u has " + std::to_string(raw.u.size()) +
                                                      " entries, expected n*m = " +
                                                      std::to_string(n * m));
    }
    require_finite(raw.W, "W");
    require_finite(raw.lambda, "Lambda");
    require_finite(raw.C, "C");
    if (raw.D) require_finite(*raw.D, "D");
    require_finite(raw.u, "u");

    NetworkModel model;
    model.W_ = raw.W;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            double& w = model.W_(i, j);
            if (w < -kTolNeg) {
                throw Error(ErrorCode::NonStochasticRow, "W(" + std::to_string(i) + "," +
                                                             std::to_string(j) + ") = " +
                                                             std::to_string(w) + " is negative");
            }
            if (w < 0.0) w = 0.0;
        }
        const double s = model.W_.row(i).sum();
        if (std::abs(s - 1.0) > kTolRow) {
            throw Error(ErrorCode::NonStochasticRow,
                        "row " + std::to_string(i) + " of W sums to " + std::to_string(s));
        }
        // A row within summation rounding of 1 is left as is so validation stays idempotent.
        const double rounding = 2.0 * static_cast<double>(n) * std::numeric_limits<double>::epsilon();
        if (std::abs(s - 1.0) > rounding) model.W_.row(i) /= s;
    }

    for (Eigen::Index i = 0; i < n; ++i) {
        const double l = raw.lambda(i);
        if (l < 0.0 || l > 1.0) {
            throw Error(ErrorCode::BadSusceptibility,
                        "lambda_" + std::to_string(i) + " = " + std::to_string(l) + " outside [0,1]");
        }
    }
    model.lambda_ = raw.lambda;
    model.C_ = raw.C;
    model.D_ = raw.D ? *raw.D : Matrix::Identity(m, m);
    model.u_ = raw.u;
    return model;
}

NetworkModel normalize_model(const NetworkModel& model) {
    NetworkModel out = model;
    const bool self_loop_is_frozen = model.has_identity_C() && model.has_identity_D();
    const Eigen::Index n = out.W_.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        // lambda = 1 keeps the agent oblivious; relabelling it would hide a closed class of G[W].
        if (out.W_(i, i) == 1.0 && out.lambda_(i) < 1.0 && self_loop_is_frozen) out.lambda_(i) = 0.0;
        if (out.lambda_(i) == 0.0) {
            out.W_.row(i).setZero();
            out.W_(i, i) = 1.0;
        }
    }
    return out;
}

}  // namespace mids

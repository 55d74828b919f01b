#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "mids/model.hpp"

namespace mids::test {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline Matrix random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c, double lo = -1.0, double hi = 1.0) {
    Matrix M(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) M(i, j) = uniform(rng, lo, hi);
    return M;
}

// Row-stochastic matrix; each entry is kept with probability `density`, at least one per row.
inline Matrix random_stochastic(Rng& rng, Eigen::Index n, double density = 1.0) {
    Matrix A = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j)
            if (uniform(rng, 0.0, 1.0) < density) A(i, j) = uniform(rng, 0.05, 1.0);
        if (A.row(i).sum() == 0.0) A(i, static_cast<Eigen::Index>(pick(rng, 0, static_cast<std::size_t>(n - 1)))) = 1.0;
        A.row(i) /= A.row(i).sum();
    }
    return A;
}

inline Vector random_vector(Rng& rng, Eigen::Index n, double lo = -1.0, double hi = 1.0) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = uniform(rng, lo, hi);
    return v;
}

// Random susceptibilities: a mix of 0, 1 and interior values.
inline Vector random_lambda(Rng& rng, Eigen::Index n, double p_one = 0.3, double p_zero = 0.1) {
    Vector l(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double r = uniform(rng, 0.0, 1.0);
        l(i) = r < p_zero ? 0.0 : (r < p_zero + p_one ? 1.0 : uniform(rng, 0.05, 0.95));
    }
    return l;
}

inline ModelCandidate random_candidate(Rng& rng, std::size_t n, std::size_t m, const Matrix& C,
                                       double density = 0.6) {
    ModelCandidate c;
    const auto nn = static_cast<Eigen::Index>(n);
    c.W = random_stochastic(rng, nn, density);
    c.lambda = random_lambda(rng, nn);
    c.C = C;
    c.u = random_vector(rng, static_cast<Eigen::Index>(n * m), -1.0, 1.0);
    return c;
}

// Every stubborn agent has lambda < 1, no oblivious agents: stable by construction.
inline ModelCandidate random_stable_candidate(Rng& rng, std::size_t n, std::size_t m, const Matrix& C) {
    ModelCandidate c = random_candidate(rng, n, m, C);
    for (Eigen::Index i = 0; i < c.lambda.size(); ++i) c.lambda(i) = uniform(rng, 0.05, 0.95);
    return c;
}

inline Matrix random_row_stochastic_C(Rng& rng, std::size_t m) {
    return random_stochastic(rng, static_cast<Eigen::Index>(m), 1.0);
}

// ---------------------------------------------------------------------------
// Independent oracles. None of these call into the library under test.

// Entry-by-entry Kronecker product.
inline Matrix kron_naive(const Matrix& A, const Matrix& B) {
    Matrix K(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            for (Eigen::Index p = 0; p < B.rows(); ++p)
                for (Eigen::Index q = 0; q < B.cols(); ++q)
                    K(i * B.rows() + p, j * B.cols() + q) = A(i, j) * B(p, q);
    return K;
}

// Is the principal submatrix on `idx` row-stochastic?
inline bool subset_stochastic(const Matrix& A, const std::vector<std::size_t>& idx, double tol = 1e-9) {
    for (std::size_t i : idx) {
        double s = 0.0;
        for (std::size_t j : idx) s += A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        if (std::abs(s - 1.0) > tol) return false;
    }
    return true;
}

// Maximal stochastic subset by exhaustive enumeration (n <= 12): union of all stochastic subsets.
inline std::vector<std::size_t> brute_force_stochastic_subset(const Matrix& A) {
    const auto n = static_cast<std::size_t>(A.rows());
    std::set<std::size_t> uni;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (1u << i)) idx.push_back(i);
        if (subset_stochastic(A, idx)) uni.insert(idx.begin(), idx.end());
    }
    return {uni.begin(), uni.end()};
}

// reach[i][j]: walk of length >= 0 from i to j in the graph of positive entries (Warshall).
inline std::vector<std::vector<bool>> transitive_closure(const Matrix& A) {
    const auto n = static_cast<std::size_t>(A.rows());
    std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i) {
        r[i][i] = true;
        for (std::size_t j = 0; j < n; ++j)
            if (A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > 0.0) r[i][j] = true;
    }
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            if (r[i][k])
                for (std::size_t j = 0; j < n; ++j)
                    if (r[k][j]) r[i][j] = true;
    return r;
}

// Spectral radius from Gelfand's formula, rho = lim |A^k|^(1/k), with k = 2^s and rescaling
// after every squaring. Accurate to roughly log(cond)/2^s relative.
inline double gelfand_radius(const Matrix& A, int squarings = 40) {
    Matrix B = A;
    double log_scale = 0.0;  // log |A^(2^s)| = 2^s * (log_scale) + log |B|
    double weight = 1.0;
    for (int s = 0; s < squarings; ++s) {
        const double nb = B.cwiseAbs().rowwise().sum().maxCoeff();
        if (nb == 0.0) return 0.0;
        B /= nb;
        log_scale += std::log(nb) / weight;
        B = B * B;
        weight *= 2.0;
    }
    const double nb = B.cwiseAbs().rowwise().sum().maxCoeff();
    if (nb == 0.0) return 0.0;
    return std::exp(log_scale + std::log(nb) / weight);
}

// Perron root of a non-negative matrix by power iteration on (A + I) (shift avoids periodicity).
inline double perron_root(const Matrix& A, int iters = 20000) {
    const auto n = A.rows();
    Vector v = Vector::Ones(n) / static_cast<double>(n);
    const Matrix S = A + Matrix::Identity(n, n);
    double est = 0.0;
    for (int it = 0; it < iters; ++it) {
        Vector w = S * v;
        est = w.sum() / v.sum();
        v = w / w.sum();
    }
    return est - 1.0;
}

// A^k by repeated multiplication (no squaring, no renormalisation).
inline Matrix matrix_power(const Matrix& A, int k) {
    Matrix P = Matrix::Identity(A.rows(), A.cols());
    for (int i = 0; i < k; ++i) P = P * A;
    return P;
}

// Explicit synchronous iteration x <- (LW kron C) x + ((I - Lambda) kron I) u.
inline Vector iterate_explicit(const Matrix& W, const Vector& lambda, const Matrix& C, const Vector& u,
                               const Vector& x0, int steps) {
    const auto n = W.rows();
    const auto m = C.rows();
    const Matrix P = kron_naive(lambda.asDiagonal() * W, C);
    const Vector b = kron_naive(Matrix((Vector::Ones(n) - lambda).asDiagonal()), Matrix::Identity(m, m)) * u;
    Vector x = x0;
    for (int i = 0; i < steps; ++i) x = P * x + b;
    return x;
}

// W with a closed block of k non-stubborn agents at the end (k >= 1 when plant is set).
inline ModelCandidate planted_oblivious_candidate(Rng& rng, std::size_t n, bool plant, std::size_t m = 1,
                                                  const Matrix& C = Matrix::Identity(1, 1)) {
    auto raw = random_candidate(rng, n, m, C, uniform(rng, 0.15, 0.8));
    if (!plant) return raw;
    const std::size_t k = pick(rng, 1, n - 1);
    for (std::size_t i = n - k; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        raw.lambda(ii) = 1.0;
        for (std::size_t j = 0; j < n - k; ++j) raw.W(ii, static_cast<Eigen::Index>(j)) = 0.0;
        if (raw.W.row(ii).sum() == 0.0) raw.W(ii, ii) = 1.0;
        raw.W.row(ii) /= raw.W.row(ii).sum();
    }
    return raw;
}

// Stochastic matrix cycling through d classes, with an occasional self-loop that breaks the period.
inline Matrix random_block_cyclic(Rng& rng, Eigen::Index n) {
    const auto d = static_cast<Eigen::Index>(pick(rng, 1, static_cast<std::size_t>(n)));
    Matrix A = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index cls = i % d;
        for (Eigen::Index j = 0; j < n; ++j)
            if (j % d == (cls + 1) % d && uniform(rng, 0, 1) < 0.7) A(i, j) = uniform(rng, 0.1, 1.0);
        if (A.row(i).sum() == 0.0) A(i, (cls + 1) % d) = 1.0;
        A.row(i) /= A.row(i).sum();
    }
    if (uniform(rng, 0, 1) < 0.3) {
        const auto i = static_cast<Eigen::Index>(pick(rng, 0, static_cast<std::size_t>(n - 1)));
        A.row(i) *= 0.5;
        A(i, i) += 0.5;
    }
    return A;
}

struct SpectralRegularity {
    bool regular;
    bool fully_regular;
};

// Regular iff 1 is the only eigenvalue on the unit circle; fully regular if it is simple.
// Uses the complex Schur solver, not the real one behind eigenvalues().
inline SpectralRegularity spectral_regularity(const Matrix& A) {
    using cd = std::complex<double>;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(A.cast<cd>());
    int at_one = 0;
    bool regular = true;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const cd z = es.eigenvalues()(i);
        if (std::abs(z - 1.0) < 1e-6) {
            ++at_one;
        } else if (std::abs(z) > 1.0 - 1e-6) {
            regular = false;
        }
    }
    return {regular, regular && at_one == 1};
}

inline double max_abs_diff(const Vector& a, const Vector& b) { return (a - b).lpNorm<Eigen::Infinity>(); }

}  // namespace mids::test

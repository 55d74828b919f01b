#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mids/graph.hpp"
#include "mids/model.hpp"

namespace mids {

/// Products of spectral radii below 1 - kTolSpec count as stable.
inline constexpr double kTolSpec = 1e-10;
/// Largest matrix accepted by eigenvalues().
inline constexpr Eigen::Index kMaxEigenDim = 64;

/// All eigenvalues with multiplicity (balancing, Hessenberg reduction, Francis QR).
/// Throws NoConvergence when the QR sweep budget (100 * dim) is exhausted.
[[nodiscard]] std::vector<std::complex<double>> eigenvalues(const Matrix& A);

/// Diagonal similarity D^-1 A D that equalises row and column norms (radix 2, exact).
[[nodiscard]] Matrix balance(const Matrix& A);

[[nodiscard]] bool is_row_stochastic(const Matrix& A, double tol = kTolRow);

/// max |lambda|; exactly 1 for row-stochastic input.
[[nodiscard]] double spectral_radius(const Matrix& A);

struct Regularity {
    bool regular = false;
    bool fully_regular = false;
    std::size_t closed_classes = 0;
};

/// Combinatorial regularity test for a row-stochastic matrix: every closed class of
/// the graph must be aperiodic; fully regular additionally needs a single closed class.
/// Throws NotStochastic.
[[nodiscard]] Regularity is_regular(const Matrix& A);

enum class LimitMode {
    RowStochastic,  // regular row-stochastic matrix
    Contractive,    // rho(A) < 1, limit is zero
    General,        // any regular real matrix (e.g. a coupling matrix C)
};

/// lim A^k by repeated squaring (at most 60 squarings, stop when the step is < 1e-12).
/// Throws NotRegular or NoConvergence.
[[nodiscard]] Matrix limit_power(const Matrix& A, LimitMode mode);

/// Whether lim C^k exists, judged from the spectrum and repeated squaring.
[[nodiscard]] std::optional<Matrix> try_limit_general(const Matrix& A);

enum class Verdict { Stable, Convergent, Divergent };

[[nodiscard]] std::string to_string(Verdict v);

struct SpectralReport {
    double rho_LW = 0.0;
    double rho_C = 0.0;
    bool stable = false;

    bool regular_C = false;
    std::optional<Matrix> C_star;

    // Present only when oblivious agents exist (n' < n).
    std::optional<bool> regular_W22;
    std::optional<bool> fully_regular_W22;
    std::optional<Matrix> W22_star;  // in permuted (oblivious block) order
    bool W22_star_forced_zero = false;

    /// lim (Lambda W)^k in original agent order, when it exists.
    std::optional<Matrix> A_star;

    Verdict verdict = Verdict::Divergent;
    std::string clause;
};

[[nodiscard]] SpectralReport analyze_spectrum(const NetworkModel& model,
                                              const AgentClassification& cls);

}  // namespace mids

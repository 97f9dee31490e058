#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace sgreen {

using ApplyFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Per-iteration history of a solve. Residuals are recomputed from scratch
/// (||F - A U_k||) each iteration rather than carried recursively.
struct IterationTrace {
    std::vector<double> err_l2;                // vs. reference, when given
    std::vector<double> res_l2;
    std::vector<Eigen::VectorXd> mode_rows;    // |<E_k, xi_j>_D|, when a basis is given
    int iterations = 0;
    bool converged = false;
    std::string stop_reason;
};

/// D-orthonormal eigenbasis of the damped-Jacobi amplification matrix
/// I - w D^-1 A, computed through the symmetric similarity
/// D^-1/2 A D^-1/2 and ordered by ascending eigenvalue of D^-1 A
/// (column 0 = lowest frequency).
struct ModeBasis {
    Eigen::MatrixXd xi;          // columns xi_j, D-orthonormal
    Eigen::VectorXd dinv_a_eig;  // eigenvalues of D^-1 A
    Eigen::VectorXd dweight;     // diagonal of D
};

ModeBasis jacobi_mode_basis(const Eigen::SparseMatrix<double>& A);

/// Mode-wise magnitudes |<E, xi_j>_D| of one error vector / of a history
/// (one row per error vector).
Eigen::VectorXd modewise_error(const Eigen::VectorXd& error, const ModeBasis& basis);
Eigen::MatrixXd modewise_error(const std::vector<Eigen::VectorXd>& error_history,
                               const ModeBasis& basis);

struct SolveOptions {
    double tol_rel_res = 0.0;  // stop when ||F - A U|| / ||F|| <= this (0 = off)
    double tol_err = 0.0;      // stop when ||U - reference|| <= this (0 = off)
    int max_iter = 1000;
    std::optional<Eigen::VectorXd> reference;  // error tracking / stopping
    const ModeBasis* mode_basis = nullptr;     // mode-wise error logging
};

struct SolveResult {
    Eigen::VectorXd solution;
    IterationTrace trace;
};

/// U <- U + w D^-1 (F - A U); w defaults to 1/2.
SolveResult damped_jacobi(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& F,
                          const Eigen::VectorXd& U0, double omega, const SolveOptions& opts);

/// Textbook two-sided biconjugate gradients with optional (symmetric)
/// preconditioning. Breakdown (vanishing rho or p~Ap) is reported in
/// stop_reason.
SolveResult bicg(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& F,
                 const ApplyFn& apply_prec, const Eigen::VectorXd& U0, const SolveOptions& opts);

/// Full (non-restarted) Arnoldi GMRES with Givens-rotation least squares;
/// optional left preconditioning. Arnoldi breakdown means the exact
/// solution was reached and is reported.
SolveResult gmres(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& F,
                  const ApplyFn& apply_prec, const Eigen::VectorXd& U0, const SolveOptions& opts);

/// Eigenvalues (ascending by real part, then imaginary) plus optional
/// eigenvectors for the symmetric paths.
struct SpectrumReport {
    Eigen::VectorXcd eigenvalues;
    Eigen::MatrixXd eigenvectors;  // symmetric/generalized paths only
    bool symmetric_path = false;
};

/// Dense eigensolve. Symmetric input goes through orthogonal
/// tridiagonalization; general input through Hessenberg-QR (capped near
/// n = 4100); with `generalized_rhs` the symmetric-definite pencil
/// K c = mu M c is solved (eigenvectors M-orthonormal).
SpectrumReport eig_dense(const Eigen::MatrixXd& M,
                         const Eigen::MatrixXd* generalized_rhs = nullptr,
                         bool compute_vectors = false);

/// Eigenvalues of B*A without forming an unsymmetric dense solve when A is
/// SPD: B A is similar to the symmetric-definite pencil (A B A, A).
/// Falls back to the general dense path otherwise.
SpectrumReport eig_product(const Eigen::MatrixXd& B, const Eigen::SparseMatrix<double>& A,
                           bool a_is_spd);

/// |lambda|_max / |lambda|_min.
double condition_number(const SpectrumReport& report);
double condition_number(const Eigen::MatrixXd& M);

/// Extreme Ritz values of a self-adjoint operator in a custom inner
/// product <u, v> = u . weight(v): Lanczos with full reorthogonalization.
/// Used for kappa estimates beyond the dense cap.
struct RitzEstimate {
    Eigen::VectorXd values;  // ascending
    int steps = 0;
};
RitzEstimate lanczos_extreme(const ApplyFn& op, const ApplyFn& weight, int n, int steps,
                             std::uint64_t seed);

}  // namespace sgreen

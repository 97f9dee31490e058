#include "sgreen/iterative.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace sgreen {

namespace {

// Appends one trace row for the current iterate.
void log_state(IterationTrace& trace, const Eigen::SparseMatrix<double>& A,
               const Eigen::VectorXd& F, const Eigen::VectorXd& U, const SolveOptions& opts) {
    trace.res_l2.push_back((F - A * U).norm());
    if (opts.reference) {
        const Eigen::VectorXd err = *opts.reference - U;
        trace.err_l2.push_back(err.norm());
        if (opts.mode_basis) trace.mode_rows.push_back(modewise_error(err, *opts.mode_basis));
    }
}

// Checks the stopping rules against the latest logged state.
bool should_stop(const IterationTrace& trace, double fnorm, const SolveOptions& opts,
                 std::string& reason) {
    if (opts.tol_rel_res > 0.0 && trace.res_l2.back() <= opts.tol_rel_res * fnorm) {
        reason = "relative residual tolerance reached";
        return true;
    }
    if (opts.tol_err > 0.0 && opts.reference && trace.err_l2.back() <= opts.tol_err) {
        reason = "reference error tolerance reached";
        return true;
    }
    return false;
}

}  // namespace

ModeBasis jacobi_mode_basis(const Eigen::SparseMatrix<double>& A) {
    const int n = static_cast<int>(A.rows());
    Eigen::VectorXd d = A.diagonal();
    for (int i = 0; i < n; ++i)
        if (d(i) == 0.0) throw std::invalid_argument("jacobi_mode_basis: zero diagonal entry");

    // D^-1/2 A D^-1/2 is symmetric and similar to D^-1 A, so its
    // eigenvectors back-map to a D-orthonormal basis.
    const Eigen::VectorXd dis = d.cwiseAbs().cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd sym = Eigen::MatrixXd(A);
    sym = dis.asDiagonal() * sym * dis.asDiagonal();
    sym = 0.5 * (sym + sym.transpose());
    SpectrumReport spec = eig_dense(sym, nullptr, true);

    ModeBasis basis;
    basis.dweight = d;
    basis.dinv_a_eig = spec.eigenvalues.real();
    basis.xi = dis.asDiagonal() * spec.eigenvectors;
    return basis;
}

Eigen::VectorXd modewise_error(const Eigen::VectorXd& error, const ModeBasis& basis) {
    return (basis.xi.transpose() * basis.dweight.asDiagonal() * error).cwiseAbs();
}

Eigen::MatrixXd modewise_error(const std::vector<Eigen::VectorXd>& error_history,
                               const ModeBasis& basis) {
    Eigen::MatrixXd m(error_history.size(), basis.xi.cols());
    for (std::size_t k = 0; k < error_history.size(); ++k)
        m.row(k) = modewise_error(error_history[k], basis).transpose();
    return m;
}

SolveResult damped_jacobi(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& F,
                          const Eigen::VectorXd& U0, double omega, const SolveOptions& opts) {
    const Eigen::VectorXd dinv = A.diagonal().cwiseInverse();
    if (!dinv.allFinite()) throw std::invalid_argument("damped_jacobi: zero diagonal entry");

    SolveResult out;
    out.solution = U0;
    const double fnorm = F.norm();
    log_state(out.trace, A, F, out.solution, opts);
    std::string reason = "max iterations reached";
    for (int k = 0; k < opts.max_iter; ++k) {
        out.solution += omega * dinv.asDiagonal() * (F - A * out.solution);
        out.trace.iterations = k + 1;
        log_state(out.trace, A, F, out.solution, opts);
        if (should_stop(out.trace, fnorm, opts, reason)) {
            out.trace.converged = true;
            break;
        }
    }
    out.trace.stop_reason = reason;
    return out;
}

SolveResult bicg(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& F,
                 const ApplyFn& apply_prec, const Eigen::VectorXd& U0, const SolveOptions& opts) {
    const auto prec = apply_prec ? apply_prec : [](const Eigen::VectorXd& v) { return v; };
    const Eigen::SparseMatrix<double> At = A.transpose();

    SolveResult out;
    out.solution = U0;
    const double fnorm = F.norm();

    Eigen::VectorXd r = F - A * out.solution;
    Eigen::VectorXd rs = r;  // shadow residual
    Eigen::VectorXd p, ps;
    double rho_old = 0.0;

    log_state(out.trace, A, F, out.solution, opts);
    std::string reason = "max iterations reached";
    for (int k = 0; k < opts.max_iter; ++k) {
        const Eigen::VectorXd z = prec(r);
        const Eigen::VectorXd zs = prec(rs);  // symmetric preconditioner: M^T = M
        const double rho = rs.dot(z);
        if (std::abs(rho) < 1e-300) {
            reason = "breakdown: rho vanished";
            break;
        }
        if (k == 0) {
            p = z;
            ps = zs;
        } else {
            const double beta = rho / rho_old;
            p = z + beta * p;
            ps = zs + beta * ps;
        }
        const Eigen::VectorXd q = A * p;
        const Eigen::VectorXd qs = At * ps;
        const double denom = ps.dot(q);
        if (std::abs(denom) < 1e-300) {
            reason = "breakdown: p'Ap vanished";
            break;
        }
        const double alpha = rho / denom;
        out.solution += alpha * p;
        r -= alpha * q;
        rs -= alpha * qs;
        rho_old = rho;

        out.trace.iterations = k + 1;
        log_state(out.trace, A, F, out.solution, opts);
        if (should_stop(out.trace, fnorm, opts, reason)) {
            out.trace.converged = true;
            break;
        }
    }
    out.trace.stop_reason = reason;
    return out;
}

SolveResult gmres(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& F,
                  const ApplyFn& apply_prec, const Eigen::VectorXd& U0, const SolveOptions& opts) {
    const auto prec = apply_prec ? apply_prec : [](const Eigen::VectorXd& v) { return v; };
    const int n = static_cast<int>(A.rows());
    const int m = std::min(opts.max_iter, n);

    SolveResult out;
    out.solution = U0;
    const double fnorm = F.norm();
    log_state(out.trace, A, F, out.solution, opts);

    Eigen::VectorXd r0 = prec(F - A * U0);
    const double beta = r0.norm();
    if (beta == 0.0) {
        out.trace.converged = true;
        out.trace.stop_reason = "initial residual zero";
        return out;
    }

    Eigen::MatrixXd v(n, m + 1);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m + 1, m);
    Eigen::VectorXd cs(m), sn(m), g = Eigen::VectorXd::Zero(m + 1);
    v.col(0) = r0 / beta;
    g(0) = beta;

    std::string reason = "max iterations reached";
    int k = 0;
    for (; k < m; ++k) {
        Eigen::VectorXd w = prec(A * v.col(k));
        for (int i = 0; i <= k; ++i) {
            h(i, k) = w.dot(v.col(i));
            w -= h(i, k) * v.col(i);
        }
        h(k + 1, k) = w.norm();
        const bool lucky = h(k + 1, k) < 1e-14 * std::max(1.0, h.col(k).head(k + 1).norm());
        if (!lucky) v.col(k + 1) = w / h(k + 1, k);

        // Apply the accumulated Givens rotations, then a new one.
        for (int i = 0; i < k; ++i) {
            const double t = cs(i) * h(i, k) + sn(i) * h(i + 1, k);
            h(i + 1, k) = -sn(i) * h(i, k) + cs(i) * h(i + 1, k);
            h(i, k) = t;
        }
        const double denom = std::hypot(h(k, k), h(k + 1, k));
        cs(k) = h(k, k) / denom;
        sn(k) = h(k + 1, k) / denom;
        h(k, k) = denom;
        h(k + 1, k) = 0.0;
        g(k + 1) = -sn(k) * g(k);
        g(k) = cs(k) * g(k);

        // Current iterate from the triangular least-squares solve.
        Eigen::VectorXd y = h.topLeftCorner(k + 1, k + 1)
                                .triangularView<Eigen::Upper>()
                                .solve(g.head(k + 1));
        out.solution = U0 + v.leftCols(k + 1) * y;

        out.trace.iterations = k + 1;
        log_state(out.trace, A, F, out.solution, opts);
        if (should_stop(out.trace, fnorm, opts, reason)) {
            out.trace.converged = true;
            ++k;
            break;
        }
        if (lucky) {
            reason = "Arnoldi breakdown: exact solution reached";
            out.trace.converged = true;
            ++k;
            break;
        }
    }
    out.trace.stop_reason = reason;
    return out;
}

RitzEstimate lanczos_extreme(const ApplyFn& op, const ApplyFn& weight, int n, int steps,
                             std::uint64_t seed) {
    steps = std::min(steps, n);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Eigen::VectorXd q(n);
    for (int i = 0; i < n; ++i) q(i) = dist(rng);

    auto ip = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return a.dot(weight(b)); };

    q /= std::sqrt(ip(q, q));
    Eigen::MatrixXd basis(n, steps);
    Eigen::VectorXd alpha(steps), beta(steps);
    int k = 0;
    Eigen::VectorXd qprev = Eigen::VectorXd::Zero(n);
    double beta_prev = 0.0;
    for (; k < steps; ++k) {
        basis.col(k) = q;
        Eigen::VectorXd w = op(q);
        alpha(k) = ip(w, q);
        w -= alpha(k) * q + beta_prev * qprev;
        // Full reorthogonalization in the weighted inner product.
        for (int i = 0; i <= k; ++i) w -= ip(w, basis.col(i)) * basis.col(i);
        const double b = std::sqrt(std::max(0.0, ip(w, w)));
        if (b < 1e-13) {
            ++k;
            break;
        }
        beta(k) = b;
        qprev = q;
        q = w / b;
        beta_prev = b;
    }

    // Eigenvalues of the tridiagonal Rayleigh quotient.
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
    for (int i = 0; i < k; ++i) {
        t(i, i) = alpha(i);
        if (i + 1 < k) {
            t(i, i + 1) = beta(i);
            t(i + 1, i) = beta(i);
        }
    }
    RitzEstimate est;
    est.values = eig_dense(t).eigenvalues.real();
    est.steps = k;
    return est;
}

}  // namespace sgreen

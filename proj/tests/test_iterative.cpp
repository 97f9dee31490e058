#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <cmath>
#include <random>

#include "sgreen/iterative.hpp"
#include "sgreen/problems.hpp"

using namespace sgreen;

namespace {

Eigen::SparseMatrix<double> sparse_identity(int n) {
    Eigen::SparseMatrix<double> a(n, n);
    a.setIdentity();
    return a;
}

Eigen::VectorXd direct_solve(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& F) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(A);
    return lu.solve(F);
}

}  // namespace

TEST_CASE("damped Jacobi on the identity converges in one iteration") {
    const int n = 10;
    Eigen::VectorXd f = Eigen::VectorXd::Random(n);
    SolveOptions opts;
    opts.max_iter = 5;
    opts.tol_rel_res = 1e-14;
    SolveResult res = damped_jacobi(sparse_identity(n), f, Eigen::VectorXd::Zero(n), 1.0, opts);
    CHECK(res.trace.iterations == 1);
    CHECK((res.solution - f).norm() < 1e-14);
}

TEST_CASE("damped Jacobi smooths but stagnates on 1D Poisson") {
    EllipticProblem prob = manufactured_case("poisson1d");
    DiscreteSystem sys = assemble_poisson1d_fem(std::pow(2.0, -8), prob);
    SolveOptions opts;
    opts.max_iter = 2000;
    opts.reference = direct_solve(sys.A, sys.rhs);
    SolveResult res = damped_jacobi(sys.A, sys.rhs, Eigen::VectorXd::Zero(sys.size()), 0.5, opts);
    CHECK(res.trace.err_l2.back() > 1e-3);  // low-frequency error persists
    CHECK(res.trace.err_l2.back() < res.trace.err_l2.front());
}

TEST_CASE("damped Jacobi lowest mode error does not decay on indefinite Helmholtz") {
    EllipticProblem prob = manufactured_case("helmholtz1d");
    DiscreteSystem sys = assemble_helmholtz1d_fd(std::pow(2.0, -8), prob);
    ModeBasis basis = jacobi_mode_basis(sys.A);
    SolveOptions opts;
    opts.max_iter = 500;
    opts.reference = direct_solve(sys.A, sys.rhs);
    opts.mode_basis = &basis;
    SolveResult res = damped_jacobi(sys.A, sys.rhs, Eigen::VectorXd::Zero(sys.size()), 0.5, opts);
    double prev = res.trace.mode_rows.front()(0);
    bool nondecreasing = true;
    for (const auto& row : res.trace.mode_rows) {
        if (row(0) < prev * (1.0 - 1e-12)) nondecreasing = false;
        prev = row(0);
    }
    CHECK(nondecreasing);
}

TEST_CASE("bicg solves an SPD 2x2 system to direct-solve accuracy") {
    Eigen::SparseMatrix<double> a(2, 2);
    a.insert(0, 0) = 4.0;
    a.insert(0, 1) = 1.0;
    a.insert(1, 0) = 1.0;
    a.insert(1, 1) = 3.0;
    a.makeCompressed();
    Eigen::VectorXd f(2);
    f << 1.0, 2.0;
    SolveOptions opts;
    opts.max_iter = 10;
    opts.tol_rel_res = 1e-14;
    SolveResult res = bicg(a, f, nullptr, Eigen::VectorXd::Zero(2), opts);
    CHECK((res.solution - direct_solve(a, f)).norm() < 1e-12);
}

TEST_CASE("unpreconditioned bicg needs n iterations on 1D Poisson") {
    EllipticProblem prob = manufactured_case("poisson1d");
    for (int level : {6, 8}) {
        DiscreteSystem sys = assemble_poisson1d_fem(std::pow(2.0, -level), prob);
        Eigen::VectorXd uref = direct_solve(sys.A, sys.rhs);
        SolveOptions opts;
        opts.max_iter = sys.size() + 20;
        opts.reference = uref;
        opts.tol_err = 1e-10 * uref.norm();
        SolveResult res = bicg(sys.A, sys.rhs, nullptr, Eigen::VectorXd::Zero(sys.size()), opts);
        CHECK(res.trace.converged);
        CHECK(std::abs(res.trace.iterations - sys.size()) <= 2);
    }
}

TEST_CASE("bicg residual recomputation matches the recursive residual") {
    EllipticProblem prob = manufactured_case("poisson1d");
    DiscreteSystem sys = assemble_poisson1d_fem(std::pow(2.0, -6), prob);
    // The logged residual is recomputed from scratch each iteration; it must
    // track ||F - A U_k|| while far from machine precision. Rerun a hand
    // recursion for comparison.
    SolveOptions opts;
    opts.max_iter = 40;
    SolveResult res = bicg(sys.A, sys.rhs, nullptr, Eigen::VectorXd::Zero(sys.size()), opts);
    // Recursive CG-style residual on the same problem.
    Eigen::VectorXd r = sys.rhs, p = r, x = Eigen::VectorXd::Zero(sys.size());
    for (int k = 0; k < 40; ++k) {
        const Eigen::VectorXd q = sys.A * p;
        const double alpha = r.squaredNorm() / p.dot(q);
        x += alpha * p;
        const Eigen::VectorXd rn = r - alpha * q;
        const double beta = rn.squaredNorm() / r.squaredNorm();
        r = rn;
        p = r + beta * p;
        CHECK(res.trace.res_l2[k + 1] ==
              doctest::Approx(r.norm()).epsilon(1e-8));
    }
}

TEST_CASE("gmres residuals are monotone non-increasing") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 30;
        Eigen::MatrixXd dense(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) dense(i, j) = dist(rng);
        dense += n * Eigen::MatrixXd::Identity(n, n);
        Eigen::SparseMatrix<double> a = dense.sparseView();
        Eigen::VectorXd f(n);
        for (int i = 0; i < n; ++i) f(i) = dist(rng);
        SolveOptions opts;
        opts.max_iter = n;
        SolveResult res = gmres(a, f, nullptr, Eigen::VectorXd::Zero(n), opts);
        for (std::size_t k = 1; k < res.trace.res_l2.size(); ++k)
            CHECK(res.trace.res_l2[k] <= res.trace.res_l2[k - 1] * (1.0 + 1e-10));
    }
}

TEST_CASE("gmres converges in two steps for a two-eigenvalue matrix") {
    // Diagonal with two distinct values: the degree-2 Krylov polynomial
    // annihilates the residual.
    const int n = 16;
    Eigen::SparseMatrix<double> a(n, n);
    for (int i = 0; i < n; ++i) a.insert(i, i) = i % 2 == 0 ? 2.0 : 5.0;
    a.makeCompressed();
    Eigen::VectorXd f = Eigen::VectorXd::Random(n);
    SolveOptions opts;
    opts.max_iter = 10;
    opts.tol_rel_res = 1e-12;
    SolveResult res = gmres(a, f, nullptr, Eigen::VectorXd::Zero(n), opts);
    CHECK(res.trace.converged);
    CHECK(res.trace.iterations <= 2);
}

TEST_CASE("gmres reports Arnoldi breakdown as exact convergence") {
    // Start with a residual that spans a 1-dimensional invariant subspace.
    const int n = 8;
    Eigen::SparseMatrix<double> a = sparse_identity(n);
    a.coeffRef(0, 0) = 3.0;
    Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
    f(0) = 1.0;
    SolveOptions opts;
    opts.max_iter = n;
    SolveResult res = gmres(a, f, nullptr, Eigen::VectorXd::Zero(n), opts);
    CHECK(res.trace.converged);
    CHECK((a * res.solution - f).norm() < 1e-13);
}

TEST_CASE("eig_dense reproduces the closed-form 1D FEM spectrum") {
    EllipticProblem prob = manufactured_case("poisson1d");
    const double h = 1.0 / 64;
    DiscreteSystem sys = assemble_poisson1d_fem(h, prob);
    SpectrumReport spec = eig_dense(Eigen::MatrixXd(sys.A));
    REQUIRE(spec.eigenvalues.size() == sys.size());
    for (int j = 1; j <= sys.size(); ++j) {
        const double expected = (2.0 / h) * (1.0 - std::cos(j * std::numbers::pi * h));
        CHECK(spec.eigenvalues(j - 1).real() == doctest::Approx(expected).epsilon(1e-10));
    }
}

TEST_CASE("eig_dense of the identity gives all ones, kappa 1") {
    SpectrumReport spec = eig_dense(Eigen::MatrixXd::Identity(12, 12));
    for (int i = 0; i < 12; ++i) CHECK(spec.eigenvalues(i).real() == doctest::Approx(1.0));
    CHECK(condition_number(spec) == doctest::Approx(1.0));
    CHECK(condition_number(Eigen::Vector2d(1.0, 10.0).asDiagonal().toDenseMatrix()) ==
          doctest::Approx(10.0));
}

TEST_CASE("eig_dense symmetric pairs satisfy the residual bound") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const int n = 40;
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) {
            m(i, j) = dist(rng);
            m(j, i) = m(i, j);
        }
    SpectrumReport spec = eig_dense(m, nullptr, true);
    for (int j = 0; j < n; ++j) {
        const Eigen::VectorXd v = spec.eigenvectors.col(j);
        CHECK((m * v - spec.eigenvalues(j).real() * v).norm() <= 1e-10 * m.norm());
    }
}

TEST_CASE("eig_dense general path handles a nonsymmetric matrix") {
    Eigen::MatrixXd m(2, 2);
    m << 0.0, 1.0, -1.0, 0.0;  // eigenvalues +-i
    SpectrumReport spec = eig_dense(m);
    CHECK(std::abs(spec.eigenvalues(0)) == doctest::Approx(1.0));
    CHECK(std::abs(spec.eigenvalues(0).imag()) == doctest::Approx(1.0));
}

TEST_CASE("generalized symmetric-definite eigensolve is M-orthonormal") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const int n = 20;
    Eigen::MatrixXd k(n, n), b(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) {
            k(i, j) = k(j, i) = dist(rng);
            b(i, j) = b(j, i) = 0.1 * dist(rng);
        }
    b += n * Eigen::MatrixXd::Identity(n, n);
    SpectrumReport spec = eig_dense(k, &b, true);
    const Eigen::MatrixXd gram = spec.eigenvectors.transpose() * b * spec.eigenvectors;
    CHECK((gram - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("mode-wise error: orthogonality, Parseval, exact Jacobi decay") {
    EllipticProblem prob = manufactured_case("poisson1d");
    DiscreteSystem sys = assemble_poisson1d_fem(1.0 / 64, prob);
    const int n = sys.size();
    ModeBasis basis = jacobi_mode_basis(sys.A);

    // E = xi_1 has a single unit coefficient.
    Eigen::VectorXd m1 = modewise_error(basis.xi.col(0), basis);
    CHECK(m1(0) == doctest::Approx(1.0).epsilon(1e-12));
    for (int j = 1; j < n; ++j) CHECK(std::abs(m1(j)) < 1e-10);

    // Parseval in the D-inner product.
    Eigen::VectorXd e = Eigen::VectorXd::Random(n);
    Eigen::VectorXd coeffs = modewise_error(e, basis);
    const double lhs = coeffs.squaredNorm();
    const double rhs = e.dot(basis.dweight.asDiagonal() * e);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));

    // Per-mode decay factors of damped Jacobi match |1 - w lambda_j|^k.
    const double omega = 0.5;
    SolveOptions opts;
    opts.max_iter = 12;
    opts.reference = direct_solve(sys.A, sys.rhs);
    opts.mode_basis = &basis;
    SolveResult res = damped_jacobi(sys.A, sys.rhs, Eigen::VectorXd::Zero(n), omega, opts);
    const Eigen::VectorXd m0 = res.trace.mode_rows.front();
    for (int k = 1; k <= 12; ++k)
        for (int j = 0; j < n; ++j) {
            const double factor = std::pow(std::abs(1.0 - omega * basis.dinv_a_eig(j)),
                                           static_cast<double>(k));
            CHECK(res.trace.mode_rows[k](j) == doctest::Approx(factor * m0(j)).epsilon(1e-8));
        }
}

TEST_CASE("lanczos extreme Ritz values match the dense spectrum") {
    EllipticProblem prob = manufactured_case("poisson1d");
    DiscreteSystem sys = assemble_poisson1d_fem(1.0 / 128, prob);
    const Eigen::SparseMatrix<double> a = sys.A;
    // Self-adjoint operator: A itself in the Euclidean inner product.
    RitzEstimate est = lanczos_extreme(
        [&](const Eigen::VectorXd& v) { return Eigen::VectorXd(a * v); },
        [](const Eigen::VectorXd& v) { return v; }, sys.size(), 127, 3);
    SpectrumReport spec = eig_dense(Eigen::MatrixXd(sys.A));
    CHECK(est.values.minCoeff() ==
          doctest::Approx(spec.eigenvalues(0).real()).epsilon(1e-8));
    CHECK(est.values.maxCoeff() ==
          doctest::Approx(spec.eigenvalues(sys.size() - 1).real()).epsilon(1e-8));
}

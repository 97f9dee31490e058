#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sgreen/iterative.hpp"

namespace sgreen {

namespace {

constexpr int kDenseGeneralCap = 4100;

bool is_symmetric(const Eigen::MatrixXd& M) {
    return (M - M.transpose()).cwiseAbs().maxCoeff() <= 1e-13 * std::max(1.0, M.cwiseAbs().maxCoeff());
}

void sort_complex_ascending(Eigen::VectorXcd& v) {
    std::vector<std::complex<double>> tmp(v.data(), v.data() + v.size());
    std::sort(tmp.begin(), tmp.end(), [](const auto& a, const auto& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    for (int i = 0; i < v.size(); ++i) v(i) = tmp[i];
}

}  // namespace

SpectrumReport eig_dense(const Eigen::MatrixXd& M, const Eigen::MatrixXd* generalized_rhs,
                         bool compute_vectors) {
    if (M.rows() != M.cols()) throw std::invalid_argument("eig_dense: matrix must be square");
    const int n = static_cast<int>(M.rows());
    SpectrumReport report;

    if (generalized_rhs) {
        if (generalized_rhs->rows() != n || generalized_rhs->cols() != n)
            throw std::invalid_argument("eig_dense: pencil dimension mismatch");
        Eigen::MatrixXd a = M;
        Eigen::MatrixXd b = *generalized_rhs;
        Eigen::VectorXd w(n);
        const int info =
            LAPACKE_dsygv(LAPACK_COL_MAJOR, 1, compute_vectors ? 'V' : 'N', 'L', n, a.data(), n,
                          b.data(), n, w.data());
        if (info != 0)
            throw std::runtime_error("eig_dense: dsygv failed with info " + std::to_string(info));
        report.eigenvalues = w.cast<std::complex<double>>();
        if (compute_vectors) report.eigenvectors = a;
        report.symmetric_path = true;
        return report;
    }

    if (is_symmetric(M)) {
        Eigen::MatrixXd a = M;
        Eigen::VectorXd w(n);
        const int info = LAPACKE_dsyev(LAPACK_COL_MAJOR, compute_vectors ? 'V' : 'N', 'L', n,
                                       a.data(), n, w.data());
        if (info != 0)
            throw std::runtime_error("eig_dense: dsyev failed with info " + std::to_string(info));
        report.eigenvalues = w.cast<std::complex<double>>();
        if (compute_vectors) report.eigenvectors = a;
        report.symmetric_path = true;
        return report;
    }

    if (n > kDenseGeneralCap)
        throw std::invalid_argument(
            "eig_dense: general path capped at n <= 4100; use lanczos_extreme for Ritz estimates");
    Eigen::MatrixXd a = M;
    Eigen::VectorXd wr(n), wi(n);
    const int info = LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'N', n, a.data(), n, wr.data(),
                                   wi.data(), nullptr, 1, nullptr, 1);
    if (info != 0)
        throw std::runtime_error("eig_dense: dgeev failed with info " + std::to_string(info));
    report.eigenvalues.resize(n);
    for (int i = 0; i < n; ++i) report.eigenvalues(i) = {wr(i), wi(i)};
    sort_complex_ascending(report.eigenvalues);
    return report;
}

SpectrumReport eig_product(const Eigen::MatrixXd& B, const Eigen::SparseMatrix<double>& A,
                           bool a_is_spd) {
    if (B.rows() != A.rows() || B.cols() != A.cols())
        throw std::invalid_argument("eig_product: dimension mismatch");
    if (a_is_spd) {
        // B A is similar to the pencil (A B A, A); both sides symmetric and
        // the right side definite, so the eigenvalues are real.
        const Eigen::MatrixXd ab = A * B;
        const Eigen::MatrixXd aba = ab * Eigen::MatrixXd(A);
        const Eigen::MatrixXd sym_aba = 0.5 * (aba + aba.transpose());
        const Eigen::MatrixXd ad = A;
        return eig_dense(sym_aba, &ad, false);
    }
    const Eigen::MatrixXd ba = B * A;
    return eig_dense(ba, nullptr, false);
}

double condition_number(const SpectrumReport& report) {
    if (report.eigenvalues.size() == 0) throw std::invalid_argument("condition_number: empty");
    double lo = 1e300, hi = 0.0;
    for (int i = 0; i < report.eigenvalues.size(); ++i) {
        const double mag = std::abs(report.eigenvalues(i));
        lo = std::min(lo, mag);
        hi = std::max(hi, mag);
    }
    return hi / lo;
}

double condition_number(const Eigen::MatrixXd& M) { return condition_number(eig_dense(M)); }

}  // namespace sgreen

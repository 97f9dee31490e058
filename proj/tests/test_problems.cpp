#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <cmath>
#include <map>

#include "sgreen/iterative.hpp"
#include "sgreen/problems.hpp"

using namespace sgreen;

TEST_CASE("exact 1D Poisson kernel values") {
    CHECK(exact_green_poisson1d(0.3, 0.3) == doctest::Approx(0.21).epsilon(1e-15));
    CHECK(exact_green_poisson1d(0.0, 0.4) == 0.0);
    CHECK(exact_green_poisson1d(1.0, 0.4) == 0.0);
    CHECK(exact_green_poisson1d(0.2, 0.6) == doctest::Approx(0.08).epsilon(1e-15));
    CHECK(exact_green_poisson1d(0.6, 0.2) == doctest::Approx(0.08).epsilon(1e-15));
}

TEST_CASE("exact disc kernel: boundary, center limit, symmetry") {
    // Boundary points give zero for any interior source.
    for (double theta : {0.1, 2.0, 4.5}) {
        const Eigen::Vector2d x(std::cos(theta), std::sin(theta));
        const Eigen::Vector2d y(0.3, -0.2);
        CHECK(std::abs(exact_green_disc2d(x, y)) < 1e-14);
    }
    // y -> 0 limit.
    const Eigen::Vector2d x(0.5, 0.0), origin(0.0, 0.0);
    CHECK(exact_green_disc2d(x, origin) ==
          doctest::Approx(-std::log(0.5) / (2.0 * std::numbers::pi)).epsilon(1e-12));
    // Symmetry.
    const Eigen::Vector2d a(0.5, 0.0), b(0.7, 0.2);
    CHECK(std::abs(exact_green_disc2d(a, b) - exact_green_disc2d(b, a)) < 1e-14);
    CHECK_THROWS_AS(exact_green_disc2d(a, a), std::invalid_argument);
}

TEST_CASE("1D FEM assembly structure") {
    EllipticProblem prob = manufactured_case("poisson1d");
    DiscreteSystem sys = assemble_poisson1d_fem(0.25, prob);
    REQUIRE(sys.size() == 3);
    Eigen::MatrixXd expected(3, 3);
    expected << 8, -4, 0, -4, 8, -4, 0, -4, 8;
    CHECK((Eigen::MatrixXd(sys.A) - expected).norm() < 1e-14);

    DiscreteSystem tiny = assemble_poisson1d_fem(0.5, prob);
    REQUIRE(tiny.size() == 1);
    CHECK(Eigen::MatrixXd(tiny.A)(0, 0) == doctest::Approx(4.0));
}

TEST_CASE("1D FEM condition number matches the tabulated value") {
    EllipticProblem prob = manufactured_case("poisson1d");
    DiscreteSystem sys = assemble_poisson1d_fem(std::pow(2.0, -6), prob);
    const double kappa = condition_number(eig_dense(Eigen::MatrixXd(sys.A)));
    CHECK(kappa == doctest::Approx(1.66e3).epsilon(0.02));
}

TEST_CASE("discrete inverse of the 1D FEM matrix is the exact kernel") {
    EllipticProblem prob = manufactured_case("poisson1d");
    for (int n : {15, 63, 255}) {
        const double h = 1.0 / (n + 1);
        DiscreteSystem sys = assemble_poisson1d_fem(h, prob);
        Eigen::MatrixXd ainv = Eigen::MatrixXd(sys.A).inverse();
        double worst = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                worst = std::max(worst, std::abs(ainv(i, j) - exact_green_poisson1d(
                                                                  sys.nodes(i, 0), sys.nodes(j, 0))));
        CHECK(worst < 1e-10);
    }
}

TEST_CASE("Helmholtz FD stencil reduces to Poisson for unit coefficients") {
    EllipticProblem prob = manufactured_case("poisson1d");  // c = 1, k2 = 0
    const double h = 1.0 / 8;
    DiscreteSystem sys = assemble_helmholtz1d_fd(h, prob);
    Eigen::MatrixXd a = Eigen::MatrixXd(sys.A);
    const double inv2 = 64.0;
    for (int i = 0; i < sys.size(); ++i) {
        CHECK(a(i, i) == doctest::Approx(2.0 * inv2));
        if (i > 0) CHECK(a(i, i - 1) == doctest::Approx(-inv2));
    }
}

TEST_CASE("Helmholtz FD matrix is symmetric and indefinite at h = 2^-8") {
    EllipticProblem prob = manufactured_case("helmholtz1d");
    DiscreteSystem sys = assemble_helmholtz1d_fd(std::pow(2.0, -8), prob);
    Eigen::MatrixXd a = Eigen::MatrixXd(sys.A);
    CHECK((a - a.transpose()).cwiseAbs().maxCoeff() < 1e-14 * a.cwiseAbs().maxCoeff());
    SpectrumReport spec = eig_dense(a);
    CHECK(spec.eigenvalues.real().minCoeff() < 0.0);
    CHECK(spec.eigenvalues.real().maxCoeff() > 0.0);
}

TEST_CASE("manufactured forcing matches the stated exact solutions") {
    // 1D: f = -u'' checked against a finite-difference second derivative.
    EllipticProblem p1 = manufactured_case("poisson1d");
    const double step = 1e-5;
    for (double x : {0.2, 0.5, 0.77}) {
        Eigen::VectorXd xv(1), xp(1), xm(1);
        xv << x;
        xp << x + step;
        xm << x - step;
        const double upp = (p1.exact_u(xp) - 2.0 * p1.exact_u(xv) + p1.exact_u(xm)) / (step * step);
        CHECK(p1.f(xv) == doctest::Approx(-upp).epsilon(1e-5));
    }

    // 2D: f = -Laplace u via a 5-point stencil.
    EllipticProblem p2 = manufactured_case("poisson2d");
    const double s2 = 1e-4;
    for (const auto& pt : {Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(0.4, -0.3)}) {
        auto u = [&](double dx, double dy) {
            return p2.exact_u(Eigen::Vector2d(pt.x() + dx, pt.y() + dy));
        };
        const double lap =
            (u(s2, 0) + u(-s2, 0) + u(0, s2) + u(0, -s2) - 4.0 * u(0, 0)) / (s2 * s2);
        CHECK(p2.f(pt) == doctest::Approx(-lap).epsilon(1e-6));
    }

    // Boundary values vanish.
    Eigen::VectorXd zero(1), one(1);
    zero << 0.0;
    one << 1.0;
    CHECK(std::abs(p1.exact_u(zero)) < 1e-14);
    CHECK(std::abs(p1.exact_u(one)) < 1e-14);
    CHECK(std::abs(p2.exact_u(Eigen::Vector2d(1.0, 0.0))) < 1e-14);

    // Helmholtz forcing is consistent with its operator applied to u.
    EllipticProblem ph = manufactured_case("helmholtz1d");
    for (double x : {0.3, 0.6}) {
        Eigen::VectorXd xv(1), xp(1), xm(1);
        xv << x;
        xp << x + step;
        xm << x - step;
        const double up = (ph.exact_u(xp) - ph.exact_u(xm)) / (2.0 * step);
        const double upp =
            (ph.exact_u(xp) - 2.0 * ph.exact_u(xv) + ph.exact_u(xm)) / (step * step);
        const double expected = -ph.grad_c(xv)(0) * up - ph.c(xv) * upp - ph.k2(xv) * ph.exact_u(xv);
        CHECK(ph.f(xv) == doctest::Approx(expected).epsilon(1e-4));
    }
    CHECK_THROWS_AS(manufactured_case("nonexistent"), std::invalid_argument);
}

TEST_CASE("1D FEM converges at second order for the manufactured case") {
    EllipticProblem prob = manufactured_case("poisson1d");
    double prev_err = 0.0;
    for (int level = 6; level <= 8; ++level) {
        const double h = std::pow(2.0, -level);
        DiscreteSystem sys = assemble_poisson1d_fem(h, prob);
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(sys.A);
        Eigen::VectorXd u = lu.solve(sys.rhs);
        double err = 0.0;
        for (int i = 0; i < sys.size(); ++i) {
            Eigen::VectorXd x(1);
            x << sys.nodes(i, 0);
            err = std::max(err, std::abs(u(i) - prob.exact_u(x)));
        }
        if (level > 6) CHECK(err < 0.35 * prev_err);  // ~4x per halving
        prev_err = err;
    }
}

TEST_CASE("Helmholtz FD converges at second order") {
    EllipticProblem prob = manufactured_case("helmholtz1d");
    double prev_err = 0.0;
    for (int level = 7; level <= 9; ++level) {
        DiscreteSystem sys = assemble_helmholtz1d_fd(std::pow(2.0, -level), prob);
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(sys.A);
        Eigen::VectorXd u = lu.solve(sys.rhs);
        double err = 0.0;
        for (int i = 0; i < sys.size(); ++i) {
            Eigen::VectorXd x(1);
            x << sys.nodes(i, 0);
            err = std::max(err, std::abs(u(i) - prob.exact_u(x)));
        }
        if (level > 7) CHECK(err < 0.35 * prev_err);
        prev_err = err;
    }
}

TEST_CASE("disc mesh geometry invariants") {
    for (double h : {0.2, 0.1, 0.05}) {
        DiscMesh mesh = mesh_unit_disc(h);
        for (int v = 0; v < mesh.num_vertices(); ++v)
            CHECK(mesh.vertices.row(v).norm() <= 1.0 + 1e-12);
        CHECK(mesh.max_edge_length() <= 1.2 * h);
        CHECK(std::abs(mesh.total_area() - std::numbers::pi) < 2.0 * std::numbers::pi * h * h);

        // Conformity: every edge belongs to one (boundary) or two triangles.
        std::map<std::pair<int, int>, int> edges;
        for (int t = 0; t < mesh.num_triangles(); ++t)
            for (int e = 0; e < 3; ++e) {
                int a = mesh.triangles(t, e), b = mesh.triangles(t, (e + 1) % 3);
                if (a > b) std::swap(a, b);
                edges[{a, b}]++;
            }
        for (const auto& [edge, cnt] : edges) {
            const bool boundary_edge =
                mesh.on_boundary[edge.first] && mesh.on_boundary[edge.second];
            if (cnt == 1)
                CHECK(boundary_edge);
            else
                CHECK(cnt == 2);
        }
    }
    CHECK_THROWS_AS(mesh_unit_disc(0.0), std::invalid_argument);
}

TEST_CASE("2D FEM: patch test, SPD, O(h^-2) conditioning, convergence") {
    EllipticProblem prob = manufactured_case("poisson2d");

    // Patch test with a full (uneliminated) assembly built here as the
    // oracle: a linear field is reproduced exactly, so interior rows of the
    // stiffness matrix annihilate it.
    {
        DiscMesh mesh = mesh_unit_disc(0.25);
        const int nv = mesh.num_vertices();
        Eigen::MatrixXd full = Eigen::MatrixXd::Zero(nv, nv);
        for (int t = 0; t < mesh.num_triangles(); ++t) {
            const Eigen::Vector2d a = mesh.vertices.row(mesh.triangles(t, 0));
            const Eigen::Vector2d b = mesh.vertices.row(mesh.triangles(t, 1));
            const Eigen::Vector2d c = mesh.vertices.row(mesh.triangles(t, 2));
            const double det = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
            Eigen::Matrix<double, 3, 2> grad;
            grad.row(0) = Eigen::Vector2d(b.y() - c.y(), c.x() - b.x()) / det;
            grad.row(1) = Eigen::Vector2d(c.y() - a.y(), a.x() - c.x()) / det;
            grad.row(2) = Eigen::Vector2d(a.y() - b.y(), b.x() - a.x()) / det;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    full(mesh.triangles(t, i), mesh.triangles(t, j)) +=
                        0.5 * det * grad.row(i).dot(grad.row(j));
        }
        Eigen::VectorXd linear(nv);
        for (int v = 0; v < nv; ++v)
            linear(v) = 1.3 * mesh.vertices(v, 0) - 0.7 * mesh.vertices(v, 1) + 0.25;
        const Eigen::VectorXd residual = full * linear;
        for (int v = 0; v < nv; ++v)
            if (!mesh.on_boundary[v]) CHECK(std::abs(residual(v)) < 1e-12);
    }

    double prev_kappa = 0.0, prev_err = 0.0;
    for (double h : {0.2, 0.1, 0.05}) {
        DiscMesh mesh = mesh_unit_disc(h);
        DiscreteSystem sys = assemble_poisson2d_fem(mesh, prob);
        SpectrumReport spec = eig_dense(Eigen::MatrixXd(sys.A));
        CHECK(spec.eigenvalues.real().minCoeff() > 0.0);  // SPD
        const double kappa = condition_number(spec);
        if (prev_kappa > 0.0) CHECK(kappa / prev_kappa == doctest::Approx(4.0).epsilon(0.35));
        prev_kappa = kappa;

        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(sys.A);
        Eigen::VectorXd u = lu.solve(sys.rhs);
        double err = 0.0;
        for (int i = 0; i < sys.size(); ++i) {
            const Eigen::Vector2d x = sys.nodes.row(i);
            err = std::max(err, std::abs(u(i) - prob.exact_u(x)));
        }
        if (prev_err > 0.0) CHECK(err < 0.45 * prev_err);
        prev_err = err;
    }
}

#include "sgreen/problems.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace sgreen {

namespace {
constexpr double kPi = std::numbers::pi;
}

double exact_green_poisson1d(double x, double y) {
    return x <= y ? x * (1.0 - y) : y * (1.0 - x);
}

double exact_green_disc2d(const Eigen::Vector2d& x, const Eigen::Vector2d& y) {
    const double dist2 = (x - y).squaredNorm();
    if (dist2 == 0.0) throw std::invalid_argument("exact_green_disc2d: x == y");
    const double cross = x(0) * y(1) - x(1) * y(0);
    const double dot1 = x(0) * y(0) + x(1) * y(1) - 1.0;
    const double denom = cross * cross + dot1 * dot1;
    return -std::log(dist2 / denom) / (4.0 * kPi);
}

namespace {

// u = 10x - 10x^2 + 0.5 sin(20 pi x^3) and its first two derivatives.
double manufactured_u1(double x) {
    return 10.0 * x - 10.0 * x * x + 0.5 * std::sin(20.0 * kPi * x * x * x);
}
double manufactured_u1p(double x) {
    return 10.0 - 20.0 * x + 30.0 * kPi * x * x * std::cos(20.0 * kPi * x * x * x);
}
double manufactured_u1pp(double x) {
    const double w = 20.0 * kPi * x * x * x;
    return -20.0 + 60.0 * kPi * x * std::cos(w) -
           1800.0 * kPi * kPi * x * x * x * x * std::sin(w);
}

EllipticProblem poisson1d_case() {
    EllipticProblem p;
    p.name = "poisson1d";
    p.dim = 1;
    p.domain = DomainKind::Interval;
    p.c = [](const Eigen::VectorXd&) { return 1.0; };
    p.grad_c = [](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(1).eval(); };
    p.k2 = [](const Eigen::VectorXd&) { return 0.0; };
    p.f = [](const Eigen::VectorXd& x) { return -manufactured_u1pp(x(0)); };
    p.exact_u = [](const Eigen::VectorXd& x) { return manufactured_u1(x(0)); };
    p.exact_green = [](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
        return exact_green_poisson1d(x(0), y(0));
    };
    return p;
}

EllipticProblem helmholtz1d_case() {
    EllipticProblem p;
    p.name = "helmholtz1d";
    p.dim = 1;
    p.domain = DomainKind::Interval;
    p.c = [](const Eigen::VectorXd& x) { return (x(0) - 2.0) * (x(0) - 2.0); };
    p.grad_c = [](const Eigen::VectorXd& x) {
        Eigen::VectorXd g(1);
        g(0) = 2.0 * (x(0) - 2.0);
        return g;
    };
    p.k2 = [](const Eigen::VectorXd& x) {
        const double k = 15.0 * std::sin(10.0 * x(0));
        return k * k;
    };
    // f = -(c u')' - k^2 u = -c' u' - c u'' - k^2 u for the manufactured u.
    p.f = [p](const Eigen::VectorXd& x) {
        const double t = x(0);
        const double c = (t - 2.0) * (t - 2.0);
        const double cp = 2.0 * (t - 2.0);
        return -cp * manufactured_u1p(t) - c * manufactured_u1pp(t) -
               p.k2(x) * manufactured_u1(t);
    };
    p.exact_u = [](const Eigen::VectorXd& x) { return manufactured_u1(x(0)); };
    return p;
}

EllipticProblem poisson2d_case() {
    EllipticProblem p;
    p.name = "poisson2d";
    p.dim = 2;
    p.domain = DomainKind::UnitDisc;
    p.c = [](const Eigen::VectorXd&) { return 1.0; };
    p.grad_c = [](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(2).eval(); };
    p.k2 = [](const Eigen::VectorXd&) { return 0.0; };
    // u = 1 - e^(|x|^2 - 1): f = -Laplace u = (4 |x|^2 + 4) e^(|x|^2 - 1).
    p.f = [](const Eigen::VectorXd& x) {
        const double r2 = x.squaredNorm();
        return (4.0 * r2 + 4.0) * std::exp(r2 - 1.0);
    };
    p.exact_u = [](const Eigen::VectorXd& x) { return 1.0 - std::exp(x.squaredNorm() - 1.0); };
    p.exact_green = [](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
        return exact_green_disc2d(Eigen::Vector2d(x(0), x(1)), Eigen::Vector2d(y(0), y(1)));
    };
    return p;
}

}  // namespace

EllipticProblem manufactured_case(const std::string& name) {
    if (name == "poisson1d") return poisson1d_case();
    if (name == "helmholtz1d") return helmholtz1d_case();
    if (name == "poisson2d") return poisson2d_case();
    throw std::invalid_argument("manufactured_case: unknown problem '" + name + "'");
}

DiscreteSystem assemble_poisson1d_fem(double h, const EllipticProblem& problem) {
    const double inv = 1.0 / h;
    const int n = static_cast<int>(std::lround(1.0 / h)) - 1;
    if (n < 1 || std::abs((n + 1) * h - 1.0) > 1e-12)
        throw std::invalid_argument("assemble_poisson1d_fem: h must divide 1 with n >= 1");

    DiscreteSystem sys;
    sys.h = h;
    sys.symmetric = true;
    sys.definiteness = Definiteness::PositiveDefinite;
    sys.nodes.resize(n, 1);
    for (int i = 0; i < n; ++i) sys.nodes(i, 0) = (i + 1) * h;

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(3 * n);
    for (int i = 0; i < n; ++i) {
        trips.emplace_back(i, i, 2.0 * inv);
        if (i + 1 < n) {
            trips.emplace_back(i, i + 1, -inv);
            trips.emplace_back(i + 1, i, -inv);
        }
    }
    sys.A.resize(n, n);
    sys.A.setFromTriplets(trips.begin(), trips.end());

    // Load vector by 3-point Gauss on each element; hat function phi_i is
    // supported on the two elements adjacent to node i.
    static const double gauss_x[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
    static const double gauss_w[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    sys.rhs = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd pt(1);
    for (int e = 0; e <= n; ++e) {
        const double xl = e * h, xr = (e + 1) * h;
        for (int q = 0; q < 3; ++q) {
            const double x = 0.5 * (xl + xr) + 0.5 * h * gauss_x[q];
            const double w = 0.5 * h * gauss_w[q];
            pt(0) = x;
            const double fv = problem.f(pt);
            if (e >= 1) sys.rhs(e - 1) += w * fv * (xr - x) * inv;      // phi_e on [x_e, x_{e+1}]
            if (e < n) sys.rhs(e) += w * fv * (x - xl) * inv;           // phi_{e+1}
        }
    }
    return sys;
}

DiscreteSystem assemble_helmholtz1d_fd(double h, const EllipticProblem& problem) {
    const int n = static_cast<int>(std::lround(1.0 / h)) - 1;
    if (n < 1 || std::abs((n + 1) * h - 1.0) > 1e-12)
        throw std::invalid_argument("assemble_helmholtz1d_fd: h must divide 1 with n >= 1");

    DiscreteSystem sys;
    sys.h = h;
    sys.symmetric = true;
    sys.definiteness = Definiteness::Unknown;
    sys.nodes.resize(n, 1);
    sys.rhs.resize(n);

    const double inv2 = 1.0 / (h * h);
    Eigen::VectorXd pt(1);
    auto cmid = [&](double x) {
        pt(0) = x;
        return problem.c(pt);
    };
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(3 * n);
    for (int i = 0; i < n; ++i) {
        const double x = (i + 1) * h;
        sys.nodes(i, 0) = x;
        const double cl = cmid(x - 0.5 * h);
        const double cr = cmid(x + 0.5 * h);
        pt(0) = x;
        trips.emplace_back(i, i, (cl + cr) * inv2 - problem.k2(pt));
        if (i > 0) trips.emplace_back(i, i - 1, -cl * inv2);
        if (i + 1 < n) trips.emplace_back(i, i + 1, -cr * inv2);
        sys.rhs(i) = problem.f(pt);
    }
    sys.A.resize(n, n);
    sys.A.setFromTriplets(trips.begin(), trips.end());
    return sys;
}

DiscreteSystem assemble_poisson2d_fem(const DiscMesh& mesh, const EllipticProblem& problem) {
    const std::vector<int> interior = mesh.interior_vertices();
    const int n = static_cast<int>(interior.size());
    std::vector<int> global_to_local(mesh.num_vertices(), -1);
    for (int i = 0; i < n; ++i) global_to_local[interior[i]] = i;

    DiscreteSystem sys;
    sys.h = mesh.h_target;
    sys.symmetric = true;
    sys.definiteness = Definiteness::PositiveDefinite;
    sys.nodes.resize(n, 2);
    for (int i = 0; i < n; ++i) sys.nodes.row(i) = mesh.vertices.row(interior[i]);
    sys.rhs = Eigen::VectorXd::Zero(n);

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(9 * mesh.num_triangles());
    Eigen::VectorXd pt(2);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const int v0 = mesh.triangles(t, 0), v1 = mesh.triangles(t, 1), v2 = mesh.triangles(t, 2);
        const Eigen::Vector2d a = mesh.vertices.row(v0);
        const Eigen::Vector2d b = mesh.vertices.row(v1);
        const Eigen::Vector2d c = mesh.vertices.row(v2);
        const double det = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
        const double area = 0.5 * det;

        // Gradients of the barycentric basis functions.
        Eigen::Matrix<double, 3, 2> grad;
        grad.row(0) = Eigen::Vector2d(b.y() - c.y(), c.x() - b.x()) / det;
        grad.row(1) = Eigen::Vector2d(c.y() - a.y(), a.x() - c.x()) / det;
        grad.row(2) = Eigen::Vector2d(a.y() - b.y(), b.x() - a.x()) / det;

        const int verts[3] = {v0, v1, v2};
        for (int i = 0; i < 3; ++i) {
            const int gi = global_to_local[verts[i]];
            if (gi < 0) continue;
            for (int j = 0; j < 3; ++j) {
                const int gj = global_to_local[verts[j]];
                if (gj < 0) continue;
                trips.emplace_back(gi, gj, area * grad.row(i).dot(grad.row(j)));
            }
        }

        // 3-point edge-midpoint rule, exact for quadratics.
        const Eigen::Vector2d mids[3] = {0.5 * (a + b), 0.5 * (b + c), 0.5 * (c + a)};
        // Basis values at edge midpoints: phi_i is 1/2 on the two adjacent
        // midpoints and 0 on the opposite one.
        static const double phi_at_mid[3][3] = {{0.5, 0.0, 0.5}, {0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}};
        for (int q = 0; q < 3; ++q) {
            pt = mids[q];
            const double w = area / 3.0;
            const double fv = problem.f(pt);
            for (int i = 0; i < 3; ++i) {
                const int gi = global_to_local[verts[i]];
                if (gi >= 0) sys.rhs(gi) += w * fv * phi_at_mid[i][q];
            }
        }
    }
    sys.A.resize(n, n);
    sys.A.setFromTriplets(trips.begin(), trips.end());
    return sys;
}

}  // namespace sgreen

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <string>

#include "sgreen/mesh.hpp"

namespace sgreen {

enum class DomainKind { Interval, UnitDisc };

enum class Definiteness { PositiveDefinite, Indefinite, Unknown };

/// Elliptic boundary value problem -div(c grad u) - k2 u = f with
/// homogeneous Dirichlet data on the unit interval or unit disc.
struct EllipticProblem {
    std::string name;
    int dim = 1;
    DomainKind domain = DomainKind::Interval;
    std::function<double(const Eigen::VectorXd&)> c;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad_c;
    std::function<double(const Eigen::VectorXd&)> k2;   // zeroth-order coefficient
    std::function<double(const Eigen::VectorXd&)> f;
    std::function<double(const Eigen::VectorXd&)> exact_u;  // may be empty
    std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)> exact_green;  // may be empty

    bool has_exact_u() const { return static_cast<bool>(exact_u); }
    bool has_exact_green() const { return static_cast<bool>(exact_green); }
};

/// Discretized linear system A U = F over the interior nodes.
struct DiscreteSystem {
    Eigen::SparseMatrix<double> A;
    Eigen::VectorXd rhs;
    Eigen::MatrixXd nodes;  // n x d interior node coordinates
    double h = 0.0;
    bool symmetric = true;
    Definiteness definiteness = Definiteness::Unknown;

    int size() const { return static_cast<int>(A.rows()); }
};

/// G(x,y) = x(1-y) for x <= y, y(1-x) otherwise.
double exact_green_poisson1d(double x, double y);

/// Green's function of -Laplace on the unit disc (image-point form); the
/// y = 0 limit is -ln||x|| / (2 pi). Throws on x == y.
double exact_green_disc2d(const Eigen::Vector2d& x, const Eigen::Vector2d& y);

/// Named benchmark problems with manufactured forcing:
///   "poisson1d":   -u'' = f on (0,1), u = 10x - 10x^2 + 0.5 sin(20 pi x^3)
///   "helmholtz1d": -((x-2)^2 u')' - (15 sin(10x))^2 u = f, same u
///   "poisson2d":   -Laplace u = f on the unit disc, u = 1 - e^(|x|^2 - 1)
/// Throws std::invalid_argument for unknown names.
EllipticProblem manufactured_case(const std::string& name);

/// Linear finite elements on the uniform grid x_i = i h, h = 1/(n+1):
/// A = tridiag(-1, 2, -1)/h, F_i = integral of f phi_i (3-point Gauss).
DiscreteSystem assemble_poisson1d_fem(double h, const EllipticProblem& problem);

/// Conservative central differences with midpoint coefficient averages:
/// row i: [-c_{i-1/2}, c_{i-1/2}+c_{i+1/2}, -c_{i+1/2}]/h^2 - k2(x_i) e_i,
/// F_i = f(x_i).
DiscreteSystem assemble_helmholtz1d_fd(double h, const EllipticProblem& problem);

/// Standard linear-element stiffness matrix and load vector on a disc
/// triangulation, Dirichlet rows eliminated. Load integration uses the
/// 3-point barycentric (edge-midpoint) rule.
DiscreteSystem assemble_poisson2d_fem(const DiscMesh& mesh, const EllipticProblem& problem);

}  // namespace sgreen

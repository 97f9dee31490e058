#pragma once

#include <Eigen/Dense>
#include <vector>

namespace sgreen {

/// Conforming triangulation of the unit disc built by structured
/// polar-to-Cartesian refinement: ring k of K carries 6k vertices, so the
/// triangles stay close to equilateral and the construction is
/// deterministic for a given target mesh size.
struct DiscMesh {
    Eigen::MatrixXd vertices;            // V x 2
    Eigen::MatrixXi triangles;           // T x 3, counter-clockwise
    std::vector<bool> on_boundary;       // per vertex
    double h_target = 0.0;

    int num_vertices() const { return static_cast<int>(vertices.rows()); }
    int num_triangles() const { return static_cast<int>(triangles.rows()); }

    double max_edge_length() const;
    double total_area() const;

    /// Indices of interior (non-boundary) vertices in vertex order.
    std::vector<int> interior_vertices() const;

    /// Barycentric interpolation weights of an arbitrary point with respect
    /// to the triangle containing it (brute-force location; clamps to the
    /// nearest triangle when the point sits on the boundary ring).
    void locate(const Eigen::Vector2d& p, int& tri, Eigen::Vector3d& bary) const;
};

/// Throws std::invalid_argument for non-positive h_target and
/// std::runtime_error when the requested resolution is unreasonably fine.
DiscMesh mesh_unit_disc(double h_target);

}  // namespace sgreen

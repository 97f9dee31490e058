#include "sgreen/mesh.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sgreen {

double DiscMesh::max_edge_length() const {
    double longest = 0.0;
    for (int t = 0; t < num_triangles(); ++t)
        for (int e = 0; e < 3; ++e) {
            const Eigen::Vector2d a = vertices.row(triangles(t, e));
            const Eigen::Vector2d b = vertices.row(triangles(t, (e + 1) % 3));
            longest = std::max(longest, (a - b).norm());
        }
    return longest;
}

double DiscMesh::total_area() const {
    double area = 0.0;
    for (int t = 0; t < num_triangles(); ++t) {
        const Eigen::Vector2d a = vertices.row(triangles(t, 0));
        const Eigen::Vector2d b = vertices.row(triangles(t, 1));
        const Eigen::Vector2d c = vertices.row(triangles(t, 2));
        area += 0.5 * ((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
    }
    return area;
}

std::vector<int> DiscMesh::interior_vertices() const {
    std::vector<int> idx;
    for (int v = 0; v < num_vertices(); ++v)
        if (!on_boundary[v]) idx.push_back(v);
    return idx;
}

void DiscMesh::locate(const Eigen::Vector2d& p, int& tri, Eigen::Vector3d& bary) const {
    tri = -1;
    double best_violation = 1e300;
    Eigen::Vector3d best_bary = Eigen::Vector3d::Zero();
    for (int t = 0; t < num_triangles(); ++t) {
        const Eigen::Vector2d a = vertices.row(triangles(t, 0));
        const Eigen::Vector2d b = vertices.row(triangles(t, 1));
        const Eigen::Vector2d c = vertices.row(triangles(t, 2));
        const double det = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
        if (det == 0.0) continue;
        const double l1 = ((p - a).x() * (c - a).y() - (p - a).y() * (c - a).x()) / det;
        const double l2 = ((b - a).x() * (p - a).y() - (b - a).y() * (p - a).x()) / det;
        const double l0 = 1.0 - l1 - l2;
        const double violation = std::max({-l0, -l1, -l2, 0.0});
        if (violation < best_violation) {
            best_violation = violation;
            best_bary = Eigen::Vector3d(l0, l1, l2);
            tri = t;
            if (violation == 0.0) break;
        }
    }
    if (tri < 0) throw std::runtime_error("DiscMesh::locate: empty mesh");
    bary = best_bary;
}

DiscMesh mesh_unit_disc(double h_target) {
    if (h_target <= 0.0) throw std::invalid_argument("mesh_unit_disc: h_target must be positive");
    // The hexagonal strip pattern has longest edge ~1.33 dr, so this ring
    // count keeps the longest edge below 1.2 h_target.
    const int rings = std::max(1, static_cast<int>(std::ceil(1.11 / h_target)));
    if (rings > 4000) throw std::runtime_error("mesh_unit_disc: resolution too fine");
    const double dr = 1.0 / rings;

    DiscMesh mesh;
    mesh.h_target = h_target;

    // Vertices: center, then ring k with 6k equally spaced nodes.
    int total = 1;
    for (int k = 1; k <= rings; ++k) total += 6 * k;
    mesh.vertices.resize(total, 2);
    mesh.on_boundary.assign(total, false);
    std::vector<int> ring_start(rings + 1, 0);
    mesh.vertices.row(0) << 0.0, 0.0;
    // Node angles follow the hexagonal lattice (even spacing along the
    // hexagon sides, projected onto the circle): corners line up across
    // rings, which keeps the strip diagonals short.
    auto ring_angle = [](int k, int j) {
        const int side = j / k;
        const double t = static_cast<double>(j % k) / k;
        const double within = std::atan2(t * std::sqrt(3.0) / 2.0, 1.0 - 0.5 * t);
        return side * (std::numbers::pi / 3.0) + within;
    };

    int vid = 1;
    for (int k = 1; k <= rings; ++k) {
        ring_start[k] = vid;
        const double r = k * dr;
        const int nk = 6 * k;
        for (int j = 0; j < nk; ++j) {
            const double theta = ring_angle(k, j);
            mesh.vertices.row(vid) << r * std::cos(theta), r * std::sin(theta);
            if (k == rings) mesh.on_boundary[vid] = true;
            ++vid;
        }
    }

    // Triangles: fan around the center, then strips between rings. Each
    // strip between ring k and ring k+1 pairs the 6k inner nodes with the
    // 6(k+1) outer nodes sector by sector.
    std::vector<Eigen::Vector3i> tris;
    for (int j = 0; j < 6; ++j)
        tris.emplace_back(0, ring_start[1] + j, ring_start[1] + (j + 1) % 6);
    for (int k = 1; k < rings; ++k) {
        const int ni = 6 * k, no = 6 * (k + 1);
        const int si = ring_start[k], so = ring_start[k + 1];
        auto inner_angle = [&](int j) {
            return j < ni ? ring_angle(k, j) : ring_angle(k, j - ni) + 2.0 * std::numbers::pi;
        };
        auto outer_angle = [&](int j) {
            return j < no ? ring_angle(k + 1, j)
                          : ring_angle(k + 1, j - no) + 2.0 * std::numbers::pi;
        };
        int i = 0, o = 0;
        // Walk both rings in angle order; advance the node whose successor
        // comes first. This yields a conforming strip of ni + no triangles.
        while (i < ni || o < no) {
            const double next_inner = i < ni ? inner_angle(i + 1) : 1e300;
            const double next_outer = o < no ? outer_angle(o + 1) : 1e300;
            const int vi = si + (i % ni);
            const int vo = so + (o % no);
            if (next_outer < next_inner) {
                tris.emplace_back(vo, so + ((o + 1) % no), vi);
                ++o;
            } else {
                tris.emplace_back(vi, vo, si + ((i + 1) % ni));
                ++i;
            }
        }
    }
    mesh.triangles.resize(static_cast<int>(tris.size()), 3);
    for (std::size_t t = 0; t < tris.size(); ++t) mesh.triangles.row(static_cast<int>(t)) = tris[t];

    // Enforce counter-clockwise orientation.
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const Eigen::Vector2d a = mesh.vertices.row(mesh.triangles(t, 0));
        const Eigen::Vector2d b = mesh.vertices.row(mesh.triangles(t, 1));
        const Eigen::Vector2d c = mesh.vertices.row(mesh.triangles(t, 2));
        if ((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x() < 0.0)
            std::swap(mesh.triangles(t, 1), mesh.triangles(t, 2));
    }
    return mesh;
}

}  // namespace sgreen

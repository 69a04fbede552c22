/**
 * @file mesh.hpp
 * @brief Ring triangulation of a disk with a bucket point locator.
 */
#pragma once

#include "otlin/vec.hpp"

#include <array>
#include <iosfwd>
#include <vector>

namespace otlin {

struct BoundaryEdge {
    int a;  ///< start node (counter-clockwise)
    int b;  ///< end node
    Vec2 normal;
    double length;
    double theta_a;  ///< polar angle of a in [0, 2π)
    double theta_b;  ///< polar angle of b, unwrapped so theta_b > theta_a
};

/// Location of a point: triangle index, barycentric weights, and whether the point was
/// pulled onto the polygon (it lay between a boundary chord and the circle, or outside).
struct MeshLocation {
    int triangle = -1;
    std::array<double, 3> bary{};
    bool clamped = false;
};

class DiskMesh {
public:
    double R = 1.0;
    double h = 0.0;      ///< target size
    int rings = 0;
    double grading = 1.0;
    std::vector<Vec2> nodes;
    std::vector<std::array<int, 3>> triangles;
    std::vector<double> areas;
    std::vector<BoundaryEdge> boundary_edges;  ///< ordered by angle

    double area() const;
    double max_diameter() const;
    Vec2 centroid(int t) const;
    /// Constant gradients of the three hat functions on triangle t.
    std::array<Vec2, 3> hat_gradients(int t) const;

    /// Locates x. Points in the disk but outside the polygon, and points outside the disk when
    /// `allow_outside` is set, are pulled radially onto the polygon and marked clamped.
    /// Throws an extrapolation error for points outside B̄_R otherwise.
    MeshLocation locate(Vec2 x, bool allow_outside = false) const;

    void build_locator();

private:
    int find_in_bucket(Vec2 x, std::array<double, 3>& bary) const;

    double cell_ = 0.0;
    int grid_n_ = 0;
    std::vector<std::vector<int>> buckets_;
};

/// Rings at radii R·(i/K)^γ with 6i nodes each; K grows from ⌈R/h⌉ until every element has diameter ≤ 1.5h.
/// γ = 1 gives the quasi-uniform mesh; γ > 1 refines towards the centre.
DiskMesh build_mesh(double R, double target_h, double grading = 1.0);

// CSV: `node_id,x,y` and `tri_id,a,b,c`.
void write_nodes_csv(std::ostream& os, const DiskMesh& mesh);
void write_triangles_csv(std::ostream& os, const DiskMesh& mesh);

} // namespace otlin

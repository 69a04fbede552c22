#include "otlin/mesh.hpp"
#include "otlin/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace otlin {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double polar_angle(Vec2 x)
{
    double a = std::atan2(x.y, x.x);
    if (a < 0.0) a += kTwoPi;
    return a;
}

DiskMesh ring_mesh(double R, int K, double grading)
{
    DiskMesh m;
    m.R = R;
    m.rings = K;
    std::vector<int> first(static_cast<std::size_t>(K + 1));
    std::vector<int> count(static_cast<std::size_t>(K + 1));
    m.nodes.push_back({0.0, 0.0});
    first[0] = 0;
    count[0] = 1;
    for (int i = 1; i <= K; ++i) {
        first[i] = static_cast<int>(m.nodes.size());
        count[i] = 6 * i;
        const double r = R * std::pow(static_cast<double>(i) / K, grading);
        for (int k = 0; k < count[i]; ++k) {
            const double a = kTwoPi * k / count[i];
            m.nodes.push_back(i == K ? Vec2{R * std::cos(a), R * std::sin(a)} : Vec2{r * std::cos(a), r * std::sin(a)});
        }
    }
    auto add = [&](int a, int b, int c) {
        const double orient = cross(m.nodes[b] - m.nodes[a], m.nodes[c] - m.nodes[a]);
        if (orient < 0.0) std::swap(b, c);
        m.triangles.push_back({a, b, c});
    };
    for (int k = 0; k < 6; ++k) add(0, first[1] + k, first[1] + (k + 1) % 6);
    for (int i = 1; i < K; ++i) {
        const int ni = count[i], no = count[i + 1];
        int a = 0, b = 0;
        while (a < ni || b < no) {
            const double ta = kTwoPi * (a + 1) / ni;
            const double tb = kTwoPi * (b + 1) / no;
            const int ia = first[i] + a % ni, ib = first[i + 1] + b % no;
            if (b < no && (a == ni || tb <= ta)) {
                add(ia, ib, first[i + 1] + (b + 1) % no);
                ++b;
            } else {
                add(ia, ib, first[i] + (a + 1) % ni);
                ++a;
            }
        }
    }
    for (const auto& t : m.triangles) {
        const double area = 0.5 * cross(m.nodes[t[1]] - m.nodes[t[0]], m.nodes[t[2]] - m.nodes[t[0]]);
        if (!(area > 1e-14 * R * R / (K * K))) throw Error(ErrorKind::Mesh, "degenerate triangle");
        m.areas.push_back(area);
    }
    const int nb = count[K];
    for (int k = 0; k < nb; ++k) {
        const int a = first[K] + k, b = first[K] + (k + 1) % nb;
        const Vec2 e = m.nodes[b] - m.nodes[a];
        const double len = e.norm();
        const double ta = kTwoPi * k / nb;
        m.boundary_edges.push_back({a, b, Vec2{e.y, -e.x} / len, len, ta, kTwoPi * (k + 1) / nb});
    }
    return m;
}

} // namespace

double DiskMesh::area() const
{
    double s = 0.0;
    for (double a : areas) s += a;
    return s;
}

double DiskMesh::max_diameter() const
{
    double d = 0.0;
    for (const auto& t : triangles)
        for (int k = 0; k < 3; ++k) d = std::max(d, (nodes[t[k]] - nodes[t[(k + 1) % 3]]).norm());
    return d;
}

Vec2 DiskMesh::centroid(int t) const
{
    const auto& tri = triangles[static_cast<std::size_t>(t)];
    return (nodes[tri[0]] + nodes[tri[1]] + nodes[tri[2]]) / 3.0;
}

std::array<Vec2, 3> DiskMesh::hat_gradients(int t) const
{
    const auto& tri = triangles[static_cast<std::size_t>(t)];
    const double two_a = 2.0 * areas[static_cast<std::size_t>(t)];
    std::array<Vec2, 3> g;
    for (int k = 0; k < 3; ++k) {
        const Vec2 e = nodes[tri[(k + 2) % 3]] - nodes[tri[(k + 1) % 3]];
        g[k] = Vec2{e.y, -e.x} * (-1.0 / two_a);
    }
    return g;
}

void DiskMesh::build_locator()
{
    grid_n_ = std::max(1, static_cast<int>(std::ceil(2.0 * R / std::max(h, R / rings))));
    cell_ = 2.0 * R / grid_n_;
    buckets_.assign(static_cast<std::size_t>(grid_n_ * grid_n_), {});
    auto clampi = [this](double v) { return std::clamp(static_cast<int>(std::floor((v + R) / cell_)), 0, grid_n_ - 1); };
    for (std::size_t t = 0; t < triangles.size(); ++t) {
        double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
        for (int k : triangles[t]) {
            x0 = std::min(x0, nodes[k].x);
            x1 = std::max(x1, nodes[k].x);
            y0 = std::min(y0, nodes[k].y);
            y1 = std::max(y1, nodes[k].y);
        }
        for (int j = clampi(y0); j <= clampi(y1); ++j)
            for (int i = clampi(x0); i <= clampi(x1); ++i) buckets_[static_cast<std::size_t>(j * grid_n_ + i)].push_back(static_cast<int>(t));
    }
}

int DiskMesh::find_in_bucket(Vec2 x, std::array<double, 3>& bary) const
{
    const int i = std::clamp(static_cast<int>(std::floor((x.x + R) / cell_)), 0, grid_n_ - 1);
    const int j = std::clamp(static_cast<int>(std::floor((x.y + R) / cell_)), 0, grid_n_ - 1);
    int best = -1;
    double best_min = -1e300;
    for (int t : buckets_[static_cast<std::size_t>(j * grid_n_ + i)]) {
        const auto& tri = triangles[static_cast<std::size_t>(t)];
        const double two_a = 2.0 * areas[static_cast<std::size_t>(t)];
        std::array<double, 3> b;
        for (int k = 0; k < 3; ++k)
            b[k] = cross(nodes[tri[(k + 1) % 3]] - x, nodes[tri[(k + 2) % 3]] - x) / two_a;
        const double mn = std::min({b[0], b[1], b[2]});
        if (mn > best_min) {
            best_min = mn;
            best = t;
            bary = b;
        }
    }
    return best_min >= -1e-12 ? best : -1;
}

MeshLocation DiskMesh::locate(Vec2 x, bool allow_outside) const
{
    if (buckets_.empty()) throw Error(ErrorKind::Mesh, "mesh locator not built");
    MeshLocation loc;
    const double r = x.norm();
    if (r > R * (1.0 + 1e-12) && !allow_outside)
        throw Error(ErrorKind::Extrapolation, fmt::format("point ({}, {}) outside the mesh disk", x.x, x.y));
    if (r <= R) {
        loc.triangle = find_in_bucket(x, loc.bary);
        if (loc.triangle >= 0) return loc;
    }
    // pull onto the boundary chord
    const double th = polar_angle(x);
    const int nb = static_cast<int>(boundary_edges.size());
    const int k = std::clamp(static_cast<int>(th / (kTwoPi / nb)), 0, nb - 1);
    const auto& e = boundary_edges[static_cast<std::size_t>(k)];
    const double half = 0.5 * (e.theta_b - e.theta_a);
    const double rho = R * std::cos(half) / std::cos(th - (e.theta_a + half));
    const Vec2 y = x * (std::min(r, rho) * (1.0 - 1e-12) / r);
    loc.triangle = find_in_bucket(y, loc.bary);
    loc.clamped = true;
    if (loc.triangle < 0) throw Error(ErrorKind::Mesh, "point location failed");
    return loc;
}

DiskMesh build_mesh(double R, double target_h, double grading)
{
    if (!(target_h > 0.0 && target_h < R)) throw Error(ErrorKind::InvalidInput, "mesh size must satisfy 0 < h < R");
    if (!(grading >= 1.0 && grading <= 3.0)) throw Error(ErrorKind::InvalidInput, "grading exponent must lie in [1, 3]");
    for (int K = static_cast<int>(std::ceil(R / target_h));; ++K) {
        DiskMesh m = ring_mesh(R, K, grading);
        if (m.max_diameter() <= 1.5 * target_h) {
            m.h = target_h;
            m.grading = grading;
            m.build_locator();
            return m;
        }
        if (K > 100000) throw Error(ErrorKind::Mesh, "mesh refinement did not reach the target size");
    }
}

void write_nodes_csv(std::ostream& os, const DiskMesh& mesh)
{
    os << "node_id,x,y\n";
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
        os << fmt::format("{},{:.17g},{:.17g}\n", i, mesh.nodes[i].x, mesh.nodes[i].y);
}

void write_triangles_csv(std::ostream& os, const DiskMesh& mesh)
{
    os << "tri_id,a,b,c\n";
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
        os << fmt::format("{},{},{},{}\n", t, mesh.triangles[t][0], mesh.triangles[t][1], mesh.triangles[t][2]);
}

} // namespace otlin

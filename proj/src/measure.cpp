#include "otlin/measure.hpp"
#include "otlin/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

namespace otlin {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double angle_of(Vec2 x)
{
    double a = std::atan2(x.y, x.x);
    if (a < 0.0) a += kTwoPi;
    return a >= kTwoPi ? 0.0 : a;
}
} // namespace

double DiscreteMeasure::mass() const
{
    return std::accumulate(weights.begin(), weights.end(), 0.0);
}

void DiscreteMeasure::add(Vec2 point, double weight)
{
    points.push_back(point);
    weights.push_back(weight);
}

void DiscreteMeasure::validate() const
{
    if (dim != 1 && dim != 2) throw Error(ErrorKind::InvalidInput, fmt::format("unsupported dimension {}", dim));
    if (points.size() != weights.size()) throw Error(ErrorKind::InvalidInput, "points/weights length mismatch");
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!(weights[i] >= 0.0) || !std::isfinite(weights[i]))
            throw Error(ErrorKind::InvalidInput, fmt::format("atom {} has invalid weight {}", i, weights[i]));
        if (!points[i].finite()) throw Error(ErrorKind::InvalidInput, fmt::format("atom {} is not finite", i));
        if (dim == 1 && points[i].y != 0.0) throw Error(ErrorKind::InvalidInput, "one-dimensional atom with y != 0");
    }
}

double ball_volume(int dim, double radius)
{
    return dim == 1 ? 2.0 * radius : std::numbers::pi * radius * radius;
}

double sphere_measure(int dim, double radius)
{
    return dim == 1 ? 2.0 : kTwoPi * radius;
}

std::vector<std::size_t> restrict_indices(const DiscreteMeasure& mu, const Ball& O)
{
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < mu.size(); ++i)
        if (O.contains(mu.points[i])) idx.push_back(i);
    return idx;
}

DiscreteMeasure restrict(const DiscreteMeasure& mu, const Ball& O)
{
    DiscreteMeasure out;
    out.dim = mu.dim;
    for (std::size_t i : restrict_indices(mu, O)) out.add(mu.points[i], mu.weights[i]);
    return out;
}

double kappa(const DiscreteMeasure& mu, const Ball& O)
{
    double m = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i)
        if (O.contains(mu.points[i])) m += mu.weights[i];
    return m / ball_volume(mu.dim, O.radius);
}

DiscreteMeasure lebesgue_quadrature(const Ball& O, int resolution, int dim)
{
    if (resolution < 2) throw Error(ErrorKind::InvalidInput, "quadrature resolution must be >= 2");
    DiscreteMeasure q;
    q.dim = dim;
    const double R = O.radius;
    if (dim == 1) {
        const double h = 2.0 * R / resolution;
        for (int k = 0; k < resolution; ++k) q.add({O.center.x - R + (k + 0.5) * h, 0.0}, h);
        return q;
    }
    const double dr = R / resolution;
    for (int i = 0; i < resolution; ++i) {
        const double r0 = i * dr;
        const double r1 = (i + 1) * dr;
        const double rm = 0.5 * (r0 + r1);
        const int sectors = std::max(3, static_cast<int>(std::lround(kTwoPi * (i + 0.5))));
        const double dth = kTwoPi / sectors;
        const double area = 0.5 * dth * (r1 * r1 - r0 * r0);
        for (int j = 0; j < sectors; ++j) {
            const double th = (j + 0.5) * dth;
            q.add(O.center + Vec2{rm * std::cos(th), rm * std::sin(th)}, area);
        }
    }
    return q;
}

BoundaryData BoundaryData::zeros(int dim, double radius, int n_theta)
{
    BoundaryData b;
    b.dim = dim;
    b.radius = radius;
    b.mass.assign(dim == 1 ? 2 : n_theta, 0.0);
    if (dim == 2 && n_theta < 1) throw Error(ErrorKind::InvalidInput, "n_theta must be positive");
    return b;
}

double BoundaryData::bin_width() const { return dim == 1 ? std::numbers::pi : kTwoPi / bins(); }

double BoundaryData::arc_length() const { return dim == 1 ? 1.0 : radius * bin_width(); }

double BoundaryData::theta_center(int k) const
{
    if (dim == 1) return k == 0 ? std::numbers::pi : 0.0;
    return (k + 0.5) * bin_width();
}

Vec2 BoundaryData::bin_point(int k) const
{
    const double th = theta_center(k);
    if (dim == 1) return {k == 0 ? -radius : radius, 0.0};
    return {radius * std::cos(th), radius * std::sin(th)};
}

double BoundaryData::total() const { return std::accumulate(mass.begin(), mass.end(), 0.0); }

double BoundaryData::sup_density() const
{
    double s = 0.0;
    for (int k = 0; k < bins(); ++k) s = std::max(s, std::abs(density(k)));
    return s;
}

double BoundaryData::lp_integral(double q) const
{
    double s = 0.0;
    for (int k = 0; k < bins(); ++k) s += std::pow(std::abs(density(k)), q) * arc_length();
    return s;
}

int BoundaryData::bin_of(Vec2 x) const
{
    if (dim == 1) return x.x < 0.0 ? 0 : 1;
    const int k = static_cast<int>(angle_of(x) / bin_width());
    return std::min(k, bins() - 1);
}

BoundaryData BoundaryData::operator-(const BoundaryData& o) const
{
    if (o.bins() != bins() || o.dim != dim) throw Error(ErrorKind::InvalidInput, "boundary data layouts differ");
    BoundaryData out = *this;
    for (int k = 0; k < bins(); ++k) out.mass[k] -= o.mass[k];
    return out;
}

BoundaryData radial_project(const DiscreteMeasure& mu, double R, int n_theta)
{
    BoundaryData b = BoundaryData::zeros(mu.dim, R, n_theta);
    for (std::size_t i = 0; i < mu.size(); ++i) {
        if (mu.weights[i] == 0.0) continue;
        if (mu.points[i] == Vec2{})
            throw Error(ErrorKind::InvalidInput, "radial projection of an atom at the origin is undefined");
        b.mass[b.bin_of(mu.points[i])] += mu.weights[i];
    }
    return b;
}

BoundaryData mollify_boundary(const BoundaryData& b, double r)
{
    if (b.dim == 1) return b;
    const double w = b.bin_width();
    if (r < w * (1.0 - 1e-12))
        throw Error(ErrorKind::InvalidInput, fmt::format("mollification scale {} below bin width {}", r, w));
    const int n = b.bins();
    const int half = static_cast<int>(std::floor(r / w + 1e-12));
    std::vector<double> kernel;
    for (int j = -half; j <= half; ++j) kernel.push_back(1.0 + std::cos(std::numbers::pi * j * w / r));
    const double norm = std::accumulate(kernel.begin(), kernel.end(), 0.0);
    for (double& k : kernel) k /= norm;

    BoundaryData out = b;
    std::fill(out.mass.begin(), out.mass.end(), 0.0);
    for (int i = 0; i < n; ++i) {
        if (b.mass[i] == 0.0) continue;
        for (int j = -half; j <= half; ++j) {
            const int t = ((i + j) % n + n) % n;
            out.mass[t] += kernel[j + half] * b.mass[i];
        }
    }
    return out;
}

namespace {

// ∫_a^b |r − R|^{p−1} r^{d−1} dr in closed form.
double radial_weight_integral(double a, double b, double R, double p, int dim)
{
    auto F = [&](double r) {
        const double t = r - R;
        const double at = std::abs(t);
        const double sg = t < 0.0 ? -1.0 : 1.0;
        if (dim == 1) return sg * std::pow(at, p) / p;
        return std::pow(at, p + 1.0) / (p + 1.0) + R * sg * std::pow(at, p) / p;
    };
    return F(b) - F(a);
}

} // namespace

ProjectionRatios projection_lemma_check(const DiscreteMeasure& g, double R, int n_theta, double p, int n_r)
{
    ProjectionRatios out;
    const double eps = kAnnulusEpsilon;
    const double r_lo = (1.0 - eps) * R;
    const double r_hi = (1.0 + eps) * R;
    const int dim = g.dim;
    const int n_ang = dim == 1 ? 2 : n_theta;
    const double dr = (r_hi - r_lo) / n_r;
    std::vector<double> cell_mass(static_cast<std::size_t>(n_ang * n_r), 0.0);
    BoundaryData shape = BoundaryData::zeros(dim, R, n_theta);

    for (std::size_t i = 0; i < g.size(); ++i) {
        if (g.weights[i] == 0.0) continue;
        const double r = g.points[i].norm();
        if (!(r > r_lo && r < r_hi))
            throw Error(ErrorKind::InvalidInput, fmt::format("atom at radius {} outside the annulus ({}, {})", r, r_lo, r_hi));
        const int ir = std::min(n_r - 1, static_cast<int>((r - r_lo) / dr));
        cell_mass[static_cast<std::size_t>(shape.bin_of(g.points[i]) * n_r + ir)] += g.weights[i];
    }

    const double total = g.mass();
    if (total == 0.0) {
        out.degenerate = true;
        return out;
    }

    const double dth = dim == 1 ? 1.0 : shape.bin_width();
    double sup = 0.0;
    double weighted = 0.0;
    for (int a = 0; a < n_ang; ++a) {
        for (int k = 0; k < n_r; ++k) {
            const double m = cell_mass[static_cast<std::size_t>(a * n_r + k)];
            shape.mass[a] += m;
            if (m == 0.0) continue;
            const double r0 = r_lo + k * dr;
            const double r1 = r0 + dr;
            const double area = dim == 1 ? dr : 0.5 * dth * (r1 * r1 - r0 * r0);
            const double density = m / area;
            sup = std::max(sup, density);
            weighted += density * dth * radial_weight_integral(r0, r1, R, p, dim);
        }
    }

    const double K = p * std::pow(2.0, p - 1.0) * std::pow(1.0 + eps, (dim - 1) * (p - 1.0));
    out.left = std::pow(sphere_measure(dim, R), 1.0 - p) * std::pow(total, p);
    out.middle = shape.lp_integral(p);
    out.right = K * std::pow(sup, p - 1.0) * weighted;
    out.lower_ratio = out.middle / out.left;
    out.upper_ratio = out.right / out.middle;
    out.pass = out.lower_ratio >= 1.0 - 1e-12 && out.upper_ratio >= 1.0 - 1e-12;
    return out;
}

void write_measure_csv(std::ostream& os, const DiscreteMeasure& mu)
{
    os << (mu.dim == 1 ? "x,weight\n" : "x,y,weight\n");
    for (std::size_t i = 0; i < mu.size(); ++i) {
        if (mu.dim == 1)
            os << fmt::format("{:.17g},{:.17g}\n", mu.points[i].x, mu.weights[i]);
        else
            os << fmt::format("{:.17g},{:.17g},{:.17g}\n", mu.points[i].x, mu.points[i].y, mu.weights[i]);
    }
}

DiscreteMeasure read_measure_csv(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line)) throw Error(ErrorKind::Io, "empty measure CSV");
    const auto columns = std::count(line.begin(), line.end(), ',') + 1;
    if (columns != 2 && columns != 3) throw Error(ErrorKind::Io, "measure CSV needs `x[,y],weight` columns");
    DiscreteMeasure mu;
    mu.dim = static_cast<int>(columns) - 1;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double x = 0.0, y = 0.0, w = 0.0;
        if (mu.dim == 1 ? !(row >> x >> w) : !(row >> x >> y >> w))
            throw Error(ErrorKind::Io, fmt::format("malformed measure row `{}`", line));
        mu.add({x, y}, w);
    }
    mu.validate();
    return mu;
}

void write_boundary_csv(std::ostream& os, const BoundaryData& b)
{
    os << "theta_center,mass,density\n";
    for (int k = 0; k < b.bins(); ++k)
        os << fmt::format("{:.17g},{:.17g},{:.17g}\n", b.theta_center(k), b.mass[k], b.density(k));
}

} // namespace otlin

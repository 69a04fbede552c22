#include "otlin/network_simplex.hpp"
#include "otlin/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace otlin {

namespace {

class NetworkSimplex {
public:
    NetworkSimplex(const std::vector<double>& supply, const std::vector<double>& demand, const std::vector<double>& cost)
        : n_(supply.size()), m_(demand.size()), real_arcs_(n_ * m_), root_(n_ + m_), C_(cost)
    {
        const std::size_t nodes = n_ + m_ + 1;
        max_cost_ = 0.0;
        for (double c : C_) max_cost_ = std::max(max_cost_, std::abs(c));
        art_cost_ = (max_cost_ + 1.0) * static_cast<double>(nodes);
        eps_ = 4.0 * std::numeric_limits<double>::epsilon() * std::max(max_cost_, 1e-300) * static_cast<double>(nodes);

        flow_.assign(real_arcs_ + n_ + m_, 0.0);
        parent_.assign(nodes, -1);
        pred_.assign(nodes, -1);
        up_.assign(nodes, 0);
        depth_.assign(nodes, 0);
        pi_.assign(nodes, 0.0);
        first_child_.assign(nodes, -1);
        next_sib_.assign(nodes, -1);
        prev_sib_.assign(nodes, -1);

        // Initial tree: every node hangs from the root through its artificial arc.
        for (std::size_t u = 0; u < n_ + m_; ++u) {
            const auto a = static_cast<long>(real_arcs_ + u);
            const bool is_supply = u < n_;
            flow_[static_cast<std::size_t>(a)] = is_supply ? supply[u] : demand[u - n_];
            pred_[u] = a;
            up_[u] = is_supply ? 1 : 0;
            depth_[u] = 1;
            pi_[u] = is_supply ? -art_cost_ : art_cost_;
            attach(static_cast<long>(u), static_cast<long>(root_));
        }
        block_ = std::max<std::size_t>(10, static_cast<std::size_t>(std::sqrt(static_cast<double>(real_arcs_))));
    }

    std::size_t run(std::size_t max_pivots)
    {
        std::size_t pivots = 0;
        while (true) {
            const long e = find_entering();
            if (e < 0) break;
            pivot(e);
            if (++pivots > max_pivots)
                throw Error(ErrorKind::Numerical, fmt::format("network simplex exceeded {} pivots", max_pivots));
        }
        return pivots;
    }

    TransportSolution extract()
    {
        TransportSolution s;
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < m_; ++j) {
                const double f = flow_[i * m_ + j];
                if (f > 0.0) {
                    s.flows.push_back({i, j, f});
                    s.cost += f * C_[i * m_ + j];
                }
            }
        s.u.resize(n_);
        s.v.resize(m_);
        for (std::size_t i = 0; i < n_; ++i) s.u[i] = -pi_[i];
        for (std::size_t j = 0; j < m_; ++j) s.v[j] = pi_[n_ + j];
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < m_; ++j) {
                const double slack = C_[i * m_ + j] - s.u[i] - s.v[j];
                s.max_dual_violation = std::max(s.max_dual_violation, -slack);
                if (flow_[i * m_ + j] > 0.0) s.max_slackness = std::max(s.max_slackness, std::abs(slack));
            }
        return s;
    }

    double max_cost() const { return max_cost_; }

private:
    std::size_t src(long a) const
    {
        const auto ua = static_cast<std::size_t>(a);
        if (ua < real_arcs_) return ua / m_;
        const std::size_t u = ua - real_arcs_;
        return u < n_ ? u : root_;
    }

    std::size_t tgt(long a) const
    {
        const auto ua = static_cast<std::size_t>(a);
        if (ua < real_arcs_) return n_ + ua % m_;
        const std::size_t u = ua - real_arcs_;
        return u < n_ ? root_ : u;
    }

    double arc_cost(long a) const
    {
        const auto ua = static_cast<std::size_t>(a);
        return ua < real_arcs_ ? C_[ua] : art_cost_;
    }

    long find_entering()
    {
        double best = -eps_;
        long best_arc = -1;
        std::size_t in_block = 0;
        std::size_t i = next_arc_ / m_;
        std::size_t j = next_arc_ % m_;
        double pi_i = pi_[i];
        for (std::size_t k = 0; k < real_arcs_; ++k) {
            const std::size_t a = i * m_ + j;
            const double rc = C_[a] + pi_i - pi_[n_ + j];
            if (rc < best) {
                best = rc;
                best_arc = static_cast<long>(a);
            }
            if (++j == m_) {
                j = 0;
                if (++i == n_) i = 0;
                pi_i = pi_[i];
            }
            if (++in_block == block_) {
                if (best_arc >= 0) break;
                in_block = 0;
            }
        }
        next_arc_ = i * m_ + j;
        return best_arc;
    }

    void attach(long child, long par)
    {
        parent_[child] = par;
        prev_sib_[child] = -1;
        next_sib_[child] = first_child_[par];
        if (first_child_[par] >= 0) prev_sib_[first_child_[par]] = child;
        first_child_[par] = child;
    }

    void detach(long child)
    {
        const long par = parent_[child];
        if (prev_sib_[child] >= 0)
            next_sib_[prev_sib_[child]] = next_sib_[child];
        else
            first_child_[par] = next_sib_[child];
        if (next_sib_[child] >= 0) prev_sib_[next_sib_[child]] = prev_sib_[child];
        prev_sib_[child] = next_sib_[child] = -1;
        parent_[child] = -1;
    }

    void pivot(long e)
    {
        const auto first = static_cast<long>(src(e));
        const auto second = static_cast<long>(tgt(e));

        long a = first, b = second;
        while (a != b) {
            if (depth_[a] >= depth_[b]) a = parent_[a];
            else b = parent_[b];
        }
        const long join = a;

        // Leaving arc: last blocking arc along the cycle oriented by the entering arc.
        double delta = std::numeric_limits<double>::infinity();
        long u_out = -1;
        int side = 0;
        for (long u = first; u != join; u = parent_[u]) {
            if (up_[u] && flow_[pred_[u]] < delta) {
                delta = flow_[pred_[u]];
                u_out = u;
                side = 1;
            }
        }
        for (long u = second; u != join; u = parent_[u]) {
            if (!up_[u] && flow_[pred_[u]] <= delta) {
                delta = flow_[pred_[u]];
                u_out = u;
                side = 2;
            }
        }
        if (u_out < 0) throw Error(ErrorKind::Numerical, "unbounded transportation cycle");

        if (delta > 0.0) {
            flow_[e] += delta;
            for (long u = first; u != join; u = parent_[u]) flow_[pred_[u]] += up_[u] ? -delta : delta;
            for (long u = second; u != join; u = parent_[u]) flow_[pred_[u]] += up_[u] ? delta : -delta;
        }
        flow_[pred_[u_out]] = 0.0;

        const long in_node = side == 1 ? first : second;
        long new_parent = side == 1 ? second : first;
        long new_pred = e;
        char new_up = static_cast<char>(static_cast<long>(src(e)) == in_node);
        long z = in_node;
        while (true) {
            const long old_parent = parent_[z];
            const long old_pred = pred_[z];
            const char old_up = up_[z];
            detach(z);
            attach(z, new_parent);
            pred_[z] = new_pred;
            up_[z] = new_up;
            if (z == u_out) break;
            new_parent = z;
            new_pred = old_pred;
            new_up = static_cast<char>(!old_up);
            z = old_parent;
        }
        refresh_subtree(in_node);
    }

    void refresh_subtree(long top)
    {
        stack_.clear();
        stack_.push_back(top);
        while (!stack_.empty()) {
            const long a = stack_.back();
            stack_.pop_back();
            const long par = parent_[a];
            depth_[a] = depth_[par] + 1;
            const double c = arc_cost(pred_[a]);
            pi_[a] = up_[a] ? pi_[par] - c : pi_[par] + c;
            for (long ch = first_child_[a]; ch >= 0; ch = next_sib_[ch]) stack_.push_back(ch);
        }
    }

    std::size_t n_, m_, real_arcs_, root_;
    const std::vector<double>& C_;
    double max_cost_ = 0.0;
    double art_cost_ = 0.0;
    double eps_ = 0.0;
    std::vector<double> flow_;
    std::vector<long> parent_, pred_;
    std::vector<char> up_;
    std::vector<long> depth_;
    std::vector<double> pi_;
    std::vector<long> first_child_, next_sib_, prev_sib_;
    std::vector<long> stack_;
    std::size_t next_arc_ = 0;
    std::size_t block_ = 10;
};

} // namespace

TransportSolution solve_transportation(const std::vector<double>& supply, const std::vector<double>& demand,
                                       const std::vector<double>& cost, std::size_t max_pivots)
{
    const std::size_t n = supply.size();
    const std::size_t m = demand.size();
    if (cost.size() != n * m) throw Error(ErrorKind::InvalidInput, "cost matrix has wrong size");
    if (n == 0 || m == 0) return {};
    for (double s : supply)
        if (!(s > 0.0)) throw Error(ErrorKind::InvalidInput, "supplies must be positive");
    for (double d : demand)
        if (!(d > 0.0)) throw Error(ErrorKind::InvalidInput, "demands must be positive");
    if (max_pivots == 0) max_pivots = 200 * (n + m) * (n + m) + 1000000;

    NetworkSimplex ns(supply, demand, cost);
    const std::size_t pivots = ns.run(max_pivots);
    TransportSolution s = ns.extract();
    s.pivots = pivots;
    return s;
}

} // namespace otlin

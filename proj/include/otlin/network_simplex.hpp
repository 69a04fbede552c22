/**
 * @file network_simplex.hpp
 * @brief Primal network simplex for the dense transportation problem.
 */
#pragma once

#include <cstddef>
#include <vector>

namespace otlin {

struct TransportFlow {
    std::size_t i;
    std::size_t j;
    double mass;
};

struct TransportSolution {
    std::vector<TransportFlow> flows;  ///< positive flows, sorted by (i, j)
    std::vector<double> u;             ///< source potentials
    std::vector<double> v;             ///< target potentials, u_i + v_j ≤ C_ij
    double cost = 0.0;
    double max_dual_violation = 0.0;   ///< max(u_i + v_j − C_ij)⁺ over all arcs
    double max_slackness = 0.0;        ///< max |C_ij − u_i − v_j| over flow arcs
    std::size_t pivots = 0;
};

/// Minimises Σ C_ij x_ij subject to row sums `supply`, column sums `demand`, x ≥ 0.
/// `cost` is row-major n×m. Supplies and demands must be positive with equal totals.
/// Strongly feasible spanning-tree pivoting with block pricing; deterministic.
TransportSolution solve_transportation(const std::vector<double>& supply, const std::vector<double>& demand,
                                       const std::vector<double>& cost, std::size_t max_pivots = 0);

} // namespace otlin

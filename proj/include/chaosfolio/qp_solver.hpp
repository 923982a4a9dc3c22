/**
 * @file qp_solver.hpp
 * @brief Primal active-set solver for convex quadratic programs.
 *
 *   minimize    1/2 x' H x + c' x
 *   subject to  E x  = e
 *               G x >= g
 *
 * H must be positive semi-definite; H = 0 (a linear program) is allowed.
 * Each iteration works in the null space of the working set. Directions of
 * zero curvature along which the objective still decreases are followed to
 * the nearest blocking constraint, which is what makes singular H and pure
 * LPs tractable with the same core. A feasible start is found by a phase-1
 * problem that minimizes the squared constraint violation.
 *
 * Multipliers follow the convention  H x + c = E' y + G' z,  z >= 0,
 * so y_k is the sensitivity of the optimal value to e_k.
 */
#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace chaosfolio
{

struct QpProblem
{
    Eigen::MatrixXd hessian;
    Eigen::VectorXd linear;
    Eigen::MatrixXd eq_matrix;
    Eigen::VectorXd eq_rhs;
    Eigen::MatrixXd ineq_matrix;
    Eigen::VectorXd ineq_rhs;

    Eigen::Index variables() const noexcept { return hessian.rows(); }

    /// Empty problem over n variables with no constraints.
    static QpProblem over(Eigen::Index n);
    void add_equality(const Eigen::RowVectorXd& row, double rhs);
    void add_inequality(const Eigen::RowVectorXd& row, double rhs); ///< row . x >= rhs
};

struct QpOptions
{
    double kkt_tolerance = 1e-8;
    /// 0 selects 10 n^2 + 100.
    int max_iterations = 0;
    /// When > 0, ties among optimal solutions are broken by the minimum
    /// Euclidean norm of the first tie_break_dims variables.
    Eigen::Index tie_break_dims = 0;
};

enum class QpStatus
{
    Optimal,
    Unbounded,
};

struct QpResult
{
    QpStatus status = QpStatus::Optimal;
    Eigen::VectorXd x;
    Eigen::VectorXd eq_multipliers;
    Eigen::VectorXd ineq_multipliers; ///< zero for rows outside the final working set
    std::vector<int> working_set;     ///< inequality rows held active at the solution
    double objective = 0.0;
    double kkt_residual = 0.0;
    int iterations = 0;
};

/// Throws Error(Infeasible) when no point satisfies the constraints and
/// Error(NumericalFailure) when the iteration cap is hit or the KKT residual
/// at the returned point exceeds the tolerance.
QpResult solve_qp(const QpProblem& problem, const QpOptions& options = {});

/// Largest violation of the problem's constraints at x (0 when feasible).
double constraint_violation(const QpProblem& problem, const Eigen::VectorXd& x);

} // namespace chaosfolio

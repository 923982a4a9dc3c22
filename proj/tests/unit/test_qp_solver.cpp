#include "helpers.hpp"

#include "chaosfolio/qp_solver.hpp"

#include <random>

using namespace chaosfolio;

namespace
{

/// Enumerates every subset of inequality rows held as equalities, solves the
/// equality-constrained KKT system and keeps the best feasible stationary point.
double brute_force_optimum(const QpProblem& p)
{
    const auto n = p.variables();
    const int m = static_cast<int>(p.ineq_rhs.size());
    double best = std::numeric_limits<double>::infinity();
    for (int mask = 0; mask < (1 << m); ++mask)
    {
        std::vector<int> rows;
        for (int i = 0; i < m; ++i)
            if (mask & (1 << i))
                rows.push_back(i);
        const auto k = p.eq_rhs.size() + static_cast<Eigen::Index>(rows.size());
        Eigen::MatrixXd a(k, n);
        Eigen::VectorXd b(k);
        a.topRows(p.eq_rhs.size()) = p.eq_matrix;
        b.head(p.eq_rhs.size()) = p.eq_rhs;
        for (std::size_t r = 0; r < rows.size(); ++r)
        {
            a.row(p.eq_rhs.size() + static_cast<Eigen::Index>(r)) = p.ineq_matrix.row(rows[r]);
            b[p.eq_rhs.size() + static_cast<Eigen::Index>(r)] = p.ineq_rhs[rows[r]];
        }
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + k, n + k);
        kkt.topLeftCorner(n, n) = p.hessian;
        kkt.topRightCorner(n, k) = a.transpose();
        kkt.bottomLeftCorner(k, n) = a;
        Eigen::VectorXd rhs(n + k);
        rhs << -p.linear, b;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
        if (lu.rank() < n + k)
            continue;
        const Eigen::VectorXd x = lu.solve(rhs).head(n);
        if (constraint_violation(p, x) > 1e-9)
            continue;
        best = std::min(best, 0.5 * x.dot(p.hessian * x) + p.linear.dot(x));
    }
    return best;
}

} // namespace

TEST_SUITE("qp_solver")
{
    TEST_CASE("unconstrained quadratic")
    {
        auto p = QpProblem::over(2);
        p.hessian << 2, 0, 0, 4;
        p.linear << -2, -4;
        const auto r = solve_qp(p);
        CHECK(r.x[0] == doctest::Approx(1.0));
        CHECK(r.x[1] == doctest::Approx(1.0));
        CHECK(r.kkt_residual <= 1e-10);
    }

    TEST_CASE("bound becomes active and carries a positive multiplier")
    {
        auto p = QpProblem::over(2);
        p.hessian = Eigen::Matrix2d::Identity();
        p.linear << -1, 1; // unconstrained optimum (1, -1)
        p.add_inequality(Eigen::RowVector2d(0, 1), 0.0);
        const auto r = solve_qp(p);
        CHECK(r.x[0] == doctest::Approx(1.0));
        CHECK(std::abs(r.x[1]) <= 1e-12);
        REQUIRE(r.working_set.size() == 1);
        CHECK(r.ineq_multipliers[0] == doctest::Approx(1.0));
        // stationarity H x + c = G' z
        const Eigen::VectorXd g = p.hessian * r.x + p.linear - p.ineq_matrix.transpose() * r.ineq_multipliers;
        CHECK(g.norm() <= 1e-12);
    }

    TEST_CASE("linear program on a box")
    {
        auto p = QpProblem::over(2);
        p.linear << -0.10, -0.15;
        p.add_equality(Eigen::RowVector2d(1, 1), 0.0);
        p.add_inequality(Eigen::RowVector2d(-1, 0), -0.5);
        p.add_inequality(Eigen::RowVector2d(0, -1), -0.5);
        p.add_inequality(Eigen::RowVector2d(1, 0), -0.5);
        p.add_inequality(Eigen::RowVector2d(0, 1), -0.5);
        const auto r = solve_qp(p);
        CHECK(r.x[0] == doctest::Approx(-0.5));
        CHECK(r.x[1] == doctest::Approx(0.5));
    }

    TEST_CASE("unbounded linear program is reported")
    {
        auto p = QpProblem::over(1);
        p.linear << -1;
        p.add_inequality(Eigen::RowVectorXd::Constant(1, 1.0), 0.0);
        CHECK(solve_qp(p).status == QpStatus::Unbounded);
    }

    TEST_CASE("infeasible constraints")
    {
        auto p = QpProblem::over(2);
        p.hessian = Eigen::Matrix2d::Identity();
        p.add_equality(Eigen::RowVector2d(1, 1), 1.0);
        p.add_inequality(Eigen::RowVector2d(-1, 0), 0.0);
        p.add_inequality(Eigen::RowVector2d(0, -1), 0.0);
        CHECK_ERROR(solve_qp(p), ErrorCode::Infeasible);
    }

    TEST_CASE("tie break picks the minimum-norm optimum")
    {
        // minimize (x1 + x2 - 1)^2: every point of the line is optimal
        auto p = QpProblem::over(2);
        p.hessian << 2, 2, 2, 2;
        p.linear << -2, -2;
        QpOptions o;
        o.tie_break_dims = 2;
        const auto r = solve_qp(p, o);
        CHECK(r.x[0] == doctest::Approx(0.5));
        CHECK(r.x[1] == doctest::Approx(0.5));
    }

    TEST_CASE("random simplex problems agree with active-set enumeration")
    {
        std::mt19937_64 rng(11);
        std::normal_distribution<double> z;
        for (int trial = 0; trial < 40; ++trial)
        {
            const int n = 2 + trial % 4;
            Eigen::MatrixXd a(n, n);
            Eigen::VectorXd c(n);
            for (int i = 0; i < n; ++i)
            {
                c[i] = z(rng);
                for (int j = 0; j < n; ++j)
                    a(i, j) = z(rng);
            }
            auto p = QpProblem::over(n);
            p.hessian = a * a.transpose() + (trial % 3 == 0 ? 0.0 : 0.1) * Eigen::MatrixXd::Identity(n, n);
            p.linear = c;
            p.add_equality(Eigen::RowVectorXd::Ones(n), 1.0);
            for (int i = 0; i < n; ++i)
            {
                Eigen::RowVectorXd e = Eigen::RowVectorXd::Zero(n);
                e[i] = 1.0;
                p.add_inequality(e, trial % 2 ? -0.2 : 0.0);
                p.add_inequality(-e, -0.8);
            }
            const auto r = solve_qp(p);
            CHECK(constraint_violation(p, r.x) <= 1e-10);
            CHECK(r.objective == doctest::Approx(brute_force_optimum(p)).epsilon(1e-8));
            CHECK((r.ineq_multipliers.array() >= -1e-12).all());
        }
    }
}

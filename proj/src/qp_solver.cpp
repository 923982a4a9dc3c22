#include "chaosfolio/qp_solver.hpp"

#include "chaosfolio/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace chaosfolio
{

QpProblem QpProblem::over(Eigen::Index n)
{
    QpProblem p;
    p.hessian = Eigen::MatrixXd::Zero(n, n);
    p.linear = Eigen::VectorXd::Zero(n);
    p.eq_matrix.resize(0, n);
    p.eq_rhs.resize(0);
    p.ineq_matrix.resize(0, n);
    p.ineq_rhs.resize(0);
    return p;
}

namespace
{

void append_row(Eigen::MatrixXd& m, Eigen::VectorXd& rhs, const Eigen::RowVectorXd& row, double value)
{
    const auto r = m.rows();
    m.conservativeResize(r + 1, Eigen::NoChange);
    rhs.conservativeResize(r + 1);
    m.row(r) = row;
    rhs(r) = value;
}

double inf_norm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

} // namespace

void QpProblem::add_equality(const Eigen::RowVectorXd& row, double rhs)
{
    if (row.size() != variables())
        throw Error(ErrorCode::DimensionMismatch, "equality row has wrong length");
    append_row(eq_matrix, eq_rhs, row, rhs);
}

void QpProblem::add_inequality(const Eigen::RowVectorXd& row, double rhs)
{
    if (row.size() != variables())
        throw Error(ErrorCode::DimensionMismatch, "inequality row has wrong length");
    append_row(ineq_matrix, ineq_rhs, row, rhs);
}

double constraint_violation(const QpProblem& problem, const Eigen::VectorXd& x)
{
    double worst = 0.0;
    if (problem.eq_matrix.rows() > 0)
        worst = std::max(worst, inf_norm(problem.eq_matrix * x - problem.eq_rhs));
    if (problem.ineq_matrix.rows() > 0)
        worst = std::max(worst, (problem.ineq_rhs - problem.ineq_matrix * x).cwiseMax(0.0).maxCoeff());
    return worst;
}

namespace
{

struct Subspace
{
    Eigen::MatrixXd active;  ///< stacked equality rows then working-set rows
    Eigen::VectorXd rhs;
    Eigen::MatrixXd null_basis;
};

class ActiveSetEngine
{
public:
    ActiveSetEngine(const QpProblem& p, int max_iterations) : p_(p), max_iterations_(max_iterations)
    {
        n_ = p.variables();
        const double h_scale = p.hessian.size() ? p.hessian.cwiseAbs().maxCoeff() : 0.0;
        curvature_tol_ = 1e-10 * h_scale;
        grad_scale_ = std::max({1.0, inf_norm(p.linear), h_scale});
    }

    struct Outcome
    {
        QpStatus status = QpStatus::Optimal;
        Eigen::VectorXd x;
        std::vector<int> working;
        Eigen::VectorXd lambda; ///< equality multipliers then working-set multipliers
        Eigen::MatrixXd null_basis;
        int iterations = 0;
    };

    Outcome run(Eigen::VectorXd x, std::vector<int> working) const
    {
        Outcome out;
        bool last_step_degenerate = false;
        for (int iter = 0; iter < max_iterations_; ++iter)
        {
            out.iterations = iter + 1;
            Subspace sub = subspace(working);

            // keep the iterate exactly on the working set
            if (sub.active.rows() > 0)
            {
                const Eigen::VectorXd resid = sub.active * x - sub.rhs;
                if (inf_norm(resid) > 1e-15 * (1.0 + inf_norm(sub.rhs)))
                    x -= sub.active.completeOrthogonalDecomposition().solve(resid);
            }

            const Eigen::VectorXd grad = p_.hessian * x + p_.linear;
            const auto& Z = sub.null_basis;

            Eigen::VectorXd step = Eigen::VectorXd::Zero(n_);
            bool ray = false;
            if (Z.cols() > 0)
            {
                const Eigen::VectorXd gz = Z.transpose() * grad;
                const Eigen::MatrixXd hz = Z.transpose() * p_.hessian * Z;
                const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hz);
                const Eigen::VectorXd ghat = eig.eigenvectors().transpose() * gz;
                const Eigen::VectorXd& d = eig.eigenvalues();
                const double grad_tol = 1e-13 * std::max(grad_scale_, inf_norm(grad));

                Eigen::VectorXd flat = Eigen::VectorXd::Zero(d.size());
                for (Eigen::Index j = 0; j < d.size(); ++j)
                    if (d(j) <= curvature_tol_ && std::abs(ghat(j)) > grad_tol)
                        flat(j) = -ghat(j);
                if (flat.squaredNorm() > 0.0)
                {
                    ray = true;
                    step = Z * (eig.eigenvectors() * flat);
                    step /= step.norm();
                }
                else
                {
                    Eigen::VectorXd newton = Eigen::VectorXd::Zero(d.size());
                    for (Eigen::Index j = 0; j < d.size(); ++j)
                        if (d(j) > curvature_tol_)
                            newton(j) = -ghat(j) / d(j);
                    step = Z * (eig.eigenvectors() * newton);
                }
            }

            if (!ray && inf_norm(step) <= 1e-14 * (1.0 + inf_norm(x)))
            {
                // stationary on the working set: inspect multipliers
                Eigen::VectorXd lambda = Eigen::VectorXd::Zero(sub.active.rows());
                if (sub.active.rows() > 0)
                    lambda = sub.active.transpose().completeOrthogonalDecomposition().solve(grad);
                const Eigen::Index m_eq = p_.eq_matrix.rows();
                const double mult_tol = 1e-12 * std::max(grad_scale_, inf_norm(grad));
                int drop = -1;
                double most_negative = -mult_tol;
                for (std::size_t k = 0; k < working.size(); ++k)
                {
                    const double z = lambda(m_eq + static_cast<Eigen::Index>(k));
                    if (last_step_degenerate)
                    {
                        // Bland: smallest row index with a negative multiplier
                        if (z < -mult_tol && (drop < 0 || working[k] < working[static_cast<std::size_t>(drop)]))
                            drop = static_cast<int>(k);
                    }
                    else if (z < most_negative)
                    {
                        most_negative = z;
                        drop = static_cast<int>(k);
                    }
                }
                if (drop < 0)
                {
                    out.x = std::move(x);
                    out.working = std::move(working);
                    out.lambda = std::move(lambda);
                    out.null_basis = Z;
                    return out;
                }
                working.erase(working.begin() + drop);
                continue;
            }

            // ratio test against inequality rows outside the working set
            double alpha = ray ? std::numeric_limits<double>::infinity() : 1.0;
            int blocking = -1;
            const double step_norm = step.norm();
            for (Eigen::Index i = 0; i < p_.ineq_matrix.rows(); ++i)
            {
                if (std::find(working.begin(), working.end(), static_cast<int>(i)) != working.end())
                    continue;
                const double ap = p_.ineq_matrix.row(i).dot(step);
                if (ap >= -1e-14 * p_.ineq_matrix.row(i).norm() * step_norm)
                    continue;
                const double slack = std::max(0.0, p_.ineq_matrix.row(i).dot(x) - p_.ineq_rhs(i));
                const double a = slack / -ap;
                if (a < alpha)
                {
                    alpha = a;
                    blocking = static_cast<int>(i);
                }
            }
            if (!std::isfinite(alpha))
            {
                out.status = QpStatus::Unbounded;
                out.x = std::move(x);
                out.working = std::move(working);
                out.null_basis = Z;
                return out;
            }
            x += alpha * step;
            last_step_degenerate = alpha * step_norm <= 1e-15 * (1.0 + inf_norm(x));
            if (blocking >= 0)
                working.push_back(blocking);
        }
        throw Error(ErrorCode::NumericalFailure,
                    "active-set iteration cap of " + std::to_string(max_iterations_) + " reached");
    }

    double curvature_tol() const noexcept { return curvature_tol_; }

private:
    Subspace subspace(const std::vector<int>& working) const
    {
        Subspace s;
        const Eigen::Index m_eq = p_.eq_matrix.rows();
        const auto k = m_eq + static_cast<Eigen::Index>(working.size());
        s.active.resize(k, n_);
        s.rhs.resize(k);
        if (m_eq > 0)
        {
            s.active.topRows(m_eq) = p_.eq_matrix;
            s.rhs.head(m_eq) = p_.eq_rhs;
        }
        for (std::size_t j = 0; j < working.size(); ++j)
        {
            s.active.row(m_eq + static_cast<Eigen::Index>(j)) = p_.ineq_matrix.row(working[j]);
            s.rhs(m_eq + static_cast<Eigen::Index>(j)) = p_.ineq_rhs(working[j]);
        }
        if (k == 0)
        {
            s.null_basis = Eigen::MatrixXd::Identity(n_, n_);
            return s;
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(s.active.transpose());
        qr.setThreshold(1e-12);
        const Eigen::Index rank = qr.rank();
        const Eigen::MatrixXd q = qr.householderQ();
        s.null_basis = q.rightCols(n_ - rank);
        return s;
    }

    const QpProblem& p_;
    int max_iterations_;
    Eigen::Index n_ = 0;
    double curvature_tol_ = 0.0;
    double grad_scale_ = 1.0;
};

int iteration_cap(const QpOptions& options, Eigen::Index n)
{
    if (options.max_iterations > 0)
        return options.max_iterations;
    return static_cast<int>(10 * n * n + 100);
}

double feasibility_tolerance(const QpProblem& p)
{
    return 1e-9 * std::max({1.0, inf_norm(p.eq_rhs), inf_norm(p.ineq_rhs)});
}

/// Minimizes the squared violation of all constraints over (x, slacks).
Eigen::VectorXd find_feasible_point(const QpProblem& p, const QpOptions& options)
{
    const Eigen::Index n = p.variables();
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(n);
    if (constraint_violation(p, x0) <= feasibility_tolerance(p))
        return x0;

    const Eigen::Index me = p.eq_matrix.rows();
    const Eigen::Index mi = p.ineq_matrix.rows();
    const Eigen::Index total = n + me + mi;

    QpProblem phase1 = QpProblem::over(total);
    phase1.hessian.bottomRightCorner(me + mi, me + mi).setIdentity();
    phase1.eq_matrix = Eigen::MatrixXd::Zero(me, total);
    phase1.eq_matrix.leftCols(n) = p.eq_matrix;
    phase1.eq_matrix.block(0, n, me, me).setIdentity();
    phase1.eq_rhs = p.eq_rhs;
    phase1.ineq_matrix = Eigen::MatrixXd::Zero(2 * mi, total);
    phase1.ineq_matrix.topLeftCorner(mi, n) = p.ineq_matrix;
    phase1.ineq_matrix.block(0, n + me, mi, mi).setIdentity();
    phase1.ineq_matrix.block(mi, n + me, mi, mi).setIdentity();
    phase1.ineq_rhs = Eigen::VectorXd::Zero(2 * mi);
    phase1.ineq_rhs.head(mi) = p.ineq_rhs;

    Eigen::VectorXd start = Eigen::VectorXd::Zero(total);
    if (me > 0)
        start.segment(n, me) = p.eq_rhs - p.eq_matrix * x0;
    if (mi > 0)
        start.tail(mi) = (p.ineq_rhs - p.ineq_matrix * x0).cwiseMax(0.0);

    const ActiveSetEngine engine(phase1, iteration_cap(options, total));
    const auto outcome = engine.run(start, {});
    Eigen::VectorXd x = outcome.x.head(n);
    const double violation = constraint_violation(p, x);
    if (violation > feasibility_tolerance(p))
        throw Error(ErrorCode::Infeasible, "constraints cannot be satisfied (residual " +
                                               std::to_string(violation) + ")");
    return x;
}

QpResult package(const QpProblem& p, const ActiveSetEngine::Outcome& o)
{
    QpResult r;
    r.status = o.status;
    r.x = o.x;
    r.iterations = o.iterations;
    r.working_set = o.working;
    std::sort(r.working_set.begin(), r.working_set.end());
    const Eigen::Index me = p.eq_matrix.rows();
    r.eq_multipliers = Eigen::VectorXd::Zero(me);
    r.ineq_multipliers = Eigen::VectorXd::Zero(p.ineq_matrix.rows());
    if (o.status == QpStatus::Optimal && o.lambda.size() > 0)
    {
        r.eq_multipliers = o.lambda.head(me);
        for (std::size_t k = 0; k < o.working.size(); ++k)
            r.ineq_multipliers(o.working[k]) = o.lambda(me + static_cast<Eigen::Index>(k));
    }
    r.objective = 0.5 * r.x.dot(p.hessian * r.x) + p.linear.dot(r.x);

    if (o.status == QpStatus::Optimal)
    {
        Eigen::VectorXd stationarity = p.hessian * r.x + p.linear;
        if (me > 0)
            stationarity -= p.eq_matrix.transpose() * r.eq_multipliers;
        if (p.ineq_matrix.rows() > 0)
            stationarity -= p.ineq_matrix.transpose() * r.ineq_multipliers;
        double dual = 0.0;
        if (r.ineq_multipliers.size() > 0)
            dual = std::max(0.0, -r.ineq_multipliers.minCoeff());
        r.kkt_residual = std::max({inf_norm(stationarity), constraint_violation(p, r.x), dual});
    }
    return r;
}

} // namespace

QpResult solve_qp(const QpProblem& problem, const QpOptions& options)
{
    const Eigen::Index n = problem.variables();
    if (problem.hessian.cols() != n || problem.linear.size() != n || problem.eq_matrix.cols() != n ||
        problem.ineq_matrix.cols() != n || problem.eq_rhs.size() != problem.eq_matrix.rows() ||
        problem.ineq_rhs.size() != problem.ineq_matrix.rows())
        throw Error(ErrorCode::DimensionMismatch, "inconsistent QP dimensions");

    const int cap = iteration_cap(options, n);
    const Eigen::VectorXd start = find_feasible_point(problem, options);
    const ActiveSetEngine engine(problem, cap);
    auto outcome = engine.run(start, {});

    if (outcome.status == QpStatus::Optimal && options.tie_break_dims > 0)
    {
        const Eigen::Index k = std::min(options.tie_break_dims, n);
        const auto& Z = outcome.null_basis;
        bool tied = false;
        if (Z.cols() > 0)
        {
            const Eigen::MatrixXd hz = Z.transpose() * problem.hessian * Z;
            const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hz);
            for (Eigen::Index j = 0; j < hz.rows(); ++j)
                if (eig.eigenvalues()(j) <= engine.curvature_tol() &&
                    (Z * eig.eigenvectors().col(j)).head(k).norm() > 1e-9)
                    tied = true;
        }
        if (tied)
        {
            // optimal set = feasible points sharing H x and c' x with the optimum
            QpProblem tb = problem;
            tb.hessian.setZero();
            tb.hessian.topLeftCorner(k, k).setIdentity();
            tb.linear.setZero();
            const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> heig(problem.hessian);
            const double h_tol = 1e-10 * std::max(1e-300, heig.eigenvalues().cwiseAbs().maxCoeff());
            for (Eigen::Index j = 0; j < n; ++j)
                if (heig.eigenvalues()(j) > h_tol)
                {
                    const Eigen::RowVectorXd row = heig.eigenvectors().col(j).transpose();
                    tb.add_equality(row, row.dot(outcome.x));
                }
            if (problem.linear.squaredNorm() > 0.0)
                tb.add_equality(problem.linear.transpose(), problem.linear.dot(outcome.x));
            const ActiveSetEngine tb_engine(tb, iteration_cap(options, n));
            const auto tb_outcome = tb_engine.run(outcome.x, outcome.working);
            // recover the original problem's multipliers at the tie-broken point
            outcome = engine.run(tb_outcome.x, tb_outcome.working);
        }
    }

    QpResult result = package(problem, outcome);
    if (result.status == QpStatus::Optimal && result.kkt_residual > options.kkt_tolerance)
        throw Error(ErrorCode::NumericalFailure,
                    "KKT residual " + std::to_string(result.kkt_residual) + " exceeds tolerance");
    return result;
}

} // namespace chaosfolio

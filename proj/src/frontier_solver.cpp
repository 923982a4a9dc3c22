#include "chaosfolio/frontier_solver.hpp"

#include "chaosfolio/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace chaosfolio
{

namespace
{

constexpr double kInf = std::numeric_limits<double>::infinity();

} // namespace

// ---------------------------------------------------------------------------
// ConstraintSet

ConstraintSet ConstraintSet::long_only(Eigen::Index n)
{
    ConstraintSet c;
    c.lower = Eigen::VectorXd::Zero(n);
    c.upper = Eigen::VectorXd::Constant(n, kInf);
    return c;
}

ConstraintSet ConstraintSet::unconstrained(Eigen::Index n)
{
    ConstraintSet c;
    c.lower = Eigen::VectorXd::Constant(n, -kInf);
    c.upper = Eigen::VectorXd::Constant(n, kInf);
    return c;
}

ConstraintSet ConstraintSet::dollar_neutral(Eigen::Index n, double gross_cap)
{
    ConstraintSet c = unconstrained(n);
    c.budget = 0.0;
    c.gross_cap = gross_cap;
    return c;
}

ConstraintSet ConstraintSet::long_short(Eigen::Index n, double max_short_total)
{
    ConstraintSet c = unconstrained(n);
    c.max_short_total = max_short_total;
    return c;
}

ConstraintSet ConstraintSet::with_turnover(double cap, Eigen::VectorXd reference) const
{
    ConstraintSet c = *this;
    c.turnover = TurnoverLimit{cap, std::move(reference)};
    return c;
}

bool ConstraintSet::has_finite_lower_bounds() const { return lower.size() > 0 && lower.allFinite(); }

void ConstraintSet::validate(Eigen::Index n) const
{
    if (lower.size() != n || upper.size() != n)
        throw Error(ErrorCode::DimensionMismatch, "bounds must have one entry per asset");
    for (Eigen::Index i = 0; i < n; ++i)
    {
        if (std::isnan(lower(i)) || std::isnan(upper(i)) || lower(i) > upper(i))
            throw Error(ErrorCode::ParamOutOfRange, "lower bound exceeds upper bound for asset " + std::to_string(i + 1));
    }
    if (!std::isfinite(budget))
        throw Error(ErrorCode::ParamOutOfRange, "budget must be finite");
    if (max_short_total && !(*max_short_total >= 0.0))
        throw Error(ErrorCode::ParamOutOfRange, "max_short_total must be >= 0");
    if (gross_cap && !(*gross_cap >= 0.0))
        throw Error(ErrorCode::ParamOutOfRange, "gross_cap must be >= 0");
    if (turnover)
    {
        if (!(turnover->cap >= 0.0))
            throw Error(ErrorCode::ParamOutOfRange, "turnover cap must be >= 0");
        if (turnover->reference.size() != n)
            throw Error(ErrorCode::DimensionMismatch, "turnover reference weights must have one entry per asset");
    }
}

double turnover(const Eigen::VectorXd& w, const Eigen::VectorXd& reference)
{
    return 0.5 * (w - reference).cwiseAbs().sum();
}

double short_exposure(const Eigen::VectorXd& w) { return (-w).cwiseMax(0.0).sum(); }

double gross_exposure(const Eigen::VectorXd& w) { return w.cwiseAbs().sum(); }

double ConstraintSet::violation(const Eigen::VectorXd& w) const
{
    double worst = std::abs(w.sum() - budget);
    for (Eigen::Index i = 0; i < w.size(); ++i)
    {
        if (std::isfinite(lower(i)))
            worst = std::max(worst, lower(i) - w(i));
        if (std::isfinite(upper(i)))
            worst = std::max(worst, w(i) - upper(i));
    }
    if (max_short_total)
        worst = std::max(worst, short_exposure(w) - *max_short_total);
    if (gross_cap)
        worst = std::max(worst, gross_exposure(w) - *gross_cap);
    if (turnover)
        worst = std::max(worst, chaosfolio::turnover(w, turnover->reference) - turnover->cap);
    return std::max(worst, 0.0);
}

std::vector<std::string> ConstraintSet::active_tags(const Eigen::VectorXd& w, const std::vector<std::string>& names,
                                                    double tol) const
{
    std::vector<std::string> tags;
    auto name = [&](Eigen::Index i) {
        return static_cast<std::size_t>(i) < names.size() ? names[static_cast<std::size_t>(i)]
                                                          : "a" + std::to_string(i + 1);
    };
    for (Eigen::Index i = 0; i < w.size(); ++i)
    {
        if (std::isfinite(lower(i)) && w(i) - lower(i) <= tol)
            tags.push_back("lower:" + name(i));
        if (std::isfinite(upper(i)) && upper(i) - w(i) <= tol)
            tags.push_back("upper:" + name(i));
    }
    if (max_short_total && *max_short_total - short_exposure(w) <= tol)
        tags.emplace_back("short_cap");
    if (gross_cap && *gross_cap - gross_exposure(w) <= tol)
        tags.emplace_back("gross_cap");
    if (turnover && turnover->cap - chaosfolio::turnover(w, turnover->reference) <= tol)
        tags.emplace_back("turnover");
    return tags;
}

// ---------------------------------------------------------------------------
// QP formulation

namespace
{

struct Formulation
{
    QpProblem qp;
    Eigen::Index assets = 0;
    Eigen::Index split_offset = -1;    ///< p then q, n each
    Eigen::Index turnover_offset = -1; ///< u then v, n each
};

Formulation formulate(const AssetMoments& m, const ConstraintSet& c)
{
    m.validate();
    const Eigen::Index n = m.mu.size();
    c.validate(n);

    Formulation f;
    f.assets = n;
    Eigen::Index total = n;
    if (c.max_short_total || c.gross_cap)
    {
        f.split_offset = total;
        total += 2 * n;
    }
    if (c.turnover)
    {
        f.turnover_offset = total;
        total += 2 * n;
    }

    f.qp = QpProblem::over(total);
    f.qp.hessian.topLeftCorner(n, n) = m.sigma;

    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(total);
    row.head(n).setOnes();
    f.qp.add_equality(row, c.budget);

    for (Eigen::Index i = 0; i < n; ++i)
    {
        if (std::isfinite(c.lower(i)))
        {
            row.setZero();
            row(i) = 1.0;
            f.qp.add_inequality(row, c.lower(i));
        }
        if (std::isfinite(c.upper(i)))
        {
            row.setZero();
            row(i) = -1.0;
            f.qp.add_inequality(row, -c.upper(i));
        }
    }

    if (f.split_offset >= 0)
    {
        const Eigen::Index p0 = f.split_offset;
        const Eigen::Index q0 = f.split_offset + n;
        for (Eigen::Index i = 0; i < n; ++i)
        {
            row.setZero(); // w_i - p_i + q_i = 0
            row(i) = 1.0;
            row(p0 + i) = -1.0;
            row(q0 + i) = 1.0;
            f.qp.add_equality(row, 0.0);
        }
        for (Eigen::Index i = 0; i < 2 * n; ++i)
        {
            row.setZero();
            row(p0 + i) = 1.0;
            f.qp.add_inequality(row, 0.0);
        }
        if (c.max_short_total)
        {
            row.setZero();
            row.segment(q0, n).setConstant(-1.0);
            f.qp.add_inequality(row, -*c.max_short_total);
        }
        if (c.gross_cap)
        {
            row.setZero();
            row.segment(p0, 2 * n).setConstant(-1.0);
            f.qp.add_inequality(row, -*c.gross_cap);
        }
    }

    if (f.turnover_offset >= 0)
    {
        const Eigen::Index u0 = f.turnover_offset;
        const Eigen::Index v0 = f.turnover_offset + n;
        for (Eigen::Index i = 0; i < n; ++i)
        {
            row.setZero(); // w_i - u_i + v_i = w0_i
            row(i) = 1.0;
            row(u0 + i) = -1.0;
            row(v0 + i) = 1.0;
            f.qp.add_equality(row, c.turnover->reference(i));
        }
        for (Eigen::Index i = 0; i < 2 * n; ++i)
        {
            row.setZero();
            row(u0 + i) = 1.0;
            f.qp.add_inequality(row, 0.0);
        }
        row.setZero();
        row.segment(u0, 2 * n).setConstant(-1.0);
        f.qp.add_inequality(row, -2.0 * c.turnover->cap);
    }
    return f;
}

QpOptions solver_options(const Formulation& f)
{
    QpOptions o;
    o.tie_break_dims = f.assets;
    return o;
}

struct MinVarSolution
{
    Eigen::VectorXd w;
    double target_multiplier = 0.0; ///< d(sigma^2 / 2) / d(target)
};

MinVarSolution solve_min_variance(const AssetMoments& m, const ConstraintSet& c, std::optional<double> target)
{
    Formulation f = formulate(m, c);
    if (target)
    {
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(f.qp.variables());
        row.head(f.assets) = m.mu.transpose();
        f.qp.add_equality(row, *target);
    }
    const QpResult r = solve_qp(f.qp, solver_options(f));
    MinVarSolution s;
    s.w = r.x.head(f.assets);
    if (target)
        s.target_multiplier = r.eq_multipliers(r.eq_multipliers.size() - 1);
    return s;
}

/// Maximum (sign = 1) or minimum (sign = -1) of mu' w over the feasible set, +-inf when unbounded.
double extreme_return(const AssetMoments& m, const ConstraintSet& c, double sign)
{
    Formulation f = formulate(m, c);
    f.qp.hessian.setZero();
    f.qp.linear.head(f.assets) = -sign * m.mu;
    const QpResult r = solve_qp(f.qp);
    if (r.status == QpStatus::Unbounded)
        return sign * kInf;
    return m.mu.dot(r.x.head(f.assets));
}

double unbounded_upper_target(const AssetMoments& m, double gmv_return)
{
    return std::max(m.mu.maxCoeff(), gmv_return + (m.mu.maxCoeff() - m.mu.minCoeff()));
}

} // namespace

// ---------------------------------------------------------------------------
// Frontier operations

ReturnRange return_range(const AssetMoments& m, const ConstraintSet& c)
{
    ReturnRange range;
    const double lo = extreme_return(m, c, -1.0);
    range.min_return = lo;
    const double hi = extreme_return(m, c, 1.0);
    range.max_bounded = std::isfinite(hi);
    range.max_return = hi;
    range.gmv_return = m.mu.dot(solve_min_variance(m, c, std::nullopt).w);
    return range;
}

FrontierPoint global_min_variance(const AssetMoments& m, const ConstraintSet& c)
{
    return make_point(solve_min_variance(m, c, std::nullopt).w, m, "gmv");
}

FrontierPoint min_variance_for_target_return(const AssetMoments& m, double target_mu, const ConstraintSet& c)
{
    if (!std::isfinite(target_mu))
        throw Error(ErrorCode::ParamOutOfRange, "target return must be finite");
    return make_point(solve_min_variance(m, c, target_mu).w, m);
}

FrontierPoint max_return_portfolio(const AssetMoments& m, const ConstraintSet& c)
{
    const double hi = extreme_return(m, c, 1.0);
    if (!std::isfinite(hi))
        throw Error(ErrorCode::NumericalFailure, "achievable return is unbounded under these constraints");
    return make_point(solve_min_variance(m, c, hi).w, m, "max-return");
}

std::vector<FrontierPoint> efficient_frontier(const AssetMoments& m, const ConstraintSet& c, int n_points)
{
    if (n_points < 2)
        throw Error(ErrorCode::ParamOutOfRange, "n_points must be >= 2");
    const FrontierPoint gmv = global_min_variance(m, c);
    const double hi = extreme_return(m, c, 1.0);
    const double t_lo = gmv.mu_p;
    const double t_hi = std::isfinite(hi) ? std::max(hi, t_lo) : unbounded_upper_target(m, t_lo);

    std::vector<FrontierPoint> points;
    if (t_hi - t_lo <= 1e-12 * (1.0 + std::abs(t_lo)))
    {
        points.push_back(gmv);
        return points;
    }
    points.reserve(static_cast<std::size_t>(n_points));
    points.push_back(gmv);
    for (int k = 1; k < n_points; ++k)
    {
        const double t = k == n_points - 1 ? t_hi : t_lo + (t_hi - t_lo) * k / (n_points - 1);
        points.push_back(min_variance_for_target_return(m, t, c));
    }
    return points;
}

std::vector<CornerPortfolio> corner_portfolios(const AssetMoments& m, const ConstraintSet& c)
{
    c.validate(m.mu.size());
    if (!c.has_finite_lower_bounds() || c.needs_split_variables())
        throw Error(ErrorCode::ParamOutOfRange,
                    "corner portfolios need finite lower bounds and no short, gross or turnover caps");

    const double t_min = extreme_return(m, c, -1.0);
    const double t_max = extreme_return(m, c, 1.0);
    if (!std::isfinite(t_min) || !std::isfinite(t_max))
        throw Error(ErrorCode::ParamOutOfRange, "corner portfolios need a bounded return range");

    constexpr double kActiveTol = 1e-10;
    auto corner_at = [&](double t) {
        const Eigen::VectorXd w = solve_min_variance(m, c, t).w;
        CornerPortfolio cp;
        cp.weights.weights = w;
        cp.mu_p = portfolio_mean(w, m);
        cp.sigma_p = portfolio_stddev(w, m);
        cp.active_set = c.active_tags(w, m.asset_names, kActiveTol);
        return cp;
    };

    std::vector<CornerPortfolio> corners;
    const CornerPortfolio first = corner_at(t_min);
    corners.push_back(first);
    const double width = t_max - t_min;
    if (width <= 1e-12 * (1.0 + std::abs(t_min)))
        return corners;

    const int samples = std::max(64, 8 * static_cast<int>(m.mu.size()));
    const double resolution = 1e-13 * (1.0 + std::abs(t_min) + std::abs(t_max));

    std::vector<double> breakpoints;
    std::function<void(double, const std::vector<std::string>&, double, const std::vector<std::string>&)> bisect =
        [&](double tl, const std::vector<std::string>& al, double tr, const std::vector<std::string>& ar) {
            if (tr - tl <= resolution)
            {
                breakpoints.push_back(0.5 * (tl + tr));
                return;
            }
            const double tm = 0.5 * (tl + tr);
            const auto am = corner_at(tm).active_set;
            if (am != al)
                bisect(tl, al, tm, am);
            if (am != ar)
                bisect(tm, am, tr, ar);
        };

    // active sets strictly inside the range; the endpoints are corners by construction
    std::vector<double> grid;
    std::vector<std::vector<std::string>> sets;
    for (int k = 1; k < samples; ++k)
    {
        const double t = t_min + width * k / samples;
        grid.push_back(t);
        sets.push_back(corner_at(t).active_set);
    }
    for (std::size_t k = 0; k + 1 < grid.size(); ++k)
        if (sets[k] != sets[k + 1])
            bisect(grid[k], sets[k], grid[k + 1], sets[k + 1]);
    // changes between the endpoints and the first/last interior sample
    auto edge_search = [&](double t_edge, double t_inner, const std::vector<std::string>& inner) {
        // shrink toward the edge; a kink inside [edge, inner] shows as a differing set near the edge
        double tl = std::min(t_edge, t_inner), tr = std::max(t_edge, t_inner);
        const double probe = t_edge < t_inner ? tl + 1e-6 * (tr - tl) : tr - 1e-6 * (tr - tl);
        const auto ap = corner_at(probe).active_set;
        if (ap == inner)
            return;
        if (t_edge < t_inner)
            bisect(probe, ap, t_inner, inner);
        else
            bisect(t_inner, inner, probe, ap);
    };
    edge_search(t_min, grid.front(), sets.front());
    edge_search(t_max, grid.back(), sets.back());

    std::sort(breakpoints.begin(), breakpoints.end());
    for (double t : breakpoints)
    {
        CornerPortfolio cp = corner_at(t);
        if (std::abs(cp.mu_p - corners.back().mu_p) <= 1e-9 * (1.0 + std::abs(cp.mu_p)))
            continue;
        corners.push_back(std::move(cp));
    }
    CornerPortfolio last = corner_at(t_max);
    if (std::abs(last.mu_p - corners.back().mu_p) <= 1e-9 * (1.0 + std::abs(last.mu_p)))
        corners.back() = std::move(last);
    else
        corners.push_back(std::move(last));
    return corners;
}

namespace
{

TangencyResult make_tangency(const Eigen::VectorXd& w, const AssetMoments& m, double r_f, std::string label)
{
    TangencyResult t;
    t.weights.weights = w;
    t.weights.label = std::move(label);
    t.mu_p = portfolio_mean(w, m);
    t.sigma_p = portfolio_stddev(w, m);
    t.r_f = r_f;
    if (!(t.sigma_p > 0.0))
        throw Error(ErrorCode::NumericalFailure, "tangency portfolio has zero volatility");
    t.sharpe = (t.mu_p - r_f) / t.sigma_p;
    return t;
}

bool closed_form_applies(const ConstraintSet& c)
{
    return c.budget == 1.0 && !c.needs_split_variables() && !c.lower.array().isFinite().any() &&
           !c.upper.array().isFinite().any();
}

void check_tangency_inputs(const AssetMoments& m, const ConstraintSet& c, double r_f)
{
    if (!std::isfinite(r_f))
        throw Error(ErrorCode::ParamOutOfRange, "risk-free rate must be finite");
    if (!(c.budget > 0.0))
        throw Error(ErrorCode::ParamOutOfRange, "Sharpe-ratio portfolios need a positive budget");
    const double hi = extreme_return(m, c, 1.0);
    if (hi <= r_f * c.budget)
        throw Error(ErrorCode::NoExcessReturn, "no feasible portfolio earns more than the risk-free rate");
}

} // namespace

TangencyResult tangency_portfolio(const AssetMoments& m, const ConstraintSet& c, double r_f)
{
    Formulation f = formulate(m, c);
    check_tangency_inputs(m, c, r_f);
    const Eigen::Index n = f.assets;

    if (closed_form_applies(c))
    {
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(m.sigma);
        const Eigen::VectorXd excess = m.mu - Eigen::VectorXd::Constant(n, r_f);
        if (ldlt.info() == Eigen::Success && ldlt.isPositive() &&
            ldlt.vectorD().minCoeff() > 1e-12 * ldlt.vectorD().maxCoeff())
        {
            const Eigen::VectorXd z = ldlt.solve(excess);
            const double total = z.sum();
            if (!(total > 0.0))
                throw Error(ErrorCode::NumericalFailure,
                            "risk-free rate is at or above the GMV return; the maximum Sharpe ratio is not attained");
            return make_tangency(z / total, m, r_f, "tangency");
        }
    }

    // homogenize: x = y / kappa, every constraint a.x (=,>=) b becomes a.y - b kappa (=,>=) 0
    const Eigen::Index nv = f.qp.variables();
    QpProblem h = QpProblem::over(nv + 1);
    h.hessian.topLeftCorner(nv, nv) = f.qp.hessian;
    Eigen::RowVectorXd row(nv + 1);
    for (Eigen::Index k = 0; k < f.qp.eq_matrix.rows(); ++k)
    {
        row << f.qp.eq_matrix.row(k), -f.qp.eq_rhs(k);
        h.add_equality(row, 0.0);
    }
    for (Eigen::Index k = 0; k < f.qp.ineq_matrix.rows(); ++k)
    {
        row << f.qp.ineq_matrix.row(k), -f.qp.ineq_rhs(k);
        h.add_inequality(row, 0.0);
    }
    row.setZero();
    row.head(n) = m.mu.transpose();
    row(nv) = -r_f * c.budget;
    h.add_equality(row, 1.0);
    row.setZero();
    row(nv) = 1.0;
    h.add_inequality(row, 0.0);

    QpOptions options;
    options.tie_break_dims = n;
    QpResult r;
    try
    {
        r = solve_qp(h, options);
    }
    catch (const Error& e)
    {
        if (e.code() == ErrorCode::Infeasible)
            throw Error(ErrorCode::NoExcessReturn, "no feasible portfolio earns more than the risk-free rate");
        throw;
    }
    const double kappa = r.x(nv);
    if (!(kappa > 1e-12 * std::max(1.0, r.x.head(n).cwiseAbs().maxCoeff())))
        throw Error(ErrorCode::NumericalFailure, "the maximum Sharpe ratio is not attained");
    return make_tangency(r.x.head(n) / kappa, m, r_f, "tangency");
}

double frontier_sharpe(const AssetMoments& m, const ConstraintSet& c, double target_mu, double r_f)
{
    const FrontierPoint p = min_variance_for_target_return(m, target_mu, c);
    if (!(p.sigma_p > 0.0))
        return p.mu_p > r_f ? kInf : -kInf;
    return (p.mu_p - r_f) / p.sigma_p;
}

TangencyResult max_sharpe_portfolio(const AssetMoments& m, const ConstraintSet& c, double r_f)
{
    check_tangency_inputs(m, c, r_f);
    const FrontierPoint gmv = global_min_variance(m, c);
    const double hi = extreme_return(m, c, 1.0);
    const double t_lo = std::max(gmv.mu_p, r_f);

    // d(Sharpe)/dt has the sign of sigma^2 - (t - r_f) * d(sigma^2/2)/dt
    auto slope_sign = [&](double t) {
        const MinVarSolution s = solve_min_variance(m, c, t);
        const double var = s.w.dot(m.sigma * s.w);
        return var - (t - r_f) * s.target_multiplier;
    };

    double t_hi = hi;
    if (!std::isfinite(hi))
    {
        double span = std::max(m.mu.maxCoeff() - m.mu.minCoeff(), 1e-3 * (1.0 + std::abs(t_lo)));
        int doublings = 0;
        while (slope_sign(t_lo + span) > 0.0)
        {
            span *= 2.0;
            if (++doublings > 60)
                throw Error(ErrorCode::NumericalFailure, "the maximum Sharpe ratio is not attained");
        }
        t_hi = t_lo + span;
    }
    if (t_hi - t_lo <= 1e-12 * (1.0 + std::abs(t_lo)))
        return make_tangency(solve_min_variance(m, c, std::max(t_hi, gmv.mu_p)).w, m, r_f, "max-sharpe");

    constexpr int kSweep = 64;
    std::vector<double> ts(kSweep + 1);
    int best = -1;
    double best_sharpe = -kInf;
    for (int k = 0; k <= kSweep; ++k)
    {
        ts[static_cast<std::size_t>(k)] = k == kSweep ? t_hi : t_lo + (t_hi - t_lo) * k / kSweep;
        const double s = frontier_sharpe(m, c, ts[static_cast<std::size_t>(k)], r_f);
        if (s > best_sharpe)
        {
            best_sharpe = s;
            best = k;
        }
    }

    double left = ts[static_cast<std::size_t>(std::max(best - 1, 0))];
    double right = ts[static_cast<std::size_t>(std::min(best + 1, kSweep))];
    double t_star = ts[static_cast<std::size_t>(best)];
    const double left_slope = slope_sign(left);
    const double right_slope = slope_sign(right);
    if (best == 0 && left_slope <= 0.0)
        t_star = left;
    else if (best == kSweep && right_slope >= 0.0)
        t_star = right;
    else if (left_slope > 0.0 && right_slope < 0.0)
    {
        for (int iter = 0; iter < 200 && right - left > 4.0 * std::numeric_limits<double>::epsilon() *
                                                            std::max(std::abs(left), std::abs(right));
             ++iter)
        {
            const double mid = 0.5 * (left + right);
            if (slope_sign(mid) > 0.0)
                left = mid;
            else
                right = mid;
        }
        t_star = 0.5 * (left + right);
    }
    return make_tangency(solve_min_variance(m, c, t_star).w, m, r_f, "max-sharpe");
}

std::vector<FrontierPoint> frontier_with_turnover(const AssetMoments& m, const ConstraintSet& c, int n_points)
{
    c.validate(m.mu.size());
    if (!c.turnover)
        throw Error(ErrorCode::ParamOutOfRange, "constraint set has no turnover limit");
    ConstraintSet base = c;
    base.turnover.reset();
    base.max_short_total.reset();
    base.gross_cap.reset();
    if (base.violation(c.turnover->reference) > 1e-10)
        throw Error(ErrorCode::Infeasible, "reference weights violate the budget or bounds");
    return efficient_frontier(m, c, n_points);
}

FrontierPoint dollar_neutral_optimize(const AssetMoments& m, const ConstraintSet& c, std::optional<double> target_mu)
{
    if (c.budget != 0.0)
        throw Error(ErrorCode::ParamOutOfRange, "dollar-neutral portfolios need budget 0");
    if (!c.gross_cap)
        throw Error(ErrorCode::ParamOutOfRange, "dollar-neutral portfolios need a gross cap");
    FrontierPoint p = target_mu ? min_variance_for_target_return(m, *target_mu, c) : max_return_portfolio(m, c);
    p.weights.label = "dollar-neutral";
    return p;
}

FrontierPoint optimize_130_30(const AssetMoments& m, const ConstraintSet& c, std::optional<double> target_mu)
{
    if (c.budget != 1.0)
        throw Error(ErrorCode::ParamOutOfRange, "130-30 portfolios need budget 1");
    if (!c.max_short_total)
        throw Error(ErrorCode::ParamOutOfRange, "130-30 portfolios need a short cap");
    FrontierPoint p = target_mu ? min_variance_for_target_return(m, *target_mu, c) : max_return_portfolio(m, c);
    p.weights.label = "130-30";
    return p;
}

// ---------------------------------------------------------------------------
// Grid oracle

namespace
{

struct OracleLayout
{
    std::vector<Eigen::Index> free;
    std::vector<Eigen::Index> dependent; ///< 0, 1 or 2 coordinates solved from the equalities
};

OracleLayout layout_from(Eigen::Index n, std::vector<Eigen::Index> dependent)
{
    OracleLayout layout;
    layout.dependent = std::move(dependent);
    for (Eigen::Index i = 0; i < n; ++i)
        if (std::find(layout.dependent.begin(), layout.dependent.end(), i) == layout.dependent.end())
            layout.free.push_back(i);
    return layout;
}

/// Every choice of solved coordinates. The first layout solves the pair with the
/// widest return spread (best conditioned 2x2 solve) and defines the resolution bound.
std::vector<OracleLayout> oracle_layouts(const AssetMoments& m, bool with_target)
{
    const Eigen::Index n = m.mu.size();
    std::vector<OracleLayout> layouts;
    if (with_target && n >= 2)
    {
        double widest = -1.0;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = i + 1; j < n; ++j)
            {
                const double spread = std::abs(m.mu(i) - m.mu(j));
                if (spread <= 1e-14)
                    continue;
                layouts.push_back(layout_from(n, {i, j}));
                if (spread > widest)
                {
                    widest = spread;
                    std::swap(layouts.front(), layouts.back());
                }
            }
    }
    if (layouts.empty())
    {
        layouts.push_back(layout_from(n, {n - 1}));
        for (Eigen::Index i = 0; i + 1 < n; ++i)
            layouts.push_back(layout_from(n, {i}));
    }
    return layouts;
}

std::pair<double, double> oracle_box(const ConstraintSet& c, Eigen::Index i)
{
    double lo = c.lower(i), hi = c.upper(i);
    const double fallback = std::abs(c.budget) + 2.0;
    if (c.gross_cap)
    {
        lo = std::max(lo, -*c.gross_cap);
        hi = std::min(hi, *c.gross_cap);
    }
    if (c.max_short_total)
    {
        lo = std::max(lo, -*c.max_short_total);
        hi = std::min(hi, c.budget + *c.max_short_total);
    }
    if (c.turnover)
    {
        lo = std::max(lo, c.turnover->reference(i) - 2.0 * c.turnover->cap);
        hi = std::min(hi, c.turnover->reference(i) + 2.0 * c.turnover->cap);
    }
    if (!std::isfinite(lo))
        lo = -fallback;
    if (!std::isfinite(hi))
        hi = fallback;
    return {lo, hi};
}

} // namespace

FrontierPoint grid_oracle(const AssetMoments& m, const ConstraintSet& c, std::optional<double> target_mu, double step)
{
    m.validate();
    const Eigen::Index n = m.mu.size();
    c.validate(n);
    if (n > 4)
        throw Error(ErrorCode::TooManyAssets, "grid oracle supports at most 4 assets");
    if (!(step >= 0.001))
        throw Error(ErrorCode::ParamOutOfRange, "grid step must be >= 0.001");

    const std::vector<OracleLayout> layouts = oracle_layouts(m, target_mu.has_value());
    const bool target_redundant = target_mu && layouts.front().dependent.size() == 1;
    if (target_redundant && std::abs(m.mu(0) * c.budget - *target_mu) > 1e-12 * (1.0 + std::abs(*target_mu)))
        throw Error(ErrorCode::Infeasible, "target return unreachable: all assets share one mean");

    constexpr double kFeasTol = 1e-12;
    Eigen::VectorXd w(n), best_w;
    double best_var = kInf;
    for (const OracleLayout& layout : layouts)
    {
        std::vector<std::vector<double>> axes;
        for (Eigen::Index i : layout.free)
        {
            const auto [lo, hi] = oracle_box(c, i);
            std::vector<double> axis;
            for (long k = static_cast<long>(std::ceil(lo / step - 1e-9)); k * step <= hi + 1e-12; ++k)
                axis.push_back(static_cast<double>(k) * step);
            axes.push_back(std::move(axis));
        }

        std::function<void(std::size_t, double, double)> visit = [&](std::size_t depth, double sum, double ret) {
            if (depth == axes.size())
            {
                if (layout.dependent.size() == 2)
                {
                    const Eigen::Index a = layout.dependent[0], b = layout.dependent[1];
                    const double rb = c.budget - sum;
                    const double rt = *target_mu - ret;
                    // [1 1; mu_a mu_b] [wa; wb] = [rb; rt]
                    const double det = m.mu(b) - m.mu(a);
                    w(a) = (m.mu(b) * rb - rt) / det;
                    w(b) = (rt - m.mu(a) * rb) / det;
                }
                else
                    w(layout.dependent[0]) = c.budget - sum;
                if (c.violation(w) > kFeasTol)
                    return;
                const double var = w.dot(m.sigma * w);
                if (var < best_var)
                {
                    best_var = var;
                    best_w = w;
                }
                return;
            }
            const Eigen::Index i = layout.free[depth];
            for (double v : axes[depth])
            {
                w(i) = v;
                visit(depth + 1, sum + v, ret + m.mu(i) * v);
            }
        };
        visit(0, 0.0, 0.0);
    }

    if (!std::isfinite(best_var))
        throw Error(ErrorCode::Infeasible, "no grid point satisfies the constraints");
    return make_point(best_w, m, "grid-oracle");
}

double grid_oracle_resolution(const AssetMoments& m, double step, bool with_target)
{
    const Eigen::Index n = m.mu.size();
    const OracleLayout layout = oracle_layouts(m, with_target).front();
    // Jacobian of the full weight vector with respect to the free grid coordinates
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(layout.free.size()));
    for (std::size_t k = 0; k < layout.free.size(); ++k)
    {
        const Eigen::Index i = layout.free[k];
        const auto col = static_cast<Eigen::Index>(k);
        jac(i, col) = 1.0;
        if (layout.dependent.size() == 2)
        {
            const Eigen::Index a = layout.dependent[0], b = layout.dependent[1];
            const double det = m.mu(b) - m.mu(a);
            jac(a, col) = (-m.mu(b) + m.mu(i)) / det;
            jac(b, col) = (m.mu(a) - m.mu(i)) / det;
        }
        else
            jac(layout.dependent[0], col) = -1.0;
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m.sigma, Eigen::EigenvaluesOnly);
    const double lipschitz_w = std::sqrt(std::max(0.0, eig.eigenvalues().maxCoeff()));
    double jac_norm = 0.0;
    if (jac.cols() > 0)
        jac_norm = Eigen::JacobiSVD<Eigen::MatrixXd>(jac).singularValues()(0);
    // sqrt(#free) converts the per-coordinate half-step to a Euclidean distance bound
    return 2.0 * step * lipschitz_w * jac_norm * std::sqrt(static_cast<double>(std::max<std::size_t>(1, layout.free.size())));
}

} // namespace chaosfolio

/**
 * @file frontier_solver.hpp
 * @brief Constrained mean-variance solver: efficient frontier, corner
 *        portfolios, tangency / maximum-Sharpe portfolios and the
 *        turnover, dollar-neutral and 130-30 scenarios.
 *
 * Every scenario is expressed as one convex QP over the weights w plus
 * auxiliary split variables where absolute values appear:
 *   short cap / gross cap : w = p - q,            p, q >= 0
 *   turnover              : w - w0 = u - v,       u, v >= 0
 * and solved by the active-set core in qp_solver.hpp. Ties among optimal
 * weight vectors are broken by minimum Euclidean norm of w.
 */
#pragma once

#include "chaosfolio/market_data.hpp"
#include "chaosfolio/mean_variance.hpp"
#include "chaosfolio/qp_solver.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace chaosfolio
{

struct TurnoverLimit
{
    double cap = 0.0;          ///< tau in (1/2) sum |w_i - w0_i| <= tau
    Eigen::VectorXd reference; ///< w0
};

struct ConstraintSet
{
    Eigen::VectorXd lower; ///< -inf allowed
    Eigen::VectorXd upper; ///< +inf allowed
    double budget = 1.0;   ///< required sum of weights
    std::optional<double> max_short_total;
    std::optional<TurnoverLimit> turnover;
    std::optional<double> gross_cap;

    static ConstraintSet long_only(Eigen::Index n);
    /// Budget 1, no bounds.
    static ConstraintSet unconstrained(Eigen::Index n);
    static ConstraintSet dollar_neutral(Eigen::Index n, double gross_cap = 1.0);
    /// Budget 1 with total shorts capped (0.3 gives a 130-30 portfolio).
    static ConstraintSet long_short(Eigen::Index n, double max_short_total = 0.3);

    ConstraintSet with_turnover(double cap, Eigen::VectorXd reference) const;

    Eigen::Index assets() const noexcept { return lower.size(); }
    bool has_finite_lower_bounds() const;
    bool needs_split_variables() const { return max_short_total || gross_cap || turnover; }

    /// Throws DimensionMismatch / ParamOutOfRange on malformed sets.
    void validate(Eigen::Index n) const;

    /// Largest violation of any constraint, evaluated directly on w.
    double violation(const Eigen::VectorXd& w) const;

    /// Tags of bound and cap constraints active at w, e.g. "lower:AAA".
    std::vector<std::string> active_tags(const Eigen::VectorXd& w, const std::vector<std::string>& names,
                                         double tol = 1e-10) const;
};

double turnover(const Eigen::VectorXd& w, const Eigen::VectorXd& reference);
double short_exposure(const Eigen::VectorXd& w);
double gross_exposure(const Eigen::VectorXd& w);

struct TangencyResult
{
    PortfolioWeights weights;
    double mu_p = 0.0;
    double sigma_p = 0.0;
    double sharpe = 0.0;
    double r_f = 0.0;
};

struct CornerPortfolio
{
    PortfolioWeights weights;
    double mu_p = 0.0;
    double sigma_p = 0.0;
    std::vector<std::string> active_set;
};

struct ReturnRange
{
    double min_return = 0.0;
    double max_return = 0.0;
    double gmv_return = 0.0; ///< return of the global minimum-variance portfolio
    bool max_bounded = true;
};

/// Achievable return interval under c and the GMV return.
ReturnRange return_range(const AssetMoments& m, const ConstraintSet& c);

FrontierPoint global_min_variance(const AssetMoments& m, const ConstraintSet& c);

FrontierPoint min_variance_for_target_return(const AssetMoments& m, double target_mu, const ConstraintSet& c);

/// Minimum-variance portfolio among those with the largest achievable return.
FrontierPoint max_return_portfolio(const AssetMoments& m, const ConstraintSet& c);

/// n_points targets uniform from the GMV return to the largest achievable return.
/// When the largest return is unbounded the upper target is
/// max(max_i mu_i, gmv + (max_i mu_i - min_i mu_i)). A degenerate range yields one point.
std::vector<FrontierPoint> efficient_frontier(const AssetMoments& m, const ConstraintSet& c, int n_points = 50);

/// Kinks of the minimum-variance set between the smallest and largest achievable
/// return. Requires finite lower bounds and no split-variable constraints.
std::vector<CornerPortfolio> corner_portfolios(const AssetMoments& m, const ConstraintSet& c);

/// Tangent construction: closed form Sigma^-1 (mu - r_f 1) for budget-1 sets
/// without bounds, otherwise the homogenized QP
///   min y' Sigma y  s.t. (mu - r_f 1)' y = 1, constraints scaled by kappa >= 0,  w = y / kappa.
TangencyResult tangency_portfolio(const AssetMoments& m, const ConstraintSet& c, double r_f);

/// Direct route: maximizes the Sharpe ratio along the frontier by bracketing
/// the frontier sweep and bisecting on the sign of d(Sharpe)/d(target).
TangencyResult max_sharpe_portfolio(const AssetMoments& m, const ConstraintSet& c, double r_f);

/// Sharpe ratio of the frontier portfolio at the given target return.
double frontier_sharpe(const AssetMoments& m, const ConstraintSet& c, double target_mu, double r_f);

/// Frontier under a turnover cap. Throws Infeasible when w0 violates the budget or bounds.
std::vector<FrontierPoint> frontier_with_turnover(const AssetMoments& m, const ConstraintSet& c, int n_points = 50);

/// Dollar-neutral (budget 0, gross cap) portfolio; max-return mode when target is empty.
FrontierPoint dollar_neutral_optimize(const AssetMoments& m, const ConstraintSet& c,
                                      std::optional<double> target_mu = std::nullopt);

/// Budget-1 portfolio with capped total shorts; max-return mode when target is empty.
FrontierPoint optimize_130_30(const AssetMoments& m, const ConstraintSet& c,
                              std::optional<double> target_mu = std::nullopt);

/// Exhaustive search over weights on a step-sized grid (N <= 4, step >= 0.001).
/// With a target, two coordinates are solved from the budget and return equations;
/// otherwise one is solved from the budget. Every choice of solved coordinates is searched.
FrontierPoint grid_oracle(const AssetMoments& m, const ConstraintSet& c, std::optional<double> target_mu,
                          double step);

/// 2 * step * L, with L a Lipschitz bound of sqrt(w' Sigma w) in the oracle's grid coordinates.
double grid_oracle_resolution(const AssetMoments& m, double step, bool with_target = true);

} // namespace chaosfolio

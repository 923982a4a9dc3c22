#include "chaosfolio/mean_variance.hpp"

#include "chaosfolio/errors.hpp"

#include <cmath>

namespace chaosfolio
{

namespace
{

void check_length(const Eigen::VectorXd& w, const AssetMoments& m)
{
    if (w.size() != m.mu.size())
        throw Error(ErrorCode::DimensionMismatch, "weights have " + std::to_string(w.size()) +
                                                      " entries, moments have " + std::to_string(m.mu.size()));
}

} // namespace

double portfolio_mean(const Eigen::VectorXd& w, const AssetMoments& m)
{
    check_length(w, m);
    return w.dot(m.mu);
}

double portfolio_mean(const PortfolioWeights& w, const AssetMoments& m) { return portfolio_mean(w.weights, m); }

double portfolio_stddev(const Eigen::VectorXd& w, const AssetMoments& m)
{
    check_length(w, m);
    const double var = w.dot(m.sigma * w);
    if (var < 0.0)
    {
        if (var < -1e-12)
            throw Error(ErrorCode::NumericalFailure, "negative portfolio variance " + std::to_string(var));
        return 0.0;
    }
    return std::sqrt(var);
}

double portfolio_stddev(const PortfolioWeights& w, const AssetMoments& m) { return portfolio_stddev(w.weights, m); }

FrontierPoint make_point(const Eigen::VectorXd& w, const AssetMoments& m, std::string label)
{
    FrontierPoint p;
    p.mu_p = portfolio_mean(w, m);
    p.sigma_p = portfolio_stddev(w, m);
    p.weights.weights = w;
    p.weights.label = std::move(label);
    return p;
}

TwoAssetFrontier two_asset_frontier(const AssetMoments& m, int n_points)
{
    if (m.mu.size() != 2)
        throw Error(ErrorCode::NotTwoAssets, "two-asset frontier needs exactly 2 assets, got " +
                                                 std::to_string(m.mu.size()));
    if (n_points < 2)
        throw Error(ErrorCode::ParamOutOfRange, "n_points must be >= 2");

    TwoAssetFrontier out;
    out.points.reserve(static_cast<std::size_t>(n_points));
    for (int k = 0; k < n_points; ++k)
    {
        // exact endpoints: w1 = k / (n - 1) hits 0 and 1 without rounding
        const double w1 = static_cast<double>(k) / static_cast<double>(n_points - 1);
        Eigen::Vector2d w(w1, 1.0 - w1);
        out.points.push_back(make_point(w, m));
    }

    const double v1 = m.sigma(0, 0);
    const double v2 = m.sigma(1, 1);
    const double c12 = m.sigma(0, 1); // rho * sigma1 * sigma2
    const double denom = v1 + v2 - 2.0 * c12;
    out.min_variance_weight = denom > 1e-300 ? (v2 - c12) / denom : 0.5;
    out.min_variance = make_point(Eigen::Vector2d(out.min_variance_weight, 1.0 - out.min_variance_weight), m,
                                  "min-variance");
    return out;
}

} // namespace chaosfolio

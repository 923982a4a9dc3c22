#pragma once

#include "chaosfolio/market_data.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace chaosfolio
{

struct PortfolioWeights
{
    Eigen::VectorXd weights; ///< fractions of capital, one per asset
    std::string label;
};

/// A portfolio together with its (expected return, standard deviation) image.
struct FrontierPoint
{
    double mu_p = 0.0;
    double sigma_p = 0.0;
    PortfolioWeights weights;
};

/// w' mu. Throws DimensionMismatch.
double portfolio_mean(const Eigen::VectorXd& w, const AssetMoments& m);
double portfolio_mean(const PortfolioWeights& w, const AssetMoments& m);

/// sqrt(w' Sigma w). Round-off negatives down to -1e-12 are clamped to zero;
/// anything more negative is a NumericalFailure.
double portfolio_stddev(const Eigen::VectorXd& w, const AssetMoments& m);
double portfolio_stddev(const PortfolioWeights& w, const AssetMoments& m);

FrontierPoint make_point(const Eigen::VectorXd& w, const AssetMoments& m, std::string label = {});

struct TwoAssetFrontier
{
    std::vector<FrontierPoint> points; ///< w1 swept uniformly over [0, 1], points[0] has w1 = 0
    double min_variance_weight = 0.0;  ///< analytic w1* (may lie outside [0, 1])
    FrontierPoint min_variance;        ///< portfolio at (w1*, 1 - w1*)
};

/// Closed-form two-asset frontier. Requires N == 2 (NotTwoAssets) and n_points >= 2.
/// If both assets are perfectly correlated with equal volatility the minimum-variance
/// weight is not unique and 0.5 is reported.
TwoAssetFrontier two_asset_frontier(const AssetMoments& m, int n_points);

} // namespace chaosfolio

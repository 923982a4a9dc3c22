/**
 * @file market_data.hpp
 * @brief Return-series ingestion and moment estimation.
 *
 * Returns are simple per-period returns expressed as decimal fractions
 * (0.01 is one percent). Moments are sample means and the unbiased (T-1)
 * sample covariance.
 */
#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <vector>

namespace chaosfolio
{

/// Absolute per-period return above which a cell is rejected as a percent/decimal mix-up.
inline constexpr double kMaxAbsReturn = 10.0;

/**
 * @brief Validated T x N table of simple returns.
 *
 * Invariants: T >= 2, N >= 1, names non-empty and unique, dates strictly
 * increasing ISO-8601 days, all cells finite with |r| < kMaxAbsReturn.
 */
struct ReturnSeries
{
    std::vector<std::string> asset_names;
    std::vector<std::string> dates;
    Eigen::MatrixXd returns; ///< rows = periods, columns = assets

    std::size_t periods() const noexcept { return static_cast<std::size_t>(returns.rows()); }
    std::size_t assets() const noexcept { return static_cast<std::size_t>(returns.cols()); }

    /// Throws chaosfolio::Error / CsvError when any invariant is violated.
    void validate() const;
};

struct AssetMoments
{
    std::vector<std::string> asset_names;
    Eigen::VectorXd mu;    ///< expected return per period
    Eigen::MatrixXd sigma; ///< covariance per period (return^2)
    int periods_per_year = 1;

    std::size_t assets() const noexcept { return static_cast<std::size_t>(mu.size()); }

    /// Symmetry, PSD and dimension checks. Throws on violation.
    void validate() const;

    /// Build moments directly from (mu, sigma); names default to a1..aN.
    static AssetMoments from(Eigen::VectorXd mu, Eigen::MatrixXd sigma, int periods_per_year = 1,
                             std::vector<std::string> names = {});
};

/// Parses an ISO-8601 calendar day (YYYY-MM-DD) into days since 1970-01-01.
/// Throws Error(MalformedInput) when the text is not a valid date.
long parse_iso_day(const std::string& text);

ReturnSeries parse_returns_csv(const std::string& text);
ReturnSeries load_returns_csv(const std::filesystem::path& path);

/// Guess the sampling frequency from the median spacing of the dates
/// (daily 252, weekly 52, monthly 12, quarterly 4, otherwise 1).
int infer_periods_per_year(const ReturnSeries& series);

/// Column means and the T-1 sample covariance. periods_per_year defaults to the inferred value.
AssetMoments estimate_moments(const ReturnSeries& series, int periods_per_year = 0);

/// Scales mu and sigma by periods_per_year; the result has periods_per_year == 1.
AssetMoments annualize(const AssetMoments& moments);

/// Throws Error(DegenerateAsset) if any variance is zero.
Eigen::MatrixXd correlation_matrix(const AssetMoments& moments);

} // namespace chaosfolio

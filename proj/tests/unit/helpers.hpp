#pragma once

#include "chaosfolio/errors.hpp"
#include "chaosfolio/market_data.hpp"

#include <doctest.h>

#include <optional>

namespace testing
{

/// Code of the chaosfolio::Error thrown by f, or nullopt when nothing (or something else) is thrown.
template <typename F>
std::optional<chaosfolio::ErrorCode> error_of(F&& f)
{
    try
    {
        f();
    }
    catch (const chaosfolio::Error& e)
    {
        return e.code();
    }
    catch (...)
    {
    }
    return std::nullopt;
}

inline chaosfolio::AssetMoments diag_moments(std::initializer_list<double> mu, std::initializer_list<double> var)
{
    Eigen::VectorXd m = Eigen::Map<const Eigen::VectorXd>(mu.begin(), static_cast<Eigen::Index>(mu.size()));
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(var.begin(), static_cast<Eigen::Index>(var.size()));
    return chaosfolio::AssetMoments::from(m, v.asDiagonal().toDenseMatrix());
}

/// The two-asset instance mu = (0.10, 0.15), sd = (0.2, 0.3), uncorrelated.
inline chaosfolio::AssetMoments two_asset() { return diag_moments({0.10, 0.15}, {0.04, 0.09}); }

/// Three uncorrelated assets mu = (0.10, 0.15, 0.12), var = (0.04, 0.09, 0.0625).
inline chaosfolio::AssetMoments three_asset() { return diag_moments({0.10, 0.15, 0.12}, {0.04, 0.09, 0.0625}); }

/// Correlated four-asset universe.
inline chaosfolio::AssetMoments four_asset()
{
    Eigen::Vector4d mu(0.06, 0.09, 0.12, 0.15);
    Eigen::Matrix4d s;
    s << 0.04, 0.01, 0.004, 0.002, 0.01, 0.0625, 0.012, 0.01, 0.004, 0.012, 0.09, 0.03, 0.002, 0.01, 0.03, 0.16;
    return chaosfolio::AssetMoments::from(mu, s);
}

} // namespace testing

#define CHECK_ERROR(expr, code) CHECK(testing::error_of([&] { (void)(expr); }) == std::optional(code))

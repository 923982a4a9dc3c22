#include "helpers.hpp"

#include "chaosfolio/mean_variance.hpp"

using namespace chaosfolio;

TEST_SUITE("mean_variance")
{
    TEST_CASE("portfolio mean")
    {
        const auto m = testing::two_asset();
        CHECK(portfolio_mean(Eigen::Vector2d(1, 0), m) == 0.10);
        CHECK(portfolio_mean(Eigen::Vector2d(0.5, 0.5), m) == doctest::Approx(0.5 * 0.10 + 0.5 * 0.15));
        CHECK(portfolio_mean(Eigen::Vector2d(0, 0), m) == 0.0);
        CHECK_ERROR(portfolio_mean(Eigen::Vector3d(1, 0, 0), m), ErrorCode::DimensionMismatch);
    }

    TEST_CASE("portfolio standard deviation")
    {
        const auto m = testing::two_asset();
        CHECK(portfolio_stddev(Eigen::Vector2d(0.5, 0.5), m) ==
              doctest::Approx(std::sqrt(0.25 * 0.04 + 0.25 * 0.09)).epsilon(1e-14));
        CHECK(portfolio_stddev(Eigen::Vector2d(1, 0), m) == 0.2);

        Eigen::Matrix2d s;
        s << 0.04, 0.04, 0.04, 0.04;
        const auto perfect = AssetMoments::from(Eigen::Vector2d(0.1, 0.15), s);
        for (double w : {0.0, 0.25, 0.6, 1.0})
            CHECK(portfolio_stddev(Eigen::Vector2d(w, 1 - w), perfect) == doctest::Approx(0.2).epsilon(1e-14));
        CHECK(portfolio_stddev(PortfolioWeights{Eigen::Vector2d(0.3, 0.7), "x"}, m) ==
              doctest::Approx(std::sqrt(0.09 * 0.04 + 0.49 * 0.09)));
    }

    TEST_CASE("two-asset closed form against a dense grid")
    {
        const auto m = testing::two_asset();
        const auto f = two_asset_frontier(m, 11);
        // independent check: 10^4-point grid minimum of the variance
        double best_w = 0, best_v = 1e9;
        for (int k = 0; k <= 10000; ++k)
        {
            const double w = k / 10000.0;
            const double v = w * w * 0.04 + (1 - w) * (1 - w) * 0.09;
            if (v < best_v)
            {
                best_v = v;
                best_w = w;
            }
        }
        CHECK(f.min_variance_weight == doctest::Approx(best_w).epsilon(1e-4));
        CHECK(f.min_variance_weight == doctest::Approx(0.69231).epsilon(1e-5));
        CHECK(f.min_variance.sigma_p == doctest::Approx(std::sqrt(best_v)).epsilon(1e-6));
        CHECK(f.min_variance.sigma_p == doctest::Approx(0.16641).epsilon(1e-5));
        REQUIRE(f.points.size() == 11);
        CHECK(f.points.front().mu_p == doctest::Approx(0.15));
        CHECK(f.points.front().sigma_p == doctest::Approx(0.3));
        CHECK(f.points.back().mu_p == doctest::Approx(0.10));
        CHECK(f.points.back().sigma_p == doctest::Approx(0.2));
    }

    TEST_CASE("perfectly correlated sweep is a segment")
    {
        Eigen::Matrix2d s;
        s << 0.04, 0.06, 0.06, 0.09;
        const auto f = two_asset_frontier(AssetMoments::from(Eigen::Vector2d(0.1, 0.15), s), 21);
        const auto& a = f.points.front();
        const auto& b = f.points.back();
        for (const auto& p : f.points)
        {
            const double cross = (b.sigma_p - a.sigma_p) * (p.mu_p - a.mu_p) - (b.mu_p - a.mu_p) * (p.sigma_p - a.sigma_p);
            CHECK(std::abs(cross) <= 1e-10);
        }
    }

    TEST_CASE("two-asset preconditions")
    {
        CHECK_ERROR(two_asset_frontier(testing::three_asset(), 10), ErrorCode::NotTwoAssets);
        CHECK_ERROR(two_asset_frontier(testing::two_asset(), 1), ErrorCode::ParamOutOfRange);
    }
}

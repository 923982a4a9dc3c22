#include "helpers.hpp"

#include "chaosfolio/frontier_solver.hpp"
#include "chaosfolio/stability_screen.hpp"

#include <cmath>
#include <set>

using namespace chaosfolio;

namespace
{

std::vector<AssetDynamics> universe(std::initializer_list<double> sigmas)
{
    std::vector<AssetDynamics> out;
    char name = 'a';
    for (double s : sigmas)
        out.push_back(make_asset_dynamics(std::string(1, name++), s));
    return out;
}

bool same(const PairVerdict& a, const PairVerdict& b)
{
    return a.pair == b.pair && a.stable == b.stable && a.max_separation == b.max_separation &&
           a.exponents == b.exponents;
}

} // namespace

TEST_SUITE("stability_screen")
{
    TEST_CASE("sigma to r map")
    {
        CHECK(map_sigma_to_r(0.0) == 2.8);
        CHECK(map_sigma_to_r(0.6) == 4.0);
        CHECK(map_sigma_to_r(1.5) == 4.0);
        CHECK(map_sigma_to_r(0.3) == doctest::Approx(3.4).epsilon(1e-15));
        double prev = 0.0;
        for (double s = 0.0; s <= 1.0; s += 0.01)
        {
            CHECK(map_sigma_to_r(s) >= prev);
            prev = map_sigma_to_r(s);
        }
        CHECK_ERROR(map_sigma_to_r(-0.1), ErrorCode::ParamOutOfRange);
        CHECK_ERROR(map_sigma_to_r(0.1, SigmaMapConfig{2.8, 4.5, 0.6}), ErrorCode::ParamOutOfRange);
    }

    TEST_CASE("Lyapunov exponents against analytic multipliers")
    {
        CHECK(std::abs(lyapunov_exponent(4.0, 0.3, 1000000) - std::log(2.0)) <= 1e-3);
        CHECK(std::abs(lyapunov_exponent(2.5) - std::log(std::abs(2.0 - 2.5))) <= 1e-3);
        CHECK(std::abs(lyapunov_exponent(3.2) - 0.5 * std::log(std::abs(period2_multiplier(3.2)))) <= 1e-3);
        CHECK_ERROR(lyapunov_exponent(3.2, 0.3, 100), ErrorCode::ParamOutOfRange);
        // x0 = 0.5 at r = 2 sits on the superstable point where f' = 0
        CHECK_ERROR(lyapunov_exponent(2.0, 0.5), ErrorCode::DegenerateOrbit);
    }

    TEST_CASE("exponent sign agrees with the period classification")
    {
        for (double r : {2.5, 3.2, 3.83, 4.0})
        {
            const double lambda = lyapunov_exponent(r);
            const bool periodic = period_at(r).has_value();
            CHECK_MESSAGE(periodic == (lambda < 0.0), "r = " << r << ", exponent " << lambda);
        }
    }

    TEST_CASE("divergence test")
    {
        const auto calm = divergence_test(2.5, 0.4, 1e-6, 1e-2, 1000);
        CHECK(calm.stable);
        CHECK(calm.max_separation <= 1e-6);
        CHECK(calm.first_exceedance == -1);

        const auto wild = divergence_test(4.0, 0.4, 1e-6, 1e-2, 1000);
        CHECK_FALSE(wild.stable);
        CHECK(wild.first_exceedance > 0);
        CHECK(wild.first_exceedance <= 40);

        const auto same_seed = divergence_test(4.0, 0.4, 0.0, 1e-2, 1000);
        CHECK(same_seed.stable);
        CHECK(same_seed.max_separation == 0.0);

        CHECK_ERROR(divergence_test(3.0, 0.4, 0.1, 0.01, 10), ErrorCode::ParamOutOfRange);
        CHECK_ERROR(divergence_test(3.0, 0.99, 0.05, 0.1, 10), ErrorCode::ParamOutOfRange);
    }

    TEST_CASE("pair verdicts")
    {
        const auto a = make_asset_dynamics("a", 0.1);
        const auto b = make_asset_dynamics("b", 0.1);
        const auto z = make_asset_dynamics("z", 0.6);
        CHECK(a.r == doctest::Approx(3.0));
        CHECK(screen_pair(a, b).stable);
        CHECK_FALSE(screen_pair(a, z).stable);
        CHECK(same(screen_pair(a, z), screen_pair(z, a)));
        CHECK(screen_pair(a, z).pair == std::array<std::string, 2>{"a", "z"});
        CHECK(screen_pair(a, a).stable);
        CHECK_FALSE(screen_pair(z, z).stable);
    }

    TEST_CASE("verdicts are monotone over the default volatility grid")
    {
        std::vector<AssetDynamics> grid;
        for (int k = 1; k <= 12; ++k)
            grid.push_back(make_asset_dynamics("s" + std::to_string(k), 0.05 * k));
        for (std::size_t i = 0; i < grid.size(); ++i)
            for (std::size_t j = i; j < grid.size(); ++j)
            {
                const bool here = screen_pair(grid[i], grid[j]).stable;
                if (!here && j + 1 < grid.size())
                    CHECK_FALSE(screen_pair(grid[i], grid[j + 1]).stable);
                if (!here && i + 1 <= j)
                    CHECK_FALSE(screen_pair(grid[i + 1], grid[j]).stable);
            }
    }

    TEST_CASE("portfolio screens")
    {
        const auto calm = screen_portfolio(universe({0.1, 0.1, 0.1}), ScreenPolicy::all_pairs());
        CHECK(calm.overall);
        CHECK(calm.verdicts.size() == 3);

        const auto mixed = screen_portfolio(universe({0.1, 0.1, 0.6}), ScreenPolicy::all_pairs());
        CHECK_FALSE(mixed.overall);
        int unstable = 0;
        for (const auto& v : mixed.verdicts)
            unstable += v.stable ? 0 : 1;
        CHECK(unstable == 2);

        CHECK_ERROR(screen_portfolio(universe({0.1}), ScreenPolicy::all_pairs()), ErrorCode::TooFewAssets);
        CHECK_ERROR(screen_portfolio(universe({0.1, 0.2}), ScreenPolicy::sampled(0, 1)), ErrorCode::ParamOutOfRange);
    }

    TEST_CASE("sampled policy is seeded and draws distinct pairs")
    {
        const auto assets = universe({0.05, 0.1, 0.15, 0.2, 0.3, 0.45});
        const auto a = screen_portfolio(assets, ScreenPolicy::sampled(2, 7));
        const auto b = screen_portfolio(assets, ScreenPolicy::sampled(2, 7));
        REQUIRE(a.verdicts.size() == 2);
        REQUIRE(b.verdicts.size() == 2);
        for (std::size_t k = 0; k < 2; ++k)
            CHECK(same(a.verdicts[k], b.verdicts[k]));

        const auto many = screen_portfolio(assets, ScreenPolicy::sampled(10, 3));
        std::set<std::array<std::string, 2>> pairs;
        for (const auto& v : many.verdicts)
            pairs.insert(v.pair);
        CHECK(pairs.size() == 10);
        CHECK(screen_portfolio(assets, ScreenPolicy::sampled(100, 3)).verdicts.size() == 15);
    }

    TEST_CASE("frontier annotation")
    {
        const auto low = testing::diag_moments({0.05, 0.06, 0.07}, {0.01, 0.0144, 0.0169});
        const auto points = efficient_frontier(low, ConstraintSet::long_only(3), 10);
        const ScreenConfig cfg;
        for (const auto& a : filter_frontier(points, low, cfg, ScreenPolicy::all_pairs()))
            CHECK(a.status == FrontierStability::Stable);

        for (const auto& a : filter_frontier(points, low, cfg, ScreenPolicy::all_pairs(), 1.0))
        {
            CHECK(a.status == FrontierStability::Vacuous);
            CHECK(a.screened.empty());
        }

        const auto hot = testing::diag_moments({0.05, 0.3}, {0.01, 0.36});
        const std::vector<FrontierPoint> only_hot{make_point(Eigen::Vector2d(0.0, 1.0), hot)};
        const auto annotated = filter_frontier(only_hot, hot, cfg, ScreenPolicy::all_pairs());
        REQUIRE(annotated.size() == 1);
        CHECK(annotated[0].status == FrontierStability::Unstable);
        CHECK(annotated[0].screened == std::vector<std::string>{"a2"});
        CHECK(std::string(to_string(annotated[0].status)) == "unstable");
    }
}

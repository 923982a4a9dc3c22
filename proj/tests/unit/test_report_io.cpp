#include "helpers.hpp"

#include "chaosfolio/report_io.hpp"

#include <json.hpp>

using namespace chaosfolio;

TEST_SUITE("report_io")
{
    TEST_CASE("number formatting uses 12 significant digits")
    {
        CHECK(io::format_number(0.1) == "0.1");
        CHECK(io::format_number(1.0 / 3.0) == "0.333333333333");
        CHECK(io::format_number(-0.0) == "0");
        CHECK(io::format_number(123456789012345.0) == "1.23456789012e+14");
        CHECK(io::round12(1.0 / 3.0) == 0.333333333333);
    }

    TEST_CASE("frontier csv")
    {
        const auto m = testing::two_asset();
        const std::vector<FrontierPoint> pts{make_point(Eigen::Vector2d(1, 0), m), make_point(Eigen::Vector2d(0, 1), m)};
        CHECK(io::frontier_csv(pts, 2) == "mu,sigma,w_1,w_2\n0.1,0.2,1,0\n0.15,0.3,0,1\n");
    }

    TEST_CASE("tangency json round-trips")
    {
        TangencyResult t;
        t.weights.weights = Eigen::Vector2d(0.25, 0.75);
        t.mu_p = 0.1;
        t.sigma_p = 0.2;
        t.sharpe = 0.4;
        t.r_f = 0.02;
        const auto j = nlohmann::json::parse(io::tangency_json(t));
        CHECK(j["weights"][1].get<double>() == 0.75);
        CHECK(j["rf"].get<double>() == 0.02);
        CHECK(j["sharpe"].get<double>() == 0.4);
    }

    TEST_CASE("bifurcation csv leaves undefined ratios blank")
    {
        BifurcationSequence seq;
        seq.b = {3.0, 3.5, 3.6};
        CHECK(io::bifurcations_csv(seq) == "n,b_n,ratio\n1,3,\n2,3.5,5\n3,3.6,\n");
    }

    TEST_CASE("diagram csv and svg")
    {
        BifurcationDiagram d;
        d.r_grid = {3.0, 3.5};
        d.attractor_points = {{0.5, 0.6}, {0.25}};
        CHECK(io::diagram_csv(d) == "r,x\n3,0.5\n3,0.6\n3.5,0.25\n");
        const auto svg = io::diagram_svg(d);
        CHECK(svg.rfind("<svg", 0) == 0);
        std::size_t circles = 0;
        for (auto pos = svg.find("<circle"); pos != std::string::npos; pos = svg.find("<circle", pos + 1))
            ++circles;
        CHECK(circles == 3);
    }

    TEST_CASE("stability json")
    {
        StabilityReport r;
        r.portfolio = "p";
        r.policy = ScreenPolicy::sampled(2, 7);
        r.verdicts.push_back({{"a", "b"}, true, 1e-7, {-0.5, -0.25}});
        r.overall = true;
        const auto j = nlohmann::json::parse(io::stability_json(r));
        CHECK(j["policy"]["type"] == "sampled");
        CHECK(j["policy"]["seed"] == 7);
        CHECK(j["verdicts"][0]["pair"][1] == "b");
        CHECK(j["overall"] == true);
    }
}

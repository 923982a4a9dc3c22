#include "helpers.hpp"

#include "chaosfolio/market_data.hpp"

#include <filesystem>
#include <fstream>

using namespace chaosfolio;
using chaosfolio::ErrorCode;

TEST_SUITE("market_data")
{
    TEST_CASE("well-formed file parses")
    {
        const auto s = parse_returns_csv("date,a,b\n2020-01-01,0.01,0.02\n2020-01-02,-0.01,0.00\n2020-01-03,0.03,1e-3\n");
        CHECK(s.periods() == 3);
        CHECK(s.assets() == 2);
        CHECK(s.asset_names == std::vector<std::string>{"a", "b"});
        CHECK(s.returns(2, 1) == doctest::Approx(0.001));
    }

    TEST_CASE("BOM, CRLF and blank lines are tolerated")
    {
        const auto s = parse_returns_csv("\xEF\xBB\xBF" "date,a\r\n2020-01-01,0.01\r\n\r\n2020-01-02,0.02\r\n");
        CHECK(s.periods() == 2);
        CHECK(s.asset_names[0] == "a");
    }

    TEST_CASE("empty cell reports its row")
    {
        try
        {
            parse_returns_csv("date,a,b\n2020-01-01,0.01,0.02\n2020-01-02,,0.02\n2020-01-03,0.01,0.02\n");
            FAIL("expected MissingCell");
        }
        catch (const CsvError& e)
        {
            CHECK(e.code() == ErrorCode::MissingCell);
            CHECK(e.row() == 2);
            CHECK(e.column() == 2);
        }
    }

    TEST_CASE("validation failures")
    {
        CHECK_ERROR(parse_returns_csv("date,a\n2020-01-02,0.01\n2020-01-01,0.02\n"), ErrorCode::NonMonotoneDates);
        CHECK_ERROR(parse_returns_csv("date,a\n2020-01-01,0.01\n2020-01-01,0.02\n"), ErrorCode::NonMonotoneDates);
        CHECK_ERROR(parse_returns_csv("date,a,a\n2020-01-01,0.01,0.01\n2020-01-02,0.02,0.0\n"),
                    ErrorCode::DuplicateAssetName);
        CHECK_ERROR(parse_returns_csv("date,a\n2020-01-01,abc\n2020-01-02,0.02\n"), ErrorCode::UnparseableNumber);
        CHECK_ERROR(parse_returns_csv("date,a\n2020-01-01,nan\n2020-01-02,0.02\n"), ErrorCode::UnparseableNumber);
        CHECK_ERROR(parse_returns_csv("date,a\n2020-01-01,0.01\n"), ErrorCode::TooFewObservations);
        CHECK_ERROR(parse_returns_csv("date,a\n2020-13-01,0.01\n2020-01-02,0.02\n"), ErrorCode::MalformedInput);
        CHECK_ERROR(parse_returns_csv("date,a\n2020-01-01,0.01,5\n2020-01-02,0.02\n"), ErrorCode::MalformedInput);
        CHECK_ERROR(parse_returns_csv("date,a,b\n2020-01-01,0.01\n2020-01-02,0.02,0\n"), ErrorCode::MissingCell);
        CHECK_ERROR(parse_returns_csv(""), ErrorCode::MalformedInput);
    }

    TEST_CASE("load from disk")
    {
        const auto path = std::filesystem::temp_directory_path() / "chaosfolio_md_load.csv";
        std::ofstream(path) << "date,x,y\n2021-01-04,0.01,0.02\n2021-01-05,0.03,0.00\n";
        const auto s = load_returns_csv(path);
        CHECK(s.periods() == 2);
        std::filesystem::remove(path);
        CHECK_ERROR(load_returns_csv(path), ErrorCode::MalformedInput);
    }

    TEST_CASE("moments of a single asset")
    {
        ReturnSeries s;
        s.asset_names = {"a"};
        s.dates = {"2020-01-31", "2020-02-29"};
        s.returns = Eigen::MatrixXd(2, 1);
        s.returns << 0.01, 0.03;
        const auto m = estimate_moments(s, 12);
        // deviations are +-0.01, so var = 2 * 1e-4 / (2 - 1)
        const double mean = (0.01 + 0.03) / 2.0;
        const double var = ((0.01 - mean) * (0.01 - mean) + (0.03 - mean) * (0.03 - mean)) / 1.0;
        CHECK(m.mu[0] == doctest::Approx(mean).epsilon(1e-14));
        CHECK(m.sigma(0, 0) == doctest::Approx(var).epsilon(1e-12));
        CHECK(m.periods_per_year == 12);
    }

    TEST_CASE("constant column has exactly zero variance")
    {
        const auto s = parse_returns_csv("date,c,d\n2020-01-01,0.05,0.01\n2020-01-02,0.05,0.02\n2020-01-03,0.05,0.04\n");
        const auto m = estimate_moments(s, 252);
        CHECK(m.sigma(0, 0) == 0.0);
        CHECK(m.sigma(0, 1) == 0.0);
        CHECK_ERROR(correlation_matrix(m), ErrorCode::DegenerateAsset);
    }

    TEST_CASE("identical columns correlate perfectly")
    {
        const auto s = parse_returns_csv("date,a,b\n2020-01-01,0.01,0.01\n2020-01-02,-0.02,-0.02\n2020-01-03,0.04,0.04\n");
        const auto rho = correlation_matrix(estimate_moments(s, 252));
        CHECK(std::abs(rho(0, 1) - 1.0) <= 1e-12);
    }

    TEST_CASE("covariance matches a direct two-pass computation")
    {
        const auto s = parse_returns_csv("date,a,b,c\n2020-01-06,0.01,0.02,-0.01\n2020-01-13,0.00,0.01,0.03\n"
                                         "2020-01-20,0.02,-0.01,0.01\n2020-01-27,-0.01,0.00,0.02\n");
        const auto m = estimate_moments(s);
        CHECK(m.periods_per_year == 52);
        const auto& r = s.returns;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
            {
                double mi = 0, mj = 0;
                for (int t = 0; t < 4; ++t)
                {
                    mi += r(t, i) / 4;
                    mj += r(t, j) / 4;
                }
                double c = 0;
                for (int t = 0; t < 4; ++t)
                    c += (r(t, i) - mi) * (r(t, j) - mj);
                CHECK(m.sigma(i, j) == doctest::Approx(c / 3).epsilon(1e-12));
            }
    }

    TEST_CASE("periods per year inferred from spacing")
    {
        auto series = [](std::vector<std::string> dates) {
            ReturnSeries s;
            s.asset_names = {"a"};
            s.dates = dates;
            s.returns = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dates.size()), 1);
            return s;
        };
        CHECK(infer_periods_per_year(series({"2020-01-02", "2020-01-03", "2020-01-06"})) == 252);
        CHECK(infer_periods_per_year(series({"2020-01-03", "2020-01-10", "2020-01-17"})) == 52);
        CHECK(infer_periods_per_year(series({"2020-01-31", "2020-02-29", "2020-03-31"})) == 12);
        CHECK(infer_periods_per_year(series({"2020-03-31", "2020-06-30", "2020-09-30"})) == 4);
        CHECK(infer_periods_per_year(series({"2019-12-31", "2020-12-31", "2021-12-31"})) == 1);
    }

    TEST_CASE("annualize")
    {
        Eigen::VectorXd mu(1);
        mu << 0.01;
        Eigen::MatrixXd sigma(1, 1);
        sigma << 0.0004;
        const auto a = annualize(AssetMoments::from(mu, sigma, 12));
        CHECK(a.mu[0] == doctest::Approx(0.12).epsilon(1e-14));
        CHECK(a.sigma(0, 0) == doctest::Approx(0.0048).epsilon(1e-14));
        CHECK(std::sqrt(a.sigma(0, 0)) == doctest::Approx(0.069282).epsilon(1e-5));
        CHECK(a.periods_per_year == 1);

        const auto same = annualize(AssetMoments::from(mu, sigma, 1));
        CHECK(same.mu == mu);
        CHECK(same.sigma == sigma);
    }

    TEST_CASE("correlation")
    {
        CHECK(correlation_matrix(testing::three_asset()).isIdentity(0.0));
        Eigen::Vector2d mu(0.1, 0.1);
        Eigen::Matrix2d s;
        s << 0.04, 0.03, 0.03, 0.09;
        const auto rho = correlation_matrix(AssetMoments::from(mu, s));
        CHECK(rho(0, 1) == doctest::Approx(0.03 / (0.2 * 0.3)).epsilon(1e-14));
        CHECK((rho - rho.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    }

    TEST_CASE("moment validation")
    {
        Eigen::Vector2d mu(0.1, 0.1);
        Eigen::Matrix2d asym;
        asym << 0.04, 0.01, 0.02, 0.09;
        CHECK_ERROR(AssetMoments::from(mu, asym), ErrorCode::MalformedInput);
        Eigen::Matrix2d indefinite;
        indefinite << 0.04, 0.1, 0.1, 0.04;
        CHECK(testing::error_of([&] { AssetMoments::from(mu, indefinite); }).has_value());
        CHECK_ERROR(AssetMoments::from(Eigen::Vector3d(0, 0, 0), Eigen::Matrix2d::Identity()),
                    ErrorCode::DimensionMismatch);
    }
}

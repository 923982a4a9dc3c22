#include "chaosfolio/market_data.hpp"

#include "chaosfolio/errors.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace chaosfolio
{

namespace
{

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_commas(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;)
    {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos)
        {
            out.push_back(trim(line.substr(start)));
            return out;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
}

bool parse_int(std::string_view s, int& out)
{
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc{} && ptr == end;
}

} // namespace

long parse_iso_day(const std::string& text)
{
    using namespace std::chrono;
    const std::string_view s = trim(text);
    int y = 0, m = 0, d = 0;
    if (s.size() != 10 || s[4] != '-' || s[7] != '-' || !parse_int(s.substr(0, 4), y) ||
        !parse_int(s.substr(5, 2), m) || !parse_int(s.substr(8, 2), d))
        throw Error(ErrorCode::MalformedInput, "not an ISO-8601 date: '" + text + "'");
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok())
        throw Error(ErrorCode::MalformedInput, "invalid calendar date: '" + text + "'");
    return sys_days{ymd}.time_since_epoch().count();
}

void ReturnSeries::validate() const
{
    const auto n_assets = returns.cols();
    const auto n_periods = returns.rows();
    if (n_assets < 1)
        throw Error(ErrorCode::MalformedInput, "return series has no assets");
    if (static_cast<std::size_t>(n_assets) != asset_names.size())
        throw Error(ErrorCode::DimensionMismatch, "asset name count does not match return columns");
    if (static_cast<std::size_t>(n_periods) != dates.size())
        throw Error(ErrorCode::DimensionMismatch, "date count does not match return rows");
    if (n_periods < 2)
        throw Error(ErrorCode::TooFewObservations, "need at least 2 periods, got " + std::to_string(n_periods));

    std::set<std::string> seen;
    for (std::size_t j = 0; j < asset_names.size(); ++j)
    {
        if (asset_names[j].empty())
            throw CsvError(ErrorCode::MalformedInput, 0, j + 2, "empty asset name");
        if (!seen.insert(asset_names[j]).second)
            throw CsvError(ErrorCode::DuplicateAssetName, 0, j + 2, "duplicate asset name '" + asset_names[j] + "'");
    }

    long previous = 0;
    for (std::size_t t = 0; t < dates.size(); ++t)
    {
        long day = 0;
        try
        {
            day = parse_iso_day(dates[t]);
        }
        catch (const Error& e)
        {
            throw CsvError(ErrorCode::MalformedInput, t + 1, 1, e.what());
        }
        if (t > 0 && day <= previous)
            throw CsvError(ErrorCode::NonMonotoneDates, t + 1, 1,
                           "date " + dates[t] + " does not follow " + dates[t - 1]);
        previous = day;
    }

    for (Eigen::Index t = 0; t < n_periods; ++t)
        for (Eigen::Index j = 0; j < n_assets; ++j)
        {
            const double v = returns(t, j);
            if (!std::isfinite(v))
                throw CsvError(ErrorCode::UnparseableNumber, t + 1, j + 2, "non-finite return");
            if (std::abs(v) >= kMaxAbsReturn)
                throw CsvError(ErrorCode::MalformedInput, t + 1, j + 2,
                               "return magnitude >= 10; returns must be decimal fractions");
        }
}

ReturnSeries parse_returns_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    ReturnSeries series;

    if (!std::getline(in, line))
        throw Error(ErrorCode::MalformedInput, "empty CSV");
    if (line.rfind("\xEF\xBB\xBF", 0) == 0)
        line.erase(0, 3);
    const auto header = split_commas(line);
    if (header.size() < 2 || header[0] != "date")
        throw CsvError(ErrorCode::MalformedInput, 0, 1, "header must be 'date,<asset1>,...'");
    for (std::size_t j = 1; j < header.size(); ++j)
        series.asset_names.emplace_back(header[j]);

    const std::size_t n_assets = series.asset_names.size();
    std::vector<double> cells;
    std::size_t row = 0;
    while (std::getline(in, line))
    {
        if (trim(line).empty())
            continue;
        ++row;
        const auto fields = split_commas(line);
        if (fields.size() != n_assets + 1)
        {
            // a short row is a missing trailing cell; a long row is malformed
            if (fields.size() < n_assets + 1)
                throw CsvError(ErrorCode::MissingCell, row, fields.size() + 1, "missing cell");
            throw CsvError(ErrorCode::MalformedInput, row, n_assets + 2, "too many cells");
        }
        if (fields[0].empty())
            throw CsvError(ErrorCode::MissingCell, row, 1, "missing date");
        series.dates.emplace_back(fields[0]);
        for (std::size_t j = 1; j < fields.size(); ++j)
        {
            const auto cell = fields[j];
            if (cell.empty())
                throw CsvError(ErrorCode::MissingCell, row, j + 1,
                               "missing value for asset '" + series.asset_names[j - 1] + "'");
            double value = 0.0;
            const auto* end = cell.data() + cell.size();
            auto [ptr, ec] = std::from_chars(cell.data(), end, value);
            if (ec != std::errc{} || ptr != end)
                throw CsvError(ErrorCode::UnparseableNumber, row, j + 1,
                               "cannot parse '" + std::string(cell) + "'");
            cells.push_back(value);
        }
    }

    series.returns.resize(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(n_assets));
    for (std::size_t t = 0; t < row; ++t)
        for (std::size_t j = 0; j < n_assets; ++j)
            series.returns(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = cells[t * n_assets + j];

    series.validate();
    return series;
}

ReturnSeries load_returns_csv(const std::filesystem::path& path)
{
    std::ifstream file(path, std::ios::binary);
    if (!file)
        throw Error(ErrorCode::MalformedInput, "cannot open '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << file.rdbuf();
    return parse_returns_csv(buffer.str());
}

int infer_periods_per_year(const ReturnSeries& series)
{
    if (series.dates.size() < 2)
        return 1;
    std::vector<long> gaps;
    for (std::size_t t = 1; t < series.dates.size(); ++t)
        gaps.push_back(parse_iso_day(series.dates[t]) - parse_iso_day(series.dates[t - 1]));
    std::nth_element(gaps.begin(), gaps.begin() + static_cast<long>(gaps.size() / 2), gaps.end());
    const long median = gaps[gaps.size() / 2];
    if (median <= 4)
        return 252;
    if (median <= 10)
        return 52;
    if (median <= 40)
        return 12;
    if (median <= 100)
        return 4;
    return 1;
}

void AssetMoments::validate() const
{
    const auto n = mu.size();
    if (n < 1)
        throw Error(ErrorCode::DimensionMismatch, "moments have no assets");
    if (sigma.rows() != n || sigma.cols() != n)
        throw Error(ErrorCode::DimensionMismatch, "covariance must be N x N with N = len(mu)");
    if (!asset_names.empty() && static_cast<Eigen::Index>(asset_names.size()) != n)
        throw Error(ErrorCode::DimensionMismatch, "asset name count does not match mu");
    if (periods_per_year < 1)
        throw Error(ErrorCode::ParamOutOfRange, "periods_per_year must be >= 1");
    if (!mu.allFinite() || !sigma.allFinite())
        throw Error(ErrorCode::MalformedInput, "moments must be finite");
    for (Eigen::Index i = 0; i < n; ++i)
    {
        if (sigma(i, i) < 0.0)
            throw Error(ErrorCode::MalformedInput, "negative variance on the diagonal");
        for (Eigen::Index j = i + 1; j < n; ++j)
            if (std::abs(sigma(i, j) - sigma(j, i)) > 1e-12)
                throw Error(ErrorCode::MalformedInput, "covariance is not symmetric");
    }
    const double trace = sigma.trace();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-10 * trace)
        throw Error(ErrorCode::MalformedInput, "covariance is not positive semi-definite");
}

AssetMoments AssetMoments::from(Eigen::VectorXd mu, Eigen::MatrixXd sigma, int periods_per_year,
                                std::vector<std::string> names)
{
    AssetMoments m;
    if (names.empty())
        for (Eigen::Index i = 0; i < mu.size(); ++i)
            names.push_back("a" + std::to_string(i + 1));
    m.asset_names = std::move(names);
    m.mu = std::move(mu);
    m.sigma = std::move(sigma);
    m.periods_per_year = periods_per_year;
    m.validate();
    return m;
}

AssetMoments estimate_moments(const ReturnSeries& series, int periods_per_year)
{
    const auto T = series.returns.rows();
    if (T < 2)
        throw Error(ErrorCode::TooFewObservations, "need at least 2 periods, got " + std::to_string(T));

    AssetMoments m;
    m.asset_names = series.asset_names;
    m.mu = series.returns.colwise().mean().transpose();
    for (Eigen::Index j = 0; j < m.mu.size(); ++j)
    {
        // a constant column must give its value back exactly, so its variance is exactly 0
        const auto col = series.returns.col(j);
        if (col.minCoeff() == col.maxCoeff())
            m.mu[j] = col[0];
    }
    const Eigen::MatrixXd centered = series.returns.rowwise() - m.mu.transpose();
    m.sigma = (centered.transpose() * centered) / static_cast<double>(T - 1);
    // the product is symmetric in exact arithmetic; remove rounding asymmetry
    m.sigma = (0.5 * (m.sigma + m.sigma.transpose())).eval();
    m.periods_per_year = periods_per_year > 0 ? periods_per_year : infer_periods_per_year(series);
    return m;
}

AssetMoments annualize(const AssetMoments& moments)
{
    AssetMoments out = moments;
    const double p = static_cast<double>(moments.periods_per_year);
    out.mu *= p;
    out.sigma *= p;
    out.periods_per_year = 1;
    return out;
}

Eigen::MatrixXd correlation_matrix(const AssetMoments& moments)
{
    const auto n = moments.sigma.rows();
    Eigen::VectorXd sd(n);
    for (Eigen::Index i = 0; i < n; ++i)
    {
        if (!(moments.sigma(i, i) > 0.0))
            throw Error(ErrorCode::DegenerateAsset,
                        "asset " + std::to_string(i + 1) + " has zero variance");
        sd(i) = std::sqrt(moments.sigma(i, i));
    }
    Eigen::MatrixXd rho(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
    {
        rho(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < n; ++j)
        {
            const double v = std::clamp(moments.sigma(i, j) / (sd(i) * sd(j)), -1.0, 1.0);
            rho(i, j) = v;
            rho(j, i) = v;
        }
    }
    return rho;
}

} // namespace chaosfolio

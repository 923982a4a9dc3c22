#include "chaosfolio/report_io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace chaosfolio::io
{

std::string format_number(double value)
{
    if (value == 0.0)
        return "0"; // folds -0
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", value);
    return buf;
}

double round12(double value)
{
    if (!std::isfinite(value))
        return value;
    return std::strtod(format_number(value).c_str(), nullptr);
}

namespace
{

std::string weight_header(Eigen::Index n)
{
    std::string h = "mu,sigma";
    for (Eigen::Index i = 1; i <= n; ++i)
        h += ",w_" + std::to_string(i);
    return h;
}

void write_point(std::ostringstream& out, double mu, double sigma, const Eigen::VectorXd& w)
{
    out << format_number(mu) << ',' << format_number(sigma);
    for (Eigen::Index i = 0; i < w.size(); ++i)
        out << ',' << format_number(w(i));
}

std::string join(const std::vector<std::string>& items, char sep)
{
    std::string s;
    for (std::size_t i = 0; i < items.size(); ++i)
    {
        if (i)
            s += sep;
        s += items[i];
    }
    return s;
}

nlohmann::ordered_json report_object(const StabilityReport& report)
{
    nlohmann::ordered_json j;
    j["portfolio"] = report.portfolio;
    nlohmann::ordered_json policy;
    if (report.policy.kind == ScreenPolicy::Kind::AllPairs)
    {
        policy["type"] = "all_pairs";
        policy["k"] = nullptr;
        policy["seed"] = nullptr;
    }
    else
    {
        policy["type"] = "sampled";
        policy["k"] = report.policy.k;
        policy["seed"] = report.policy.seed;
    }
    j["policy"] = policy;
    auto verdicts = nlohmann::ordered_json::array();
    for (const auto& v : report.verdicts)
    {
        nlohmann::ordered_json e;
        e["pair"] = {v.pair[0], v.pair[1]};
        e["stable"] = v.stable;
        e["max_separation"] = round12(v.max_separation);
        e["exponents"] = {round12(v.exponents[0]), round12(v.exponents[1])};
        verdicts.push_back(e);
    }
    j["verdicts"] = verdicts;
    j["overall"] = report.overall;
    return j;
}

} // namespace

std::string frontier_csv(const std::vector<FrontierPoint>& points, Eigen::Index n_assets)
{
    std::ostringstream out;
    out << weight_header(n_assets) << '\n';
    for (const auto& p : points)
    {
        write_point(out, p.mu_p, p.sigma_p, p.weights.weights);
        out << '\n';
    }
    return out.str();
}

std::string corners_csv(const std::vector<CornerPortfolio>& corners, Eigen::Index n_assets)
{
    std::ostringstream out;
    out << weight_header(n_assets) << ",active_set\n";
    for (const auto& c : corners)
    {
        write_point(out, c.mu_p, c.sigma_p, c.weights.weights);
        out << ',' << join(c.active_set, ';') << '\n';
    }
    return out.str();
}

std::string tangency_json(const TangencyResult& t)
{
    nlohmann::ordered_json j;
    auto weights = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < t.weights.weights.size(); ++i)
        weights.push_back(round12(t.weights.weights(i)));
    j["weights"] = weights;
    j["mu"] = round12(t.mu_p);
    j["sigma"] = round12(t.sigma_p);
    j["sharpe"] = round12(t.sharpe);
    j["rf"] = round12(t.r_f);
    return j.dump(2) + "\n";
}

std::string diagram_csv(const BifurcationDiagram& d)
{
    std::string out = "r,x\n";
    out.reserve(d.r_grid.size() * static_cast<std::size_t>(d.n_keep) * 32);
    for (std::size_t i = 0; i < d.r_grid.size(); ++i)
    {
        const std::string r = format_number(d.r_grid[i]) + ",";
        for (double x : d.attractor_points[i])
        {
            out += r;
            out += format_number(x);
            out += '\n';
        }
    }
    return out;
}

std::string diagram_svg(const BifurcationDiagram& d)
{
    constexpr double kWidth = 1200.0, kHeight = 800.0, kMargin = 40.0;
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"1200\" height=\"800\" viewBox=\"0 0 1200 800\">\n"
        << "<rect width=\"1200\" height=\"800\" fill=\"white\"/>\n<g fill=\"black\">\n";
    const double r_lo = d.r_grid.front();
    const double r_hi = d.r_grid.back();
    char buf[96];
    for (std::size_t i = 0; i < d.r_grid.size(); ++i)
    {
        const double px = kMargin + (kWidth - 2 * kMargin) * (d.r_grid[i] - r_lo) / (r_hi - r_lo);
        for (double x : d.attractor_points[i])
        {
            const double py = kHeight - kMargin - (kHeight - 2 * kMargin) * x;
            std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"0.5\"/>\n", px, py);
            out << buf;
        }
    }
    out << "</g>\n</svg>\n";
    return out.str();
}

std::string bifurcations_csv(const BifurcationSequence& seq)
{
    std::ostringstream out;
    out << "n,b_n,ratio\n";
    for (std::size_t k = 0; k < seq.b.size(); ++k)
    {
        out << k + 1 << ',' << format_number(seq.b[k]) << ',';
        if (k >= 1 && k + 1 < seq.b.size())
            out << format_number((seq.b[k] - seq.b[k - 1]) / (seq.b[k + 1] - seq.b[k]));
        out << '\n';
    }
    return out.str();
}

std::string stability_json(const StabilityReport& report) { return report_object(report).dump(2) + "\n"; }

std::string annotated_frontier_csv(const std::vector<AnnotatedFrontierPoint>& points, Eigen::Index n_assets)
{
    std::ostringstream out;
    out << weight_header(n_assets) << ",status,screened\n";
    for (const auto& a : points)
    {
        write_point(out, a.point.mu_p, a.point.sigma_p, a.point.weights.weights);
        out << ',' << to_string(a.status) << ',' << join(a.screened, ';') << '\n';
    }
    return out.str();
}

} // namespace chaosfolio::io

#include "chaosfolio/stability_screen.hpp"

#include "chaosfolio/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <tuple>

namespace chaosfolio
{

void SigmaMapConfig::validate() const
{
    if (!(r_min > 0.0 && r_min < r_max && r_max <= 4.0))
        throw Error(ErrorCode::ParamOutOfRange, "sigma map needs 0 < r_min < r_max <= 4");
    if (!(sigma_cap > 0.0))
        throw Error(ErrorCode::ParamOutOfRange, "sigma_cap must be positive");
}

void ScreenConfig::validate() const
{
    map.validate();
    if (!(x0 > 0.0 && x0 < 1.0))
        throw Error(ErrorCode::ParamOutOfRange, "x0 must lie in (0, 1)");
    if (!(epsilon >= 0.0 && epsilon < delta && delta < 1.0) || !(x0 + epsilon < 1.0))
        throw Error(ErrorCode::ParamOutOfRange, "need 0 <= epsilon < delta < 1 and x0 + epsilon < 1");
    if (divergence_steps < 1 || exponent_steps < 10000 || exponent_transient < 0)
        throw Error(ErrorCode::ParamOutOfRange, "iteration counts out of range");
}

double map_sigma_to_r(double sigma_ann, const SigmaMapConfig& cfg)
{
    cfg.validate();
    if (!(sigma_ann >= 0.0))
        throw Error(ErrorCode::ParamOutOfRange, "volatility must be >= 0");
    return cfg.r_min + (cfg.r_max - cfg.r_min) * std::min(sigma_ann / cfg.sigma_cap, 1.0);
}

double lyapunov_exponent(double r, double x0, long n, long n_transient)
{
    MapParams{r, x0}.validate();
    if (n < 10000)
        throw Error(ErrorCode::ParamOutOfRange, "need at least 1e4 iterations for an exponent estimate");
    if (n_transient < 0)
        throw Error(ErrorCode::ParamOutOfRange, "n_transient must be >= 0");
    double x = x0;
    for (long k = 0; k < n_transient; ++k)
        x = logistic_step(r, x);
    double sum = 0.0;
    for (long k = 0; k < n; ++k)
    {
        const double slope = std::abs(multiplier_at(r, x));
        if (slope < 1e-300)
            throw Error(ErrorCode::DegenerateOrbit,
                        "orbit hit the critical point at iteration " + std::to_string(n_transient + k));
        sum += std::log(slope);
        x = logistic_step(r, x);
    }
    return sum / static_cast<double>(n);
}

DivergenceResult divergence_test(double r, double x0, double epsilon, double delta, int n)
{
    MapParams{r, x0}.validate();
    if (!(epsilon >= 0.0 && epsilon < delta && delta < 1.0) || !(x0 + epsilon < 1.0) || n < 1)
        throw Error(ErrorCode::ParamOutOfRange, "need 0 <= epsilon < delta < 1, x0 + epsilon < 1, n >= 1");
    DivergenceResult out;
    double x = x0, y = x0 + epsilon;
    out.max_separation = epsilon;
    for (int k = 1; k <= n; ++k)
    {
        x = logistic_step(r, x);
        y = logistic_step(r, y);
        const double sep = std::abs(x - y);
        out.max_separation = std::max(out.max_separation, sep);
        if (sep > delta && out.first_exceedance < 0)
        {
            out.first_exceedance = k;
            out.stable = false;
        }
    }
    return out;
}

AssetDynamics make_asset_dynamics(std::string name, double sigma_ann, const ScreenConfig& cfg)
{
    cfg.validate();
    AssetDynamics a;
    a.name = std::move(name);
    a.sigma_ann = sigma_ann;
    a.r = map_sigma_to_r(sigma_ann, cfg.map);
    a.lyapunov = lyapunov_exponent(a.r, cfg.x0, cfg.exponent_steps, cfg.exponent_transient);
    return a;
}

std::vector<AssetDynamics> asset_dynamics_from_moments(const AssetMoments& m, const ScreenConfig& cfg)
{
    std::vector<AssetDynamics> out;
    for (Eigen::Index i = 0; i < m.mu.size(); ++i)
    {
        const double sigma_ann = std::sqrt(std::max(0.0, m.sigma(i, i)) * m.periods_per_year);
        const std::string name = static_cast<std::size_t>(i) < m.asset_names.size()
                                     ? m.asset_names[static_cast<std::size_t>(i)]
                                     : "a" + std::to_string(i + 1);
        out.push_back(make_asset_dynamics(name, sigma_ann, cfg));
    }
    return out;
}

PairVerdict screen_pair(const AssetDynamics& a, const AssetDynamics& b, const ScreenConfig& cfg)
{
    cfg.validate();
    const bool swap = std::tie(b.name, b.r) < std::tie(a.name, a.r);
    const AssetDynamics& first = swap ? b : a;
    const AssetDynamics& second = swap ? a : b;

    PairVerdict v;
    v.pair = {first.name, second.name};
    v.exponents = {first.lyapunov, second.lyapunov};
    const auto d1 = divergence_test(first.r, cfg.x0, cfg.epsilon, cfg.delta, cfg.divergence_steps);
    const auto d2 = divergence_test(second.r, cfg.x0, cfg.epsilon, cfg.delta, cfg.divergence_steps);
    v.max_separation = std::max(d1.max_separation, d2.max_separation);
    v.stable = d1.stable && d2.stable && first.lyapunov < cfg.exponent_tolerance &&
               second.lyapunov < cfg.exponent_tolerance;
    return v;
}

namespace
{

/// Uniform integer in [0, bound) by rejection; std::uniform_int_distribution is not portable across libraries.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound)
{
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t draw = rng();
    while (draw >= limit)
        draw = rng();
    return draw % bound;
}

} // namespace

StabilityReport screen_portfolio(const std::vector<AssetDynamics>& assets, const ScreenPolicy& policy,
                                 const ScreenConfig& cfg, std::string label)
{
    if (assets.size() < 2)
        throw Error(ErrorCode::TooFewAssets, "a portfolio screen needs at least 2 assets");
    if (policy.kind == ScreenPolicy::Kind::Sampled && policy.k < 1)
        throw Error(ErrorCode::ParamOutOfRange, "sampled screening needs k >= 1");

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < assets.size(); ++i)
        for (std::size_t j = i + 1; j < assets.size(); ++j)
            pairs.emplace_back(i, j);

    if (policy.kind == ScreenPolicy::Kind::Sampled && static_cast<std::size_t>(policy.k) < pairs.size())
    {
        // partial Fisher-Yates: the first k slots become a uniform sample without replacement
        std::mt19937_64 rng(policy.seed);
        const auto k = static_cast<std::size_t>(policy.k);
        for (std::size_t i = 0; i < k; ++i)
        {
            const auto j = i + static_cast<std::size_t>(uniform_below(rng, pairs.size() - i));
            std::swap(pairs[i], pairs[j]);
        }
        pairs.resize(k);
    }

    StabilityReport report;
    report.portfolio = std::move(label);
    report.policy = policy;
    for (const auto& [i, j] : pairs)
        report.verdicts.push_back(screen_pair(assets[i], assets[j], cfg));
    std::sort(report.verdicts.begin(), report.verdicts.end(),
              [](const PairVerdict& x, const PairVerdict& y) { return x.pair < y.pair; });
    report.overall = std::all_of(report.verdicts.begin(), report.verdicts.end(),
                                 [](const PairVerdict& v) { return v.stable; });
    return report;
}

const char* to_string(FrontierStability s) noexcept
{
    switch (s)
    {
    case FrontierStability::Stable: return "stable";
    case FrontierStability::Unstable: return "unstable";
    case FrontierStability::Vacuous: return "vacuous";
    }
    return "unknown";
}

std::vector<AnnotatedFrontierPoint> filter_frontier(const std::vector<FrontierPoint>& points, const AssetMoments& m,
                                                    const ScreenConfig& cfg, const ScreenPolicy& policy,
                                                    double weight_floor)
{
    if (!(weight_floor >= 0.0))
        throw Error(ErrorCode::ParamOutOfRange, "weight_floor must be >= 0");
    const auto dynamics = asset_dynamics_from_moments(m, cfg);

    std::vector<AnnotatedFrontierPoint> out;
    out.reserve(points.size());
    for (std::size_t k = 0; k < points.size(); ++k)
    {
        const auto& w = points[k].weights.weights;
        if (w.size() != m.mu.size())
            throw Error(ErrorCode::DimensionMismatch, "frontier point has the wrong number of weights");
        std::vector<AssetDynamics> held;
        for (Eigen::Index i = 0; i < w.size(); ++i)
            if (std::abs(w(i)) > weight_floor)
                held.push_back(dynamics[static_cast<std::size_t>(i)]);

        AnnotatedFrontierPoint a;
        a.point = points[k];
        for (const auto& d : held)
            a.screened.push_back(d.name);
        a.report.portfolio = "frontier[" + std::to_string(k) + "]";
        a.report.policy = policy;
        if (held.empty())
        {
            a.status = FrontierStability::Vacuous;
            a.report.overall = true;
        }
        else
        {
            if (held.size() == 1)
            {
                a.report.verdicts.push_back(screen_pair(held[0], held[0], cfg));
                a.report.overall = a.report.verdicts.front().stable;
            }
            else
                a.report = screen_portfolio(held, policy, cfg, a.report.portfolio);
            a.status = a.report.overall ? FrontierStability::Stable : FrontierStability::Unstable;
        }
        out.push_back(std::move(a));
    }
    return out;
}

} // namespace chaosfolio

#include "chaosfolio/logistic_dynamics.hpp"

#include "chaosfolio/errors.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

namespace chaosfolio
{

void MapParams::validate() const
{
    if (!(r > 0.0 && r <= 4.0))
        throw Error(ErrorCode::ParamOutOfRange, "r must lie in (0, 4], got " + std::to_string(r));
    if (!(x0 > 0.0 && x0 < 1.0))
        throw Error(ErrorCode::ParamOutOfRange, "x0 must lie in (0, 1), got " + std::to_string(x0));
}

Trajectory iterate_logistic(const MapParams& p, int n)
{
    p.validate();
    if (n < 1)
        throw Error(ErrorCode::ParamOutOfRange, "iteration count must be >= 1");
    Trajectory t;
    t.params = p;
    t.states.resize(static_cast<std::size_t>(n) + 1);
    t.states[0] = p.x0;
    for (std::size_t k = 1; k < t.states.size(); ++k)
        t.states[k] = logistic_step(p.r, t.states[k - 1]);
    return t;
}

QuadraticOrbit iterate_quadratic_form(double lambda, double y0, int n)
{
    if (!(lambda >= 0.0 && lambda <= 2.0))
        throw Error(ErrorCode::ParamOutOfRange, "lambda must lie in [0, 2], got " + std::to_string(lambda));
    if (!(std::abs(y0) <= 1.0))
        throw Error(ErrorCode::ParamOutOfRange, "|y0| must be <= 1");
    if (n < 1)
        throw Error(ErrorCode::ParamOutOfRange, "iteration count must be >= 1");
    QuadraticOrbit orbit;
    orbit.lambda = lambda;
    orbit.states.resize(static_cast<std::size_t>(n) + 1);
    orbit.states[0] = y0;
    for (std::size_t k = 1; k < orbit.states.size(); ++k)
        orbit.states[k] = 1.0 - lambda * orbit.states[k - 1] * orbit.states[k - 1];
    return orbit;
}

double convert_parameter(double r)
{
    if (!(r > 0.0 && r <= 4.0))
        throw Error(ErrorCode::ParamOutOfRange, "r must lie in (0, 4]");
    return (r * r - 2.0 * r) / 4.0;
}

double conjugate_state(double r, double x)
{
    if (r == 2.0)
        throw Error(ErrorCode::ParamOutOfRange, "the conjugacy degenerates at r = 2");
    return 4.0 * (x - 0.5) / (r - 2.0);
}

FixedPoints fixed_points(double r)
{
    if (!(r > 0.0))
        throw Error(ErrorCode::ParamOutOfRange, "r must be positive");
    FixedPoints fp;
    fp.nontrivial = 1.0 - 1.0 / r;
    fp.nontrivial_physical = r > 1.0;
    return fp;
}

double multiplier_at(double r, double x) noexcept { return r - 2.0 * r * x; }

std::pair<double, double> period2_points(double r)
{
    if (!(r > 3.0))
        throw Error(ErrorCode::NoRealCycle, "a real 2-cycle needs r > 3, got " + std::to_string(r));
    const double root = std::sqrt((r - 3.0) * (r + 1.0));
    return {(1.0 + r + root) / (2.0 * r), (1.0 + r - root) / (2.0 * r)};
}

double period2_multiplier(double r)
{
    if (!(r > 3.0))
        throw Error(ErrorCode::NoRealCycle, "a real 2-cycle needs r > 3, got " + std::to_string(r));
    return -r * r + 2.0 * r + 4.0;
}

std::vector<double> attractor_sample(double r, double x0, long n_transient, int n_keep)
{
    MapParams{r, x0}.validate();
    if (n_transient < 1 || n_keep < 1)
        throw Error(ErrorCode::ParamOutOfRange, "n_transient and n_keep must be >= 1");
    double x = x0;
    for (long k = 0; k < n_transient; ++k)
        x = logistic_step(r, x);
    std::vector<double> kept(static_cast<std::size_t>(n_keep));
    for (auto& v : kept)
    {
        x = logistic_step(r, x);
        v = x;
    }
    return kept;
}

BifurcationDiagram bifurcation_diagram(double r_min, double r_max, int n_r, double x0, long n_transient, int n_keep)
{
    if (!(r_min > 0.0 && r_min < r_max && r_max <= 4.0))
        throw Error(ErrorCode::ParamOutOfRange, "need 0 < r_min < r_max <= 4");
    if (n_r < 2)
        throw Error(ErrorCode::ParamOutOfRange, "n_r must be >= 2");
    MapParams{r_min, x0}.validate();
    if (n_transient < 1 || n_keep < 1)
        throw Error(ErrorCode::ParamOutOfRange, "n_transient and n_keep must be >= 1");

    BifurcationDiagram d;
    d.x0 = x0;
    d.n_transient = n_transient;
    d.n_keep = n_keep;
    d.r_grid.resize(static_cast<std::size_t>(n_r));
    for (int k = 0; k < n_r; ++k)
        d.r_grid[static_cast<std::size_t>(k)] =
            k == n_r - 1 ? r_max : r_min + (r_max - r_min) * k / (n_r - 1);
    d.attractor_points.resize(d.r_grid.size());
    detail::parallel_for(d.r_grid.size(), [&](std::size_t i) {
        d.attractor_points[i] = attractor_sample(d.r_grid[i], x0, n_transient, n_keep);
    });
    return d;
}

std::optional<int> detect_period(std::span<const double> states, const PeriodOptions& options)
{
    const std::size_t tail = std::min<std::size_t>(states.size(), static_cast<std::size_t>(options.tail));
    const auto window = states.subspan(states.size() - tail);
    for (int p = 1; p <= options.max_period; ++p)
    {
        const auto step = static_cast<std::size_t>(p);
        if (step >= window.size())
            break;
        bool repeats = true;
        for (std::size_t k = 0; k + step < window.size() && repeats; ++k)
            repeats = std::abs(window[k + step] - window[k]) < options.tol;
        if (repeats)
            return p;
    }
    return std::nullopt;
}

std::optional<int> period_at(double r, const DynamicsOptions& options)
{
    const auto sample = attractor_sample(r, options.x0, options.n_transient, options.period.tail);
    return detect_period(sample, options.period);
}

BifurcationSequence detect_bifurcations(double r_min, double r_max, double coarse_step, double refine_tol,
                                        const DynamicsOptions& options)
{
    if (!(r_min > 2.9 && r_min < r_max && r_max <= 3.5699 + 1e-12))
        throw Error(ErrorCode::ParamOutOfRange, "bifurcation scan range must lie inside (2.9, 3.5699]");
    if (!(coarse_step > 0.0) || !(refine_tol > 0.0))
        throw Error(ErrorCode::ParamOutOfRange, "coarse_step and refine_tol must be positive");

    std::vector<double> grid;
    const auto steps = static_cast<long>(std::ceil((r_max - r_min) / coarse_step - 1e-9));
    for (long k = 0; k < steps; ++k)
        grid.push_back(r_min + coarse_step * static_cast<double>(k));
    grid.push_back(r_max);

    std::vector<std::optional<int>> periods(grid.size());
    detail::parallel_for(grid.size(), [&](std::size_t i) { periods[i] = period_at(grid[i], options); });

    std::vector<std::pair<double, int>> found;
    std::function<void(double, std::optional<int>, double, std::optional<int>)> refine =
        [&](double lo, std::optional<int> p_lo, double hi, std::optional<int> p_hi) {
            if (hi - lo <= refine_tol)
            {
                if (p_lo && p_hi && *p_hi == 2 * *p_lo)
                    found.emplace_back(0.5 * (lo + hi), *p_lo);
                return;
            }
            const double mid = 0.5 * (lo + hi);
            const auto p_mid = period_at(mid, options);
            if (p_mid != p_lo)
                refine(lo, p_lo, mid, p_mid);
            if (p_mid != p_hi)
                refine(mid, p_mid, hi, p_hi);
        };
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
        if (periods[i] != periods[i + 1])
            refine(grid[i], periods[i], grid[i + 1], periods[i + 1]);

    std::sort(found.begin(), found.end());
    BifurcationSequence seq;
    seq.coarse_step = coarse_step;
    seq.refine_tol = refine_tol;
    for (const auto& [b, p] : found)
    {
        // keep one entry per doubling of the cascade
        if (!seq.b.empty() && (b <= seq.b.back() || p <= seq.period_before.back()))
            continue;
        seq.b.push_back(b);
        seq.period_before.push_back(p);
    }
    if (seq.b.empty())
        throw Error(ErrorCode::NoDoublingFound, "no period doubling between r = " + std::to_string(r_min) +
                                                    " and " + std::to_string(r_max));
    return seq;
}

FeigenbaumEstimate feigenbaum_ratio(const BifurcationSequence& seq)
{
    if (seq.b.size() < 3)
        throw Error(ErrorCode::TooFewBifurcations, "need at least 3 bifurcation parameters");
    FeigenbaumEstimate est;
    for (std::size_t n = 1; n + 1 < seq.b.size(); ++n)
        est.ratios.push_back((seq.b[n] - seq.b[n - 1]) / (seq.b[n + 1] - seq.b[n]));
    return est;
}

std::optional<double> find_chaos_onset(double r_min, double r_max, double step, const DynamicsOptions& options)
{
    if (!(r_min > 0.0 && r_min < r_max && r_max <= 4.0) || !(step > 0.0))
        throw Error(ErrorCode::ParamOutOfRange, "need 0 < r_min < r_max <= 4 and step > 0");
    const auto count = static_cast<std::size_t>(std::floor((r_max - r_min) / step + 1e-9)) + 1;
    std::vector<std::optional<int>> periods(count);
    detail::parallel_for(count, [&](std::size_t i) {
        periods[i] = period_at(r_min + step * static_cast<double>(i), options);
    });
    for (std::size_t i = 0; i < count; ++i)
        if (!periods[i])
            return r_min + step * static_cast<double>(i);
    return std::nullopt;
}

} // namespace chaosfolio

/**
 * @file stability_screen.hpp
 * @brief Pairwise Lyapunov stability screen for portfolios.
 *
 * Each asset's annualized volatility is mapped onto a logistic-map
 * parameter r. An asset pair is stable when, for both members, the largest
 * Lyapunov exponent of the mapped map is non-positive (below a small
 * tolerance) and two orbits started epsilon apart never separate by more
 * than delta. A portfolio is stable when every examined pair is stable.
 */
#pragma once

#include "chaosfolio/logistic_dynamics.hpp"
#include "chaosfolio/market_data.hpp"
#include "chaosfolio/mean_variance.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace chaosfolio
{

struct SigmaMapConfig
{
    double r_min = 2.8;
    double r_max = 4.0;
    double sigma_cap = 0.6; ///< annualized volatility mapped to r_max

    void validate() const;
};

struct ScreenConfig
{
    SigmaMapConfig map;
    double x0 = kDefaultSeed;
    double epsilon = 1e-6;
    double delta = 1e-2;
    int divergence_steps = 1000;
    long exponent_steps = 100000;
    long exponent_transient = 1000;
    /// Exponents below this count as stable; marginal orbits sit at ~0.
    double exponent_tolerance = 1e-4;

    void validate() const;
};

/// r = r_min + (r_max - r_min) * min(sigma_ann / sigma_cap, 1).
double map_sigma_to_r(double sigma_ann, const SigmaMapConfig& cfg = {});

/// (1/n) sum ln|r - 2 r x_k| over n iterates after n_transient. Needs n >= 1e4.
/// Throws DegenerateOrbit if |f'(x_k)| < 1e-300 for some iterate.
double lyapunov_exponent(double r, double x0 = kDefaultSeed, long n = 100000, long n_transient = 1000);

struct DivergenceResult
{
    bool stable = true;
    double max_separation = 0.0;
    int first_exceedance = -1; ///< iteration where the separation first exceeded delta
};

/// Iterates x0 and x0 + epsilon for n steps; stable iff the separation never exceeds delta.
DivergenceResult divergence_test(double r, double x0, double epsilon, double delta, int n);

struct AssetDynamics
{
    std::string name;
    double sigma_ann = 0.0;
    double r = 0.0;
    double lyapunov = 0.0;
};

AssetDynamics make_asset_dynamics(std::string name, double sigma_ann, const ScreenConfig& cfg = {});

/// One AssetDynamics per asset using sigma_ann = sqrt(Sigma_ii * periods_per_year).
std::vector<AssetDynamics> asset_dynamics_from_moments(const AssetMoments& m, const ScreenConfig& cfg = {});

struct PairVerdict
{
    std::array<std::string, 2> pair; ///< ordered by name
    bool stable = true;
    double max_separation = 0.0;
    std::array<double, 2> exponents{}; ///< in pair order
};

/// Symmetric: screen_pair(a, b) == screen_pair(b, a).
PairVerdict screen_pair(const AssetDynamics& a, const AssetDynamics& b, const ScreenConfig& cfg = {});

struct ScreenPolicy
{
    enum class Kind
    {
        AllPairs,
        Sampled,
    };
    Kind kind = Kind::AllPairs;
    int k = 0;
    std::uint64_t seed = 0;

    static ScreenPolicy all_pairs() { return {}; }
    static ScreenPolicy sampled(int k, std::uint64_t seed) { return {Kind::Sampled, k, seed}; }
};

struct StabilityReport
{
    std::string portfolio;
    ScreenPolicy policy;
    std::vector<PairVerdict> verdicts; ///< sorted by asset-name pair
    bool overall = true;
};

/// ALL_PAIRS examines every pair; SAMPLED draws k distinct pairs uniformly
/// (mt19937_64 seeded with policy.seed), or every pair when k >= C(N, 2).
StabilityReport screen_portfolio(const std::vector<AssetDynamics>& assets, const ScreenPolicy& policy,
                                 const ScreenConfig& cfg = {}, std::string label = "portfolio");

enum class FrontierStability
{
    Stable,
    Unstable,
    Vacuous, ///< no position above the weight floor
};

const char* to_string(FrontierStability s) noexcept;

struct AnnotatedFrontierPoint
{
    FrontierPoint point;
    FrontierStability status = FrontierStability::Vacuous;
    std::vector<std::string> screened;
    StabilityReport report;
};

/// Screens the assets with |w_i| > weight_floor at every frontier point. A single
/// screened asset is paired with itself. Points are annotated, never removed.
std::vector<AnnotatedFrontierPoint> filter_frontier(const std::vector<FrontierPoint>& points, const AssetMoments& m,
                                                    const ScreenConfig& cfg, const ScreenPolicy& policy,
                                                    double weight_floor = 0.01);

} // namespace chaosfolio

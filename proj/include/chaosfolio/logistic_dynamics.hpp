/**
 * @file logistic_dynamics.hpp
 * @brief Logistic map x -> r x (1 - x): orbits, fixed points and 2-cycles,
 *        bifurcation diagrams, period detection, period-doubling detection
 *        and Feigenbaum ratio estimates.
 *
 * The quadratic form y -> 1 - lambda y^2 is affinely conjugate to the
 * logistic map through y = 4 (x - 1/2) / (r - 2), lambda = (r^2 - 2 r) / 4.
 */
#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace chaosfolio
{

/// Default seed for sweeps. 0.5 is avoided because at r = 4 it maps to 1 and then to the fixed point 0.
inline constexpr double kDefaultSeed = 0.3;
inline constexpr double kFeigenbaumDelta = 4.669201609;

struct MapParams
{
    double r = 3.0;
    double x0 = kDefaultSeed;

    /// 0 < r <= 4 and 0 < x0 < 1, else ParamOutOfRange.
    void validate() const;
};

struct Trajectory
{
    std::vector<double> states; ///< x_0 .. x_n
    MapParams params;
};

struct QuadraticOrbit
{
    std::vector<double> states; ///< y_0 .. y_n
    double lambda = 0.0;
};

inline double logistic_step(double r, double x) noexcept { return r * x * (1.0 - x); }

Trajectory iterate_logistic(const MapParams& p, int n);

/// y_{n+1} = 1 - lambda y_n^2 with 0 <= lambda <= 2, |y0| <= 1.
QuadraticOrbit iterate_quadratic_form(double lambda, double y0, int n);

/// lambda = (r^2 - 2 r) / 4 for 0 < r <= 4.
double convert_parameter(double r);

/// Image of a logistic state under the conjugacy, y = 4 (x - 1/2) / (r - 2). Undefined at r = 2.
double conjugate_state(double r, double x);

struct FixedPoints
{
    double origin = 0.0;
    double nontrivial = 0.0;       ///< 1 - 1/r
    bool nontrivial_physical = false; ///< true when r > 1 (the root lies in (0, 1))
};

FixedPoints fixed_points(double r);

/// f'(x) = r - 2 r x.
double multiplier_at(double r, double x) noexcept;

/// The 2-cycle (x1 > x2) for r > 3; NoRealCycle otherwise.
std::pair<double, double> period2_points(double r);

/// f'(x1) f'(x2) = -r^2 + 2 r + 4 for r > 3; NoRealCycle otherwise.
double period2_multiplier(double r);

/// Discards n_transient iterates from x0 and returns the next n_keep.
std::vector<double> attractor_sample(double r, double x0, long n_transient, int n_keep);

struct BifurcationDiagram
{
    std::vector<double> r_grid;
    std::vector<std::vector<double>> attractor_points; ///< one n_keep sample per grid value
    double x0 = kDefaultSeed;
    long n_transient = 1000;
    int n_keep = 400;
};

/// Uniform grid of n_r values over [r_min, r_max]; columns are computed in parallel
/// and assembled in grid order.
BifurcationDiagram bifurcation_diagram(double r_min, double r_max, int n_r, double x0 = kDefaultSeed,
                                       long n_transient = 1000, int n_keep = 400);

struct PeriodOptions
{
    double tol = 1e-6;
    int max_period = 64;
    int tail = 256;
};

/// Smallest p <= max_period with |x_{k+p} - x_k| < tol over the tail; nullopt means chaotic.
std::optional<int> detect_period(std::span<const double> states, const PeriodOptions& options = {});

struct DynamicsOptions
{
    double x0 = kDefaultSeed;
    long n_transient = 1L << 20;
    PeriodOptions period;
};

/// Period of the attractor reached from options.x0 at parameter r.
std::optional<int> period_at(double r, const DynamicsOptions& options = {});

struct BifurcationSequence
{
    std::vector<double> b;          ///< period-doubling parameters, increasing
    std::vector<int> period_before; ///< period of the stable cycle just below each b
    double coarse_step = 0.0;
    double refine_tol = 0.0;
};

/// Scans period_at over a coarse grid inside (2.9, 3.5699] and refines every
/// p -> 2p change by bisection to refine_tol.
BifurcationSequence detect_bifurcations(double r_min = 2.95, double r_max = 3.5699, double coarse_step = 0.005,
                                        double refine_tol = 1e-7, const DynamicsOptions& options = {});

struct FeigenbaumEstimate
{
    std::vector<double> ratios; ///< (b_n - b_{n-1}) / (b_{n+1} - b_n)
    double reference = kFeigenbaumDelta;
};

FeigenbaumEstimate feigenbaum_ratio(const BifurcationSequence& seq);

/// First grid value in [r_min, r_max] whose attractor is classified chaotic.
std::optional<double> find_chaos_onset(double r_min = 3.56, double r_max = 3.575, double step = 1e-4,
                                       const DynamicsOptions& options = {});

} // namespace chaosfolio

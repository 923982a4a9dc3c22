#include "chaosfolio/cli.hpp"
#include "chaosfolio/errors.hpp"
#include "chaosfolio/frontier_solver.hpp"
#include "chaosfolio/logistic_dynamics.hpp"
#include "chaosfolio/market_data.hpp"
#include "chaosfolio/mean_variance.hpp"
#include "chaosfolio/stability_screen.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace chaosfolio;

namespace
{

py::dict report_dict(const StabilityReport& r)
{
    py::list verdicts;
    for (const auto& v : r.verdicts)
    {
        py::dict d;
        d["pair"] = py::make_tuple(v.pair[0], v.pair[1]);
        d["stable"] = v.stable;
        d["max_separation"] = v.max_separation;
        d["exponents"] = py::make_tuple(v.exponents[0], v.exponents[1]);
        verdicts.append(d);
    }
    py::dict out;
    out["portfolio"] = r.portfolio;
    out["verdicts"] = verdicts;
    out["overall"] = r.overall;
    return out;
}

ScreenPolicy make_policy(const std::string& policy, int k, std::uint64_t seed)
{
    if (policy == "all")
        return ScreenPolicy::all_pairs();
    if (policy == "sampled")
        return ScreenPolicy::sampled(k, seed);
    throw Error(ErrorCode::ParamOutOfRange, "policy must be 'all' or 'sampled'");
}

} // namespace

PYBIND11_MODULE(_chaosfolio, m)
{
    m.doc() = "Mean-variance frontiers, logistic-map dynamics and the pairwise stability screen.";

    // the module keeps the type alive; one extra reference keeps it valid for the translator
    static PyObject* error_type = py::exception<Error>(m, "ChaosfolioError", PyExc_ValueError).inc_ref().ptr();
    py::register_exception_translator([](std::exception_ptr p) {
        try
        {
            if (p)
                std::rethrow_exception(p);
        }
        catch (const Error& e)
        {
            // args = (code, message)
            PyErr_SetObject(error_type, py::make_tuple(to_string(e.code()), e.what()).ptr());
        }
    });

    py::class_<ReturnSeries>(m, "ReturnSeries")
        .def_readonly("asset_names", &ReturnSeries::asset_names)
        .def_readonly("dates", &ReturnSeries::dates)
        .def_readonly("returns", &ReturnSeries::returns);

    py::class_<AssetMoments>(m, "AssetMoments")
        .def(py::init([](Eigen::VectorXd mu, Eigen::MatrixXd sigma, int periods_per_year,
                         std::vector<std::string> names) {
                 return AssetMoments::from(std::move(mu), std::move(sigma), periods_per_year, std::move(names));
             }),
             py::arg("mu"), py::arg("sigma"), py::arg("periods_per_year") = 1,
             py::arg("names") = std::vector<std::string>{})
        .def_readonly("asset_names", &AssetMoments::asset_names)
        .def_readonly("mu", &AssetMoments::mu)
        .def_readonly("sigma", &AssetMoments::sigma)
        .def_readonly("periods_per_year", &AssetMoments::periods_per_year);

    m.def("parse_returns_csv", &parse_returns_csv, py::arg("text"));
    m.def("load_returns_csv", &load_returns_csv, py::arg("path"));
    m.def("estimate_moments", &estimate_moments, py::arg("series"), py::arg("periods_per_year") = 0);
    m.def("annualize", &annualize, py::arg("moments"));
    m.def("correlation_matrix", &correlation_matrix, py::arg("moments"));

    py::class_<FrontierPoint>(m, "FrontierPoint")
        .def_readonly("mu", &FrontierPoint::mu_p)
        .def_readonly("sigma", &FrontierPoint::sigma_p)
        .def_property_readonly("weights", [](const FrontierPoint& p) { return p.weights.weights; })
        .def("__repr__", [](const FrontierPoint& p) {
            std::ostringstream s;
            s << "FrontierPoint(mu=" << p.mu_p << ", sigma=" << p.sigma_p << ")";
            return s.str();
        });

    m.def("portfolio_mean", py::overload_cast<const Eigen::VectorXd&, const AssetMoments&>(&portfolio_mean),
          py::arg("weights"), py::arg("moments"));
    m.def("portfolio_stddev", py::overload_cast<const Eigen::VectorXd&, const AssetMoments&>(&portfolio_stddev),
          py::arg("weights"), py::arg("moments"));
    m.def(
        "two_asset_frontier",
        [](const AssetMoments& mo, int n) {
            const auto f = two_asset_frontier(mo, n);
            return py::make_tuple(f.points, f.min_variance_weight, f.min_variance);
        },
        py::arg("moments"), py::arg("n_points"), "Returns (points, w1_star, min_variance_point).");

    py::class_<ConstraintSet>(m, "ConstraintSet")
        .def_static("long_only", &ConstraintSet::long_only, py::arg("n"))
        .def_static("unconstrained", &ConstraintSet::unconstrained, py::arg("n"))
        .def_static("dollar_neutral", &ConstraintSet::dollar_neutral, py::arg("n"), py::arg("gross_cap") = 1.0)
        .def_static("long_short", &ConstraintSet::long_short, py::arg("n"), py::arg("max_short_total") = 0.3)
        .def("with_turnover", &ConstraintSet::with_turnover, py::arg("cap"), py::arg("reference"))
        .def_readwrite("lower", &ConstraintSet::lower)
        .def_readwrite("upper", &ConstraintSet::upper)
        .def_readwrite("budget", &ConstraintSet::budget)
        .def("violation", &ConstraintSet::violation, py::arg("weights"));

    py::class_<TangencyResult>(m, "TangencyResult")
        .def_property_readonly("weights", [](const TangencyResult& t) { return t.weights.weights; })
        .def_readonly("mu", &TangencyResult::mu_p)
        .def_readonly("sigma", &TangencyResult::sigma_p)
        .def_readonly("sharpe", &TangencyResult::sharpe)
        .def_readonly("rf", &TangencyResult::r_f);

    py::class_<CornerPortfolio>(m, "CornerPortfolio")
        .def_property_readonly("weights", [](const CornerPortfolio& c) { return c.weights.weights; })
        .def_readonly("mu", &CornerPortfolio::mu_p)
        .def_readonly("sigma", &CornerPortfolio::sigma_p)
        .def_readonly("active_set", &CornerPortfolio::active_set);

    m.def("global_min_variance", &global_min_variance, py::arg("moments"), py::arg("constraints"));
    m.def("min_variance_for_target_return", &min_variance_for_target_return, py::arg("moments"),
          py::arg("target_mu"), py::arg("constraints"));
    m.def("max_return_portfolio", &max_return_portfolio, py::arg("moments"), py::arg("constraints"));
    m.def("efficient_frontier", &efficient_frontier, py::arg("moments"), py::arg("constraints"),
          py::arg("n_points") = 50);
    m.def("corner_portfolios", &corner_portfolios, py::arg("moments"), py::arg("constraints"));
    m.def("tangency_portfolio", &tangency_portfolio, py::arg("moments"), py::arg("constraints"), py::arg("rf"));
    m.def("max_sharpe_portfolio", &max_sharpe_portfolio, py::arg("moments"), py::arg("constraints"), py::arg("rf"));
    m.def("frontier_with_turnover", &frontier_with_turnover, py::arg("moments"), py::arg("constraints"),
          py::arg("n_points") = 50);
    m.def("dollar_neutral_optimize", &dollar_neutral_optimize, py::arg("moments"), py::arg("constraints"),
          py::arg("target_mu") = py::none());
    m.def("optimize_130_30", &optimize_130_30, py::arg("moments"), py::arg("constraints"),
          py::arg("target_mu") = py::none());
    m.def("grid_oracle", &grid_oracle, py::arg("moments"), py::arg("constraints"), py::arg("target_mu"),
          py::arg("step"));

    m.attr("FEIGENBAUM_DELTA") = kFeigenbaumDelta;
    m.attr("DEFAULT_SEED") = kDefaultSeed;
    m.def(
        "iterate_logistic", [](double r, double x0, int n) { return iterate_logistic({r, x0}, n).states; },
        py::arg("r"), py::arg("x0"), py::arg("n"));
    m.def(
        "iterate_quadratic_form",
        [](double lambda, double y0, int n) { return iterate_quadratic_form(lambda, y0, n).states; },
        py::arg("lam"), py::arg("y0"), py::arg("n"));
    m.def("convert_parameter", &convert_parameter, py::arg("r"));
    m.def("conjugate_state", &conjugate_state, py::arg("r"), py::arg("x"));
    m.def("multiplier_at", &multiplier_at, py::arg("r"), py::arg("x"));
    m.def("period2_points", &period2_points, py::arg("r"));
    m.def("period2_multiplier", &period2_multiplier, py::arg("r"));
    m.def("attractor_sample", &attractor_sample, py::arg("r"), py::arg("x0") = kDefaultSeed,
          py::arg("n_transient") = 1000, py::arg("n_keep") = 400);
    m.def(
        "bifurcation_diagram",
        [](double r_min, double r_max, int n_r, double x0, long n_transient, int n_keep) {
            auto d = bifurcation_diagram(r_min, r_max, n_r, x0, n_transient, n_keep);
            return py::make_tuple(d.r_grid, d.attractor_points);
        },
        py::arg("r_min"), py::arg("r_max"), py::arg("n_r"), py::arg("x0") = kDefaultSeed,
        py::arg("n_transient") = 1000, py::arg("n_keep") = 400, "Returns (r_grid, attractor_points).");
    m.def(
        "detect_period",
        [](const std::vector<double>& states, double tol, int max_period, int tail) {
            return detect_period(states, PeriodOptions{tol, max_period, tail});
        },
        py::arg("states"), py::arg("tol") = 1e-6, py::arg("max_period") = 64, py::arg("tail") = 256,
        "Period of the sample, or None when chaotic.");
    m.def(
        "period_at",
        [](double r, double x0, long n_transient) {
            DynamicsOptions o;
            o.x0 = x0;
            o.n_transient = n_transient;
            return period_at(r, o);
        },
        py::arg("r"), py::arg("x0") = kDefaultSeed, py::arg("n_transient") = 1L << 20);
    m.def(
        "detect_bifurcations",
        [](double r_min, double r_max, double coarse_step, double refine_tol) {
            return detect_bifurcations(r_min, r_max, coarse_step, refine_tol).b;
        },
        py::arg("r_min") = 2.95, py::arg("r_max") = 3.5699, py::arg("coarse_step") = 0.005,
        py::arg("refine_tol") = 1e-7);
    m.def(
        "feigenbaum_ratio",
        [](std::vector<double> b) {
            BifurcationSequence seq;
            seq.b = std::move(b);
            return feigenbaum_ratio(seq).ratios;
        },
        py::arg("b"));
    m.def(
        "find_chaos_onset", [](double r_min, double r_max, double step) { return find_chaos_onset(r_min, r_max, step); },
        py::arg("r_min") = 3.56, py::arg("r_max") = 3.575, py::arg("step") = 1e-4);

    m.def("map_sigma_to_r", [](double s) { return map_sigma_to_r(s); }, py::arg("sigma_ann"));
    m.def("lyapunov_exponent", &lyapunov_exponent, py::arg("r"), py::arg("x0") = kDefaultSeed,
          py::arg("n") = 100000, py::arg("n_transient") = 1000);
    m.def(
        "divergence_test",
        [](double r, double x0, double epsilon, double delta, int n) {
            const auto d = divergence_test(r, x0, epsilon, delta, n);
            return py::make_tuple(d.stable, d.max_separation);
        },
        py::arg("r"), py::arg("x0"), py::arg("epsilon"), py::arg("delta"), py::arg("n"),
        "Returns (stable, max_separation).");
    m.def(
        "screen_portfolio",
        [](const std::vector<std::string>& names, const std::vector<double>& sigmas, const std::string& policy, int k,
           std::uint64_t seed) {
            if (names.size() != sigmas.size())
                throw Error(ErrorCode::DimensionMismatch, "one volatility per name");
            std::vector<AssetDynamics> assets;
            for (std::size_t i = 0; i < names.size(); ++i)
                assets.push_back(make_asset_dynamics(names[i], sigmas[i]));
            return report_dict(screen_portfolio(assets, make_policy(policy, k, seed)));
        },
        py::arg("names"), py::arg("sigmas"), py::arg("policy") = "all", py::arg("k") = 5, py::arg("seed") = 0,
        "Screens assets given their annualized volatilities with default settings.");

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            int code;
            {
                py::gil_scoped_release release;
                code = cli::run(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command line in-process; returns (exit_code, stdout, stderr).");
}

/**
 * @file report_io.hpp
 * @brief Text serializations shared by the CLI and the Python module.
 *
 * Floating-point values are printed with 12 significant digits so that
 * identical runs produce byte-identical files.
 */
#pragma once

#include "chaosfolio/frontier_solver.hpp"
#include "chaosfolio/logistic_dynamics.hpp"
#include "chaosfolio/stability_screen.hpp"

#include <string>
#include <vector>

namespace chaosfolio::io
{

std::string format_number(double value);

/// Value rounded to 12 significant digits (what format_number prints).
double round12(double value);

/// Header `mu,sigma,w_1,...,w_N`.
std::string frontier_csv(const std::vector<FrontierPoint>& points, Eigen::Index n_assets);

/// Header `mu,sigma,w_1,...,w_N,active_set`; tags joined with ';'.
std::string corners_csv(const std::vector<CornerPortfolio>& corners, Eigen::Index n_assets);

/// `{"weights": [...], "mu": .., "sigma": .., "sharpe": .., "rf": ..}`
std::string tangency_json(const TangencyResult& t);

/// Header `r,x`, one row per retained point in grid order.
std::string diagram_csv(const BifurcationDiagram& d);

/// 1200 x 800 scatter of the diagram, points as 0.5-radius dots.
std::string diagram_svg(const BifurcationDiagram& d);

/// Header `n,b_n,ratio`; ratio is (b_n - b_{n-1}) / (b_{n+1} - b_n), blank where undefined.
std::string bifurcations_csv(const BifurcationSequence& seq);

/// `{portfolio, policy:{type,k,seed}, verdicts:[{pair, stable, max_separation, exponents}], overall}`
std::string stability_json(const StabilityReport& report);

/// Header `mu,sigma,w_1,...,w_N,status,screened`.
std::string annotated_frontier_csv(const std::vector<AnnotatedFrontierPoint>& points, Eigen::Index n_assets);

} // namespace chaosfolio::io

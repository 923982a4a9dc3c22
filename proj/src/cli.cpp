#include "chaosfolio/cli.hpp"

#include "chaosfolio/errors.hpp"
#include "chaosfolio/frontier_solver.hpp"
#include "chaosfolio/logistic_dynamics.hpp"
#include "chaosfolio/market_data.hpp"
#include "chaosfolio/report_io.hpp"
#include "chaosfolio/stability_screen.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

namespace chaosfolio::cli
{

namespace
{

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

double parse_double(const std::string& key, std::string_view text)
{
    double v = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end || !std::isfinite(v))
        throw Error(ErrorCode::MalformedInput, "field '" + key + "': not a number: '" + std::string(text) + "'");
    return v;
}

long parse_long(const std::string& key, std::string_view text)
{
    long v = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end)
        throw Error(ErrorCode::MalformedInput, "field '" + key + "': not an integer: '" + std::string(text) + "'");
    return v;
}

double json_double(const std::string& key, const nlohmann::json& j)
{
    if (!j.is_number())
        throw Error(ErrorCode::MalformedInput, "config field '" + key + "' must be a number");
    return j.get<double>();
}

long json_long(const std::string& key, const nlohmann::json& j)
{
    if (!j.is_number_integer())
        throw Error(ErrorCode::MalformedInput, "config field '" + key + "' must be an integer");
    return j.get<long>();
}

/// One configurable run parameter, settable from a flag or from the config file.
struct Field
{
    std::string key;
    std::function<void(const std::string&)> from_text;
    std::function<void(const nlohmann::json&)> from_json;
    std::function<json()> to_json;
    bool flag = false;
    std::string text;
    bool flag_value = false;
    CLI::Option* option = nullptr;
};

class FieldSet
{
public:
    explicit FieldSet(CLI::App* app) : app_(app) {}

    void number(const std::string& key, double* target, const std::string& help)
    {
        add(key, help, [=, this](const std::string& t) { *target = parse_double(key, t); },
            [=](const nlohmann::json& j) { *target = json_double(key, j); },
            [=] { return json(*target); });
    }

    void optional_number(const std::string& key, std::optional<double>* target, const std::string& help)
    {
        add(key, help, [=](const std::string& t) { *target = parse_double(key, t); },
            [=](const nlohmann::json& j) {
                if (j.is_null())
                    target->reset();
                else
                    *target = json_double(key, j);
            },
            [=] { return *target ? json(**target) : json(nullptr); });
    }

    template <typename Int>
    void integer(const std::string& key, Int* target, const std::string& help)
    {
        add(key, help, [=](const std::string& t) { *target = static_cast<Int>(parse_long(key, t)); },
            [=](const nlohmann::json& j) { *target = static_cast<Int>(json_long(key, j)); },
            [=] { return json(*target); });
    }

    void text(const std::string& key, std::string* target, const std::string& help,
              std::vector<std::string> choices = {})
    {
        auto check = [=](const std::string& v) {
            if (!choices.empty() && std::find(choices.begin(), choices.end(), v) == choices.end())
                throw Error(ErrorCode::MalformedInput, "field '" + key + "': unsupported value '" + v + "'");
            *target = v;
        };
        add(key, help, check,
            [=](const nlohmann::json& j) {
                if (!j.is_string())
                    throw Error(ErrorCode::MalformedInput, "config field '" + key + "' must be a string");
                check(j.get<std::string>());
            },
            [=] { return json(*target); });
    }

    void numbers(const std::string& key, std::vector<double>* target, const std::string& help)
    {
        add(key, help,
            [=](const std::string& t) {
                target->clear();
                std::string_view rest = t;
                while (!rest.empty())
                {
                    const auto comma = rest.find(',');
                    target->push_back(parse_double(key, rest.substr(0, comma)));
                    if (comma == std::string_view::npos)
                        break;
                    rest.remove_prefix(comma + 1);
                }
            },
            [=](const nlohmann::json& j) {
                if (!j.is_array())
                    throw Error(ErrorCode::MalformedInput, "config field '" + key + "' must be an array");
                target->clear();
                for (const auto& v : j)
                    target->push_back(json_double(key, v));
            },
            [=] { return json(*target); });
    }

    void toggle(const std::string& key, bool* target, const std::string& help)
    {
        auto field = std::make_unique<Field>();
        field->key = key;
        field->flag = true;
        field->from_json = [=](const nlohmann::json& j) {
            if (!j.is_boolean())
                throw Error(ErrorCode::MalformedInput, "config field '" + key + "' must be true or false");
            *target = j.get<bool>();
        };
        field->from_text = [=](const std::string&) { *target = true; };
        field->to_json = [=] { return json(*target); };
        field->option = app_->add_flag("--" + key, field->flag_value, help);
        fields_.push_back(std::move(field));
    }

    /// Config file first (keys not given on the command line), then flags.
    void resolve(const std::string& config_path)
    {
        if (!config_path.empty())
        {
            std::ifstream in(config_path);
            if (!in)
                throw Error(ErrorCode::MalformedInput, "cannot open config file '" + config_path + "'");
            nlohmann::json cfg;
            try
            {
                in >> cfg;
            }
            catch (const nlohmann::json::exception& e)
            {
                throw Error(ErrorCode::MalformedInput, std::string("config file is not valid JSON: ") + e.what());
            }
            if (!cfg.is_object())
                throw Error(ErrorCode::MalformedInput, "config file must hold a JSON object");
            for (const auto& [key, value] : cfg.items())
            {
                Field* f = find(key);
                if (!f)
                    throw Error(ErrorCode::MalformedInput, "unknown config key '" + key + "'");
                if (f->option->count() == 0)
                    f->from_json(value);
            }
        }
        for (const auto& f : fields_)
            if (f->option->count() > 0)
                f->from_text(f->text);
    }

    json resolved() const
    {
        json j = json::object();
        for (const auto& f : fields_)
            j[f->key] = f->to_json();
        return j;
    }

private:
    void add(const std::string& key, const std::string& help, std::function<void(const std::string&)> from_text,
             std::function<void(const nlohmann::json&)> from_json, std::function<json()> to_json)
    {
        auto field = std::make_unique<Field>();
        field->key = key;
        field->from_text = std::move(from_text);
        field->from_json = std::move(from_json);
        field->to_json = std::move(to_json);
        field->option = app_->add_option("--" + key, field->text, help);
        fields_.push_back(std::move(field));
    }

    Field* find(const std::string& key)
    {
        for (auto& f : fields_)
            if (f->key == key)
                return f.get();
        return nullptr;
    }

    CLI::App* app_;
    std::vector<std::unique_ptr<Field>> fields_;
};

struct Common
{
    std::string input;
    std::string outdir = ".";
    std::string config;
    std::uint64_t seed = 0;
};

struct FrontierOptions
{
    std::string mode = "long-only";
    int n_points = 50;
    std::optional<double> rf;
    double short_cap = 0.3;
    double gross_cap = 1.0;
    double turnover_cap = 0.1;
    std::vector<double> reference;
    std::optional<double> max_weight;
    int periods_per_year = 0;
    bool annualize = false;
};

struct BifurcateOptions
{
    double r_min = 2.5;
    double r_max = 4.0;
    int n_r = 1500;
    double x0 = kDefaultSeed;
    long n_transient = 1000;
    int n_keep = 400;
    bool svg = false;
    bool feigenbaum = false;
    double scan_min = 2.95;
    double scan_max = 3.5699;
    double coarse_step = 0.005;
    double refine_tol = 1e-7;
    long scan_transient = 1L << 20;
};

struct ScreenOptions
{
    std::string policy = "all";
    int k = 5;
    ScreenConfig screen;
    int periods_per_year = 0;
    bool filter_frontier = false;
    double weight_floor = 0.01;
    FrontierOptions frontier;
};

struct LyapunovOptions
{
    double r_min = 2.5;
    double r_max = 4.0;
    int n_r = 151;
    double x0 = kDefaultSeed;
    long n = 100000;
    long n_transient = 1000;
    long period_transient = 1L << 20;
};

void register_common(FieldSet& fields, Common& c, bool needs_input)
{
    fields.text("input", &c.input, needs_input ? "returns CSV (date,<asset1>,...)" : "unused by this command");
    fields.text("outdir", &c.outdir, "output directory (created if missing)");
    fields.integer("seed", &c.seed, "seed for sampled screening");
}

void register_frontier(FieldSet& f, FrontierOptions& o)
{
    f.text("mode", &o.mode, "long-only | unconstrained | 130-30 | dollar-neutral | turnover",
           {"long-only", "unconstrained", "130-30", "dollar-neutral", "turnover"});
    f.integer("n-points", &o.n_points, "frontier points (default 50)");
    f.optional_number("rf", &o.rf, "risk-free rate per period; writes tangency.json");
    f.number("short-cap", &o.short_cap, "total short cap for 130-30 mode (default 0.3)");
    f.number("gross-cap", &o.gross_cap, "gross exposure cap for dollar-neutral mode (default 1)");
    f.number("turnover-cap", &o.turnover_cap, "one-way turnover cap for turnover mode (default 0.1)");
    f.numbers("reference", &o.reference, "reference weights for turnover mode (default equal weights)");
    f.optional_number("max-weight", &o.max_weight, "upper bound on every weight");
    f.integer("periods-per-year", &o.periods_per_year, "sampling frequency; 0 infers it from the dates");
    f.toggle("annualize", &o.annualize, "optimize on annualized moments");
}

ConstraintSet make_constraints(const FrontierOptions& o, Eigen::Index n)
{
    ConstraintSet c;
    if (o.mode == "long-only" || o.mode == "turnover")
        c = ConstraintSet::long_only(n);
    else if (o.mode == "unconstrained")
        c = ConstraintSet::unconstrained(n);
    else if (o.mode == "130-30")
        c = ConstraintSet::long_short(n, o.short_cap);
    else
        c = ConstraintSet::dollar_neutral(n, o.gross_cap);
    if (o.max_weight)
        c.upper.setConstant(*o.max_weight);
    if (o.mode == "turnover")
    {
        Eigen::VectorXd ref = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
        if (!o.reference.empty())
        {
            if (static_cast<Eigen::Index>(o.reference.size()) != n)
                throw Error(ErrorCode::DimensionMismatch, "field 'reference' needs one weight per asset");
            ref = Eigen::Map<const Eigen::VectorXd>(o.reference.data(), n);
        }
        c = c.with_turnover(o.turnover_cap, ref);
    }
    return c;
}

AssetMoments load_moments(const Common& common, int periods_per_year, bool annualized)
{
    if (common.input.empty())
        throw Error(ErrorCode::MalformedInput, "field 'input': a returns CSV is required");
    const ReturnSeries series = load_returns_csv(common.input);
    AssetMoments m = estimate_moments(series, periods_per_year);
    return annualized ? annualize(m) : m;
}

using Outputs = std::vector<std::pair<std::string, std::string>>;

std::vector<FrontierPoint> audited_frontier(const AssetMoments& m, const ConstraintSet& c, const FrontierOptions& o)
{
    auto points = o.mode == "turnover" ? frontier_with_turnover(m, c, o.n_points) : efficient_frontier(m, c, o.n_points);
    for (std::size_t k = 0; k < points.size(); ++k)
    {
        const double v = c.violation(points[k].weights.weights);
        if (v > 1e-10)
            throw Error(ErrorCode::NumericalFailure, "frontier point " + std::to_string(k) +
                                                         " violates its constraints by " + std::to_string(v));
    }
    return points;
}

Outputs cmd_frontier(const Common& common, const FrontierOptions& o)
{
    const AssetMoments m = load_moments(common, o.periods_per_year, o.annualize);
    const ConstraintSet c = make_constraints(o, m.mu.size());
    Outputs out;
    const auto points = audited_frontier(m, c, o);
    out.emplace_back("frontier.csv", io::frontier_csv(points, m.mu.size()));
    if (o.mode == "long-only")
        out.emplace_back("corners.csv", io::corners_csv(corner_portfolios(m, c), m.mu.size()));
    if (o.rf)
        out.emplace_back("tangency.json", io::tangency_json(tangency_portfolio(m, c, *o.rf)));
    return out;
}

Outputs cmd_bifurcate(const BifurcateOptions& o)
{
    Outputs out;
    const auto diagram = bifurcation_diagram(o.r_min, o.r_max, o.n_r, o.x0, o.n_transient, o.n_keep);
    out.emplace_back("diagram.csv", io::diagram_csv(diagram));
    if (o.svg)
        out.emplace_back("diagram.svg", io::diagram_svg(diagram));
    if (o.feigenbaum)
    {
        DynamicsOptions dyn;
        dyn.x0 = o.x0;
        dyn.n_transient = o.scan_transient;
        const auto seq = detect_bifurcations(o.scan_min, o.scan_max, o.coarse_step, o.refine_tol, dyn);
        out.emplace_back("bifurcations.csv", io::bifurcations_csv(seq));
    }
    return out;
}

Outputs cmd_screen(const Common& common, const ScreenOptions& o)
{
    o.screen.validate();
    const AssetMoments m = load_moments(common, o.periods_per_year, false);
    if (m.mu.size() < 2)
        throw Error(ErrorCode::TooFewAssets, "a portfolio screen needs at least 2 assets");
    const ScreenPolicy policy =
        o.policy == "sampled" ? ScreenPolicy::sampled(o.k, common.seed) : ScreenPolicy::all_pairs();
    const auto dynamics = asset_dynamics_from_moments(m, o.screen);
    const auto report = screen_portfolio(dynamics, policy, o.screen, fs::path(common.input).stem().string());
    Outputs out;
    out.emplace_back("stability.json", io::stability_json(report));
    if (o.filter_frontier)
    {
        const AssetMoments fm = o.frontier.annualize ? annualize(m) : m;
        const ConstraintSet c = make_constraints(o.frontier, m.mu.size());
        const auto points = audited_frontier(fm, c, o.frontier);
        const auto annotated = filter_frontier(points, m, o.screen, policy, o.weight_floor);
        out.emplace_back("frontier_annotated.csv", io::annotated_frontier_csv(annotated, m.mu.size()));
    }
    return out;
}

Outputs cmd_lyapunov(const LyapunovOptions& o)
{
    if (!(o.r_min > 0.0 && o.r_min <= o.r_max && o.r_max <= 4.0) || o.n_r < 1)
        throw Error(ErrorCode::ParamOutOfRange, "need 0 < r-min <= r-max <= 4 and n-r >= 1");
    std::ostringstream csv;
    csv << "r,exponent,period\n";
    DynamicsOptions dyn;
    dyn.x0 = o.x0;
    dyn.n_transient = o.period_transient;
    for (int k = 0; k < o.n_r; ++k)
    {
        const double r = o.n_r == 1 ? o.r_min
                         : k == o.n_r - 1 ? o.r_max
                                          : o.r_min + (o.r_max - o.r_min) * k / (o.n_r - 1);
        const double exponent = lyapunov_exponent(r, o.x0, o.n, o.n_transient);
        const auto period = period_at(r, dyn);
        csv << io::format_number(r) << ',' << io::format_number(exponent) << ','
            << (period ? std::to_string(*period) : std::string("chaotic")) << '\n';
    }
    return {{"lyapunov.csv", csv.str()}};
}

/// Writes every output or none: files written before a failure are removed.
void write_all(const fs::path& dir, const Outputs& outputs)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw Error(ErrorCode::MalformedInput, "cannot create output directory '" + dir.string() + "'");
    std::vector<fs::path> written;
    for (const auto& [name, content] : outputs)
    {
        const fs::path path = dir / name;
        std::ofstream file(path, std::ios::binary | std::ios::trunc);
        if (file)
            written.push_back(path);
        file << content;
        file.close();
        if (!file)
        {
            for (const auto& p : written)
                fs::remove(p, ec);
            throw Error(ErrorCode::MalformedInput, "cannot write '" + path.string() + "'");
        }
    }
}

std::string manifest(const std::string& command, const json& config, const Outputs& outputs)
{
    json j;
    j["command"] = command;
    j["version"] = "0.1.0";
    j["config"] = config;
    auto files = json::array();
    for (const auto& [name, content] : outputs)
        files.push_back(name);
    files.push_back("run_manifest.json");
    j["outputs"] = files;
    return j.dump(2) + "\n";
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"chaosfolio: mean-variance frontiers, logistic-map dynamics and the pairwise stability screen.\n"
                 "Settings precedence: command-line flags > --config JSON file > built-in defaults."};
    app.name("chaosfolio");
    app.require_subcommand(1);

    Common common;
    FrontierOptions frontier;
    BifurcateOptions bif;
    ScreenOptions screen;
    LyapunovOptions lyap;

    auto* frontier_cmd = app.add_subcommand("frontier", "efficient frontier, corner portfolios and tangency portfolio");
    FieldSet frontier_fields(frontier_cmd);
    register_common(frontier_fields, common, true);
    register_frontier(frontier_fields, frontier);

    auto* bif_cmd = app.add_subcommand("bifurcate", "logistic-map bifurcation diagram and Feigenbaum estimate");
    FieldSet bif_fields(bif_cmd);
    register_common(bif_fields, common, false);
    bif_fields.number("r-min", &bif.r_min, "lowest r of the diagram (default 2.5)");
    bif_fields.number("r-max", &bif.r_max, "highest r of the diagram, <= 4 (default 4.0)");
    bif_fields.integer("n-r", &bif.n_r, "grid points (default 1500)");
    bif_fields.number("x0", &bif.x0, "seed state in (0, 1)");
    bif_fields.integer("n-transient", &bif.n_transient, "discarded iterations per r (default 1000)");
    bif_fields.integer("n-keep", &bif.n_keep, "retained iterations per r (default 400)");
    bif_fields.toggle("svg", &bif.svg, "also write diagram.svg");
    bif_fields.toggle("feigenbaum", &bif.feigenbaum, "also write bifurcations.csv");
    bif_fields.number("scan-min", &bif.scan_min, "doubling scan start, > 2.9");
    bif_fields.number("scan-max", &bif.scan_max, "doubling scan end, <= 3.5699");
    bif_fields.number("coarse-step", &bif.coarse_step, "doubling scan grid step");
    bif_fields.number("refine-tol", &bif.refine_tol, "bisection tolerance on each doubling");
    bif_fields.integer("scan-transient", &bif.scan_transient, "transient iterations per scan point");

    auto* screen_cmd = app.add_subcommand("screen", "pairwise Lyapunov stability screen of a portfolio");
    FieldSet screen_fields(screen_cmd);
    register_common(screen_fields, common, true);
    screen_fields.text("policy", &screen.policy, "all | sampled", {"all", "sampled"});
    screen_fields.integer("k", &screen.k, "pairs examined by the sampled policy");
    screen_fields.number("sigma-cap", &screen.screen.map.sigma_cap, "annualized volatility mapped to r-max (0.6)");
    screen_fields.number("r-min", &screen.screen.map.r_min, "logistic parameter at zero volatility (2.8)");
    screen_fields.number("r-max", &screen.screen.map.r_max, "logistic parameter at the volatility cap (4.0)");
    screen_fields.number("x0", &screen.screen.x0, "seed state in (0, 1)");
    screen_fields.number("epsilon", &screen.screen.epsilon, "initial separation of the two orbits (1e-6)");
    screen_fields.number("delta", &screen.screen.delta, "largest tolerated separation (1e-2)");
    screen_fields.integer("divergence-steps", &screen.screen.divergence_steps, "orbit length (1000)");
    screen_fields.integer("exponent-steps", &screen.screen.exponent_steps, "iterations per exponent (1e5)");
    screen_fields.integer("exponent-transient", &screen.screen.exponent_transient, "exponent transient (1000)");
    screen_fields.integer("periods-per-year", &screen.periods_per_year, "sampling frequency; 0 infers it");
    screen_fields.toggle("filter-frontier", &screen.filter_frontier, "also annotate the efficient frontier");
    screen_fields.number("weight-floor", &screen.weight_floor, "ignore positions with |w| <= floor (0.01)");
    screen_fields.text("mode", &screen.frontier.mode, "frontier mode for --filter-frontier",
                       {"long-only", "unconstrained", "130-30", "dollar-neutral", "turnover"});
    screen_fields.integer("n-points", &screen.frontier.n_points, "frontier points for --filter-frontier");

    auto* lyap_cmd = app.add_subcommand("lyapunov", "Lyapunov exponents and periods across r");
    FieldSet lyap_fields(lyap_cmd);
    register_common(lyap_fields, common, false);
    lyap_fields.number("r-min", &lyap.r_min, "lowest r (2.5)");
    lyap_fields.number("r-max", &lyap.r_max, "highest r (4.0)");
    lyap_fields.integer("n-r", &lyap.n_r, "grid points (151)");
    lyap_fields.number("x0", &lyap.x0, "seed state in (0, 1)");
    lyap_fields.integer("n", &lyap.n, "iterations averaged per exponent (1e5)");
    lyap_fields.integer("n-transient", &lyap.n_transient, "discarded iterations before averaging (1000)");
    lyap_fields.integer("period-transient", &lyap.period_transient, "discarded iterations before period detection");

    for (auto* cmd : {frontier_cmd, bif_cmd, screen_cmd, lyap_cmd})
        cmd->add_option("--config", common.config, "JSON object of settings keyed by flag name");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try
    {
        app.parse(reversed);
    }
    catch (const CLI::CallForHelp&)
    {
        out << app.help();
        return kSuccess;
    }
    catch (const CLI::CallForAllHelp&)
    {
        out << app.help("", CLI::AppFormatMode::All);
        return kSuccess;
    }
    catch (const CLI::ParseError& e)
    {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }

    try
    {
        Outputs outputs;
        std::string command;
        json config;
        if (frontier_cmd->parsed())
        {
            command = "frontier";
            frontier_fields.resolve(common.config);
            config = frontier_fields.resolved();
            outputs = cmd_frontier(common, frontier);
        }
        else if (bif_cmd->parsed())
        {
            command = "bifurcate";
            bif_fields.resolve(common.config);
            config = bif_fields.resolved();
            outputs = cmd_bifurcate(bif);
        }
        else if (screen_cmd->parsed())
        {
            command = "screen";
            screen_fields.resolve(common.config);
            config = screen_fields.resolved();
            outputs = cmd_screen(common, screen);
        }
        else
        {
            command = "lyapunov";
            lyap_fields.resolve(common.config);
            config = lyap_fields.resolved();
            outputs = cmd_lyapunov(lyap);
        }
        outputs.emplace_back("run_manifest.json", manifest(command, config, outputs));
        write_all(common.outdir, outputs);
        for (const auto& [name, content] : outputs)
            out << "wrote " << (fs::path(common.outdir) / name).string() << "\n";
        return kSuccess;
    }
    catch (const Error& e)
    {
        err << "error: " << e.what() << "\n";
        return is_input_error(e.code()) ? kInputError : kComputeError;
    }
    catch (const std::exception& e)
    {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }
}

} // namespace chaosfolio::cli

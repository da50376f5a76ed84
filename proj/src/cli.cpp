#include "mml/cli.hpp"

#include "mml/calcium.hpp"
#include "mml/errors.hpp"
#include "mml/grai.hpp"
#include "mml/network_io.hpp"
#include "mml/population.hpp"
#include "mml/svg.hpp"
#include "mml/text_io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <random>

#ifndef MML_DATA_DIR
#define MML_DATA_DIR "data"
#endif

namespace fs = std::filesystem;

namespace mml::cli {

namespace {

struct Globals {
    std::string out_dir = "out";
    std::uint64_t seed = 42;
    bool plot = false;
    std::string config;
};

// key=value settings from --config; each subcommand takes the keys it knows
// and anything left over is an error.
class Settings
{
public:
    void load(const std::string &path)
    {
        source_ = path;
        auto lines = read_lines(path);
        for (std::size_t ln = 0; ln < lines.size(); ++ln) {
            auto line = trim(lines[ln]);
            if (line.empty() || line.front() == '#')
                continue;
            auto eq = line.find('=');
            if (eq == std::string_view::npos)
                throw ParseError(path, ln + 1, "expected key=value");
            values_[std::string(trim(line.substr(0, eq)))] = {
                std::string(trim(line.substr(eq + 1))), ln + 1};
        }
        lines_ = std::move(lines);
    }

    const std::vector<std::string> &lines() const { return lines_; }
    const std::string &source() const { return source_; }

    // Sets `target` from the config unless the flag was given explicitly.
    void real(const std::string &key, bool given, double &target)
    {
        auto it = values_.find(key);
        if (it == values_.end())
            return;
        used_.push_back(key);
        if (given)
            return;
        if (!parse_real(it->second.text, target) || !std::isfinite(target))
            throw ParseError(source_, it->second.line, "bad value for " + key);
    }

    void size(const std::string &key, bool given, std::size_t &target)
    {
        auto it = values_.find(key);
        if (it == values_.end())
            return;
        used_.push_back(key);
        if (given)
            return;
        if (!parse_size(it->second.text, target))
            throw ParseError(source_, it->second.line, "bad value for " + key);
    }

    void text(const std::string &key, bool given, std::string &target)
    {
        auto it = values_.find(key);
        if (it == values_.end())
            return;
        used_.push_back(key);
        if (given)
            return;
        target = it->second.text;
    }

    void reject_unused() const
    {
        for (const auto &[key, v] : values_)
            if (std::find(used_.begin(), used_.end(), key) == used_.end())
                throw ParseError(source_, v.line, "unknown key '" + key + "'");
    }

private:
    struct Value {
        std::string text;
        std::size_t line;
    };
    std::string source_;
    std::map<std::string, Value> values_;
    std::vector<std::string> lines_;
    std::vector<std::string> used_;
};

bool given(const CLI::App *cmd, const std::string &flag)
{
    const auto *opt = cmd->get_option_no_throw(flag);
    return opt != nullptr && opt->count() > 0;
}

std::vector<std::string> csv_list(const std::string &text)
{
    std::vector<std::string> out;
    for (const auto &part : split(text, ',')) {
        auto t = trim(part);
        if (!t.empty())
            out.emplace_back(t);
    }
    return out;
}

std::pair<std::size_t, std::size_t> parse_range(const std::string &text, const char *what)
{
    auto pos = text.find("..");
    std::size_t lo = 0, hi = 0;
    if (pos == std::string::npos) {
        if (!parse_size(text, lo))
            throw Error(ErrorKind::input, std::string("bad ") + what + " range '" + text + "'");
        return {lo, lo};
    }
    if (!parse_size(text.substr(0, pos), lo) || !parse_size(text.substr(pos + 2), hi))
        throw Error(ErrorKind::input, std::string("bad ") + what + " range '" + text + "'");
    return {lo, hi};
}

ValueMap parse_assignments(const std::string &text)
{
    ValueMap values;
    for (const auto &item : csv_list(text)) {
        auto eq = item.find('=');
        double v = 0.0;
        if (eq == std::string::npos || !parse_real(item.substr(eq + 1), v))
            throw Error(ErrorKind::input, "expected name=value, got '" + item + "'");
        values[std::string(trim(item.substr(0, eq)))] = v;
    }
    return values;
}

class Writer
{
public:
    Writer(const Globals &g, std::ostream &out) : dir_(g.out_dir), out_(out) {}

    void operator()(const std::string &name, const std::string &content)
    {
        const auto path = dir_ / name;
        write_file_atomic(path, content);
        out_ << "wrote " << path.string() << '\n';
    }

private:
    fs::path dir_;
    std::ostream &out_;
};

std::string values_to_csv(const ValueMap &values)
{
    std::string csv = "node,value\n";
    for (const auto &[id, v] : values)
        csv += id + "," + format_real(v) + "\n";
    return csv;
}

// ---------------------------------------------------------------- grai

struct GraiArgs {
    std::string grn = std::string(MML_DATA_DIR) + "/pa_tcs_qs_grn.tsv";
    std::string inputs, outputs;
    std::size_t max_depth = 4;
    std::string activation = "hill:2:1";
    std::string network = "network.txt";
    std::vector<std::string> envs;
    std::string eval;
    std::size_t i = 1, j = 1;
    std::string i_range = "1..3", j_range = "1..5";
    std::size_t nodes = 12;
    double edge_prob = 0.3;
    CLI::App *cmd = nullptr;
};

void grai_settings(Settings &settings, GraiArgs &a)
{
    settings.size("max_depth", given(a.cmd, "--max-depth"), a.max_depth);
    settings.text("activation", given(a.cmd, "--activation"), a.activation);
    settings.reject_unused();
}

int run_grai_extract(const Globals &g, GraiArgs &a, Settings &settings, std::ostream &out)
{
    grai_settings(settings, a);
    auto grn = load_grn(a.grn);
    auto net = extract_subnetwork(grn, csv_list(a.inputs), csv_list(a.outputs), a.max_depth,
                                  Activation::from_text(a.activation));
    Writer write(g, out);
    write("network.txt", network_to_text(net));
    out << "layers=" << net.layers().size() << " nodes=" << net.nodes().size()
        << " edges=" << net.edges().size() << " phantoms=" << net.phantom_count() << '\n';
    return exit_ok;
}

int run_grai_env(const Globals &g, GraiArgs &a, Settings &settings, std::ostream &out)
{
    settings.reject_unused();
    auto net = load_network(a.network);
    Writer write(g, out);
    std::optional<ValueMap> inputs;
    if (!a.eval.empty())
        inputs = parse_assignments(a.eval);
    std::string csv = "condition,node,value\n";
    for (const auto &path : a.envs) {
        auto cond = load_environment(path);
        auto modified = apply_environment(net, cond);
        write("network_" + cond.name + ".txt", network_to_text(modified));
        if (inputs) {
            for (const auto &[id, v] : modified.evaluate(*inputs))
                csv += cond.name + "," + id + "," + format_real(v) + "\n";
        }
    }
    if (inputs)
        write("env_values.csv", csv);
    return exit_ok;
}

int run_grai_eval(const Globals &, GraiArgs &a, Settings &settings, std::ostream &out)
{
    settings.reject_unused();
    auto net = load_network(a.network);
    out << values_to_csv(forward(net, parse_assignments(a.eval)));
    return exit_ok;
}

int run_grai_mine(const Globals &g, GraiArgs &a, Settings &settings, std::ostream &out)
{
    settings.reject_unused();
    auto grn = load_grn(a.grn);
    auto found = mine_structures(grn, {a.i, a.j});
    Writer write(g, out);
    write("structures_i" + std::to_string(a.i) + "_j" + std::to_string(a.j) + ".txt",
          structures_to_text(found));
    out << "structures=" << found.size() << '\n';
    return exit_ok;
}

int run_grai_count(const Globals &g, GraiArgs &a, Settings &settings, std::ostream &out)
{
    settings.reject_unused();
    auto grn = load_grn(a.grn);
    const auto ir = parse_range(a.i_range, "i");
    const auto jr = parse_range(a.j_range, "j");
    auto rows = count_structures(grn, ir, jr);
    Writer write(g, out);
    write("counts.csv", counts_to_csv(rows));
    if (g.plot) {
        svg::Heatmap map;
        map.title = "Fully connected structures by size";
        map.row_label = "inputs i";
        map.column_label = "outputs j";
        for (auto i = ir.first; i <= ir.second; ++i)
            map.rows.push_back(std::to_string(i));
        for (auto j = jr.first; j <= jr.second; ++j)
            map.columns.push_back(std::to_string(j));
        map.values.assign(map.rows.size(), std::vector<double>(map.columns.size(), 0.0));
        for (const auto &r : rows)
            map.values[r.inputs - ir.first][r.outputs - jr.first] = static_cast<double>(r.count);
        write("counts.svg", svg::render(map));
    }
    return exit_ok;
}

int run_grai_random(const Globals &g, GraiArgs &a, Settings &settings, std::ostream &out)
{
    settings.reject_unused();
    if (!(a.edge_prob >= 0.0 && a.edge_prob <= 1.0))
        throw Error(ErrorKind::input, "edge probability must lie in [0, 1]");
    std::mt19937_64 rng(g.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    GrnGraph grn;
    auto name = [](std::size_t k) { return "g" + std::to_string(k); };
    for (std::size_t u = 0; u < a.nodes; ++u)
        grn.add_node(name(u));
    for (std::size_t u = 0; u < a.nodes; ++u)
        for (std::size_t v = u + 1; v < a.nodes; ++v) {
            if (unit(rng) >= a.edge_prob)
                continue;
            const int sign = unit(rng) < 0.75 ? 1 : -1;
            // relative weights in (0, 1], rounded for readable files
            const double w = std::max(0.01, std::round(unit(rng) * 100.0) / 100.0);
            grn.add_edge({name(u), name(v), sign, w});
        }
    Writer write(g, out);
    write("random_grn.tsv", grn_to_text(grn));
    return exit_ok;
}

// ---------------------------------------------------------------- popann

struct PopArgs {
    std::string fixture = std::string(MML_DATA_DIR) + "/hgb_species.tsv";
    std::string target = std::string(MML_DATA_DIR) + "/hgb_target.tsv";
    double scale = 1.0;
    double glucose = 1.0;
    double step = 0.05;
    std::size_t max_epochs = 10000;
    double tolerance = 1e-10;
    std::string freeze;
    double jitter = 0.0;
    std::string species = "Bacteroides";
    double from = 0.0, to = 2.0;
    std::size_t steps = 21;
    CLI::App *cmd = nullptr;
};

void pop_settings(Settings &s, PopArgs &a)
{
    s.real("scale", given(a.cmd, "--scale"), a.scale);
    s.real("glucose", given(a.cmd, "--glucose"), a.glucose);
    s.real("step", given(a.cmd, "--step"), a.step);
    s.size("max_epochs", given(a.cmd, "--max-epochs"), a.max_epochs);
    s.real("tolerance", given(a.cmd, "--tol"), a.tolerance);
    s.real("jitter", given(a.cmd, "--jitter"), a.jitter);
    s.text("species", given(a.cmd, "--species"), a.species);
    s.real("from", given(a.cmd, "--from"), a.from);
    s.real("to", given(a.cmd, "--to"), a.to);
    s.size("steps", given(a.cmd, "--steps"), a.steps);
    s.reject_unused();
}

int run_pop_weights(const Globals &g, PopArgs &a, Settings &settings, std::ostream &out)
{
    pop_settings(settings, a);
    auto net = load_population(a.fixture, a.scale);
    Writer write(g, out);
    write("weights.tsv", targets_to_text(current_weights(net)));
    return exit_ok;
}

int run_pop_forward(const Globals &g, PopArgs &a, Settings &settings, std::ostream &out)
{
    pop_settings(settings, a);
    auto net = load_population(a.fixture, a.scale);
    std::string csv = "metabolite,amount\n";
    for (const auto &[m, v] : forward_metabolites(net, a.glucose))
        csv += m + "," + format_real(v) + "\n";
    Writer write(g, out);
    write("metabolites.csv", csv);
    return exit_ok;
}

int run_pop_train(const Globals &g, PopArgs &a, Settings &settings, std::ostream &out)
{
    pop_settings(settings, a);
    auto net = load_population(a.fixture, a.scale);
    if (a.jitter > 0.0) {
        // optional seeded multiplicative perturbation of the starting point
        std::mt19937_64 rng(g.seed);
        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        for (const auto &s : std::vector<SpeciesNode>(net.species()))
            net.set_population(s.name, s.population * std::max(0.0, 1.0 + a.jitter * unit(rng)));
    }
    auto target = load_targets(a.target, net);
    PopulationTrainingConfig cfg;
    cfg.step = a.step;
    cfg.max_epochs = a.max_epochs;
    cfg.tolerance = a.tolerance;
    for (const auto &name : csv_list(a.freeze))
        cfg.frozen.insert(name);
    auto result = train_populations(net, target, cfg);

    Writer write(g, out);
    write("train_mse.csv", mse_trace_to_csv(result.trace));
    write("train_weights.csv", weight_trace_to_csv(result.trace, target));
    write("trained_species.tsv", population_to_text(result.net));
    if (g.plot) {
        svg::LineChart mse_chart{"Weight MSE during population training", "epoch", "MSE", {}, false};
        svg::Series s{"MSE", {}, {}};
        for (const auto &e : result.trace.entries) {
            s.x.push_back(static_cast<double>(e.epoch));
            s.y.push_back(e.error);
        }
        mse_chart.series.push_back(std::move(s));
        write("train_mse.svg", svg::render(mse_chart));

        svg::LineChart w_chart{"Edge weight relative to target", "epoch", "w / target", {}, false};
        for (const auto &[edge, t] : target) {
            svg::Series ws{edge.label(), {}, {}};
            for (const auto &e : result.trace.entries) {
                ws.x.push_back(static_cast<double>(e.epoch));
                const double w = e.params.at("w:" + edge.label());
                ws.y.push_back(t > 0.0 ? w / t : w);
            }
            w_chart.series.push_back(std::move(ws));
        }
        write("train_weights.svg", svg::render(w_chart));
    }
    out << "epochs=" << result.trace.entries.size() - 1
        << " initial_mse=" << format_real(result.trace.entries.front().error)
        << " final_mse=" << format_real(result.trace.back().error) << '\n';
    return exit_ok;
}

int run_pop_sweep(const Globals &g, PopArgs &a, Settings &settings, std::ostream &out)
{
    pop_settings(settings, a);
    if (a.steps == 0)
        throw Error(ErrorKind::input, "sweep needs at least one step");
    auto net = load_population(a.fixture, a.scale);
    std::vector<double> fractions;
    for (std::size_t k = 0; k < a.steps; ++k)
        fractions.push_back(a.steps == 1 ? a.from
                                         : a.from + (a.to - a.from) * static_cast<double>(k) /
                                                        static_cast<double>(a.steps - 1));
    auto rows = sensitivity_sweep(net, a.species, fractions, a.glucose);
    Writer write(g, out);
    write("sweep_" + a.species + ".csv", sweep_to_csv(rows));
    if (g.plot) {
        svg::LineChart chart{"Outputs vs abundance of " + a.species,
                             "fraction of healthy population", "amount", {}, false};
        for (const char *m : {"acetate", "propionate", "butyrate"}) {
            svg::Series s{m, {}, {}};
            for (const auto &r : rows) {
                s.x.push_back(r.fraction);
                auto it = r.outputs.find(m);
                s.y.push_back(it == r.outputs.end() ? 0.0 : it->second);
            }
            chart.series.push_back(std::move(s));
        }
        write("sweep_" + a.species + ".svg", svg::render(chart));
    }
    return exit_ok;
}

// ---------------------------------------------------------------- adc

struct AdcArgs {
    double x = 0.0;
    double stride = 0.0;
    std::string system;
    CLI::Option *stride_opt = nullptr;
};

struct AdcSetup {
    AdcSystem system;
    CalciumModelParams params;
    CalciumTrainingConfig training;
};

AdcSetup adc_setup(Settings &settings)
{
    AdcSetup s;
    if (!settings.source().empty())
        apply_adc_config(settings.lines(), settings.source(), s.system, s.params, s.training);
    s.params.validate();
    s.system.validate();
    return s;
}

// A previously trained system, or a fresh training run when none is saved.
AdcSetup trained_setup(const Globals &g, const AdcArgs &a, Settings &settings)
{
    fs::path path = a.system.empty() ? fs::path(g.out_dir) / "adc_system.txt" : fs::path(a.system);
    AdcSetup s = adc_setup(settings);
    if (fs::exists(path)) {
        apply_adc_config(read_lines(path), path.string(), s.system, s.params, s.training);
        s.params.validate();
        s.system.validate();
        return s;
    }
    if (!a.system.empty())
        throw Error(ErrorKind::input, "cannot open " + path.string());
    s.system = train_adc(s.system, s.training, s.params).system;
    return s;
}

int run_adc_train(const Globals &g, AdcArgs &, Settings &settings, std::ostream &out)
{
    auto setup = adc_setup(settings);
    auto result = train_adc(setup.system, setup.training, setup.params);
    Writer write(g, out);
    write("adc_trace.csv", adc_trace_to_csv(result, setup.system));
    write("adc_system.txt", adc_config_to_text(result.system, setup.params, setup.training));
    if (g.plot) {
        svg::LineChart chart{"ADC training", "epoch", "value", {}, true};
        svg::Series w0{"w0", {}, {}}, w1{"w1", {}, {}}, d0{"d0 / 100", {}, {}};
        std::size_t epoch = 0;
        for (const auto &e : result.cell1.trace.entries) {
            const double ex = static_cast<double>(epoch++);
            w0.x.push_back(ex);
            w0.y.push_back(e.params.at("w0"));
            w1.x.push_back(ex);
            w1.y.push_back(setup.system.cell2.weight);
            d0.x.push_back(ex);
            d0.y.push_back(setup.system.deactivation / 100.0);
        }
        for (const auto &e : result.cell2.trace.entries) {
            const double ex = static_cast<double>(epoch++);
            w0.x.push_back(ex);
            w0.y.push_back(result.system.cell1.weight);
            w1.x.push_back(ex);
            w1.y.push_back(e.params.at("w1"));
            d0.x.push_back(ex);
            d0.y.push_back(e.params.at("d0") / 100.0);
        }
        chart.series = {w0, w1, d0};
        write("adc_training.svg", svg::render(chart));
    }
    out << "w0=" << format_real(result.system.cell1.weight)
        << " w1=" << format_real(result.system.cell2.weight)
        << " d0=" << format_real(result.system.deactivation) << '\n';
    return exit_ok;
}

int run_adc_convert(const Globals &g, AdcArgs &a, Settings &settings, std::ostream &out,
                    std::ostream &err)
{
    auto setup = trained_setup(g, a, settings);
    auto c = adc_convert(setup.system, a.x, setup.params);
    if (!c.settled)
        err << "warning: calcium transient did not settle within max_time\n";
    out << c.code() << '\n';
    return exit_ok;
}

int run_adc_sweep(const Globals &g, AdcArgs &a, Settings &settings, std::ostream &out,
                  std::ostream &err)
{
    auto setup = trained_setup(g, a, settings);
    const double stride = a.stride_opt->count() > 0 ? a.stride : setup.system.sample_interval;
    if (!std::isfinite(stride) || !(stride > 0.0))
        throw Error(ErrorKind::input, "stride must be > 0");
    const double lo = setup.system.input_low, hi = setup.system.input_high;
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / stride + 1e-9)) + 1;
    std::vector<Conversion> rows;
    bool settled = true;
    for (std::size_t k = 0; k < count; ++k) {
        rows.push_back(adc_convert(setup.system, std::min(hi, lo + stride * static_cast<double>(k)),
                                   setup.params));
        settled = settled && rows.back().settled;
    }
    if (!settled)
        err << "warning: some calcium transients did not settle within max_time\n";
    Writer write(g, out);
    write("adc_sweep.csv", conversions_to_csv(rows));
    if (g.plot) {
        svg::LineChart chart{"Cytoplasmic Ca2+ at saturation", "extracellular Ca2+ x (uM)",
                             "C (uM)", {}, false};
        svg::Series c1{"cell 1 (MSB)", {}, {}}, c2{"cell 2 (LSB)", {}, {}},
            th{"threshold", {}, {}};
        for (const auto &r : rows) {
            c1.x.push_back(r.x);
            c1.y.push_back(r.cell1_cytoplasm);
            c2.x.push_back(r.x);
            c2.y.push_back(r.cell2_cytoplasm);
        }
        th.x = {lo, hi};
        th.y = {setup.system.threshold, setup.system.threshold};
        chart.series = {c1, c2, th};
        write("adc_sweep.svg", svg::render(chart));
    }
    return exit_ok;
}

int exit_code_for(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::numeric:
    case ErrorKind::config:
    case ErrorKind::training_failure:
        return exit_numeric;
    default:
        return exit_data;
    }
}

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
    Globals g;
    CLI::App app{"Molecular machine learning experiments", "mml-lab"};
    app.require_subcommand(1);
    app.add_option("--out", g.out_dir, "output directory")->capture_default_str();
    app.add_option("--seed", g.seed, "RNG seed")->capture_default_str();
    app.add_flag("--plot", g.plot, "also write SVG charts");
    app.add_option("--config", g.config, "key=value settings file");
    for (auto *opt : app.get_options())
        opt->configurable(false);

    GraiArgs ga;
    PopArgs pa;
    AdcArgs aa;
    std::function<int()> action;
    Settings settings;

    auto *grai = app.add_subcommand("grai", "gene regulatory network structures");
    grai->require_subcommand(1);
    grai->fallthrough();
    {
        auto *c = grai->add_subcommand("extract", "layered subnetwork between genes");
        c->add_option("--grn", ga.grn, "GRN edge list")->capture_default_str();
        c->add_option("--inputs", ga.inputs, "comma-separated input genes")->required();
        c->add_option("--outputs", ga.outputs, "comma-separated output genes")->required();
        c->add_option("--max-depth", ga.max_depth, "longest path kept")->capture_default_str();
        c->add_option("--activation", ga.activation, "node activation")->capture_default_str();
        c->fallthrough();
        c->callback([&, c] { ga.cmd = c; action = [&] { return run_grai_extract(g, ga, settings, out); }; });

        c = grai->add_subcommand("env", "apply environment conditions to a network");
        c->add_option("--network", ga.network, "network file")->required();
        c->add_option("--env", ga.envs, "condition file(s)")->required();
        c->add_option("--eval", ga.eval, "evaluate with inputs name=value,...");
        c->fallthrough();
        c->callback([&, c] { ga.cmd = c; action = [&] { return run_grai_env(g, ga, settings, out); }; });

        c = grai->add_subcommand("eval", "evaluate a network");
        c->add_option("--network", ga.network, "network file")->required();
        c->add_option("--input", ga.eval, "inputs name=value,...")->required();
        c->fallthrough();
        c->callback([&, c] { ga.cmd = c; action = [&] { return run_grai_eval(g, ga, settings, out); }; });

        c = grai->add_subcommand("mine", "list fully connected i x j structures");
        c->add_option("--grn", ga.grn, "GRN edge list")->capture_default_str();
        c->add_option("--i", ga.i, "input count")->required();
        c->add_option("--j", ga.j, "output count")->required();
        c->fallthrough();
        c->callback([&, c] { ga.cmd = c; action = [&] { return run_grai_mine(g, ga, settings, out); }; });

        c = grai->add_subcommand("count", "count structures over i and j ranges");
        c->add_option("--grn", ga.grn, "GRN edge list")->capture_default_str();
        c->add_option("--i", ga.i_range, "input range lo..hi")->capture_default_str();
        c->add_option("--j", ga.j_range, "output range lo..hi")->capture_default_str();
        c->fallthrough();
        c->callback([&, c] { ga.cmd = c; action = [&] { return run_grai_count(g, ga, settings, out); }; });

        c = grai->add_subcommand("random", "seeded random DAG in GRN format");
        c->add_option("--nodes", ga.nodes, "node count")->capture_default_str();
        c->add_option("--edge-prob", ga.edge_prob, "edge probability")->capture_default_str();
        c->fallthrough();
        c->callback([&, c] { ga.cmd = c; action = [&] { return run_grai_random(g, ga, settings, out); }; });
    }

    auto *pop = app.add_subcommand("popann", "population-weighted bacterial network");
    pop->require_subcommand(1);
    pop->fallthrough();
    {
        auto add_common = [&](CLI::App *c) {
            c->add_option("--fixture", pa.fixture, "species file")->capture_default_str();
            c->add_option("--scale", pa.scale, "weight scale")->capture_default_str();
            c->add_option("--glucose", pa.glucose, "input glucose")->capture_default_str();
            c->fallthrough();
        };
        auto *c = pop->add_subcommand("weights", "current edge weights in target format");
        add_common(c);
        c->callback([&, c] { pa.cmd = c; action = [&] { return run_pop_weights(g, pa, settings, out); }; });

        c = pop->add_subcommand("forward", "propagate glucose through the network");
        add_common(c);
        c->callback([&, c] { pa.cmd = c; action = [&] { return run_pop_forward(g, pa, settings, out); }; });

        c = pop->add_subcommand("train", "move populations toward target weights");
        add_common(c);
        c->add_option("--target", pa.target, "target weights file")->capture_default_str();
        c->add_option("--step", pa.step, "gradient step")->capture_default_str();
        c->add_option("--max-epochs", pa.max_epochs, "epoch limit")->capture_default_str();
        c->add_option("--tol", pa.tolerance, "MSE tolerance")->capture_default_str();
        c->add_option("--freeze", pa.freeze, "comma-separated species kept fixed");
        c->add_option("--jitter", pa.jitter, "seeded initial perturbation")->capture_default_str();
        c->callback([&, c] { pa.cmd = c; action = [&] { return run_pop_train(g, pa, settings, out); }; });

        c = pop->add_subcommand("sweep", "abundance sensitivity of one species");
        add_common(c);
        c->add_option("--species", pa.species, "species to vary")->capture_default_str();
        c->add_option("--from", pa.from, "first fraction")->capture_default_str();
        c->add_option("--to", pa.to, "last fraction")->capture_default_str();
        c->add_option("--steps", pa.steps, "number of fractions")->capture_default_str();
        c->callback([&, c] { pa.cmd = c; action = [&] { return run_pop_sweep(g, pa, settings, out); }; });
    }

    auto *adc = app.add_subcommand("adc", "two-cell Ca2+ analog-to-digital converter");
    adc->require_subcommand(1);
    adc->fallthrough();
    {
        auto *c = adc->add_subcommand("train", "train cell 1 then cell 2");
        c->fallthrough();
        c->callback([&] { action = [&] { return run_adc_train(g, aa, settings, out); }; });

        c = adc->add_subcommand("convert", "convert one input");
        c->add_option("--x", aa.x, "extracellular Ca2+ (uM)")->required();
        c->add_option("--system", aa.system, "trained system file");
        c->fallthrough();
        c->callback([&] { action = [&] { return run_adc_convert(g, aa, settings, out, err); }; });

        c = adc->add_subcommand("sweep", "convert across the input range");
        aa.stride_opt = c->add_option("--stride", aa.stride, "step in uM");
        c->add_option("--system", aa.system, "trained system file");
        c->fallthrough();
        c->callback([&] { action = [&] { return run_adc_sweep(g, aa, settings, out, err); }; });
    }

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError &e) {
        err << "usage error: " << e.what() << "\n";
        err << "run with --help for usage\n";
        return exit_usage;
    }

    try {
        if (!g.config.empty())
            settings.load(g.config);
        return action ? action() : exit_usage;
    } catch (const Error &e) {
        err << to_string(e.kind()) << ": " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const fs::filesystem_error &e) {
        err << "file error: " << e.what() << '\n';
        return exit_data;
    }
}

} // namespace mml::cli

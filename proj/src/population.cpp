#include "mml/population.hpp"

#include "mml/errors.hpp"
#include "mml/text_io.hpp"

#include <algorithm>
#include <cmath>

namespace mml {

namespace {

void check_scale(const PopulationAnn &net)
{
    const double s = net.weight_scale();
    if (!std::isfinite(s) || !(s > 0.0))
        throw Error(ErrorKind::config, "weight scale must be positive and finite");
}

std::string join_text(const std::vector<std::string> &lines)
{
    std::string text;
    for (const auto &l : lines)
        text += l + "\n";
    return text;
}

} // namespace

PopulationAnn::PopulationAnn(std::vector<SpeciesNode> species, double weight_scale,
                             std::string input_metabolite)
    : species_(std::move(species)), weight_scale_(weight_scale),
      input_(std::move(input_metabolite))
{
    std::set<std::string> names;
    for (const auto &s : species_) {
        if (s.name.empty() || !names.insert(s.name).second)
            throw Error(ErrorKind::input, "duplicate or empty species name '" + s.name + "'");
        if (!std::isfinite(s.population) || s.population < 0.0)
            throw Error(ErrorKind::input, "population of " + s.name + " must be >= 0");
        for (const auto &[m, y] : s.produces)
            if (!std::isfinite(y) || y < 0.0)
                throw Error(ErrorKind::input, "yield of " + m + " by " + s.name + " must be >= 0");
        const bool eats_input =
            std::find(s.consumes.begin(), s.consumes.end(), input_) != s.consumes.end();
        if (s.layer == 0 && (s.consumes.size() != 1 || !eats_input))
            throw Error(ErrorKind::input,
                        "first-layer species " + s.name + " must consume only " + input_);
        if (s.layer != 0 && eats_input)
            throw Error(ErrorKind::input,
                        "only first-layer species consume " + input_ + " (" + s.name + ")");
    }
    for (const auto &p : species_)
        for (const auto &c : species_) {
            if (c.layer != p.layer + 1)
                continue;
            for (const auto &[m, y] : p.produces)
                if (std::find(c.consumes.begin(), c.consumes.end(), m) != c.consumes.end())
                    edges_.push_back({p.name, c.name, m});
        }
}

std::vector<std::string> PopulationAnn::metabolites() const
{
    std::set<std::string> all;
    for (const auto &s : species_) {
        all.insert(s.consumes.begin(), s.consumes.end());
        for (const auto &[m, y] : s.produces)
            all.insert(m);
    }
    all.erase(input_);
    std::vector<std::string> out{input_};
    out.insert(out.end(), all.begin(), all.end());
    return out;
}

std::size_t PopulationAnn::index_of(const std::string &name) const
{
    for (std::size_t i = 0; i < species_.size(); ++i)
        if (species_[i].name == name)
            return i;
    throw Error(ErrorKind::input, "unknown species '" + name + "'");
}

double PopulationAnn::population(const std::string &name) const
{
    return species_[index_of(name)].population;
}

void PopulationAnn::set_population(const std::string &name, double population)
{
    if (!std::isfinite(population) || population < 0.0)
        throw Error(ErrorKind::input, "population must be finite and >= 0");
    species_[index_of(name)].population = population;
}

bool PopulationAnn::has_edge(const MetaboliteEdge &e) const
{
    return std::find(edges_.begin(), edges_.end(), e) != edges_.end();
}

double edge_weight(const PopulationAnn &net, const MetaboliteEdge &e)
{
    check_scale(net);
    if (!net.has_edge(e))
        throw Error(ErrorKind::input, "not an edge of the network: " + e.label());
    return net.population(e.producer) * net.population(e.consumer) / net.weight_scale();
}

std::map<std::string, double> forward_metabolites(const PopulationAnn &net, double input_amount)
{
    check_scale(net);
    if (!std::isfinite(input_amount) || input_amount < 0.0)
        throw Error(ErrorKind::input, "input amount must be finite and >= 0");

    const auto &species = net.species();
    std::map<std::string, double> totals;
    for (const auto &m : net.metabolites())
        totals[m] = 0.0;
    totals[net.input_metabolite()] = input_amount;

    std::size_t depth = 0;
    for (const auto &s : species)
        depth = std::max(depth, s.layer);

    std::vector<double> uptake(species.size(), 0.0);
    double first_layer_population = 0.0;
    for (const auto &s : species)
        if (s.layer == 0)
            first_layer_population += s.population;
    if (first_layer_population > 0.0)
        for (std::size_t i = 0; i < species.size(); ++i)
            if (species[i].layer == 0)
                uptake[i] = input_amount * species[i].population / first_layer_population;

    const double scale = net.weight_scale();
    for (std::size_t layer = 0; layer <= depth; ++layer) {
        for (std::size_t p = 0; p < species.size(); ++p) {
            if (species[p].layer != layer)
                continue;
            for (const auto &[m, yield] : species[p].produces) {
                const double emitted = yield * uptake[p];
                totals[m] += emitted;
                std::vector<std::pair<std::size_t, double>> consumers;
                double weight_sum = 0.0;
                for (const auto &e : net.edges()) {
                    if (e.producer != species[p].name || e.metabolite != m)
                        continue;
                    const auto c = net.index_of(e.consumer);
                    const double w = species[p].population * species[c].population / scale;
                    consumers.emplace_back(c, w);
                    weight_sum += w;
                }
                if (!(weight_sum > 0.0))
                    continue;
                for (const auto &[c, w] : consumers)
                    uptake[c] += w * (emitted * w / weight_sum);
            }
        }
    }
    return totals;
}

TargetWeights current_weights(const PopulationAnn &net)
{
    TargetWeights out;
    for (const auto &e : net.edges())
        out[e] = edge_weight(net, e);
    return out;
}

double weight_mse(const PopulationAnn &net, const TargetWeights &target)
{
    if (target.empty())
        throw Error(ErrorKind::input, "target weights are empty");
    std::vector<double> actual, wanted;
    for (const auto &[e, t] : target) {
        actual.push_back(edge_weight(net, e));
        wanted.push_back(t);
    }
    return mse(actual, wanted);
}

namespace {

std::map<std::string, double> snapshot(const PopulationAnn &net, const TargetWeights &target)
{
    std::map<std::string, double> params;
    for (const auto &s : net.species())
        params["P:" + s.name] = s.population;
    for (const auto &[e, t] : target)
        params["w:" + e.label()] = edge_weight(net, e);
    return params;
}

} // namespace

PopulationTrainingResult train_populations(const PopulationAnn &net, const TargetWeights &target,
                                           const PopulationTrainingConfig &cfg)
{
    check_scale(net);
    if (!std::isfinite(cfg.step) || !(cfg.step > 0.0))
        throw Error(ErrorKind::config, "training step must be positive");
    if (!std::isfinite(cfg.tolerance) || cfg.tolerance < 0.0)
        throw Error(ErrorKind::config, "tolerance must be >= 0");
    if (target.empty())
        throw Error(ErrorKind::input, "target weights are empty");
    for (const auto &[e, t] : target) {
        if (!net.has_edge(e))
            throw Error(ErrorKind::input, "target names a missing edge: " + e.label());
        if (!std::isfinite(t) || t < 0.0)
            throw Error(ErrorKind::input, "target weight must be >= 0: " + e.label());
    }
    for (const auto &name : cfg.frozen)
        net.index_of(name);

    PopulationTrainingResult result{net, {}};
    PopulationAnn &work = result.net;
    const double scale = work.weight_scale();
    const std::size_t n = work.species().size();
    std::vector<char> frozen(n, 0);
    for (const auto &name : cfg.frozen)
        frozen[work.index_of(name)] = 1;

    struct Term {
        std::size_t producer, consumer;
        double target;
    };
    std::vector<Term> terms;
    for (const auto &[e, t] : target)
        terms.push_back({work.index_of(e.producer), work.index_of(e.consumer), t});

    double error = weight_mse(work, target);
    result.trace.record(snapshot(work, target), error);
    for (std::size_t epoch = 0; epoch < cfg.max_epochs && !(error < cfg.tolerance); ++epoch) {
        std::vector<double> pop(n);
        for (std::size_t i = 0; i < n; ++i)
            pop[i] = work.species()[i].population;
        std::vector<double> grad(n, 0.0);
        for (const auto &t : terms) {
            const double residual = pop[t.producer] * pop[t.consumer] / scale - t.target;
            grad[t.producer] += 2.0 * residual * pop[t.consumer] / scale;
            grad[t.consumer] += 2.0 * residual * pop[t.producer] / scale;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (!std::isfinite(grad[i]))
                throw Error(ErrorKind::config, "non-finite population gradient");
            if (frozen[i])
                continue;
            work.set_population(work.species()[i].name,
                                std::max(0.0, pop[i] - cfg.step * grad[i]));
        }
        error = weight_mse(work, target);
        result.trace.record(snapshot(work, target), error);
    }
    return result;
}

std::vector<SweepRow> sensitivity_sweep(const PopulationAnn &net, const std::string &species,
                                        std::span<const double> fractions, double input_amount)
{
    const double baseline = net.population(species);
    for (double f : fractions)
        if (!std::isfinite(f) || f < 0.0 || f > 2.0)
            throw Error(ErrorKind::input, "sweep fractions must lie in [0, 2]");
    std::vector<SweepRow> rows;
    rows.reserve(fractions.size());
    for (double f : fractions) {
        PopulationAnn perturbed = net;
        perturbed.set_population(species, f * baseline);
        rows.push_back({f, forward_metabolites(perturbed, input_amount)});
    }
    return rows;
}

PopulationAnn population_from_text(std::string_view text, double weight_scale,
                                   const std::string &source)
{
    std::vector<SpeciesNode> species;
    auto lines = split(text, '\n');
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        const std::size_t lineno = ln + 1;
        auto line = lines[ln];
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (trim(line).empty() || trim(line).front() == '#')
            continue;
        auto f = split(line, '\t');
        if (f.size() != 5)
            throw ParseError(source, lineno,
                             "expected species<TAB>layer<TAB>population<TAB>consumes<TAB>produces");
        SpeciesNode s;
        s.name = std::string(trim(f[0]));
        if (s.name.empty())
            throw ParseError(source, lineno, "empty species name");
        if (!parse_size(f[1], s.layer))
            throw ParseError(source, lineno, "bad layer '" + f[1] + "'");
        if (!parse_real(f[2], s.population) || !std::isfinite(s.population) ||
            s.population < 0.0)
            throw ParseError(source, lineno, "bad population '" + f[2] + "'");
        for (const auto &m : split(f[3], ',')) {
            auto name = trim(m);
            if (!name.empty() && name != "-")
                s.consumes.emplace_back(name);
        }
        for (const auto &item : split(f[4], ',')) {
            auto entry = trim(item);
            if (entry.empty() || entry == "-")
                continue;
            auto kv = split(entry, ':');
            double yield = 1.0;
            if (kv.size() > 2 || trim(kv[0]).empty() ||
                (kv.size() == 2 && (!parse_real(kv[1], yield) || yield < 0.0)))
                throw ParseError(source, lineno, "bad produces entry '" + std::string(entry) + "'");
            if (!s.produces.emplace(std::string(trim(kv[0])), yield).second)
                throw ParseError(source, lineno, "metabolite listed twice in produces");
        }
        species.push_back(std::move(s));
    }
    try {
        return PopulationAnn(std::move(species), weight_scale);
    } catch (const Error &e) {
        if (e.kind() == ErrorKind::input)
            throw ParseError(source, 0, e.what());
        throw;
    }
}

PopulationAnn load_population(const std::filesystem::path &path, double weight_scale)
{
    return population_from_text(join_text(read_lines(path)), weight_scale, path.string());
}

std::string population_to_text(const PopulationAnn &net)
{
    std::string out = "# species\tlayer\tpopulation\tconsumes\tproduces\n";
    for (const auto &s : net.species()) {
        std::string consumes, produces;
        for (const auto &m : s.consumes)
            consumes += (consumes.empty() ? "" : ",") + m;
        for (const auto &[m, y] : s.produces)
            produces += (produces.empty() ? "" : ",") + m + ":" + format_real(y);
        out += s.name + "\t" + std::to_string(s.layer) + "\t" + format_real(s.population) +
               "\t" + (consumes.empty() ? "-" : consumes) + "\t" +
               (produces.empty() ? "-" : produces) + "\n";
    }
    return out;
}

TargetWeights targets_from_text(std::string_view text, const PopulationAnn &net,
                                const std::string &source)
{
    TargetWeights targets;
    auto lines = split(text, '\n');
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        auto line = trim(lines[ln]);
        if (line.empty() || line.front() == '#')
            continue;
        auto f = split(line, '\t');
        if (f.size() != 4)
            throw ParseError(source, ln + 1,
                             "expected producer<TAB>consumer<TAB>metabolite<TAB>weight");
        MetaboliteEdge e{std::string(trim(f[0])), std::string(trim(f[1])),
                         std::string(trim(f[2]))};
        double w = 0.0;
        if (!parse_real(f[3], w) || !std::isfinite(w) || w < 0.0)
            throw ParseError(source, ln + 1, "bad weight '" + f[3] + "'");
        if (!net.has_edge(e))
            throw ParseError(source, ln + 1, "not an edge of the network: " + e.label());
        if (!targets.emplace(e, w).second)
            throw ParseError(source, ln + 1, "edge listed twice: " + e.label());
    }
    return targets;
}

TargetWeights load_targets(const std::filesystem::path &path, const PopulationAnn &net)
{
    return targets_from_text(join_text(read_lines(path)), net, path.string());
}

std::string targets_to_text(const TargetWeights &targets)
{
    std::string out = "# producer\tconsumer\tmetabolite\tweight\n";
    for (const auto &[e, w] : targets)
        out += e.producer + "\t" + e.consumer + "\t" + e.metabolite + "\t" + format_real(w) + "\n";
    return out;
}

std::string sweep_to_csv(const std::vector<SweepRow> &rows)
{
    std::string out = "fraction,acetate,propionate,butyrate\n";
    auto get = [](const SweepRow &r, const char *m) {
        auto it = r.outputs.find(m);
        return it == r.outputs.end() ? 0.0 : it->second;
    };
    for (const auto &r : rows)
        out += format_real(r.fraction) + "," + format_real(get(r, "acetate")) + "," +
               format_real(get(r, "propionate")) + "," + format_real(get(r, "butyrate")) + "\n";
    return out;
}

std::string mse_trace_to_csv(const TrainingTrace &trace)
{
    std::string out = "epoch,mse\n";
    for (const auto &e : trace.entries)
        out += std::to_string(e.epoch) + "," + format_real(e.error) + "\n";
    return out;
}

std::string weight_trace_to_csv(const TrainingTrace &trace, const TargetWeights &target)
{
    std::string out = "epoch";
    for (const auto &[e, t] : target)
        out += "," + e.label();
    out += "\n";
    for (const auto &entry : trace.entries) {
        out += std::to_string(entry.epoch);
        for (const auto &[e, t] : target)
            out += "," + format_real(entry.params.at("w:" + e.label()));
        out += "\n";
    }
    return out;
}

} // namespace mml

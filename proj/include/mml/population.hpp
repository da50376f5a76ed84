#ifndef MML_POPULATION_HPP
#define MML_POPULATION_HPP

// Multi-species bacterial network: species populations are the nodes,
// cross-fed metabolites are the edges and an edge's weight follows the
// sizes of the two populations it joins. Training moves populations so the
// edge weights approach a preferred configuration.

#include "mml/ann.hpp"

#include <compare>
#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mml {

struct SpeciesNode {
    std::string name;
    double population = 0.0;
    std::size_t layer = 0;
    std::vector<std::string> consumes;
    std::map<std::string, double> produces;   // metabolite -> yield

    bool operator==(const SpeciesNode &) const = default;
};

struct MetaboliteEdge {
    std::string producer;
    std::string consumer;
    std::string metabolite;

    auto operator<=>(const MetaboliteEdge &) const = default;
    std::string label() const { return producer + ">" + consumer + ":" + metabolite; }
};

class PopulationAnn
{
public:
    static constexpr const char *default_input = "glucose";

    // Edges are derived: producer emits m, consumer consumes m and sits one
    // layer deeper. Throws input-error on negative populations or yields,
    // duplicate names, or layer-0 species consuming anything but the input
    // metabolite.
    explicit PopulationAnn(std::vector<SpeciesNode> species, double weight_scale = 1.0,
                           std::string input_metabolite = default_input);

    const std::vector<SpeciesNode> &species() const { return species_; }
    const std::vector<MetaboliteEdge> &edges() const { return edges_; }
    double weight_scale() const { return weight_scale_; }
    const std::string &input_metabolite() const { return input_; }
    // All metabolites mentioned, input first, then sorted.
    std::vector<std::string> metabolites() const;

    std::size_t index_of(const std::string &name) const;
    double population(const std::string &name) const;
    void set_population(const std::string &name, double population);
    bool has_edge(const MetaboliteEdge &e) const;

    bool operator==(const PopulationAnn &) const = default;

private:
    std::vector<SpeciesNode> species_;
    std::vector<MetaboliteEdge> edges_;
    double weight_scale_;
    std::string input_;
};

// w = P_producer * P_consumer / weight_scale.
double edge_weight(const PopulationAnn &net, const MetaboliteEdge &e);

// Steady layer-by-layer propagation. Layer-0 species split the input
// metabolite in proportion to their populations. Each producer's emission of
// a metabolite is split among its consumers in proportion to edge weight,
// and a consumer's uptake is the sum of weight * share over its incoming
// edges. Emission is yield * uptake. Returns the total amount of every
// metabolite produced (the input metabolite maps to the supplied amount).
std::map<std::string, double> forward_metabolites(const PopulationAnn &net, double input_amount);

using TargetWeights = std::map<MetaboliteEdge, double>;

TargetWeights current_weights(const PopulationAnn &net);

struct PopulationTrainingConfig {
    double step = 0.05;
    std::size_t max_epochs = 10000;
    double tolerance = 1e-10;
    std::set<std::string> frozen;   // species whose population stays fixed
};

struct PopulationTrainingResult {
    PopulationAnn net;
    TrainingTrace trace;   // entry 0 is the starting point
};

// Gradient descent of sum_e (w_e - target_e)^2 over the populations, with
// populations clamped at zero. The recorded error is the mean over target
// edges. Stops once the error drops below the tolerance or after
// max_epochs updates.
PopulationTrainingResult train_populations(const PopulationAnn &net, const TargetWeights &target,
                                           const PopulationTrainingConfig &cfg);

double weight_mse(const PopulationAnn &net, const TargetWeights &target);

struct SweepRow {
    double fraction = 0.0;
    std::map<std::string, double> outputs;
};

// For each fraction f in [0, 2], sets the species' population to f times
// its current value and propagates. The input network is not touched.
std::vector<SweepRow> sensitivity_sweep(const PopulationAnn &net, const std::string &species,
                                        std::span<const double> fractions,
                                        double input_amount = 1.0);

// species<TAB>layer<TAB>population<TAB>consumes(csv)<TAB>produces(m:yield csv)
PopulationAnn population_from_text(std::string_view text, double weight_scale = 1.0,
                                   const std::string &source = "<species>");
PopulationAnn load_population(const std::filesystem::path &path, double weight_scale = 1.0);
std::string population_to_text(const PopulationAnn &net);

// producer<TAB>consumer<TAB>metabolite<TAB>weight
TargetWeights targets_from_text(std::string_view text, const PopulationAnn &net,
                                const std::string &source = "<targets>");
TargetWeights load_targets(const std::filesystem::path &path, const PopulationAnn &net);
std::string targets_to_text(const TargetWeights &targets);

std::string sweep_to_csv(const std::vector<SweepRow> &rows);
std::string mse_trace_to_csv(const TrainingTrace &trace);
std::string weight_trace_to_csv(const TrainingTrace &trace, const TargetWeights &target);

} // namespace mml

#endif

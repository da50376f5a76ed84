#ifndef MML_GRAI_HPP
#define MML_GRAI_HPP

// Gene regulatory networks read as neural networks: loading interaction
// graphs, cutting out layered subnetworks between chosen genes, modulating
// weights by environment condition, and mining fully connected
// input/output structures.

#include "mml/ann.hpp"

#include <compare>
#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mml {

struct GrnEdge {
    std::string source;
    std::string target;
    int sign = 1;          // +1 activation, -1 repression
    double weight = 1.0;   // relative weight in (0, 1]

    double signed_weight() const { return sign * weight; }
    bool operator==(const GrnEdge &) const = default;
};

// Directed interaction graph. Edges are kept sorted by (source, target), so
// two graphs built from the same edges in any order compare equal.
class GrnGraph
{
public:
    // Throws input-error on a duplicate (source, target) pair, a sign other
    // than +-1 or a weight outside (0, 1].
    void add_edge(GrnEdge edge);
    void add_node(const std::string &id);

    const std::vector<std::string> &nodes() const { return nodes_; }
    std::vector<GrnEdge> edges() const;
    std::size_t edge_count() const { return edges_.size(); }
    std::size_t node_count() const { return nodes_.size(); }
    bool has_node(const std::string &id) const;
    const GrnEdge *find_edge(const std::string &source, const std::string &target) const;

    bool operator==(const GrnGraph &) const = default;

private:
    std::vector<std::string> nodes_;   // sorted
    std::map<std::pair<std::string, std::string>, GrnEdge> edges_;
};

// Edge list: `source<TAB>target<TAB>sign(+|-)<TAB>weight`, '#' comments.
GrnGraph grn_from_text(std::string_view text, const std::string &source = "<grn>");
GrnGraph load_grn(const std::filesystem::path &path);
std::string grn_to_text(const GrnGraph &grn);

// Extracts every node and edge lying on a simple input->output path of at
// most max_depth hops (inputs and outputs only at path ends), then equalizes
// path depths with phantom nodes. Real nodes get `activation`.
LayeredNetwork extract_subnetwork(const GrnGraph &grn,
                                  const std::vector<std::string> &inputs,
                                  const std::vector<std::string> &outputs,
                                  std::size_t max_depth,
                                  Activation activation = Activation::hill(2.0, 1.0));

struct WeightModifier {
    std::string source;
    std::string target;
    double multiplier = 1.0;
};

struct EnvironmentCondition {
    std::string name;
    std::vector<WeightModifier> modifiers;
};

// `source<TAB>target<TAB>multiplier` lines, '#' comments.
EnvironmentCondition environment_from_text(std::string_view text, std::string name,
                                           const std::string &source = "<environment>");
EnvironmentCondition load_environment(const std::filesystem::path &path,
                                      std::string name = {});

// Multiplies the weight of each selected edge. A selector (s, t) matches the
// edge s->t, or, when phantoms were inserted into s->t, the weighted edge
// entering t at the end of that chain.
LayeredNetwork apply_environment(const LayeredNetwork &net, const EnvironmentCondition &cond);

struct SubnetworkQuery {
    std::size_t inputs = 1;
    std::size_t outputs = 1;
};

struct MinedStructure {
    std::vector<std::string> inputs;   // sorted
    std::vector<std::string> outputs;  // sorted

    auto operator<=>(const MinedStructure &) const = default;
};

// All (I, O) with |I| = q.inputs, |O| = q.outputs, I and O disjoint and an
// edge from every member of I to every member of O. Output sets are first
// grouped by a shared predecessor, then input sets are drawn from their
// common predecessors. Sorted lexicographically.
std::vector<MinedStructure> mine_structures(const GrnGraph &grn, SubnetworkQuery q);

// One-hop layered network for a mined structure, weights taken from the GRN.
LayeredNetwork materialize(const GrnGraph &grn, const MinedStructure &s,
                           Activation activation = Activation::hill(2.0, 1.0));

struct StructureCount {
    std::size_t inputs;
    std::size_t outputs;
    std::size_t count;
};

// Rows in i-ascending, then j-ascending order.
std::vector<StructureCount> count_structures(const GrnGraph &grn,
                                             std::pair<std::size_t, std::size_t> i_range,
                                             std::pair<std::size_t, std::size_t> j_range);

std::string counts_to_csv(const std::vector<StructureCount> &rows);
std::string structures_to_text(const std::vector<MinedStructure> &structures);

} // namespace mml

#endif

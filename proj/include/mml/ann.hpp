#ifndef MML_ANN_HPP
#define MML_ANN_HPP

// Layered feed-forward networks shared by the GRN, population and calcium
// models: node/edge representation, forward evaluation, depth equalization
// with pass-through (phantom) nodes, and error metrics.

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace mml {

class Activation
{
public:
    enum class Kind { identity, log_sigmoid, hill, threshold };

    static Activation identity() { return Activation(Kind::identity, 0, 0); }
    static Activation log_sigmoid() { return Activation(Kind::log_sigmoid, 0, 0); }
    // u^n / (K^n + u^n) for u >= 0, 0 below. Requires n > 0, K > 0.
    static Activation hill(double n, double k);
    // 1 if u >= theta else 0.
    static Activation threshold(double theta);

    Kind kind() const { return kind_; }
    double hill_n() const { return a_; }
    double hill_k() const { return b_; }
    double theta() const { return a_; }

    double operator()(double u) const;

    // Text form used in network files: identity, logsig, hill:n:K, threshold:theta.
    std::string to_text() const;
    static Activation from_text(const std::string &text);

    bool operator==(const Activation &) const = default;

private:
    Activation(Kind kind, double a, double b) : kind_(kind), a_(a), b_(b) {}
    Kind kind_;
    double a_;
    double b_;
};

enum class NodeKind { real, phantom };

struct NodeSpec {
    std::string id;
    NodeKind kind = NodeKind::real;
    // Unspecified GRN activation defaults to hill(n=2, K=1).
    Activation activation = Activation::hill(2.0, 1.0);
    double bias = 0.0;
    // For phantom nodes: the original edge the node was inserted into.
    std::string bridged_source;
    std::string bridged_target;

    bool operator==(const NodeSpec &) const = default;
};

struct Edge {
    std::string source;
    std::string target;
    double weight = 0.0;

    bool operator==(const Edge &) const = default;
};

using ValueMap = std::map<std::string, double>;

// Strictly layered network. Construction validates the invariants: the layer
// partition covers every node once, every edge goes from layer k to k+1, no
// self or duplicate edges, phantoms are identity pass-throughs.
// Immutable once built.
class LayeredNetwork
{
public:
    LayeredNetwork(std::vector<NodeSpec> nodes,
                   std::vector<std::vector<std::string>> layers,
                   std::vector<Edge> edges);

    const std::vector<NodeSpec> &nodes() const { return nodes_; }
    const std::vector<std::vector<std::string>> &layers() const { return layers_; }
    const std::vector<Edge> &edges() const { return edges_; }
    const std::vector<std::string> &inputs() const { return layers_.front(); }
    const std::vector<std::string> &outputs() const { return layers_.back(); }

    const NodeSpec &node(const std::string &id) const;
    bool has_node(const std::string &id) const { return index_.count(id) != 0; }
    std::size_t layer_of(const std::string &id) const;
    std::size_t phantom_count() const;

    // Copy with replaced edge weights (same order, same endpoints).
    LayeredNetwork with_weights(std::span<const double> weights) const;

    // All node values; inputs are taken as-is, every other node is
    // activation(bias + sum of incoming weight * source value), summed in
    // edge-list order.
    ValueMap evaluate(const ValueMap &inputs) const;

    bool operator==(const LayeredNetwork &other) const
    {
        return nodes_ == other.nodes_ && layers_ == other.layers_ &&
               edges_ == other.edges_;
    }

private:
    std::vector<NodeSpec> nodes_;
    std::vector<std::vector<std::string>> layers_;
    std::vector<Edge> edges_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::size_t> layer_;
    std::vector<std::vector<std::size_t>> incoming_;
};

// Output-layer values of evaluate().
ValueMap forward(const LayeredNetwork &net, const ValueMap &inputs);

// A general DAG with designated input and output sets; input to phantom
// insertion.
struct Dag {
    std::vector<NodeSpec> nodes;
    std::vector<Edge> edges;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
};

// Ranks nodes by longest path from the inputs, puts every output on the
// deepest layer and splits each edge spanning k > 1 layers into a chain of
// k - 1 phantom nodes. Chain edges carry weight 1; the original weight
// stays on the edge entering the original target so the target sums its
// terms in the same order.
LayeredNetwork insert_phantom_nodes(const Dag &dag);

double mse(std::span<const double> actual, std::span<const double> target);

struct TraceEntry {
    std::size_t epoch = 0;
    std::map<std::string, double> params;
    double error = 0.0;
};

struct TrainingTrace {
    std::vector<TraceEntry> entries;

    // Appends with the next epoch index.
    void record(std::map<std::string, double> params, double error);
    bool empty() const { return entries.empty(); }
    const TraceEntry &back() const { return entries.back(); }
};

} // namespace mml

#endif

#include "mml/ann.hpp"

#include "mml/errors.hpp"
#include "mml/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace mml {

Activation Activation::hill(double n, double k)
{
    if (!(n > 0.0) || !(k > 0.0) || !std::isfinite(n) || !std::isfinite(k))
        throw Error(ErrorKind::input, "hill activation needs n > 0 and K > 0");
    return Activation(Kind::hill, n, k);
}

Activation Activation::threshold(double theta)
{
    if (!std::isfinite(theta))
        throw Error(ErrorKind::input, "threshold must be finite");
    return Activation(Kind::threshold, theta, 0);
}

double Activation::operator()(double u) const
{
    switch (kind_) {
    case Kind::identity:
        return u;
    case Kind::log_sigmoid:
        return 1.0 / (1.0 + std::exp(-u));
    case Kind::hill:
        if (u <= 0.0)
            return 0.0;
        // u^n / (K^n + u^n) written to avoid overflow for large u
        return 1.0 / (1.0 + std::pow(b_ / u, a_));
    case Kind::threshold:
        return u >= a_ ? 1.0 : 0.0;
    }
    return u;
}

std::string Activation::to_text() const
{
    switch (kind_) {
    case Kind::identity: return "identity";
    case Kind::log_sigmoid: return "logsig";
    case Kind::hill: return "hill:" + format_real(a_) + ":" + format_real(b_);
    case Kind::threshold: return "threshold:" + format_real(a_);
    }
    return "identity";
}

Activation Activation::from_text(const std::string &text)
{
    auto parts = split(text, ':');
    const auto &name = parts.front();
    if (name == "identity" && parts.size() == 1)
        return identity();
    if (name == "logsig" && parts.size() == 1)
        return log_sigmoid();
    double a = 0, b = 0;
    if (name == "hill" && parts.size() == 3 && parse_real(parts[1], a) &&
        parse_real(parts[2], b))
        return hill(a, b);
    if (name == "threshold" && parts.size() == 2 && parse_real(parts[1], a))
        return threshold(a);
    throw Error(ErrorKind::input, "bad activation spec '" + text + "'");
}

namespace {

[[noreturn]] void structure_error(const std::string &msg)
{
    throw Error(ErrorKind::structure, msg);
}

} // namespace

LayeredNetwork::LayeredNetwork(std::vector<NodeSpec> nodes,
                               std::vector<std::vector<std::string>> layers,
                               std::vector<Edge> edges)
    : nodes_(std::move(nodes)), layers_(std::move(layers)), edges_(std::move(edges))
{
    if (layers_.size() < 2)
        structure_error("network needs at least an input and an output layer");
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].id.empty())
            structure_error("empty node id");
        if (!index_.emplace(nodes_[i].id, i).second)
            structure_error("duplicate node '" + nodes_[i].id + "'");
    }
    const std::size_t unassigned = layers_.size();
    layer_.assign(nodes_.size(), unassigned);
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        if (layers_[l].empty())
            structure_error("layer " + std::to_string(l) + " is empty");
        for (const auto &id : layers_[l]) {
            auto it = index_.find(id);
            if (it == index_.end())
                structure_error("layer lists unknown node '" + id + "'");
            if (layer_[it->second] != unassigned)
                structure_error("node '" + id + "' appears in two layers");
            layer_[it->second] = l;
        }
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (layer_[i] == unassigned)
            structure_error("node '" + nodes_[i].id + "' is in no layer");

    incoming_.assign(nodes_.size(), {});
    std::vector<std::size_t> outgoing_count(nodes_.size(), 0);
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        const auto &edge = edges_[e];
        auto s = index_.find(edge.source);
        auto t = index_.find(edge.target);
        if (s == index_.end() || t == index_.end())
            structure_error("edge " + edge.source + "->" + edge.target +
                            " references an unknown node");
        if (s->second == t->second)
            structure_error("self edge on '" + edge.source + "'");
        if (!seen.emplace(s->second, t->second).second)
            structure_error("duplicate edge " + edge.source + "->" + edge.target);
        if (layer_[t->second] != layer_[s->second] + 1)
            structure_error("edge " + edge.source + "->" + edge.target +
                            " does not connect adjacent layers");
        if (!std::isfinite(edge.weight))
            structure_error("non-finite weight on " + edge.source + "->" + edge.target);
        incoming_[t->second].push_back(e);
        ++outgoing_count[s->second];
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const auto &n = nodes_[i];
        if (n.kind != NodeKind::phantom)
            continue;
        if (n.activation.kind() != Activation::Kind::identity || n.bias != 0.0)
            structure_error("phantom '" + n.id + "' must be an identity pass-through");
        if (incoming_[i].size() != 1 || edges_[incoming_[i][0]].weight != 1.0 ||
            outgoing_count[i] != 1)
            structure_error("phantom '" + n.id +
                            "' needs one unit-weight input and one output edge");
    }
}

const NodeSpec &LayeredNetwork::node(const std::string &id) const
{
    auto it = index_.find(id);
    if (it == index_.end())
        throw Error(ErrorKind::input, "unknown node '" + id + "'");
    return nodes_[it->second];
}

std::size_t LayeredNetwork::layer_of(const std::string &id) const
{
    auto it = index_.find(id);
    if (it == index_.end())
        throw Error(ErrorKind::input, "unknown node '" + id + "'");
    return layer_[it->second];
}

std::size_t LayeredNetwork::phantom_count() const
{
    return static_cast<std::size_t>(std::count_if(
        nodes_.begin(), nodes_.end(),
        [](const NodeSpec &n) { return n.kind == NodeKind::phantom; }));
}

LayeredNetwork LayeredNetwork::with_weights(std::span<const double> weights) const
{
    if (weights.size() != edges_.size())
        throw Error(ErrorKind::input, "weight count does not match edge count");
    auto edges = edges_;
    for (std::size_t e = 0; e < edges.size(); ++e)
        edges[e].weight = weights[e];
    return LayeredNetwork(nodes_, layers_, std::move(edges));
}

ValueMap LayeredNetwork::evaluate(const ValueMap &inputs) const
{
    std::vector<double> value(nodes_.size(), 0.0);
    for (const auto &[id, v] : inputs) {
        auto it = index_.find(id);
        if (it == index_.end() || layer_[it->second] != 0)
            throw Error(ErrorKind::input, "'" + id + "' is not an input node");
        if (!std::isfinite(v))
            throw Error(ErrorKind::input, "non-finite input for '" + id + "'");
    }
    for (const auto &id : layers_.front()) {
        auto it = inputs.find(id);
        if (it == inputs.end())
            throw Error(ErrorKind::input, "missing input value for '" + id + "'");
        value[index_.at(id)] = it->second;
    }
    for (std::size_t l = 1; l < layers_.size(); ++l) {
        for (const auto &id : layers_[l]) {
            const std::size_t i = index_.at(id);
            double sum = nodes_[i].bias;
            for (std::size_t e : incoming_[i])
                sum += edges_[e].weight * value[index_.at(edges_[e].source)];
            value[i] = nodes_[i].activation(sum);
        }
    }
    ValueMap out;
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        out.emplace(nodes_[i].id, value[i]);
    return out;
}

ValueMap forward(const LayeredNetwork &net, const ValueMap &inputs)
{
    auto all = net.evaluate(inputs);
    ValueMap out;
    for (const auto &id : net.outputs())
        out.emplace(id, all.at(id));
    return out;
}

LayeredNetwork insert_phantom_nodes(const Dag &dag)
{
    const std::size_t n = dag.nodes.size();
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < n; ++i)
        if (!index.emplace(dag.nodes[i].id, i).second)
            structure_error("duplicate node '" + dag.nodes[i].id + "'");
    auto lookup = [&](const std::string &id) {
        auto it = index.find(id);
        if (it == index.end())
            structure_error("unknown node '" + id + "'");
        return it->second;
    };
    if (dag.inputs.empty() || dag.outputs.empty())
        structure_error("DAG needs at least one input and one output");

    std::vector<char> is_input(n, 0), is_output(n, 0);
    for (const auto &id : dag.inputs)
        is_input[lookup(id)] = 1;
    for (const auto &id : dag.outputs) {
        auto i = lookup(id);
        if (is_input[i])
            structure_error("'" + id + "' is both input and output");
        is_output[i] = 1;
    }

    std::vector<std::vector<std::size_t>> out_edges(n);
    std::vector<std::size_t> indegree(n, 0);
    for (std::size_t e = 0; e < dag.edges.size(); ++e) {
        auto s = lookup(dag.edges[e].source);
        auto t = lookup(dag.edges[e].target);
        if (is_input[t])
            structure_error("input '" + dag.edges[e].target + "' has an incoming edge");
        if (is_output[s])
            structure_error("output '" + dag.edges[e].source + "' has an outgoing edge");
        out_edges[s].push_back(e);
        ++indegree[t];
    }

    // Kahn's algorithm from the inputs gives both the cycle check and
    // longest-path ranks.
    std::vector<std::size_t> rank(n, 0);
    std::vector<std::size_t> order;
    std::vector<std::size_t> pending = indegree;
    for (std::size_t i = 0; i < n; ++i) {
        if (pending[i] == 0) {
            if (!is_input[i])
                structure_error("node '" + dag.nodes[i].id + "' is not reachable from any input");
            order.push_back(i);
        }
    }
    for (std::size_t k = 0; k < order.size(); ++k) {
        const auto u = order[k];
        for (auto e : out_edges[u]) {
            auto v = index.at(dag.edges[e].target);
            rank[v] = std::max(rank[v], rank[u] + 1);
            if (--pending[v] == 0)
                order.push_back(v);
        }
    }
    if (order.size() != n)
        structure_error("network contains a cycle");

    std::size_t depth = 1;
    for (std::size_t i = 0; i < n; ++i) {
        if (is_output[i])
            depth = std::max(depth, rank[i]);
        else if (!is_input[i])
            depth = std::max(depth, rank[i] + 1);
    }
    for (std::size_t i = 0; i < n; ++i)
        if (is_output[i])
            rank[i] = depth;

    std::vector<NodeSpec> nodes = dag.nodes;
    std::vector<std::vector<std::string>> layers(depth + 1);
    for (auto i : order)
        layers[rank[i]].push_back(dag.nodes[i].id);

    std::vector<Edge> edges;
    edges.reserve(dag.edges.size());
    for (const auto &edge : dag.edges) {
        const auto s = index.at(edge.source);
        const auto t = index.at(edge.target);
        const std::size_t span = rank[t] - rank[s];
        std::string prev = edge.source;
        for (std::size_t k = 1; k < span; ++k) {
            std::string id = "phantom:" + edge.source + "->" + edge.target + ":" +
                             std::to_string(k);
            while (index.count(id))
                id += "'";
            NodeSpec p;
            p.id = id;
            p.kind = NodeKind::phantom;
            p.activation = Activation::identity();
            p.bias = 0.0;
            p.bridged_source = edge.source;
            p.bridged_target = edge.target;
            nodes.push_back(p);
            layers[rank[s] + k].push_back(id);
            edges.push_back({prev, id, 1.0});
            prev = id;
        }
        edges.push_back({prev, edge.target, edge.weight});
    }
    return LayeredNetwork(std::move(nodes), std::move(layers), std::move(edges));
}

double mse(std::span<const double> actual, std::span<const double> target)
{
    if (actual.size() != target.size())
        throw Error(ErrorKind::input, "mse: length mismatch");
    if (actual.empty())
        throw Error(ErrorKind::input, "mse: empty vectors");
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double d = actual[i] - target[i];
        sum += d * d;
    }
    return sum / static_cast<double>(actual.size());
}

void TrainingTrace::record(std::map<std::string, double> params, double error)
{
    entries.push_back({entries.size(), std::move(params), error});
}

} // namespace mml

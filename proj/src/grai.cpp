#include "mml/grai.hpp"

#include "mml/errors.hpp"
#include "mml/text_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>
#include <unordered_map>

namespace mml {

namespace {

bool valid_id(const std::string &id)
{
    return !id.empty() && std::none_of(id.begin(), id.end(), [](unsigned char c) {
        return std::isspace(c) != 0;
    });
}

// Calls fn with every k-subset of items (as a sorted vector), in
// lexicographic order of positions.
template <class T, class Fn>
void for_each_combination(const std::vector<T> &items, std::size_t k, Fn &&fn)
{
    const std::size_t n = items.size();
    if (k == 0 || k > n)
        return;
    std::vector<std::size_t> pos(k);
    for (std::size_t i = 0; i < k; ++i)
        pos[i] = i;
    std::vector<T> pick(k);
    while (true) {
        for (std::size_t i = 0; i < k; ++i)
            pick[i] = items[pos[i]];
        fn(pick);
        std::size_t i = k;
        while (i > 0 && pos[i - 1] == n - k + i - 1)
            --i;
        if (i == 0)
            return;
        ++pos[i - 1];
        for (std::size_t m = i; m < k; ++m)
            pos[m] = pos[m - 1] + 1;
    }
}

} // namespace

void GrnGraph::add_node(const std::string &id)
{
    if (!valid_id(id))
        throw Error(ErrorKind::input, "invalid node id '" + id + "'");
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id);
    if (it == nodes_.end() || *it != id)
        nodes_.insert(it, id);
}

void GrnGraph::add_edge(GrnEdge edge)
{
    if (edge.sign != 1 && edge.sign != -1)
        throw Error(ErrorKind::input, "edge sign must be +1 or -1");
    if (!(edge.weight > 0.0 && edge.weight <= 1.0))
        throw Error(ErrorKind::input, "relative weight must lie in (0, 1]");
    if (!valid_id(edge.source) || !valid_id(edge.target))
        throw Error(ErrorKind::input, "invalid node id in edge");
    auto key = std::make_pair(edge.source, edge.target);
    if (edges_.count(key))
        throw Error(ErrorKind::input,
                    "duplicate edge " + edge.source + " -> " + edge.target);
    add_node(edge.source);
    add_node(edge.target);
    edges_.emplace(std::move(key), std::move(edge));
}

std::vector<GrnEdge> GrnGraph::edges() const
{
    std::vector<GrnEdge> out;
    out.reserve(edges_.size());
    for (const auto &[key, e] : edges_)
        out.push_back(e);
    return out;
}

bool GrnGraph::has_node(const std::string &id) const
{
    return std::binary_search(nodes_.begin(), nodes_.end(), id);
}

const GrnEdge *GrnGraph::find_edge(const std::string &source, const std::string &target) const
{
    auto it = edges_.find({source, target});
    return it == edges_.end() ? nullptr : &it->second;
}

GrnGraph grn_from_text(std::string_view text, const std::string &source)
{
    GrnGraph grn;
    auto lines = split(text, '\n');
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        const std::size_t lineno = ln + 1;
        auto line = lines[ln];
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (trim(line).empty() || trim(line).front() == '#')
            continue;
        auto f = split(line, '\t');
        if (f.size() != 4)
            throw ParseError(source, lineno,
                             "expected source<TAB>target<TAB>sign<TAB>weight");
        GrnEdge e;
        e.source = std::string(trim(f[0]));
        e.target = std::string(trim(f[1]));
        auto sign = trim(f[2]);
        if (sign == "+")
            e.sign = 1;
        else if (sign == "-")
            e.sign = -1;
        else
            throw ParseError(source, lineno, "sign must be + or -");
        if (!parse_real(f[3], e.weight))
            throw ParseError(source, lineno, "bad weight '" + f[3] + "'");
        if (grn.find_edge(e.source, e.target))
            throw ParseError(source, lineno,
                             "duplicate edge " + e.source + " -> " + e.target);
        try {
            grn.add_edge(std::move(e));
        } catch (const Error &err) {
            throw ParseError(source, lineno, err.what());
        }
    }
    return grn;
}

GrnGraph load_grn(const std::filesystem::path &path)
{
    auto lines = read_lines(path);
    std::string text;
    for (const auto &l : lines)
        text += l + "\n";
    return grn_from_text(text, path.string());
}

std::string grn_to_text(const GrnGraph &grn)
{
    std::string out = "# source\ttarget\tsign\tweight\n";
    for (const auto &e : grn.edges())
        out += e.source + "\t" + e.target + "\t" + (e.sign > 0 ? "+" : "-") + "\t" +
               format_real(e.weight) + "\n";
    return out;
}

LayeredNetwork extract_subnetwork(const GrnGraph &grn,
                                  const std::vector<std::string> &inputs,
                                  const std::vector<std::string> &outputs,
                                  std::size_t max_depth, Activation activation)
{
    if (inputs.empty() || outputs.empty())
        throw Error(ErrorKind::input, "extract: inputs and outputs must be non-empty");
    const auto &ids = grn.nodes();
    const std::size_t n = ids.size();
    auto idx = [&](const std::string &id) -> std::size_t {
        auto it = std::lower_bound(ids.begin(), ids.end(), id);
        if (it == ids.end() || *it != id)
            throw Error(ErrorKind::input, "extract: unknown node '" + id + "'");
        return static_cast<std::size_t>(it - ids.begin());
    };
    std::vector<char> is_input(n, 0), is_output(n, 0);
    for (const auto &id : inputs)
        is_input[idx(id)] = 1;
    for (const auto &id : outputs) {
        auto i = idx(id);
        if (is_input[i])
            throw Error(ErrorKind::input, "extract: '" + id + "' is both input and output");
        is_output[i] = 1;
    }

    const auto all_edges = grn.edges();
    std::vector<std::vector<std::size_t>> out_edges(n);
    for (std::size_t e = 0; e < all_edges.size(); ++e)
        out_edges[idx(all_edges[e].source)].push_back(e);

    // Depth-bounded DFS over simple paths; an input->output path never passes
    // through another input or output.
    std::vector<char> on_path(n, 0), keep(all_edges.size(), 0);
    std::vector<std::size_t> path_edges;
    std::function<void(std::size_t)> dfs = [&](std::size_t u) {
        if (path_edges.size() >= max_depth)
            return;
        for (auto e : out_edges[u]) {
            const auto v = idx(all_edges[e].target);
            if (on_path[v] || is_input[v])
                continue;
            path_edges.push_back(e);
            if (is_output[v]) {
                for (auto pe : path_edges)
                    keep[pe] = 1;
            } else {
                on_path[v] = 1;
                dfs(v);
                on_path[v] = 0;
            }
            path_edges.pop_back();
        }
    };
    for (std::size_t i = 0; i < n; ++i) {
        if (!is_input[i])
            continue;
        on_path[i] = 1;
        dfs(i);
        on_path[i] = 0;
    }

    std::set<std::string> used;
    Dag dag;
    for (std::size_t e = 0; e < all_edges.size(); ++e) {
        if (!keep[e])
            continue;
        used.insert(all_edges[e].source);
        used.insert(all_edges[e].target);
        dag.edges.push_back({all_edges[e].source, all_edges[e].target,
                             all_edges[e].signed_weight()});
    }
    if (dag.edges.empty())
        throw Error(ErrorKind::empty_result,
                    "extract: no path of at most " + std::to_string(max_depth) +
                        " hops joins the inputs to the outputs");
    for (const auto &id : used) {
        NodeSpec node;
        node.id = id;
        node.activation = activation;
        dag.nodes.push_back(node);
        if (is_input[idx(id)])
            dag.inputs.push_back(id);
        else if (is_output[idx(id)])
            dag.outputs.push_back(id);
    }
    return insert_phantom_nodes(dag);
}

EnvironmentCondition environment_from_text(std::string_view text, std::string name,
                                           const std::string &source)
{
    EnvironmentCondition cond;
    cond.name = std::move(name);
    auto lines = split(text, '\n');
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        auto line = trim(lines[ln]);
        if (line.empty() || line.front() == '#')
            continue;
        auto f = split(line, '\t');
        if (f.size() != 3)
            throw ParseError(source, ln + 1, "expected source<TAB>target<TAB>multiplier");
        WeightModifier m{std::string(trim(f[0])), std::string(trim(f[1])), 0.0};
        if (!parse_real(f[2], m.multiplier) || !std::isfinite(m.multiplier) ||
            !(m.multiplier > 0.0))
            throw ParseError(source, ln + 1, "multiplier must be a positive number");
        cond.modifiers.push_back(std::move(m));
    }
    return cond;
}

EnvironmentCondition load_environment(const std::filesystem::path &path, std::string name)
{
    auto lines = read_lines(path);
    std::string text;
    for (const auto &l : lines)
        text += l + "\n";
    if (name.empty())
        name = path.stem().string();
    return environment_from_text(text, std::move(name), path.string());
}

LayeredNetwork apply_environment(const LayeredNetwork &net, const EnvironmentCondition &cond)
{
    const auto &edges = net.edges();
    std::vector<double> weights;
    weights.reserve(edges.size());
    for (const auto &e : edges)
        weights.push_back(e.weight);

    std::vector<std::string> unmatched;
    for (const auto &m : cond.modifiers) {
        if (!std::isfinite(m.multiplier) || !(m.multiplier > 0.0))
            throw Error(ErrorKind::input, "environment multiplier must be positive");
        bool matched = false;
        for (std::size_t k = 0; k < edges.size(); ++k) {
            const auto &e = edges[k];
            if (e.target != m.target)
                continue;
            const auto &src = net.node(e.source);
            const bool direct = e.source == m.source;
            const bool bridged = src.kind == NodeKind::phantom &&
                                 src.bridged_source == m.source &&
                                 src.bridged_target == m.target;
            if (direct || bridged) {
                weights[k] *= m.multiplier;
                matched = true;
                break;
            }
        }
        if (!matched)
            unmatched.push_back(m.source + "->" + m.target);
    }
    if (!unmatched.empty()) {
        std::string list;
        for (const auto &u : unmatched)
            list += (list.empty() ? "" : ", ") + u;
        throw Error(ErrorKind::selector,
                    "environment '" + cond.name + "' selects missing edges: " + list);
    }
    return net.with_weights(weights);
}

std::vector<MinedStructure> mine_structures(const GrnGraph &grn, SubnetworkQuery q)
{
    const auto &ids = grn.nodes();
    const std::size_t n = ids.size();
    if (q.inputs == 0 || q.outputs == 0)
        throw Error(ErrorKind::input, "mine: i and j must be at least 1");
    if (q.inputs > n || q.outputs > n)
        throw Error(ErrorKind::input, "mine: i or j exceeds the node count " +
                                          std::to_string(n));

    std::unordered_map<std::string, std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i)
        idx.emplace(ids[i], i);
    std::vector<std::vector<std::size_t>> succ(n), pred(n);
    for (const auto &e : grn.edges()) {
        succ[idx[e.source]].push_back(idx[e.target]);
        pred[idx[e.target]].push_back(idx[e.source]);
    }
    for (auto &v : succ)
        std::sort(v.begin(), v.end());
    for (auto &v : pred)
        std::sort(v.begin(), v.end());

    // Output groups: j-sets of nodes sharing at least one predecessor.
    std::set<std::vector<std::size_t>> groups;
    for (std::size_t p = 0; p < n; ++p)
        for_each_combination(succ[p], q.outputs,
                             [&](const std::vector<std::size_t> &o) { groups.insert(o); });

    std::vector<MinedStructure> result;
    for (const auto &group : groups) {
        std::vector<std::size_t> common = pred[group.front()];
        for (std::size_t k = 1; k < group.size() && !common.empty(); ++k) {
            std::vector<std::size_t> next;
            std::set_intersection(common.begin(), common.end(), pred[group[k]].begin(),
                                  pred[group[k]].end(), std::back_inserter(next));
            common = std::move(next);
        }
        std::vector<std::size_t> candidates;
        std::set_difference(common.begin(), common.end(), group.begin(), group.end(),
                            std::back_inserter(candidates));
        for_each_combination(candidates, q.inputs, [&](const std::vector<std::size_t> &in) {
            MinedStructure s;
            for (auto i : in)
                s.inputs.push_back(ids[i]);
            for (auto o : group)
                s.outputs.push_back(ids[o]);
            result.push_back(std::move(s));
        });
    }
    std::sort(result.begin(), result.end());
    return result;
}

LayeredNetwork materialize(const GrnGraph &grn, const MinedStructure &s, Activation activation)
{
    std::vector<NodeSpec> nodes;
    std::vector<Edge> edges;
    for (const auto &id : s.inputs)
        nodes.push_back({id, NodeKind::real, activation, 0.0, {}, {}});
    for (const auto &id : s.outputs)
        nodes.push_back({id, NodeKind::real, activation, 0.0, {}, {}});
    for (const auto &in : s.inputs)
        for (const auto &out : s.outputs) {
            const auto *e = grn.find_edge(in, out);
            if (!e)
                throw Error(ErrorKind::structure,
                            "structure is not fully connected: missing " + in + "->" + out);
            edges.push_back({in, out, e->signed_weight()});
        }
    return LayeredNetwork(std::move(nodes), {s.inputs, s.outputs}, std::move(edges));
}

std::vector<StructureCount> count_structures(const GrnGraph &grn,
                                             std::pair<std::size_t, std::size_t> i_range,
                                             std::pair<std::size_t, std::size_t> j_range)
{
    if (i_range.first == 0 || j_range.first == 0)
        throw Error(ErrorKind::input, "count: i and j start at 1");
    if (i_range.first > i_range.second || j_range.first > j_range.second)
        throw Error(ErrorKind::input, "count: empty range");
    std::vector<StructureCount> rows;
    for (std::size_t i = i_range.first; i <= i_range.second; ++i)
        for (std::size_t j = j_range.first; j <= j_range.second; ++j) {
            // a query larger than the graph cannot match anything
            const bool fits = i <= grn.node_count() && j <= grn.node_count();
            const std::size_t count =
                fits ? mine_structures(grn, {i, j}).size() : std::size_t{0};
            rows.push_back({i, j, count});
        }
    return rows;
}

std::string counts_to_csv(const std::vector<StructureCount> &rows)
{
    std::string out = "i,j,count\n";
    for (const auto &r : rows)
        out += std::to_string(r.inputs) + "," + std::to_string(r.outputs) + "," +
               std::to_string(r.count) + "\n";
    return out;
}

std::string structures_to_text(const std::vector<MinedStructure> &structures)
{
    std::string out = "# inputs\toutputs\n";
    for (const auto &s : structures) {
        std::string in, o;
        for (const auto &id : s.inputs)
            in += (in.empty() ? "" : ",") + id;
        for (const auto &id : s.outputs)
            o += (o.empty() ? "" : ",") + id;
        out += in + "\t" + o + "\n";
    }
    return out;
}

} // namespace mml

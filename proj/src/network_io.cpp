#include "mml/network_io.hpp"

#include "mml/errors.hpp"
#include "mml/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

namespace mml {

std::string network_to_text(const LayeredNetwork &net)
{
    std::ostringstream out;
    out << "# layered network: " << net.layers().size() << " layers, "
        << net.nodes().size() << " nodes, " << net.edges().size() << " edges\n";
    for (const auto &layer : net.layers()) {
        for (const auto &id : layer) {
            const auto &n = net.node(id);
            out << "node " << n.id << ' '
                << (n.kind == NodeKind::phantom ? "phantom" : "real") << ' '
                << n.activation.to_text() << ' ' << format_real(n.bias);
            if (n.kind == NodeKind::phantom && !n.bridged_source.empty())
                out << ' ' << n.bridged_source << ' ' << n.bridged_target;
            out << '\n';
        }
    }
    for (const auto &e : net.edges())
        out << "edge " << e.source << ' ' << e.target << ' ' << format_real(e.weight)
            << '\n';
    return out.str();
}

LayeredNetwork network_from_text(std::string_view text, const std::string &source)
{
    std::vector<NodeSpec> nodes;
    std::vector<Edge> edges;
    std::unordered_map<std::string, std::size_t> index;

    auto lines = split(text, '\n');
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        auto line = trim(lines[ln]);
        if (line.empty() || line.front() == '#')
            continue;
        auto tok = split_ws(line);
        const std::size_t lineno = ln + 1;
        if (tok[0] == "node") {
            if (tok.size() != 5 && tok.size() != 7)
                throw ParseError(source, lineno, "expected: node <id> <kind> <activation> <bias>");
            NodeSpec n;
            n.id = tok[1];
            if (tok[2] == "real")
                n.kind = NodeKind::real;
            else if (tok[2] == "phantom")
                n.kind = NodeKind::phantom;
            else
                throw ParseError(source, lineno, "unknown node kind '" + tok[2] + "'");
            try {
                n.activation = Activation::from_text(tok[3]);
            } catch (const Error &e) {
                throw ParseError(source, lineno, e.what());
            }
            if (!parse_real(tok[4], n.bias) || !std::isfinite(n.bias))
                throw ParseError(source, lineno, "bad bias '" + tok[4] + "'");
            if (tok.size() == 7) {
                if (n.kind != NodeKind::phantom)
                    throw ParseError(source, lineno, "only phantom nodes name a bridged edge");
                n.bridged_source = tok[5];
                n.bridged_target = tok[6];
            }
            if (!index.emplace(n.id, nodes.size()).second)
                throw ParseError(source, lineno, "duplicate node '" + n.id + "'");
            nodes.push_back(std::move(n));
        } else if (tok[0] == "edge") {
            if (tok.size() != 4)
                throw ParseError(source, lineno, "expected: edge <source> <target> <weight>");
            Edge e{tok[1], tok[2], 0.0};
            if (!parse_real(tok[3], e.weight) || !std::isfinite(e.weight))
                throw ParseError(source, lineno, "bad weight '" + tok[3] + "'");
            edges.push_back(std::move(e));
        } else {
            throw ParseError(source, lineno, "unknown record '" + tok[0] + "'");
        }
    }
    if (nodes.empty())
        throw Error(ErrorKind::structure, source + ": network has no nodes");

    // longest-path ranks
    const std::size_t n = nodes.size();
    std::vector<std::vector<std::size_t>> succ(n);
    std::vector<std::size_t> indegree(n, 0);
    for (const auto &e : edges) {
        auto s = index.find(e.source);
        auto t = index.find(e.target);
        if (s == index.end() || t == index.end())
            throw Error(ErrorKind::structure,
                        source + ": edge " + e.source + "->" + e.target + " names an undeclared node");
        succ[s->second].push_back(t->second);
        ++indegree[t->second];
    }
    std::vector<std::size_t> rank(n, 0), order;
    for (std::size_t i = 0; i < n; ++i)
        if (indegree[i] == 0)
            order.push_back(i);
    for (std::size_t k = 0; k < order.size(); ++k)
        for (auto v : succ[order[k]]) {
            rank[v] = std::max(rank[v], rank[order[k]] + 1);
            if (--indegree[v] == 0)
                order.push_back(v);
        }
    if (order.size() != n)
        throw Error(ErrorKind::structure, source + ": network contains a cycle");
    const std::size_t depth = *std::max_element(rank.begin(), rank.end());
    std::vector<std::vector<std::string>> layers(depth + 1);
    for (std::size_t i = 0; i < n; ++i)
        layers[rank[i]].push_back(nodes[i].id);
    return LayeredNetwork(std::move(nodes), std::move(layers), std::move(edges));
}

LayeredNetwork load_network(const std::filesystem::path &path)
{
    auto lines = read_lines(path);
    std::string text;
    for (const auto &l : lines)
        text += l + "\n";
    return network_from_text(text, path.string());
}

void save_network(const std::filesystem::path &path, const LayeredNetwork &net)
{
    write_file_atomic(path, network_to_text(net));
}

} // namespace mml

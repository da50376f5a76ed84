#ifndef MML_NETWORK_IO_HPP
#define MML_NETWORK_IO_HPP

// Line-oriented text form of a LayeredNetwork:
//
//   # comment
//   node <id> <real|phantom> <activation> <bias> [<bridged-source> <bridged-target>]
//   edge <source> <target> <weight>
//
// <activation> is identity, logsig, hill:<n>:<K> or threshold:<theta>.
// Phantom lines may name the original edge they were inserted into.
// Layers are not stored: every node's layer is its longest-path rank from
// the nodes without incoming edges, and the deepest layer is the output
// layer. Nodes within a layer keep their file order.

#include "mml/ann.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace mml {

std::string network_to_text(const LayeredNetwork &net);
LayeredNetwork network_from_text(std::string_view text,
                                 const std::string &source = "<network>");

LayeredNetwork load_network(const std::filesystem::path &path);
void save_network(const std::filesystem::path &path, const LayeredNetwork &net);

} // namespace mml

#endif

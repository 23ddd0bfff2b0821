#include "rosdyn/builders.hpp"

#include <sstream>
#include <stdexcept>

namespace rosdyn {

void RepressionGraph::validate() const {
  if (nodes < 1) throw std::invalid_argument("repression graph needs at least one node");
  if (sharpness < 1) throw std::invalid_argument("sharpness c must be >= 1");
  for (const auto& [a, b] : edges) {
    if (a == b) throw std::invalid_argument("self-loop " + std::to_string(a) + " -> " +
                                            std::to_string(b) + " not allowed");
    if (a < 1 || a > nodes || b < 1 || b > nodes)
      throw std::invalid_argument("edge references node outside 1.." + std::to_string(nodes));
  }
}

RepressionGraph parse_edge_list(const std::string& text, int sharpness) {
  RepressionGraph g;
  g.sharpness = sharpness;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    int a, b;
    if (!(ls >> a)) continue;  // blank line
    if (!(ls >> b))
      throw std::invalid_argument("edge list line " + std::to_string(lineno) +
                                  ": expected 'a b'");
    int extra;
    if (ls >> extra)
      throw std::invalid_argument("edge list line " + std::to_string(lineno) +
                                  ": trailing tokens");
    g.edges.emplace_back(a, b);
    g.nodes = std::max({g.nodes, a, b});
  }
  g.validate();
  return g;
}

std::string repressilator_bidder_name(int node) { return "b" + std::to_string(node); }

ItemSpec build_edge_item(int a, int b, int sharpness) {
  if (a == b) throw std::invalid_argument("edge item needs two distinct bidders");
  if (sharpness < 1) throw std::invalid_argument("sharpness c must be >= 1");
  ItemSpec item;
  item.values[repressilator_bidder_name(a)] = ValueSpec::beta(sharpness, 2 * sharpness);
  item.values[repressilator_bidder_name(b)] = ValueSpec::beta(2 * sharpness, sharpness);
  return item;
}

MarketInstance build_repressilator(const RepressionGraph& g) {
  g.validate();
  MarketInstance inst;
  inst.lambda = 1.0;
  inst.bidder_names.reserve(g.nodes);
  for (int i = 1; i <= g.nodes; ++i) inst.bidder_names.push_back(repressilator_bidder_name(i));
  for (const auto& [a, b] : g.edges) inst.items.push_back(build_edge_item(a, b, g.sharpness));
  return inst;
}

MarketInstance build_cycle(int n, int sharpness) {
  if (n < 2) throw std::invalid_argument("cycle needs n >= 2");
  RepressionGraph g;
  g.nodes = n;
  g.sharpness = sharpness;
  for (int i = 1; i <= n; ++i) g.edges.emplace_back(i, i % n + 1);
  return build_repressilator(g);
}

namespace {

RepressionGraph coupled_graph(int n_groups, const std::vector<std::pair<int, int>>& inter,
                              int sharpness) {
  if (n_groups < 1) throw std::invalid_argument("need at least one group");
  RepressionGraph g;
  g.nodes = 3 * n_groups;
  g.sharpness = sharpness;
  for (int grp = 0; grp < n_groups; ++grp) {
    const int base = 3 * grp;
    g.edges.emplace_back(base + 1, base + 2);
    g.edges.emplace_back(base + 2, base + 3);
    g.edges.emplace_back(base + 3, base + 1);
  }
  for (const auto& e : inter) g.edges.push_back(e);
  g.validate();
  return g;
}

}  // namespace

MarketInstance build_coupled(int n_groups, const std::vector<std::pair<int, int>>& inter_edges,
                             int sharpness) {
  return build_repressilator(coupled_graph(n_groups, inter_edges, sharpness));
}

RepressionGraph coupling_preset_graph(char which, int sharpness) {
  switch (which) {
    case 'A':
    case 'a':
      return coupled_graph(3, {{3, 4}, {5, 7}, {8, 5}}, sharpness);
    case 'B':
    case 'b':
      return coupled_graph(3, {{3, 4}, {5, 7}, {8, 4}}, sharpness);
    default:
      throw std::invalid_argument("coupling preset must be 'A' or 'B'");
  }
}

MarketInstance coupling_preset(char which, int sharpness) {
  return build_repressilator(coupling_preset_graph(which, sharpness));
}

}  // namespace rosdyn

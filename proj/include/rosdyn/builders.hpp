#pragma once

// Market instances built from repression digraphs: an edge a -> b becomes an
// item that b usually wins with a as the price setter, so raising m_a lowers
// U_b. Single edges, n-cycles, and coupled three-cycles.

#include <string>
#include <utility>
#include <vector>

#include "rosdyn/market.hpp"

namespace rosdyn {

struct RepressionGraph {
  int nodes = 0;
  std::vector<std::pair<int, int>> edges;  // (a, b) means a represses b; 1-based
  int sharpness = 7;                       // Beta sharpness c

  void validate() const;  // throws on self-loops / bad indices
};

// Edge-list text: one "a b" pair per line; '#' starts a comment.
RepressionGraph parse_edge_list(const std::string& text, int sharpness);

std::string repressilator_bidder_name(int node);  // "b<node>"

// Item where only a and b are interested: v_a ~ Beta(c, 2c), v_b ~ Beta(2c, c).
ItemSpec build_edge_item(int a, int b, int sharpness);

// n bidders, one edge item per edge, second-price auction.
MarketInstance build_repressilator(const RepressionGraph& g);

// Directed cycle 1 -> 2 -> ... -> n -> 1.
MarketInstance build_cycle(int n, int sharpness = 7);

// Groups of consecutive nodes (3g+1, 3g+2, 3g+3), each an internal 3-cycle,
// plus the listed inter-group repression edges.
MarketInstance build_coupled(int n_groups, const std::vector<std::pair<int, int>>& inter_edges,
                             int sharpness = 7);

// The two 9-bidder couplings of three 3-cycles. Preset A couples via
// 3->4, 5->7, 8->5; preset B via 3->4, 5->7, 8->4.
MarketInstance coupling_preset(char which, int sharpness = 7);
RepressionGraph coupling_preset_graph(char which, int sharpness = 7);

}  // namespace rosdyn

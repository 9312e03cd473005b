#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "corex/hierarchy.hpp"

namespace corex {

struct GraphNode {
  std::string id;
  std::size_t layer = 0;  // 0 for observed columns
  double size = 0.0;      // factor contribution; 0 for observed columns
  std::map<std::string, std::string> metadata;
};

struct GraphEdge {
  std::string child;
  std::string parent;
  double weight = 0.0;  // alpha_{i,j} * I(X_i : Y_j)
};

struct Graph {
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;
};

using NodeMetadata = std::map<std::string, std::map<std::string, std::string>>;

/// Name of factor j in layer k (1-based layers).
std::string factor_node_id(std::size_t layer, std::size_t factor);

/// Edges with zero alpha or weight below `edge_threshold` are left out.
Graph build_graph(const HierarchyModel& model, double edge_threshold = 0.0, const NodeMetadata& metadata = {});

std::string graph_to_dot(const Graph& graph);
std::string graph_to_json(const Graph& graph);

/// {"node id": {"key": "value", ...}, ...}
NodeMetadata load_node_metadata(const std::filesystem::path& path);

}  // namespace corex

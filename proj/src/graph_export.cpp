#include "corex/graph_export.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "corex/common.hpp"
#include "json.hpp"

namespace corex {
namespace {

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string factor_node_id(std::size_t layer, std::size_t factor) {
  return "L" + std::to_string(layer) + "_Y" + std::to_string(factor);
}

Graph build_graph(const HierarchyModel& model, double edge_threshold, const NodeMetadata& metadata) {
  if (model.layers.empty()) throw ArgumentError("cannot export an empty model");
  Graph g;
  std::vector<std::string> below;
  for (const ColumnSchema& c : model.layers.front().input_schema) {
    below.push_back(c.name);
    g.nodes.push_back(GraphNode{c.name, 0, 0.0, {}});
  }
  for (std::size_t k = 0; k < model.layers.size(); ++k) {
    const LayerModel& layer = model.layers[k];
    std::vector<std::string> ids;
    for (std::size_t j = 0; j < layer.factors(); ++j) {
      ids.push_back(factor_node_id(k + 1, j));
      g.nodes.push_back(GraphNode{ids.back(), k + 1, layer.factor_contribution[j], {}});
    }
    for (std::size_t i = 0; i < layer.alpha.variables(); ++i) {
      for (std::size_t j = 0; j < layer.alpha.factors(); ++j) {
        const double a = layer.alpha(i, j);
        if (a <= 0.0) continue;
        const double w = a * std::max(0.0, layer.mi(i, j));
        if (w < edge_threshold) continue;
        g.edges.push_back(GraphEdge{below[i], ids[j], w});
      }
    }
    below = std::move(ids);
  }
  for (GraphNode& node : g.nodes) {
    if (auto it = metadata.find(node.id); it != metadata.end()) node.metadata = it->second;
  }
  return g;
}

std::string graph_to_dot(const Graph& graph) {
  double max_size = 0.0;
  double max_weight = 0.0;
  for (const GraphNode& n : graph.nodes) max_size = std::max(max_size, n.size);
  for (const GraphEdge& e : graph.edges) max_weight = std::max(max_weight, e.weight);

  std::ostringstream out;
  out << "digraph corex {\n  rankdir=BT;\n  node [shape=ellipse];\n";
  for (const GraphNode& n : graph.nodes) {
    const double width = 0.3 + (max_size > 0.0 ? 1.7 * n.size / max_size : 0.0);
    out << "  " << quoted(n.id) << " [level=" << n.layer << ", width=" << fixed(width)
        << ", size_nats=" << fixed(n.size);
    if (n.layer == 0) out << ", shape=box";
    auto label = n.metadata.find("label");
    if (label != n.metadata.end()) out << ", label=" << quoted(label->second);
    out << "];\n";
  }
  for (const GraphEdge& e : graph.edges) {
    const double pen = 0.5 + (max_weight > 0.0 ? 4.5 * e.weight / max_weight : 0.0);
    out << "  " << quoted(e.child) << " -> " << quoted(e.parent) << " [penwidth=" << fixed(pen)
        << ", weight_nats=" << fixed(e.weight) << "];\n";
  }
  out << "}\n";
  return out.str();
}

std::string graph_to_json(const Graph& graph) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const GraphNode& n : graph.nodes) {
    nlohmann::json node = {{"id", n.id}, {"layer", n.layer}, {"size", n.size}};
    if (!n.metadata.empty()) node["metadata"] = n.metadata;
    nodes.push_back(std::move(node));
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const GraphEdge& e : graph.edges) {
    edges.push_back({{"child", e.child}, {"parent", e.parent}, {"weight", e.weight}});
  }
  return nlohmann::json{{"nodes", nodes}, {"edges", edges}}.dump(1);
}

NodeMetadata load_node_metadata(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open metadata file " + path.string());
  try {
    const nlohmann::json doc = nlohmann::json::parse(in);
    if (!doc.is_object()) throw IngestionError("metadata file " + path.string() + " must hold a JSON object");
    NodeMetadata out;
    for (const auto& [id, fields] : doc.items()) {
      if (!fields.is_object()) throw IngestionError("metadata for node '" + id + "' must be a JSON object");
      for (const auto& [key, value] : fields.items()) {
        out[id][key] = value.is_string() ? value.get<std::string>() : value.dump();
      }
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw IngestionError("malformed metadata file " + path.string() + ": " + e.what());
  }
}

}  // namespace corex

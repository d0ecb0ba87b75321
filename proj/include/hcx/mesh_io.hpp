#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "hcx/mesh.hpp"

namespace hcx {

/// Serializes a mesh as JSON with 0-based indices and shortest round-trip
/// decimals. Keys: nodes, triangles, boundary_edges, num_inclusions.
inline std::string mesh_to_json(const Mesh& mesh) {
  std::ostringstream os;
  os << "{\n  \"nodes\": [";
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    os << (i ? ",\n    " : "\n    ") << '[' << format_double(mesh.nodes[i].x()) << ", "
       << format_double(mesh.nodes[i].y()) << ']';
  }
  os << "\n  ],\n  \"triangles\": [";
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const Triangle& tri = mesh.triangles[t];
    os << (t ? ",\n    " : "\n    ") << '[' << tri.v[0] << ", " << tri.v[1] << ", " << tri.v[2]
       << ", " << tri.tag << ']';
  }
  os << "\n  ],\n  \"boundary_edges\": [";
  for (std::size_t e = 0; e < mesh.boundary_edges.size(); ++e) {
    const BoundaryEdge& be = mesh.boundary_edges[e];
    os << (e ? ",\n    " : "\n    ") << '[' << be.v[0] << ", " << be.v[1] << ", " << be.tag << ']';
  }
  os << "\n  ],\n  \"num_inclusions\": " << mesh.num_inclusions << "\n}\n";
  return os.str();
}

inline void write_mesh_json(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  out << mesh_to_json(mesh);
}

/// Parses and validates a mesh; throws ValidationError on structural problems
/// and ConfigError on malformed JSON.
inline Mesh mesh_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("mesh JSON parse error: ") + e.what());
  }
  Mesh mesh;
  try {
    for (const auto& n : j.at("nodes"))
      mesh.nodes.emplace_back(n.at(0).get<double>(), n.at(1).get<double>());
    for (const auto& t : j.at("triangles"))
      mesh.triangles.push_back(
          {{t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<int>()}, t.at(3).get<int>()});
    for (const auto& e : j.at("boundary_edges"))
      mesh.boundary_edges.push_back({{e.at(0).get<int>(), e.at(1).get<int>()}, e.at(2).get<int>()});
    mesh.num_inclusions = j.at("num_inclusions").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("mesh JSON structure error: ") + e.what());
  }
  validate_mesh(mesh);
  return mesh;
}

inline Mesh read_mesh_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return mesh_from_json(ss.str());
}

}  // namespace hcx

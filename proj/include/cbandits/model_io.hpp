#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cbandits/errors.hpp"
#include "cbandits/model.hpp"

namespace cbandits {

/// Model file schema:
///   {"n_observed": N, "edges": [[p,c],...], "reward": idx,
///    "latents": [{"p": theta, "children": [...]}, ...],
///    "cpts": {"i": [P(V_i=1 | pa) in bitmask order], ...}}
/// Bitmask order: the parent with the smallest topological index is bit 0;
/// latent parents follow the observed ones, in latent-list order.
inline CausalModel model_from_json(const nlohmann::json& doc) {
  try {
    const int n = doc.at("n_observed").get<int>();
    std::vector<Edge> edges;
    for (const auto& e : doc.at("edges")) {
      if (e.size() != 2) throw BadConfig("each edge must be a [parent, child] pair");
      edges.push_back({e[0].get<int>(), e[1].get<int>()});
    }
    std::vector<LatentVertex> latents;
    if (doc.contains("latents")) {
      for (const auto& l : doc.at("latents")) {
        LatentVertex lat;
        lat.p_one = l.at("p").get<double>();
        lat.children = l.at("children").get<std::vector<int>>();
        latents.push_back(std::move(lat));
      }
    }
    std::vector<std::vector<double>> cpts(static_cast<std::size_t>(n));
    for (const auto& [key, table] : doc.at("cpts").items()) {
      const int v = std::stoi(key);
      if (v < 0 || v >= n) throw BadConfig("cpt key out of range");
      cpts[static_cast<std::size_t>(v)] = table.get<std::vector<double>>();
    }
    return CausalModel(n, std::move(edges), doc.at("reward").get<int>(), std::move(latents),
                       std::move(cpts));
  } catch (const nlohmann::json::exception& e) {
    throw BadConfig(std::string("malformed model document: ") + e.what());
  }
}

inline nlohmann::json model_to_json(const CausalModel& model) {
  nlohmann::json doc;
  doc["n_observed"] = model.graph().num_vertices();
  doc["reward"] = model.graph().reward_vertex();
  auto& edges = doc["edges"] = nlohmann::json::array();
  for (const auto& [p, c] : model.graph().directed_edges()) edges.push_back({p, c});
  auto& latents = doc["latents"] = nlohmann::json::array();
  for (const auto& lat : model.latents())
    latents.push_back({{"p", lat.p_one}, {"children", lat.children}});
  auto& cpts = doc["cpts"] = nlohmann::json::object();
  for (int v = 0; v < model.graph().num_vertices(); ++v)
    cpts[std::to_string(v)] = model.cpts()[static_cast<std::size_t>(v)];
  return doc;
}

inline CausalModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw BadConfig("cannot open model file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw BadConfig(std::string("model file is not valid JSON: ") + e.what());
  }
  return model_from_json(doc);
}

inline void save_model(const CausalModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw BadConfig("cannot write model file: " + path);
  out << model_to_json(model).dump(2) << '\n';
}

}  // namespace cbandits

#include "dnnpart/graph.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <queue>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "dnnpart/error.hpp"

namespace dnnpart {

namespace {

using nlohmann::json;

constexpr std::pair<LayerKind, std::string_view> kKindNames[] = {
    {LayerKind::fully_connected, "fully-connected"},
    {LayerKind::convolution, "convolution"},
    {LayerKind::pooling, "pooling"},
    {LayerKind::activation, "activation"},
    {LayerKind::softmax, "softmax"},
    {LayerKind::input, "input"},
    {LayerKind::other, "other"},
};

std::string describe(const LayerProfile& layer) {
  std::ostringstream os;
  os << "layer '" << layer.name << "' (id " << layer.id.value << ")";
  return os.str();
}

// Follows unresolved inputs from a Kahn leftover until a layer repeats.
std::vector<std::uint32_t> find_cycle(const std::vector<LayerProfile>& layers,
                                      const std::vector<std::size_t>& pending) {
  std::uint32_t start = 0;
  while (pending[start] == 0) ++start;
  std::vector<std::uint32_t> path;
  std::vector<int> seen_at(layers.size(), -1);
  std::uint32_t node = start;
  while (seen_at[node] < 0) {
    seen_at[node] = static_cast<int>(path.size());
    path.push_back(node);
    for (LayerId in : layers[node].inputs) {
      if (pending[in.value] > 0) {
        node = in.value;
        break;
      }
    }
  }
  std::vector<std::uint32_t> cycle(path.begin() + seen_at[node], path.end());
  std::reverse(cycle.begin(), cycle.end());
  return cycle;
}

}  // namespace

std::string_view to_string(LayerKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "other";
}

std::optional<LayerKind> parse_layer_kind(std::string_view text) {
  for (const auto& [k, name] : kKindNames) {
    if (name == text) return k;
  }
  return std::nullopt;
}

DnnGraph::DnnGraph(std::string name, std::vector<LayerProfile> layers)
    : name_(std::move(name)), layers_(std::move(layers)) {
  const std::size_t n = layers_.size();
  if (n == 0) throw ValidationError("graph '" + name_ + "' has no layers");

  std::set<std::string, std::less<>> profile_names;
  for (std::size_t i = 0; i < n; ++i) {
    LayerProfile& layer = layers_[i];
    if (layer.id.value != i) {
      throw ValidationError(describe(layer) + ": ids must be dense and in declaration order");
    }
    std::sort(layer.inputs.begin(), layer.inputs.end());
    layer.inputs.erase(std::unique(layer.inputs.begin(), layer.inputs.end()), layer.inputs.end());
    for (LayerId in : layer.inputs) {
      if (in.value >= n) {
        throw ValidationError(describe(layer) + ": input id " + std::to_string(in.value) +
                              " does not exist");
      }
    }
    for (const auto& [profile, seconds] : layer.base_latency) {
      if (!(seconds >= 0.0)) {
        throw ValidationError(describe(layer) + ": negative base latency for profile '" +
                              profile + "'");
      }
      profile_names.insert(profile);
    }
  }

  profiles_.assign(profile_names.begin(), profile_names.end());
  latency_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(profiles_.size()));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < profiles_.size(); ++p) {
      auto it = layers_[i].base_latency.find(profiles_[p]);
      if (it == layers_[i].base_latency.end()) {
        throw ValidationError(describe(layers_[i]) + ": missing base latency for device profile '" +
                              profiles_[p] + "'");
      }
      latency_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p)) = it->second;
    }
  }

  consumers_.assign(n, {});
  for (const LayerProfile& layer : layers_) {
    for (LayerId in : layer.inputs) consumers_[in.value].push_back(layer.id);
  }

  // Kahn's algorithm with smallest-id tie-break.
  std::vector<std::size_t> pending(n);
  std::priority_queue<std::uint32_t, std::vector<std::uint32_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < n; ++i) {
    pending[i] = layers_[i].inputs.size();
    if (pending[i] == 0) ready.push(static_cast<std::uint32_t>(i));
  }
  topo_.reserve(n);
  while (!ready.empty()) {
    const std::uint32_t v = ready.top();
    ready.pop();
    topo_.push_back(LayerId{v});
    for (LayerId c : consumers_[v]) {
      if (--pending[c.value] == 0) ready.push(c.value);
    }
  }
  if (topo_.size() != n) {
    std::string msg = "graph '" + name_ + "' contains a cycle: ";
    const auto cycle = find_cycle(layers_, pending);
    for (std::size_t i = 0; i < cycle.size(); ++i) {
      msg += (i ? " -> " : "") + describe(layers_[cycle[i]]);
    }
    msg += " -> " + describe(layers_[cycle.front()]);
    throw ValidationError(msg);
  }

  std::vector<std::string> sources, sinks;
  for (std::size_t i = 0; i < n; ++i) {
    if (layers_[i].inputs.empty()) sources.push_back(describe(layers_[i]));
    if (consumers_[i].empty()) sinks.push_back(describe(layers_[i]));
  }
  auto join = [](const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
    return out;
  };
  if (sources.size() != 1) {
    throw ValidationError("graph '" + name_ + "' must have exactly one input layer, found " +
                          std::to_string(sources.size()) + ": " + join(sources));
  }
  if (sinks.size() != 1) {
    throw ValidationError("graph '" + name_ + "' must have exactly one output layer, found " +
                          std::to_string(sinks.size()) + ": " + join(sinks));
  }

  // A single-source DAG reaches every layer from that source, so it is
  // weakly connected; the forward sweep below confirms it.
  std::vector<bool> reached(n, false);
  reached[topo_.front().value] = true;
  for (LayerId v : topo_) {
    if (!reached[v.value]) {
      throw ValidationError(describe(layers_[v.value]) + " is not connected to the input layer");
    }
    for (LayerId c : consumers_[v.value]) reached[c.value] = true;
  }

  position_.resize(n);
  for (std::size_t i = 0; i < n; ++i) position_[topo_[i].value] = i;
}

std::optional<Eigen::Index> DnnGraph::profile_column(std::string_view profile) const {
  auto it = std::lower_bound(profiles_.begin(), profiles_.end(), profile);
  if (it == profiles_.end() || *it != profile) return std::nullopt;
  return static_cast<Eigen::Index>(it - profiles_.begin());
}

DnnGraph load_graph(std::string_view document, std::vector<std::string>* warnings) {
  json doc;
  try {
    doc = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("model document: ") + e.what());
  }
  auto warn = [&](std::string msg) {
    if (warnings) warnings->push_back(std::move(msg));
  };

  if (!doc.is_object()) throw ParseError("model document: top level must be an object");
  if (!doc.contains("layers") || !doc["layers"].is_array()) {
    throw ParseError("model document: missing 'layers' array");
  }
  std::string name = "model";
  if (doc.contains("name")) {
    if (!doc["name"].is_string()) throw ParseError("model document: 'name' must be a string");
    name = doc["name"].get<std::string>();
  }
  for (const auto& [key, value] : doc.items()) {
    if (key != "name" && key != "layers") warn("ignoring unknown top-level field '" + key + "'");
  }

  const json& layers_doc = doc["layers"];
  std::unordered_map<std::int64_t, std::uint32_t> id_map;
  std::vector<std::vector<std::int64_t>> raw_inputs;
  std::vector<LayerProfile> layers;
  layers.reserve(layers_doc.size());

  for (std::size_t i = 0; i < layers_doc.size(); ++i) {
    const json& entry = layers_doc[i];
    const std::string where = "model document: layers[" + std::to_string(i) + "]";
    if (!entry.is_object()) throw ParseError(where + " must be an object");
    if (!entry.contains("id") || !entry["id"].is_number_integer()) {
      throw ParseError(where + ": 'id' must be an integer");
    }
    LayerProfile layer;
    layer.id = LayerId{static_cast<std::uint32_t>(i)};
    const auto doc_id = entry["id"].get<std::int64_t>();
    layer.name = entry.value("name", "layer" + std::to_string(doc_id));
    if (!id_map.emplace(doc_id, layer.id.value).second) {
      throw ValidationError("layer '" + layer.name + "': duplicate id " + std::to_string(doc_id));
    }

    if (entry.contains("kind")) {
      if (!entry["kind"].is_string()) throw ParseError(where + ": 'kind' must be a string");
      const auto kind_text = entry["kind"].get<std::string>();
      if (auto kind = parse_layer_kind(kind_text)) {
        layer.kind = *kind;
      } else {
        warn("layer '" + layer.name + "': unknown kind '" + kind_text + "', using 'other'");
      }
    }

    if (entry.contains("output_bytes")) {
      const json& bytes = entry["output_bytes"];
      if (!bytes.is_number()) throw ParseError(where + ": 'output_bytes' must be a number");
      if (bytes.get<double>() < 0) {
        throw ValidationError("layer '" + layer.name + "': negative output_bytes");
      }
      if (!bytes.is_number_integer()) {
        throw ParseError(where + ": 'output_bytes' must be an integer");
      }
      layer.output_bytes = bytes.get<std::uint64_t>();
    }

    if (!entry.contains("base_latency") || !entry["base_latency"].is_object()) {
      throw ParseError(where + ": 'base_latency' must be an object");
    }
    for (const auto& [profile, seconds] : entry["base_latency"].items()) {
      if (!seconds.is_number()) {
        throw ParseError(where + ": base_latency['" + profile + "'] must be a number");
      }
      layer.base_latency.emplace(profile, seconds.get<double>());
    }

    std::vector<std::int64_t> inputs;
    if (entry.contains("inputs")) {
      if (!entry["inputs"].is_array()) throw ParseError(where + ": 'inputs' must be an array");
      for (const json& in : entry["inputs"]) {
        if (!in.is_number_integer()) throw ParseError(where + ": input ids must be integers");
        inputs.push_back(in.get<std::int64_t>());
      }
    }
    raw_inputs.push_back(std::move(inputs));

    for (const auto& [key, value] : entry.items()) {
      static constexpr std::string_view known[] = {"id",           "name",         "kind", "inputs",
                                                   "output_bytes", "base_latency", "flops"};
      if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
        warn("layer '" + layer.name + "': ignoring unknown field '" + key + "'");
      }
    }
    layers.push_back(std::move(layer));
  }

  for (std::size_t i = 0; i < layers.size(); ++i) {
    for (std::int64_t in : raw_inputs[i]) {
      auto it = id_map.find(in);
      if (it == id_map.end()) {
        throw ValidationError("layer '" + layers[i].name + "': input id " + std::to_string(in) +
                              " does not exist");
      }
      layers[i].inputs.push_back(LayerId{it->second});
    }
  }
  return DnnGraph(std::move(name), std::move(layers));
}

DnnGraph load_graph_file(const std::string& path, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open model file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return load_graph(buffer.str(), warnings);
}

std::string serialize_graph(const DnnGraph& graph) {
  json layers = json::array();
  for (const LayerProfile& layer : graph.layers()) {
    json inputs = json::array();
    for (LayerId in : layer.inputs) inputs.push_back(in.value);
    json latency = json::object();
    for (const auto& [profile, seconds] : layer.base_latency) latency[profile] = seconds;
    layers.push_back({{"id", layer.id.value},
                      {"name", layer.name},
                      {"kind", to_string(layer.kind)},
                      {"inputs", std::move(inputs)},
                      {"output_bytes", layer.output_bytes},
                      {"base_latency", std::move(latency)}});
  }
  json doc = {{"name", graph.name()}, {"layers", std::move(layers)}};
  return doc.dump(2) + "\n";
}

TopoOrder topo_order(const DnnGraph& graph) { return graph.topo_order(); }

bool is_sequential(const DnnGraph& graph) {
  for (const LayerProfile& layer : graph.layers()) {
    if (layer.inputs.size() > 1 || graph.consumers(layer.id).size() > 1) return false;
  }
  return true;
}

}  // namespace dnnpart

#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace dnnpart {

/// Dense layer index, 0..N-1 in declaration order.
struct LayerId {
  std::uint32_t value = 0;

  constexpr auto operator<=>(const LayerId&) const = default;
};

enum class LayerKind { fully_connected, convolution, pooling, activation, softmax, input, other };

std::string_view to_string(LayerKind kind);
std::optional<LayerKind> parse_layer_kind(std::string_view text);

struct LayerProfile {
  LayerId id;
  std::string name;
  LayerKind kind = LayerKind::other;
  /// Unstressed compute seconds per device profile.
  std::map<std::string, double, std::less<>> base_latency;
  std::uint64_t output_bytes = 0;
  std::vector<LayerId> inputs;

  bool operator==(const LayerProfile&) const = default;
};

/// Layers in deterministic topological order (smallest id first among ready layers).
using TopoOrder = std::vector<LayerId>;

/// Validated, immutable DAG of layers. Construction throws ValidationError
/// naming the offending layer when an invariant does not hold.
class DnnGraph {
 public:
  DnnGraph(std::string name, std::vector<LayerProfile> layers);

  const std::string& name() const { return name_; }
  std::size_t size() const { return layers_.size(); }
  std::span<const LayerProfile> layers() const { return layers_; }
  const LayerProfile& layer(LayerId id) const { return layers_.at(id.value); }
  std::span<const LayerId> consumers(LayerId id) const { return consumers_.at(id.value); }

  /// Sorted device-profile names; every layer carries a latency for each.
  const std::vector<std::string>& device_profiles() const { return profiles_; }
  std::optional<Eigen::Index> profile_column(std::string_view profile) const;

  /// Base latencies, one row per layer (by id) and one column per device profile.
  const Eigen::MatrixXd& latency_matrix() const { return latency_; }

  const TopoOrder& topo_order() const { return topo_; }
  /// Position of each layer (by id) within topo_order().
  std::size_t topo_position(LayerId id) const { return position_.at(id.value); }

  LayerId input_layer() const { return topo_.front(); }
  LayerId output_layer() const { return topo_.back(); }

  bool operator==(const DnnGraph& other) const {
    return name_ == other.name_ && layers_ == other.layers_;
  }

 private:
  std::string name_;
  std::vector<LayerProfile> layers_;
  std::vector<std::vector<LayerId>> consumers_;
  std::vector<std::string> profiles_;
  Eigen::MatrixXd latency_;
  TopoOrder topo_;
  std::vector<std::size_t> position_;
};

/// Parse a model document. Document ids are arbitrary unique integers and are
/// renumbered 0..N-1 in declaration order. Unknown fields produce a warning.
DnnGraph load_graph(std::string_view document, std::vector<std::string>* warnings = nullptr);
DnnGraph load_graph_file(const std::string& path, std::vector<std::string>* warnings = nullptr);

std::string serialize_graph(const DnnGraph& graph);

/// Free-function form of DnnGraph::topo_order().
TopoOrder topo_order(const DnnGraph& graph);

/// True iff every layer has at most one input and at most one consumer.
bool is_sequential(const DnnGraph& graph);

}  // namespace dnnpart

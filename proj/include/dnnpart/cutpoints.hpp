#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dnnpart/graph.hpp"

namespace dnnpart {

/// Record value used for the all-cloud cut, which has no edge layer.
inline constexpr std::int64_t kAllCloudCut = -1;

/// A valid partition: the topo prefix up to `after_layer` runs on the edge
/// and exactly one edge-side producer (`crossing_tensor`) feeds the cloud.
struct CutPoint {
  /// Absent only for the optional all-cloud cut.
  std::optional<LayerId> after_layer;
  LayerId crossing_tensor;
  /// Edge layers, in topo order.
  std::vector<LayerId> edge_set;
  /// Cloud layers, in topo order. Never empty.
  std::vector<LayerId> cloud_set;

  /// Value written to `cut_after` in measurement records (layer id, or -1).
  std::int64_t record_id() const {
    return after_layer ? static_cast<std::int64_t>(after_layer->value) : kAllCloudCut;
  }
  /// 1-based layer number used in reports; 0 for the all-cloud cut.
  std::int64_t label() const { return record_id() + 1; }

  bool operator==(const CutPoint&) const = default;
};

/// Indivisible run of topo positions [first_position, last_position].
struct Block {
  std::size_t first_position = 0;
  std::size_t last_position = 0;
  std::vector<LayerId> members;

  bool operator==(const Block&) const = default;
};

struct CutOptions {
  /// Also emit the cut before the first layer (everything on the cloud).
  bool allow_all_cloud = false;
};

/// Every topo prefix (excluding the full graph) whose set of distinct
/// producers with a consumer outside the prefix has size exactly one.
/// Ordered by prefix length.
std::vector<CutPoint> enumerate_cutpoints(const DnnGraph& graph, CutOptions options = {});

/// Maximal runs of topo positions between consecutive cut points.
std::vector<Block> blocks(const DnnGraph& graph);

/// Locate a cut by its record id (layer id or kAllCloudCut).
std::optional<std::size_t> find_cut(const std::vector<CutPoint>& cuts, std::int64_t record_id);

}  // namespace dnnpart

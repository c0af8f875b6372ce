#include "dnnpart/cutpoints.hpp"

#include <set>

namespace dnnpart {

std::vector<CutPoint> enumerate_cutpoints(const DnnGraph& graph, CutOptions options) {
  const TopoOrder& order = graph.topo_order();
  const std::size_t n = order.size();
  std::vector<CutPoint> cuts;

  if (options.allow_all_cloud) {
    CutPoint cut;
    cut.crossing_tensor = graph.input_layer();
    cut.cloud_set = order;
    cuts.push_back(std::move(cut));
  }

  // Edge-side producers that still have a consumer outside the prefix.
  std::set<LayerId> frontier;
  std::vector<std::size_t> outside(n);
  for (const LayerProfile& layer : graph.layers()) {
    outside[layer.id.value] = graph.consumers(layer.id).size();
  }

  for (std::size_t i = 0; i + 1 < n; ++i) {
    const LayerId v = order[i];
    for (LayerId in : graph.layer(v).inputs) {
      if (--outside[in.value] == 0) frontier.erase(in);
    }
    if (outside[v.value] > 0) frontier.insert(v);

    if (frontier.size() == 1) {
      CutPoint cut;
      cut.after_layer = v;
      cut.crossing_tensor = *frontier.begin();
      cut.edge_set.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(i + 1));
      cut.cloud_set.assign(order.begin() + static_cast<std::ptrdiff_t>(i + 1), order.end());
      cuts.push_back(std::move(cut));
    }
  }
  return cuts;
}

std::vector<Block> blocks(const DnnGraph& graph) {
  const TopoOrder& order = graph.topo_order();
  std::vector<Block> out;
  std::size_t first = 0;
  auto close = [&](std::size_t last) {
    Block b;
    b.first_position = first;
    b.last_position = last;
    b.members.assign(order.begin() + static_cast<std::ptrdiff_t>(first),
                     order.begin() + static_cast<std::ptrdiff_t>(last + 1));
    out.push_back(std::move(b));
    first = last + 1;
  };
  for (const CutPoint& cut : enumerate_cutpoints(graph)) {
    close(cut.edge_set.size() - 1);
  }
  close(order.size() - 1);
  return out;
}

std::optional<std::size_t> find_cut(const std::vector<CutPoint>& cuts, std::int64_t record_id) {
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    if (cuts[i].record_id() == record_id) return i;
  }
  return std::nullopt;
}

}  // namespace dnnpart

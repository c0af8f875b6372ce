#include "dnnpart/fixtures.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>

#include "dnnpart/error.hpp"

namespace dnnpart::fixtures {

namespace {

constexpr ReferenceModel kReferenceModels[] = {
    {"vgg16", 23, 22, true},       {"vgg19", 26, 25, true},     {"mobilenet", 93, 92, true},
    {"alexnet", 25, 24, true},     {"densenet", 429, 22, false}, {"resnet50", 177, 23, false},
    {"resnet50v2", 192, 16, false}, {"lenet", 11, 10, true},
};

// Assigns plausible per-layer costs and tensor sizes by depth and kind.
class LayerSynth {
 public:
  LayerSynth(std::size_t total, std::uint64_t seed) : total_(total), rng_(seed) {}

  LayerProfile make(std::size_t index, LayerKind kind, std::string name) {
    LayerProfile layer;
    layer.id = LayerId{static_cast<std::uint32_t>(index)};
    layer.name = std::move(name);
    layer.kind = kind;

    double edge = 0.0;
    switch (kind) {
      case LayerKind::input: edge = 0.0005; break;
      case LayerKind::convolution: edge = uniform(0.02, 0.12); break;
      case LayerKind::fully_connected: edge = uniform(0.01, 0.06); break;
      default: edge = uniform(0.001, 0.01); break;
    }
    layer.base_latency["edge"] = edge;
    layer.base_latency["cloud"] = edge / uniform(3.0, 6.0);

    const double depth = total_ > 1 ? static_cast<double>(index) / static_cast<double>(total_ - 1) : 0.0;
    if (kind == LayerKind::input) {
      layer.output_bytes = kInputImageBytes;
    } else if (kind == LayerKind::softmax) {
      layer.output_bytes = 4000;
    } else {
      // Early feature maps exceed the image; late ones shrink well below it.
      const double scale = 6.0 * std::exp(-6.0 * depth) * uniform(0.8, 1.2) + 0.01;
      layer.output_bytes = static_cast<std::uint64_t>(scale * static_cast<double>(kInputImageBytes));
    }
    return layer;
  }

 private:
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

  std::size_t total_;
  std::mt19937_64 rng_;
};

LayerKind chain_kind(std::size_t index, std::size_t total) {
  if (index == 0) return LayerKind::input;
  if (total > 2 && index == total - 1) return LayerKind::softmax;
  if (total > 4 && index >= total - 3) return LayerKind::fully_connected;
  switch (index % 3) {
    case 1: return LayerKind::convolution;
    case 2: return LayerKind::activation;
    default: return LayerKind::pooling;
  }
}

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::span<const ReferenceModel> reference_models() { return kReferenceModels; }

DnnGraph make_chain(std::size_t layers, std::uint64_t seed, std::string name) {
  if (layers == 0) throw ValidationError("chain fixture needs at least one layer");
  LayerSynth synth(layers, seed);
  std::vector<LayerProfile> out;
  for (std::size_t i = 0; i < layers; ++i) {
    LayerProfile layer = synth.make(i, chain_kind(i, layers), "layer" + std::to_string(i + 1));
    if (i > 0) layer.inputs = {LayerId{static_cast<std::uint32_t>(i - 1)}};
    out.push_back(std::move(layer));
  }
  return DnnGraph(std::move(name), std::move(out));
}

DnnGraph make_diamond(std::uint64_t seed) {
  LayerSynth synth(4, seed);
  std::vector<LayerProfile> out;
  out.push_back(synth.make(0, LayerKind::input, "input"));
  out.push_back(synth.make(1, LayerKind::convolution, "left"));
  out.push_back(synth.make(2, LayerKind::convolution, "right"));
  out.push_back(synth.make(3, LayerKind::other, "merge"));
  out[1].inputs = {LayerId{0}};
  out[2].inputs = {LayerId{0}};
  out[3].inputs = {LayerId{1}, LayerId{2}};
  return DnnGraph("diamond", std::move(out));
}

DnnGraph make_parallel_block(std::uint64_t seed) {
  LayerSynth synth(11, seed);
  std::vector<LayerProfile> out;
  const LayerKind kinds[] = {LayerKind::input,       LayerKind::convolution, LayerKind::activation,
                             LayerKind::convolution, LayerKind::activation,  LayerKind::convolution,
                             LayerKind::activation,  LayerKind::convolution, LayerKind::other,
                             LayerKind::fully_connected, LayerKind::softmax};
  for (std::size_t i = 0; i < 11; ++i) {
    out.push_back(synth.make(i, kinds[i], "layer" + std::to_string(i + 1)));
  }
  // 0-based ids: branch A 1..4, branch B 5..7, merge 8.
  auto link = [&](std::uint32_t to, std::initializer_list<std::uint32_t> from) {
    for (auto f : from) out[to].inputs.push_back(LayerId{f});
  };
  link(1, {0});
  link(2, {1});
  link(3, {2});
  link(4, {3});
  link(5, {0});
  link(6, {5});
  link(7, {6});
  link(8, {4, 7});
  link(9, {8});
  link(10, {9});
  return DnnGraph("parallel-block", std::move(out));
}

DnnGraph make_residual(std::size_t layers, std::size_t partition_points, std::uint64_t seed,
                       std::string name) {
  if (layers < 2 || partition_points == 0 || partition_points >= layers) {
    throw ValidationError("residual fixture needs 1 <= partition_points < layers");
  }
  // Segment boundaries are exactly the cuts: singleton segments are plain
  // layers, longer ones get a skip edge from the previous segment's output.
  const std::size_t segments = partition_points + 1;
  const std::size_t stem = std::min<std::size_t>(3, segments);
  const std::size_t head = std::min<std::size_t>(2, segments - stem);
  const std::size_t middle = segments - stem - head;
  const std::size_t spare = layers - stem - head;

  std::vector<std::size_t> sizes(stem, 1);
  if (middle == 0) {
    if (spare > 0) {
      if (head == 0) {
        sizes.back() += spare;
      } else {
        sizes.push_back(1 + spare);
        sizes.insert(sizes.end(), head - 1, 1);
      }
    } else {
      sizes.insert(sizes.end(), head, 1);
    }
  } else {
    if (spare < 2 * middle) throw ValidationError("residual fixture: too few layers for the cut count");
    for (std::size_t i = 0; i < middle; ++i) sizes.push_back(spare / middle + (i < spare % middle ? 1 : 0));
    sizes.insert(sizes.end(), head, 1);
  }
  if (sizes.front() != 1) throw ValidationError("residual fixture: input segment must be a single layer");

  LayerSynth synth(layers, seed);
  std::vector<LayerProfile> out;
  std::size_t next = 0;
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    const std::size_t len = sizes[s];
    const auto prev = static_cast<std::uint32_t>(next == 0 ? 0 : next - 1);
    for (std::size_t j = 0; j < len; ++j, ++next) {
      LayerKind kind = chain_kind(next, layers);
      if (len > 1 && j == len - 1) kind = LayerKind::other;
      LayerProfile layer = synth.make(next, kind, "layer" + std::to_string(next + 1));
      if (next > 0) layer.inputs.push_back(LayerId{static_cast<std::uint32_t>(next - 1)});
      if (len > 1 && j == len - 1 && s > 0) layer.inputs.push_back(LayerId{prev});
      out.push_back(std::move(layer));
    }
  }
  return DnnGraph(std::move(name), std::move(out));
}

DnnGraph make_reference_like(std::string_view model, std::uint64_t seed) {
  const std::string key = lower(model);
  for (const ReferenceModel& m : kReferenceModels) {
    if (m.name != key) continue;
    if (m.sequential) return make_chain(m.layers, seed, std::string(m.name));
    return make_residual(m.layers, m.partition_points, seed, std::string(m.name));
  }
  throw ValidationError("unknown reference model '" + std::string(model) + "'");
}

std::string gen_fixture(std::string_view shape, const FixtureParams& params) {
  auto renamed = [&](DnnGraph g) {
    if (params.name.empty()) return g;
    return DnnGraph(params.name, std::vector<LayerProfile>(g.layers().begin(), g.layers().end()));
  };
  if (shape == "chain") return serialize_graph(renamed(make_chain(params.n, params.seed)));
  if (shape == "diamond") return serialize_graph(renamed(make_diamond(params.seed)));
  if (shape == "parallel-block" || shape == "fig2") return serialize_graph(renamed(make_parallel_block(params.seed)));
  if (shape == "reference-like" || shape == "table1-like") {
    return serialize_graph(renamed(make_reference_like(params.model, params.seed)));
  }
  throw ValidationError("unknown fixture shape '" + std::string(shape) +
                        "' (expected chain, diamond, parallel-block, reference-like, fig2 or table1-like)");
}

}  // namespace dnnpart::fixtures

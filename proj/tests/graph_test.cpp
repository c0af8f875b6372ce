#include <gtest/gtest.h>

#include <random>
#include <string>

#include "dnnpart/error.hpp"
#include "dnnpart/graph.hpp"
#include "oracles.hpp"

using namespace dnnpart;

namespace {

std::string layer_json(int id, const std::string& inputs, const std::string& extra = "") {
  return R"({"id": )" + std::to_string(id) + R"(, "name": "L)" + std::to_string(id) +
         R"(", "kind": "convolution", "inputs": [)" + inputs +
         R"(], "output_bytes": 1000, "base_latency": {"edge": 0.1, "cloud": 0.02})" + extra + "}";
}

std::string chain_doc(int n, const std::string& extra_inputs_for_3 = "") {
  std::string doc = R"({"name": "chain", "layers": [)";
  for (int i = 1; i <= n; ++i) {
    std::string inputs = i == 1 ? "" : std::to_string(i - 1);
    if (i == 3 && !extra_inputs_for_3.empty()) inputs += ", " + extra_inputs_for_3;
    doc += (i > 1 ? ", " : "") + layer_json(i, inputs);
  }
  return doc + "]}";
}

// 1-based ids; 1 feeds branches 2-5 and 6-8 which merge at 9; 9 -> 10 -> 11.
std::string parallel_block_doc() {
  const char* inputs[] = {"", "1", "2", "3", "4", "1", "6", "7", "5, 8", "9", "10"};
  std::string doc = R"({"name": "parallel-block", "layers": [)";
  for (int i = 1; i <= 11; ++i) doc += (i > 1 ? ", " : "") + layer_json(i, inputs[i - 1]);
  return doc + "]}";
}

std::vector<std::uint32_t> ids(const TopoOrder& order) {
  std::vector<std::uint32_t> out;
  for (LayerId id : order) out.push_back(id.value);
  return out;
}

}  // namespace

TEST(LoadGraph, FiveLayerChain) {
  const DnnGraph g = load_graph(chain_doc(5));
  EXPECT_EQ(g.size(), 5u);
  EXPECT_EQ(g.input_layer(), LayerId{0});
  EXPECT_EQ(g.output_layer(), LayerId{4});
  EXPECT_TRUE(is_sequential(g));
  EXPECT_EQ(g.device_profiles(), (std::vector<std::string>{"cloud", "edge"}));
}

TEST(LoadGraph, ParallelBlockGraphIsValidAndNonSequential) {
  const DnnGraph g = load_graph(parallel_block_doc());
  EXPECT_EQ(g.size(), 11u);
  EXPECT_FALSE(is_sequential(g));
  // Layers 2-9 (ids 1..8) sit between layer 1 and layer 10.
  EXPECT_EQ(ids(topo_order(g)), (std::vector<std::uint32_t>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10}));
}

TEST(LoadGraph, BackEdgeIsReportedAsCycle) {
  try {
    load_graph(chain_doc(5, "5"));
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("cycle"), std::string::npos) << msg;
    EXPECT_NE(msg.find("'L5'"), std::string::npos) << msg;
    EXPECT_NE(msg.find("'L3'"), std::string::npos) << msg;
  }
}

TEST(LoadGraph, IdsAreRenumberedInDeclarationOrder) {
  const std::string doc = R"({"name": "x", "layers": [)" + layer_json(30, "") + ", " +
                          layer_json(10, "30") + ", " + layer_json(20, "10") + "]}";
  const DnnGraph g = load_graph(doc);
  EXPECT_EQ(g.layer(LayerId{1}).name, "L10");
  EXPECT_EQ(g.layer(LayerId{1}).inputs, (std::vector<LayerId>{LayerId{0}}));
  EXPECT_EQ(g.layer(LayerId{2}).inputs, (std::vector<LayerId>{LayerId{1}}));
}

TEST(LoadGraph, ForwardReferencesAreAcceptedWhenAcyclic) {
  const std::string doc = R"({"name": "x", "layers": [)" + layer_json(2, "1") + ", " +
                          layer_json(1, "") + "]}";
  const DnnGraph g = load_graph(doc);
  EXPECT_EQ(ids(g.topo_order()), (std::vector<std::uint32_t>{1, 0}));
}

TEST(LoadGraph, RejectsInvalidDocuments) {
  EXPECT_THROW(load_graph("{not json"), ParseError);
  EXPECT_THROW(load_graph(R"({"name": "x"})"), ParseError);
  EXPECT_THROW(load_graph(R"({"layers": []})"), ValidationError);
  // Two inputs.
  EXPECT_THROW(load_graph(R"({"layers": [)" + layer_json(1, "") + ", " + layer_json(2, "") + ", " +
                          layer_json(3, "1, 2") + "]}"),
               ValidationError);
  // Two outputs.
  EXPECT_THROW(load_graph(R"({"layers": [)" + layer_json(1, "") + ", " + layer_json(2, "1") + ", " +
                          layer_json(3, "1") + "]}"),
               ValidationError);
  // Unknown input id.
  EXPECT_THROW(load_graph(R"({"layers": [)" + layer_json(1, "7") + "]}"), ValidationError);
  // Duplicate id.
  EXPECT_THROW(load_graph(R"({"layers": [)" + layer_json(1, "") + ", " + layer_json(1, "1") + "]}"),
               ValidationError);
}

TEST(LoadGraph, ValidationErrorsNameTheLayer) {
  auto message = [](const std::string& doc) {
    try {
      load_graph(doc);
    } catch (const ValidationError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  const std::string missing_profile =
      R"({"layers": [)" + layer_json(1, "") +
      R"(, {"id": 2, "name": "fc", "inputs": [1], "base_latency": {"edge": 0.1}}]})";
  EXPECT_NE(message(missing_profile).find("'fc'"), std::string::npos);
  EXPECT_NE(message(missing_profile).find("cloud"), std::string::npos);

  const std::string negative_latency =
      R"({"layers": [{"id": 1, "name": "neg", "base_latency": {"edge": -0.1}}]})";
  EXPECT_NE(message(negative_latency).find("'neg'"), std::string::npos);

  const std::string negative_bytes =
      R"({"layers": [{"id": 1, "name": "nb", "output_bytes": -5, "base_latency": {"edge": 0.1}}]})";
  EXPECT_NE(message(negative_bytes).find("'nb'"), std::string::npos);
}

TEST(LoadGraph, UnknownFieldsWarnAndFlopsIsAccepted) {
  const std::string doc = R"({"name": "x", "framework": "keras", "layers": [)" +
                          layer_json(1, "", R"(, "flops": 12345, "weights": "w.h5")") + "]}";
  std::vector<std::string> warnings;
  const DnnGraph g = load_graph(doc, &warnings);
  EXPECT_EQ(g.size(), 1u);
  ASSERT_EQ(warnings.size(), 2u);
  EXPECT_NE(warnings[0].find("framework"), std::string::npos);
  EXPECT_NE(warnings[1].find("weights"), std::string::npos);
}

TEST(TopoOrder, ChainIsIdentity) {
  const DnnGraph g = load_graph(chain_doc(4));
  EXPECT_EQ(ids(topo_order(g)), (std::vector<std::uint32_t>{0, 1, 2, 3}));
}

TEST(TopoOrder, DiamondUsesSmallestIdFirst) {
  const std::string doc = R"({"layers": [)" + layer_json(0, "") + ", " + layer_json(1, "0") + ", " +
                          layer_json(2, "0") + ", " + layer_json(3, "1, 2") + "]}";
  const DnnGraph g = load_graph(doc);
  EXPECT_EQ(ids(topo_order(g)), (std::vector<std::uint32_t>{0, 1, 2, 3}));
  EXPECT_FALSE(is_sequential(g));
}

TEST(TopoOrder, RandomDagsRespectEveryEdge) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const DnnGraph g = oracle::random_dag(rng, 1 + trial % 25);
    const auto& order = g.topo_order();
    ASSERT_EQ(order.size(), g.size());
    std::vector<std::size_t> pos(g.size());
    for (std::size_t i = 0; i < order.size(); ++i) pos[order[i].value] = i;
    for (const auto& layer : g.layers()) {
      for (LayerId in : layer.inputs) EXPECT_LT(pos[in.value], pos[layer.id.value]);
    }
  }
}

TEST(TopoOrder, SequentialGraphsHaveIdentityOrder) {
  std::mt19937_64 rng(5);
  for (std::size_t n = 1; n < 30; ++n) {
    const DnnGraph g = oracle::random_chain(rng, n);
    ASSERT_TRUE(is_sequential(g));
    for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(g.topo_order()[i].value, i);
  }
}

TEST(Serialize, RoundTripIsIdentity) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const DnnGraph g = oracle::random_dag(rng, 1 + trial % 20);
    const DnnGraph back = load_graph(serialize_graph(g));
    EXPECT_EQ(back, g);
  }
}

TEST(DnnGraph, LatencyMatrixMatchesProfiles) {
  const DnnGraph g = load_graph(chain_doc(3));
  const auto edge = g.profile_column("edge");
  ASSERT_TRUE(edge);
  EXPECT_FALSE(g.profile_column("gpu"));
  EXPECT_EQ(g.latency_matrix().rows(), 3);
  EXPECT_DOUBLE_EQ(g.latency_matrix()(2, *edge), 0.1);
}

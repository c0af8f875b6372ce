#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "dnnpart/graph.hpp"

namespace dnnpart::fixtures {

/// Layer and partition-point counts of the reference Keras classifiers.
struct ReferenceModel {
  std::string_view name;
  std::size_t layers;
  std::size_t partition_points;
  bool sequential;
};

std::span<const ReferenceModel> reference_models();

/// Bytes of a 224x224x3 8-bit input image.
inline constexpr std::uint64_t kInputImageBytes = 224 * 224 * 3;

/// Every generated layer carries "edge" and "cloud" base latencies drawn
/// from a seeded generator; cloud layers run 3-6x faster.
DnnGraph make_chain(std::size_t layers, std::uint64_t seed = 1, std::string name = "chain");
DnnGraph make_diamond(std::uint64_t seed = 1);
/// 11 layers: 1 feeds branches 2-5 and 6-8, merged at 9, then 9 -> 10 -> 11.
DnnGraph make_parallel_block(std::uint64_t seed = 1);
/// Non-sequential graph with exactly `partition_points` cuts: singleton stem
/// and head layers around residual blocks whose skip edge spans the block.
DnnGraph make_residual(std::size_t layers, std::size_t partition_points, std::uint64_t seed = 1,
                       std::string name = "residual");
/// Graph shaped like one reference model (case-insensitive name).
DnnGraph make_reference_like(std::string_view model, std::uint64_t seed = 1);

struct FixtureParams {
  std::size_t n = 5;
  std::uint64_t seed = 1;
  std::string model;
  std::string name;
};

/// Model document for shape chain | diamond | parallel-block | reference-like.
/// fig2 and table1-like are accepted aliases.
/// Throws ValidationError for an unknown shape or model.
std::string gen_fixture(std::string_view shape, const FixtureParams& params);

}  // namespace dnnpart::fixtures

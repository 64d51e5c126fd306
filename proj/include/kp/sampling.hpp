#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "kp/common.hpp"
#include "kp/kg_store.hpp"
#include "kp/kge_models.hpp"

namespace kp {

enum class Polarity { Positive, Negative };

// How negative triples are drawn: uniformly over the full (head, relation,
// tail) grid, or by corrupting the head or the tail of a known train triple.
enum class NegativeMode { FullGrid, HeadTail };

struct ScoredEdge {
  EntityId head = 0;
  RelationId relation = 0;
  EntityId tail = 0;
  double weight = 0.0;
};

// A weighted graph over the full entity set: every entity is a node even if
// isolated, edges carry model scores.
struct ScoredGraph {
  std::size_t n_nodes = 0;
  std::vector<ScoredEdge> edges;
  Polarity polarity = Polarity::Positive;

  double min_weight() const;
  double max_weight() const;
};

struct SampleStats {
  std::size_t score_calls = 0;
  std::size_t rejections = 0;
};

// Uniform sample without replacement from the given split, scored by the
// model. count is clamped to the split size.
ScoredGraph build_positive_graph(const KnowledgeGraph& kg, Split split,
                                 const EmbeddingModel& model,
                                 std::size_t count, std::uint64_t seed,
                                 Exec exec = Exec::Parallel,
                                 SampleStats* stats = nullptr);

// count distinct triples absent from the known set (per scope), scored by the
// model. Throws std::runtime_error if the space of unknown triples appears
// saturated (1000 * count failed draws).
ScoredGraph build_negative_graph(const KnowledgeGraph& kg,
                                 const EmbeddingModel& model,
                                 std::size_t count, std::uint64_t seed,
                                 NegativeMode mode = NegativeMode::FullGrid,
                                 KnownScope scope = KnownScope::AllSplits,
                                 Exec exec = Exec::Parallel,
                                 SampleStats* stats = nullptr);

// TSV rows: head, relation (the literal string NEG for negative graphs),
// tail, weight.
void write_graph_tsv(const std::filesystem::path& path, const ScoredGraph& g,
                     const KnowledgeGraph& kg);

}  // namespace kp

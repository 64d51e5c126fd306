#pragma once

#include <cstdint>

#include "kp/kg_store.hpp"

namespace kp {

// Rule-based synthetic KG: entities fall into clusters, each base relation
// maps clusters to clusters (every entity links to a few targets in the
// mapped cluster), and composed relations add (a, r1r2, c) shortcuts where
// (a,r1,b) and (b,r2,c) both exist. Learnable structure at desk scale.
struct SynthConfig {
  std::size_t n_entities = 200;
  std::size_t n_clusters = 8;
  std::size_t n_base_relations = 4;
  std::size_t n_composed_relations = 2;
  std::size_t edges_per_entity = 2;
  double compose_fraction = 0.3;
  double valid_fraction = 0.1;
  double test_fraction = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

KnowledgeGraph generate_synthetic_kg(const SynthConfig& cfg);

}  // namespace kp

#include "kp/synth.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace kp {

void SynthConfig::validate() const {
  if (n_entities < 2) throw std::invalid_argument("need at least 2 entities");
  if (n_clusters == 0 || n_clusters > n_entities)
    throw std::invalid_argument("n_clusters must be in [1, n_entities]");
  if (n_base_relations == 0)
    throw std::invalid_argument("need at least one base relation");
  if (edges_per_entity == 0)
    throw std::invalid_argument("edges_per_entity must be >= 1");
  if (n_composed_relations > n_base_relations * (n_base_relations - 1))
    throw std::invalid_argument("too many composed relations to form pairs");
  if (!(compose_fraction >= 0.0 && compose_fraction <= 1.0))
    throw std::invalid_argument("compose_fraction must be in [0, 1]");
  if (!(valid_fraction >= 0.0 && test_fraction >= 0.0 &&
        valid_fraction + test_fraction < 1.0))
    throw std::invalid_argument("split fractions must be >= 0 and sum below 1");
}

KnowledgeGraph generate_synthetic_kg(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);

  std::vector<std::string> entity_names(cfg.n_entities);
  for (std::size_t i = 0; i < cfg.n_entities; ++i)
    entity_names[i] = "e" + std::to_string(i);

  const std::size_t n_relations =
      cfg.n_base_relations + cfg.n_composed_relations;
  std::vector<std::string> relation_names(n_relations);
  for (std::size_t i = 0; i < n_relations; ++i)
    relation_names[i] = "r" + std::to_string(i);

  // Round-robin cluster labels, then shuffled so ids carry no structure.
  std::vector<std::uint32_t> cluster(cfg.n_entities);
  for (std::size_t i = 0; i < cfg.n_entities; ++i)
    cluster[i] = static_cast<std::uint32_t>(i % cfg.n_clusters);
  std::shuffle(cluster.begin(), cluster.end(), rng);

  std::vector<std::vector<EntityId>> members(cfg.n_clusters);
  for (std::size_t e = 0; e < cfg.n_entities; ++e)
    members[cluster[e]].push_back(static_cast<EntityId>(e));

  // Clusters sit on a line and each base relation shifts along it:
  // cluster(t) = cluster(h) + shift, no wraparound. Shift maps compose and
  // are representable by translations and rotations alike; cyclic maps are
  // not, which would make the dataset unlearnable for translation models.
  const std::size_t max_shift =
      std::max<std::size_t>(1, (cfg.n_clusters - 1) / 2);
  std::vector<std::size_t> shift(cfg.n_base_relations);
  for (std::size_t r = 0; r < cfg.n_base_relations; ++r) {
    if (cfg.n_clusters == 1) {
      shift[r] = 0;
    } else {
      std::uniform_int_distribution<std::size_t> pick(1, max_shift);
      shift[r] = pick(rng);
    }
  }

  std::vector<Triple> triples;
  std::unordered_set<std::uint64_t> seen;
  auto add = [&](EntityId h, RelationId r, EntityId t) {
    const std::uint64_t key =
        (std::uint64_t(h) << 40) | (std::uint64_t(r) << 24) | std::uint64_t(t);
    if (seen.insert(key).second) triples.push_back(Triple{h, r, t});
  };

  for (RelationId r = 0; r < cfg.n_base_relations; ++r) {
    for (std::size_t e = 0; e < cfg.n_entities; ++e) {
      const std::size_t target = cluster[e] + shift[r];
      if (target >= cfg.n_clusters) continue;
      const auto& pool = members[target];
      const std::size_t k = std::min(cfg.edges_per_entity, pool.size());
      for (std::size_t j = 0; j < k; ++j) {
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        add(static_cast<EntityId>(e), r, pool[pick(rng)]);
      }
    }
  }

  // Composed relations r = r1 then r2, materialized as direct edges.
  if (cfg.n_composed_relations > 0) {
    std::vector<std::pair<RelationId, RelationId>> pairs;
    for (RelationId a = 0; a < cfg.n_base_relations; ++a)
      for (RelationId b = 0; b < cfg.n_base_relations; ++b)
        if (a != b) pairs.emplace_back(a, b);
    std::shuffle(pairs.begin(), pairs.end(), rng);
    pairs.resize(cfg.n_composed_relations);

    std::unordered_map<std::uint64_t, std::vector<EntityId>> by_rel_head;
    for (const Triple& t : triples)
      by_rel_head[(std::uint64_t(t.relation) << 32) | t.head].push_back(t.tail);

    std::bernoulli_distribution keep(cfg.compose_fraction);
    const std::size_t n_base_triples = triples.size();
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const RelationId comp =
          static_cast<RelationId>(cfg.n_base_relations + p);
      for (std::size_t i = 0; i < n_base_triples; ++i) {
        const Triple t = triples[i];
        if (t.relation != pairs[p].first) continue;
        auto it =
            by_rel_head.find((std::uint64_t(pairs[p].second) << 32) | t.tail);
        if (it == by_rel_head.end()) continue;
        for (EntityId c : it->second)
          if (keep(rng)) add(t.head, comp, c);
      }
    }
  }

  std::shuffle(triples.begin(), triples.end(), rng);
  const std::size_t n = triples.size();
  std::size_t n_valid = static_cast<std::size_t>(n * cfg.valid_fraction);
  std::size_t n_test = static_cast<std::size_t>(n * cfg.test_fraction);
  if (cfg.valid_fraction > 0.0 && n_valid == 0) n_valid = 1;
  if (cfg.test_fraction > 0.0 && n_test == 0) n_test = 1;
  if (n_valid + n_test >= n)
    throw std::runtime_error("synthetic graph too small for requested splits");
  const std::size_t n_train = n - n_valid - n_test;

  std::vector<Triple> train(triples.begin(), triples.begin() + n_train);
  std::vector<Triple> valid(triples.begin() + n_train,
                            triples.begin() + n_train + n_valid);
  std::vector<Triple> test(triples.begin() + n_train + n_valid, triples.end());
  return KnowledgeGraph(std::move(entity_names), std::move(relation_names),
                        std::move(train), std::move(valid), std::move(test));
}

}  // namespace kp

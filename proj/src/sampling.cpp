#include "kp/sampling.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <stdexcept>
#include <unordered_set>

namespace kp {

double ScoredGraph::min_weight() const {
  if (edges.empty()) throw std::runtime_error("graph has no edges");
  double m = edges[0].weight;
  for (const ScoredEdge& e : edges) m = std::min(m, e.weight);
  return m;
}

double ScoredGraph::max_weight() const {
  if (edges.empty()) throw std::runtime_error("graph has no edges");
  double m = edges[0].weight;
  for (const ScoredEdge& e : edges) m = std::max(m, e.weight);
  return m;
}

namespace {

void attach_scores(ScoredGraph& g, const EmbeddingModel& model,
                   const std::vector<Triple>& triples, Exec exec,
                   SampleStats* stats) {
  g.edges.resize(triples.size());
  const std::vector<double> scores = score_triples(model, triples, exec);
  for (std::size_t i = 0; i < triples.size(); ++i)
    g.edges[i] = ScoredEdge{triples[i].head, triples[i].relation,
                            triples[i].tail, scores[i]};
  if (stats) stats->score_calls += triples.size();
}

}  // namespace

ScoredGraph build_positive_graph(const KnowledgeGraph& kg, Split split,
                                 const EmbeddingModel& model,
                                 std::size_t count, std::uint64_t seed,
                                 Exec exec, SampleStats* stats) {
  const std::vector<Triple>& pool = kg.triples(split);
  if (pool.empty())
    throw std::invalid_argument(std::string("empty split: ") +
                                split_name(split));
  if (count == 0) throw std::invalid_argument("sample count must be >= 1");
  const std::size_t m = std::min(count, pool.size());

  // Partial Fisher-Yates over an index vector; only the first m slots matter.
  std::vector<std::uint32_t> idx(pool.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    idx[i] = static_cast<std::uint32_t>(i);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < m; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }

  std::vector<Triple> chosen(m);
  for (std::size_t i = 0; i < m; ++i) chosen[i] = pool[idx[i]];

  ScoredGraph g;
  g.n_nodes = kg.num_entities();
  g.polarity = Polarity::Positive;
  attach_scores(g, model, chosen, exec, stats);
  return g;
}

ScoredGraph build_negative_graph(const KnowledgeGraph& kg,
                                 const EmbeddingModel& model,
                                 std::size_t count, std::uint64_t seed,
                                 NegativeMode mode, KnownScope scope,
                                 Exec exec, SampleStats* stats) {
  if (count == 0) throw std::invalid_argument("sample count must be >= 1");
  if (kg.num_entities() == 0 || kg.num_relations() == 0)
    throw std::invalid_argument("empty vocabulary");

  const double grid =
      static_cast<double>(kg.num_entities()) * kg.num_entities() *
      kg.num_relations();
  const double available = grid - static_cast<double>(kg.num_known(scope));
  if (available <= 0.0)
    throw std::invalid_argument("no unknown triples exist in this vocabulary");
  if (static_cast<double>(count) > available)
    throw std::invalid_argument(
        "not enough unknown triples: requested " + std::to_string(count) +
        ", vocabulary admits " + std::to_string(available));

  const std::vector<Triple>& train = kg.triples(Split::Train);
  if (mode == NegativeMode::HeadTail && train.empty())
    throw std::invalid_argument("head/tail corruption needs train triples");

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<EntityId> random_entity(
      0, static_cast<EntityId>(kg.num_entities() - 1));
  std::uniform_int_distribution<RelationId> random_relation(
      0, static_cast<RelationId>(kg.num_relations() - 1));

  std::unordered_set<std::uint64_t> taken;
  taken.reserve(count * 2);
  std::vector<Triple> chosen;
  chosen.reserve(count);

  const std::size_t max_attempts = 1000 * count;
  std::size_t attempts = 0;
  std::size_t rejections = 0;
  while (chosen.size() < count) {
    if (attempts++ >= max_attempts)
      throw std::runtime_error(
          "negative sampling saturated after " +
          std::to_string(max_attempts) + " draws (" +
          std::to_string(chosen.size()) + "/" + std::to_string(count) + ")");
    Triple t;
    if (mode == NegativeMode::FullGrid) {
      t.head = random_entity(rng);
      t.relation = random_relation(rng);
      t.tail = random_entity(rng);
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, train.size() - 1);
      t = train[pick(rng)];
      if (rng() & 1)
        t.head = random_entity(rng);
      else
        t.tail = random_entity(rng);
    }
    if (kg.known(t, scope) || !taken.insert(kg.pack(t)).second) {
      ++rejections;
      continue;
    }
    chosen.push_back(t);
  }
  if (stats) stats->rejections += rejections;

  ScoredGraph g;
  g.n_nodes = kg.num_entities();
  g.polarity = Polarity::Negative;
  attach_scores(g, model, chosen, exec, stats);
  return g;
}

void write_graph_tsv(const std::filesystem::path& path, const ScoredGraph& g,
                     const KnowledgeGraph& kg) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out.precision(17);
  for (const ScoredEdge& e : g.edges) {
    out << kg.entity_names()[e.head] << '\t';
    if (g.polarity == Polarity::Negative)
      out << "NEG";
    else
      out << kg.relation_names()[e.relation];
    out << '\t' << kg.entity_names()[e.tail] << '\t' << e.weight << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace kp

#include "kp/ranking.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace kp {
namespace {

std::atomic<std::uint64_t> g_rank_calls{0};

constexpr int kHitsLevels[] = {1, 3, 10};

}  // namespace

const char* rank_mode_name(RankMode m) {
  return m == RankMode::Raw ? "raw" : "filtered";
}

RankMode rank_mode_from_name(std::string_view name) {
  if (name == "raw") return RankMode::Raw;
  if (name == "filtered") return RankMode::Filtered;
  throw std::invalid_argument("unknown rank mode: " + std::string(name));
}

const char* report_side_name(ReportSide s) {
  switch (s) {
    case ReportSide::Head:
      return "head";
    case ReportSide::Tail:
      return "tail";
    case ReportSide::Both:
      return "both-averaged";
  }
  throw std::invalid_argument("unknown report side");
}

void StratConfig::validate() const {
  for (double b : {beta_e, beta_r})
    if (!(b > -1.0 && b <= 1.0))
      throw std::invalid_argument("beta parameters must lie in (-1, 1]");
}

double rank_from_scores(std::span<const double> scores,
                        std::size_t true_index) {
  if (true_index >= scores.size())
    throw std::out_of_range("true_index outside the score list");
  const double s = scores[true_index];
  std::size_t greater = 0, equal = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (i == true_index) continue;
    if (scores[i] > s)
      ++greater;
    else if (scores[i] == s)
      ++equal;
  }
  return 1.0 + static_cast<double>(greater) +
         static_cast<double>(equal) / 2.0;
}

double rank_triple(const EmbeddingModel& m, const KnowledgeGraph& kg,
                   const Triple& t, RankSide side, RankMode mode,
                   KnownScope scope, std::size_t* score_calls) {
  (void)kg.contains(t);  // throws std::out_of_range on bad ids
  g_rank_calls.fetch_add(1, std::memory_order_relaxed);

  const EntityId true_entity = side == RankSide::Head ? t.head : t.tail;
  const double s_true = score_triple(m, t);
  std::size_t calls = 1;
  std::size_t greater = 0, equal = 0;

  const std::size_t n = kg.num_entities();
  Triple candidate = t;
  for (EntityId c = 0; c < n; ++c) {
    if (c == true_entity) continue;
    if (side == RankSide::Head)
      candidate.head = c;
    else
      candidate.tail = c;
    if (mode == RankMode::Filtered && kg.known(candidate, scope)) continue;
    const double s = score_triple(m, candidate);
    ++calls;
    if (s > s_true)
      ++greater;
    else if (s == s_true)
      ++equal;
  }
  if (score_calls) *score_calls += calls;
  return 1.0 + static_cast<double>(greater) +
         static_cast<double>(equal) / 2.0;
}

std::uint64_t rank_triple_calls() {
  return g_rank_calls.load(std::memory_order_relaxed);
}

namespace {

struct TripleRanks {
  double head = 0.0;
  double tail = 0.0;
};

std::vector<TripleRanks> rank_all(const EmbeddingModel& m,
                                  const KnowledgeGraph& kg,
                                  std::span<const Triple> triples,
                                  RankMode mode, KnownScope scope,
                                  ReportSide side, Exec exec) {
  std::vector<TripleRanks> ranks(triples.size());
  for_each_index(
      static_cast<std::int64_t>(triples.size()), exec, [&](std::int64_t i) {
        if (side != ReportSide::Tail)
          ranks[i].head =
              rank_triple(m, kg, triples[i], RankSide::Head, mode, scope);
        if (side != ReportSide::Head)
          ranks[i].tail =
              rank_triple(m, kg, triples[i], RankSide::Tail, mode, scope);
      });
  return ranks;
}

// Per-triple statistics averaged over the requested sides.
struct TripleStats {
  double rank = 0.0;
  double inv_rank = 0.0;
  double hit[3] = {0.0, 0.0, 0.0};
};

TripleStats side_average(const TripleRanks& r, ReportSide side) {
  TripleStats st;
  double count = 0.0;
  for (RankSide s : {RankSide::Head, RankSide::Tail}) {
    if (side == ReportSide::Head && s == RankSide::Tail) continue;
    if (side == ReportSide::Tail && s == RankSide::Head) continue;
    const double rank = s == RankSide::Head ? r.head : r.tail;
    st.rank += rank;
    st.inv_rank += 1.0 / rank;
    for (int k = 0; k < 3; ++k)
      st.hit[k] += rank <= kHitsLevels[k] ? 1.0 : 0.0;
    count += 1.0;
  }
  st.rank /= count;
  st.inv_rank /= count;
  for (int k = 0; k < 3; ++k) st.hit[k] /= count;
  return st;
}

RankingReport weighted_report(const EmbeddingModel& m,
                              const KnowledgeGraph& kg,
                              std::span<const Triple> triples, RankMode mode,
                              KnownScope scope, ReportSide side,
                              const std::vector<double>& weights, Exec exec) {
  if (triples.empty())
    throw std::invalid_argument("cannot rank an empty triple list");
  Stopwatch timer;
  const std::vector<TripleRanks> ranks =
      rank_all(m, kg, triples, mode, scope, side, exec);

  double wsum = 0.0;
  for (double w : weights) wsum += w;
  RankingReport rep;
  rep.hits = {{1, 0.0}, {3, 0.0}, {10, 0.0}};
  for (std::size_t i = 0; i < triples.size(); ++i) {
    const TripleStats st = side_average(ranks[i], side);
    const double w = weights[i] / wsum;
    rep.mr += w * st.rank;
    rep.mrr += w * st.inv_rank;
    for (int k = 0; k < 3; ++k) rep.hits[kHitsLevels[k]] += w * st.hit[k];
  }
  rep.mode = mode;
  rep.side = side;
  rep.n_evaluated = triples.size();
  rep.wall_time_s = timer.seconds();
  return rep;
}

}  // namespace

RankingReport ranking_metrics(const EmbeddingModel& m,
                              const KnowledgeGraph& kg,
                              std::span<const Triple> triples, RankMode mode,
                              Exec exec, KnownScope scope, ReportSide side) {
  const std::vector<double> uniform(triples.size(), 1.0);
  return weighted_report(m, kg, triples, mode, scope, side, uniform, exec);
}

RankingReport stratified_metrics(const EmbeddingModel& m,
                                 const KnowledgeGraph& kg,
                                 std::span<const Triple> triples,
                                 RankMode mode, const StratConfig& cfg,
                                 Exec exec, KnownScope scope) {
  cfg.validate();
  if (triples.empty())
    throw std::invalid_argument("cannot rank an empty triple list");

  std::vector<double> ent_freq(kg.num_entities(), 1.0);
  std::vector<double> rel_freq(kg.num_relations(), 1.0);
  for (const Triple& t : kg.triples(Split::Train)) {
    ent_freq[t.head] += 1.0;
    ent_freq[t.tail] += 1.0;
    rel_freq[t.relation] += 1.0;
  }

  std::vector<double> weights(triples.size());
  for (std::size_t i = 0; i < triples.size(); ++i) {
    const Triple& t = triples[i];
    weights[i] = std::pow(ent_freq[t.head] * ent_freq[t.tail],
                          -cfg.beta_e / 2.0) *
                 std::pow(rel_freq[t.relation], -cfg.beta_r);
  }
  return weighted_report(m, kg, triples, mode, scope, ReportSide::Both,
                         weights, exec);
}

}  // namespace kp

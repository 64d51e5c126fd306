#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>

#include "kp/common.hpp"
#include "kp/kg_store.hpp"
#include "kp/kge_models.hpp"

namespace kp {

enum class RankSide { Head, Tail };
enum class RankMode { Raw, Filtered };
enum class ReportSide { Head, Tail, Both };

const char* rank_mode_name(RankMode m);
RankMode rank_mode_from_name(std::string_view name);
const char* report_side_name(ReportSide s);

struct RankingReport {
  double mr = 0.0;
  double mrr = 0.0;
  std::map<int, double> hits;  // keys 1, 3, 10
  RankMode mode = RankMode::Filtered;
  ReportSide side = ReportSide::Both;
  std::size_t n_evaluated = 0;
  double wall_time_s = 0.0;
};

struct StratConfig {
  double beta_e = 0.0;
  double beta_r = 0.0;

  void validate() const;  // both must lie in (-1, 1]
};

// Rank of the entity at true_index within an explicit candidate score list,
// with average tie handling: 1 + #strictly-greater + #equal-others / 2.
// Strictly increasing transforms of the scores leave the result unchanged.
double rank_from_scores(std::span<const double> scores, std::size_t true_index);

// Scores all |E| head (or tail) replacements of t and ranks the true entity.
// Filtered mode drops candidates that form a known triple other than t.
// Fractional ranks arise from ties, hence the double return.
double rank_triple(const EmbeddingModel& m, const KnowledgeGraph& kg,
                   const Triple& t, RankSide side, RankMode mode,
                   KnownScope scope = KnownScope::AllSplits,
                   std::size_t* score_calls = nullptr);

// Total rank_triple invocations in this process; lets the harness verify
// that no stage ranks triples behind its back.
std::uint64_t rank_triple_calls();

// MR, MRR and Hits@{1,3,10} over the given triples. ReportSide::Both pools
// the head-side and tail-side rank of every triple. Slot-parallel across
// triples with a serial reduction.
RankingReport ranking_metrics(const EmbeddingModel& m,
                              const KnowledgeGraph& kg,
                              std::span<const Triple> triples, RankMode mode,
                              Exec exec = Exec::Parallel,
                              KnownScope scope = KnownScope::AllSplits,
                              ReportSide side = ReportSide::Both);

// Weighted variant: triple weights (f(h)f(t))^(-beta_e/2) * f(r)^(-beta_r)
// with f = train-split frequency + 1, normalized to sum 1.
RankingReport stratified_metrics(const EmbeddingModel& m,
                                 const KnowledgeGraph& kg,
                                 std::span<const Triple> triples,
                                 RankMode mode, const StratConfig& cfg,
                                 Exec exec = Exec::Parallel,
                                 KnownScope scope = KnownScope::AllSplits);

}  // namespace kp

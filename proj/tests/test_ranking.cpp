#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "kp/ranking.hpp"
#include "kp/synth.hpp"
#include "oracles.hpp"

using namespace kp;

namespace {

struct Fixture {
  KnowledgeGraph kg;
  EmbeddingModel model;

  Fixture() {
    SynthConfig synth;
    synth.n_entities = 40;
    synth.n_clusters = 4;
    synth.seed = 23;
    kg = generate_synthetic_kg(synth);
    model = init_embeddings(ModelKind::DistMult, kg.num_entities(),
                            kg.num_relations(), 6, 15);
  }
};

}  // namespace

TEST_CASE("rank_from_scores: hand cases and tie averaging") {
  const std::vector<double> scores = {3.0, 1.0, 2.0, 3.0};
  CHECK(rank_from_scores(scores, 0) == 1.5);  // tied with index 3
  CHECK(rank_from_scores(scores, 1) == 4.0);
  CHECK(rank_from_scores(scores, 2) == 3.0);
  CHECK(rank_from_scores(scores, 3) == 1.5);

  // All equal: averaged rank is (n + 1) / 2.
  const std::vector<double> flat(5, 1.0);
  for (std::size_t i = 0; i < flat.size(); ++i)
    CHECK(rank_from_scores(flat, i) == 3.0);

  CHECK_THROWS_AS(rank_from_scores(scores, 4), std::out_of_range);
}

TEST_CASE("rank_from_scores matches naive counting on random fixtures") {
  std::mt19937_64 rng(20240903);
  std::uniform_int_distribution<std::size_t> len(1, 60);
  std::uniform_int_distribution<int> level(0, 9);  // coarse => many ties
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> scores(len(rng));
    for (double& s : scores) s = level(rng) / 3.0;
    const std::size_t idx =
        std::uniform_int_distribution<std::size_t>(0, scores.size() - 1)(rng);
    CHECK(rank_from_scores(scores, idx) ==
          oracle::naive_rank_from_scores(scores, idx));
  }
}

TEST_CASE("ranks are invariant under strictly increasing transforms") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> scores(40);
    for (double& s : scores) s = u(rng);
    std::vector<double> mapped(scores.size());
    std::transform(scores.begin(), scores.end(), mapped.begin(),
                   [](double s) { return 2.0 * s + 1.0; });
    std::vector<double> exped(scores.size());
    std::transform(scores.begin(), scores.end(), exped.begin(),
                   [](double s) { return std::exp(s); });
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const double r = rank_from_scores(scores, i);
      CHECK(rank_from_scores(mapped, i) == r);
      CHECK(rank_from_scores(exped, i) == r);
    }
  }
}

TEST_CASE("rank_triple matches the candidate-by-candidate oracle") {
  const Fixture fx;
  const auto& test = fx.kg.triples(Split::Test);
  REQUIRE(!test.empty());
  for (const Triple& t : test)
    for (RankSide side : {RankSide::Head, RankSide::Tail})
      for (RankMode mode : {RankMode::Raw, RankMode::Filtered})
        for (KnownScope scope :
             {KnownScope::AllSplits, KnownScope::ExcludeValid})
          CHECK(rank_triple(fx.model, fx.kg, t, side, mode, scope) ==
                oracle::naive_rank_triple(fx.model, fx.kg, t, side, mode,
                                          scope));
}

TEST_CASE("filtering never hurts the rank") {
  const Fixture fx;
  for (const Triple& t : fx.kg.triples(Split::Test))
    for (RankSide side : {RankSide::Head, RankSide::Tail}) {
      const double raw = rank_triple(fx.model, fx.kg, t, side, RankMode::Raw);
      const double filtered =
          rank_triple(fx.model, fx.kg, t, side, RankMode::Filtered);
      CHECK(filtered <= raw);
      CHECK(filtered >= 1.0);
    }
}

TEST_CASE("rank_triple validates ids and counts invocations") {
  const Fixture fx;
  const std::uint64_t before = rank_triple_calls();
  rank_triple(fx.model, fx.kg, fx.kg.triples(Split::Test)[0], RankSide::Head,
              RankMode::Raw);
  CHECK(rank_triple_calls() == before + 1);

  const Triple bad{static_cast<EntityId>(fx.kg.num_entities()), 0, 0};
  CHECK_THROWS_AS(
      rank_triple(fx.model, fx.kg, bad, RankSide::Head, RankMode::Raw),
      std::out_of_range);
}

TEST_CASE("report aggregates both sides of every triple") {
  const Fixture fx;
  std::vector<Triple> triples(fx.kg.triples(Split::Test).begin(),
                              fx.kg.triples(Split::Test).begin() + 10);

  const RankingReport rep =
      ranking_metrics(fx.model, fx.kg, triples, RankMode::Filtered);

  std::vector<double> ranks;
  for (const Triple& t : triples) {
    ranks.push_back(
        rank_triple(fx.model, fx.kg, t, RankSide::Head, RankMode::Filtered));
    ranks.push_back(
        rank_triple(fx.model, fx.kg, t, RankSide::Tail, RankMode::Filtered));
  }
  double mr = 0.0, mrr = 0.0, h1 = 0.0, h3 = 0.0, h10 = 0.0;
  for (double r : ranks) {
    mr += r;
    mrr += 1.0 / r;
    h1 += r <= 1.0;
    h3 += r <= 3.0;
    h10 += r <= 10.0;
  }
  const double n = static_cast<double>(ranks.size());

  CHECK(rep.n_evaluated == triples.size());
  CHECK(rep.mode == RankMode::Filtered);
  CHECK(rep.side == ReportSide::Both);
  CHECK(rep.mr == doctest::Approx(mr / n).epsilon(1e-12));
  CHECK(rep.mrr == doctest::Approx(mrr / n).epsilon(1e-12));
  CHECK(rep.hits.at(1) == doctest::Approx(h1 / n).epsilon(1e-12));
  CHECK(rep.hits.at(3) == doctest::Approx(h3 / n).epsilon(1e-12));
  CHECK(rep.hits.at(10) == doctest::Approx(h10 / n).epsilon(1e-12));
  CHECK(rep.wall_time_s >= 0.0);

  CHECK(rep.hits.at(1) <= rep.hits.at(3));
  CHECK(rep.hits.at(3) <= rep.hits.at(10));
  CHECK(rep.mr >= 1.0);
  CHECK(rep.mrr > 0.0);
  CHECK(rep.mrr <= 1.0);
}

TEST_CASE("report is identical under both execution policies") {
  const Fixture fx;
  const auto& test = fx.kg.triples(Split::Test);
  const RankingReport serial = ranking_metrics(fx.model, fx.kg, test,
                                               RankMode::Filtered, Exec::Serial);
  const RankingReport parallel = ranking_metrics(
      fx.model, fx.kg, test, RankMode::Filtered, Exec::Parallel);
  CHECK(serial.mr == parallel.mr);
  CHECK(serial.mrr == parallel.mrr);
  CHECK(serial.hits.at(10) == parallel.hits.at(10));
}

TEST_CASE("uniform stratification reproduces the plain report") {
  const Fixture fx;
  const auto& test = fx.kg.triples(Split::Test);
  const RankingReport plain =
      ranking_metrics(fx.model, fx.kg, test, RankMode::Filtered);
  StratConfig flat;  // both exponents zero
  const RankingReport strat =
      stratified_metrics(fx.model, fx.kg, test, RankMode::Filtered, flat);
  CHECK(strat.mr == doctest::Approx(plain.mr).epsilon(1e-12));
  CHECK(strat.mrr == doctest::Approx(plain.mrr).epsilon(1e-12));
  CHECK(strat.hits.at(10) == doctest::Approx(plain.hits.at(10)).epsilon(1e-12));
}

TEST_CASE("stratification shifts weight toward rare entities") {
  const Fixture fx;
  const auto& test = fx.kg.triples(Split::Test);
  StratConfig cfg;
  cfg.beta_e = 1.0;
  cfg.beta_r = 0.5;
  const RankingReport strat =
      stratified_metrics(fx.model, fx.kg, test, RankMode::Filtered, cfg);
  const RankingReport plain =
      ranking_metrics(fx.model, fx.kg, test, RankMode::Filtered);
  // Different weighting, same rank pool: metrics move but stay in range.
  CHECK(strat.mr >= 1.0);
  CHECK(strat.mrr > 0.0);
  CHECK(strat.mrr <= 1.0);
  CHECK(strat.mr != plain.mr);
}

TEST_CASE("config validation") {
  StratConfig bad;
  bad.beta_e = -1.0;  // boundary excluded
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = {};
  bad.beta_r = 1.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  StratConfig edge;
  edge.beta_e = 1.0;
  edge.beta_r = 1.0;
  CHECK_NOTHROW(edge.validate());

  const Fixture fx;
  CHECK_THROWS_AS(
      ranking_metrics(fx.model, fx.kg, std::vector<Triple>{}, RankMode::Raw),
      std::invalid_argument);
}

TEST_CASE("mode names round trip") {
  CHECK(rank_mode_from_name("raw") == RankMode::Raw);
  CHECK(rank_mode_from_name("filtered") == RankMode::Filtered);
  CHECK(std::string(rank_mode_name(RankMode::Raw)) == "raw");
  CHECK_THROWS_AS(rank_mode_from_name("bogus"), std::invalid_argument);
  CHECK(std::string(report_side_name(ReportSide::Both)) == "both-averaged");
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "kp/kge_models.hpp"
#include "kp/synth.hpp"
#include "oracles.hpp"

using namespace kp;
namespace fs = std::filesystem;

namespace {

// One entity pair and one relation, dim 2, hand-set coordinates.
EmbeddingModel hand_model(ModelKind kind) {
  EmbeddingModel m;
  m.kind = kind;
  m.dim = 2;
  m.entities = Matrix(2, 2);
  m.relations = Matrix(1, 2);
  m.entities.row(0)[0] = 1.0;
  m.entities.row(0)[1] = 2.0;
  m.entities.row(1)[0] = 1.0;
  m.entities.row(1)[1] = 0.0;
  return m;
}

}  // namespace

TEST_CASE("hand-computed scores per model kind") {
  const Triple t{0, 0, 1};

  EmbeddingModel transe = hand_model(ModelKind::TransE);
  transe.relations.row(0)[0] = 0.5;
  transe.relations.row(0)[1] = -1.0;
  CHECK(score_triple(transe, t) == doctest::Approx(-std::sqrt(1.25)).epsilon(1e-12));

  EmbeddingModel distmult = hand_model(ModelKind::DistMult);
  distmult.relations.row(0)[0] = 0.5;
  distmult.relations.row(0)[1] = -1.0;
  CHECK(score_triple(distmult, t) == doctest::Approx(0.5).epsilon(1e-12));

  EmbeddingModel cplx = hand_model(ModelKind::ComplEx);
  cplx.relations.row(0)[0] = 0.5;
  cplx.relations.row(0)[1] = -1.0;
  // (h * r) * conj(t) with h = 1+2i, r = 0.5-1i, t = 1+0i has real part 2.5.
  CHECK(score_triple(cplx, t) == doctest::Approx(2.5).epsilon(1e-12));

  EmbeddingModel rot = hand_model(ModelKind::RotatE);
  rot.relations.row(0)[0] = std::acos(-1.0) / 2.0;  // rotate by i
  rot.relations.row(0)[1] = 0.0;
  // (1+2i) * i - 1 = -3+1i, so the score is -sqrt(10).
  CHECK(score_triple(rot, t) == doctest::Approx(-std::sqrt(10.0)).epsilon(1e-12));
}

TEST_CASE("batch scoring matches single scoring, serial == parallel") {
  const EmbeddingModel m = init_embeddings(ModelKind::DistMult, 20, 3, 8, 42);
  std::vector<Triple> triples;
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<EntityId> e(0, 19);
  std::uniform_int_distribution<RelationId> r(0, 2);
  for (int i = 0; i < 64; ++i) triples.push_back({e(rng), r(rng), e(rng)});

  const auto serial = score_triples(m, triples, Exec::Serial);
  const auto parallel = score_triples(m, triples, Exec::Parallel);
  REQUIRE(serial.size() == triples.size());
  for (std::size_t i = 0; i < triples.size(); ++i) {
    CHECK(serial[i] == score_triple(m, triples[i]));
    CHECK(serial[i] == parallel[i]);
  }
}

TEST_CASE("analytic gradients match finite differences") {
  std::mt19937_64 rng(13);
  for (ModelKind kind : {ModelKind::TransE, ModelKind::DistMult,
                         ModelKind::ComplEx, ModelKind::RotatE}) {
    const EmbeddingModel m =
        init_embeddings(kind, 6, 4, 8, 1000 + static_cast<int>(kind));
    std::uniform_int_distribution<EntityId> e(0, 5);
    std::uniform_int_distribution<RelationId> r(0, 3);
    for (int trial = 0; trial < 25; ++trial) {
      // Self-loops fold the head and tail derivatives into one row; keep the
      // endpoints distinct so each table row is perturbed independently.
      Triple t{e(rng), r(rng), e(rng)};
      while (t.head == t.tail) t.tail = e(rng);
      const ScoreGradients g = score_gradients(m, t);
      REQUIRE(g.head.size() == 8);
      REQUIRE(g.relation.size() == 8);
      REQUIRE(g.tail.size() == 8);
      for (std::size_t c = 0; c < 8; ++c) {
        CHECK(oracle::close_rel(
            g.head[c], oracle::fd_score_derivative(m, t, true, t.head, c),
            1e-4));
        CHECK(oracle::close_rel(
            g.relation[c],
            oracle::fd_score_derivative(m, t, false, t.relation, c), 1e-4));
        CHECK(oracle::close_rel(
            g.tail[c], oracle::fd_score_derivative(m, t, true, t.tail, c),
            1e-4));
      }
    }
  }
}

TEST_CASE("init_embeddings ranges and determinism") {
  const EmbeddingModel a = init_embeddings(ModelKind::TransE, 10, 4, 16, 99);
  const EmbeddingModel b = init_embeddings(ModelKind::TransE, 10, 4, 16, 99);
  const EmbeddingModel c = init_embeddings(ModelKind::TransE, 10, 4, 16, 100);
  CHECK(a == b);
  CHECK(a.entities.data != c.entities.data);

  const double bound = 6.0 / std::sqrt(16.0);
  for (double v : a.entities.data) CHECK(std::abs(v) <= bound);
  for (double v : a.relations.data) CHECK(std::abs(v) <= bound);

  const EmbeddingModel rot = init_embeddings(ModelKind::RotatE, 5, 3, 8, 1);
  const double pi = std::acos(-1.0);
  for (std::size_t i = 0; i < rot.relations.rows; ++i)
    for (std::size_t cidx = 0; cidx < 8; ++cidx) {
      const double v = rot.relations.row(i)[cidx];
      if (cidx % 2 == 0)
        CHECK(std::abs(v) <= pi);
      else
        CHECK(v == 0.0);
    }
}

TEST_CASE("complex-valued kinds reject odd dims") {
  CHECK_THROWS_AS(init_embeddings(ModelKind::ComplEx, 4, 2, 3, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(init_embeddings(ModelKind::RotatE, 4, 2, 5, 0),
                  std::invalid_argument);
  CHECK_NOTHROW(init_embeddings(ModelKind::TransE, 4, 2, 3, 0));
}

TEST_CASE("kind names round trip") {
  for (ModelKind k : {ModelKind::TransE, ModelKind::DistMult,
                      ModelKind::ComplEx, ModelKind::RotatE})
    CHECK(model_kind_from_name(model_kind_name(k)) == k);
  CHECK_THROWS_AS(model_kind_from_name("word2vec"), std::invalid_argument);
}

TEST_CASE("training is deterministic and reduces the loss") {
  SynthConfig synth;
  synth.n_entities = 60;
  synth.n_clusters = 4;
  synth.seed = 5;
  const KnowledgeGraph kg = generate_synthetic_kg(synth);

  TrainConfig cfg;
  cfg.epochs = 20;
  cfg.eval_every = 5;
  cfg.lr = 0.05;
  cfg.seed = 17;

  EmbeddingModel m1 = init_embeddings(ModelKind::TransE, kg.num_entities(),
                                      kg.num_relations(), 8, 3);
  EmbeddingModel m2 = m1;
  const auto ckpts1 = train(m1, kg, cfg);
  const auto ckpts2 = train(m2, kg, cfg);

  REQUIRE(ckpts1.size() == 4);  // epochs 5, 10, 15, 20
  CHECK(ckpts1[0].epoch == 5);
  CHECK(ckpts1.back().epoch == 20);
  for (std::size_t i = 0; i < ckpts1.size(); ++i) {
    CHECK(ckpts1[i].model == ckpts2[i].model);
    CHECK(ckpts1[i].train_loss == ckpts2[i].train_loss);
  }
  CHECK(m1 == m2);
  CHECK(ckpts1.back().train_loss < ckpts1.front().train_loss);

  std::size_t sink_calls = 0;
  EmbeddingModel m3 = init_embeddings(ModelKind::TransE, kg.num_entities(),
                                      kg.num_relations(), 8, 3);
  train(m3, kg, cfg, [&](const Checkpoint& c) {
    ++sink_calls;
    CHECK(c.epoch % cfg.eval_every == 0);
  });
  CHECK(sink_calls == 4);
}

TEST_CASE("train config validation") {
  TrainConfig cfg;
  cfg.epochs = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.lr = -1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.eval_every = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK_NOTHROW(TrainConfig{}.validate());
}

TEST_CASE("checkpoint save/load round trip") {
  const fs::path dir = fs::temp_directory_path() / "kp_test_ckpt";
  fs::create_directories(dir);
  const fs::path path = dir / "model.ckpt";

  const EmbeddingModel m = init_embeddings(ModelKind::ComplEx, 7, 3, 6, 21);
  TrainConfig cfg;
  cfg.epochs = 12;
  save_checkpoint(path, m, 12, cfg);

  const LoadedCheckpoint back = load_checkpoint(path);
  CHECK(back.epoch == 12);
  CHECK(back.model == m);
  CHECK(fs::exists(path.string() + ".json"));

  // Corrupt the magic and expect a refusal.
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.write("XXXX", 4);
  }
  CHECK_THROWS_AS(load_checkpoint(path), std::runtime_error);
}

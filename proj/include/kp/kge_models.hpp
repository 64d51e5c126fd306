#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "kp/common.hpp"
#include "kp/kg_store.hpp"

namespace kp {

enum class ModelKind { TransE, DistMult, ComplEx, RotatE };
const char* model_kind_name(ModelKind k);
ModelKind model_kind_from_name(std::string_view name);

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double* row(std::size_t i) { return data.data() + i * cols; }
  const double* row(std::size_t i) const { return data.data() + i * cols; }
  friend bool operator==(const Matrix&, const Matrix&) = default;
};

// Embedding tables for one model. ComplEx and RotatE interpret column pairs
// (2k, 2k+1) as the real and imaginary parts of complex coordinate k; RotatE
// relations keep the rotation phase in column 2k and zero in column 2k+1.
struct EmbeddingModel {
  ModelKind kind = ModelKind::TransE;
  std::size_t dim = 0;
  Matrix entities;
  Matrix relations;

  std::size_t num_entities() const { return entities.rows; }
  std::size_t num_relations() const { return relations.rows; }
  friend bool operator==(const EmbeddingModel&, const EmbeddingModel&) = default;
};

// Plausibility score, oriented so that higher means more plausible for every
// model kind (distance-based scores are negated).
double score_triple(const EmbeddingModel& m, const Triple& t);

// Scores for a batch of triples; slot-parallel over triples.
std::vector<double> score_triples(const EmbeddingModel& m,
                                  std::span<const Triple> triples,
                                  Exec exec = Exec::Parallel);

struct ScoreGradients {
  std::vector<double> head;
  std::vector<double> relation;
  std::vector<double> tail;
};

// Analytic gradient of score_triple with respect to the three embedding rows.
ScoreGradients score_gradients(const EmbeddingModel& m, const Triple& t);

// Entries drawn uniformly from [-6/sqrt(d), 6/sqrt(d)]; RotatE relation
// phases drawn uniformly from [-pi, pi). ComplEx and RotatE require even d.
EmbeddingModel init_embeddings(ModelKind kind, std::size_t n_entities,
                               std::size_t n_relations, std::size_t dim,
                               std::uint64_t seed);

struct TrainConfig {
  std::size_t epochs = 100;
  double lr = 0.01;
  double margin = 1.0;
  std::size_t negatives_per_positive = 1;
  std::size_t batch_size = 1;
  std::size_t eval_every = 5;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Checkpoint {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  EmbeddingModel model;
};

using CheckpointSink = std::function<void(const Checkpoint&)>;

// SGD on margin ranking loss max(0, margin - s(pos) + s(neg)) with uniform
// head-or-tail corruption negatives. Snapshots the model every eval_every
// epochs; identical seeds give bit-identical trajectories.
std::vector<Checkpoint> train(EmbeddingModel& model, const KnowledgeGraph& kg,
                              const TrainConfig& cfg,
                              const CheckpointSink& sink = {});

// Binary checkpoint (little-endian header + row-major float64 tables) plus a
// human-readable JSON sidecar at path + ".json".
void save_checkpoint(const std::filesystem::path& path,
                     const EmbeddingModel& model, std::size_t epoch,
                     const TrainConfig& cfg);

struct LoadedCheckpoint {
  EmbeddingModel model;
  std::size_t epoch = 0;
};
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace kp

#include "kp/kge_models.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace kp {
namespace {

constexpr double kNormEps = 1e-12;

void check_triple(const EmbeddingModel& m, const Triple& t) {
  if (t.head >= m.num_entities() || t.tail >= m.num_entities())
    throw std::out_of_range("entity id out of range");
  if (t.relation >= m.num_relations())
    throw std::out_of_range("relation id out of range");
}

void check_model(const EmbeddingModel& m) {
  if (m.dim == 0) throw std::invalid_argument("embedding dim must be >= 1");
  if ((m.kind == ModelKind::ComplEx || m.kind == ModelKind::RotatE) &&
      m.dim % 2 != 0)
    throw std::invalid_argument("complex-valued models need an even dim");
  if (m.entities.cols != m.dim || m.relations.cols != m.dim)
    throw std::invalid_argument("embedding table width does not match dim");
}

}  // namespace

const char* model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::TransE:
      return "transe";
    case ModelKind::DistMult:
      return "distmult";
    case ModelKind::ComplEx:
      return "complex";
    case ModelKind::RotatE:
      return "rotate";
  }
  throw std::invalid_argument("unknown model kind");
}

ModelKind model_kind_from_name(std::string_view name) {
  for (ModelKind k : {ModelKind::TransE, ModelKind::DistMult,
                      ModelKind::ComplEx, ModelKind::RotatE})
    if (name == model_kind_name(k)) return k;
  throw std::invalid_argument("unknown model kind: " + std::string(name));
}

double score_triple(const EmbeddingModel& m, const Triple& t) {
  check_triple(m, t);
  const double* h = m.entities.row(t.head);
  const double* r = m.relations.row(t.relation);
  const double* e = m.entities.row(t.tail);
  const std::size_t d = m.dim;

  switch (m.kind) {
    case ModelKind::TransE: {
      double s2 = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        const double v = h[i] + r[i] - e[i];
        s2 += v * v;
      }
      return -std::sqrt(s2);
    }
    case ModelKind::DistMult: {
      double s = 0.0;
      for (std::size_t i = 0; i < d; ++i) s += h[i] * r[i] * e[i];
      return s;
    }
    case ModelKind::ComplEx: {
      double s = 0.0;
      for (std::size_t k = 0; k < d; k += 2) {
        const double a = h[k], b = h[k + 1];
        const double c = r[k], dd = r[k + 1];
        const double re = e[k], im = e[k + 1];
        s += (a * c - b * dd) * re + (a * dd + b * c) * im;
      }
      return s;
    }
    case ModelKind::RotatE: {
      double s2 = 0.0;
      for (std::size_t k = 0; k < d; k += 2) {
        const double a = h[k], b = h[k + 1];
        const double phi = r[k];
        const double cp = std::cos(phi), sp = std::sin(phi);
        const double u = a * cp - b * sp - e[k];
        const double v = a * sp + b * cp - e[k + 1];
        s2 += u * u + v * v;
      }
      return -std::sqrt(s2);
    }
  }
  throw std::invalid_argument("unknown model kind");
}

std::vector<double> score_triples(const EmbeddingModel& m,
                                  std::span<const Triple> triples, Exec exec) {
  check_model(m);
  std::vector<double> out(triples.size());
  for_each_index(static_cast<std::int64_t>(triples.size()), exec,
                 [&](std::int64_t i) { out[i] = score_triple(m, triples[i]); });
  return out;
}

ScoreGradients score_gradients(const EmbeddingModel& m, const Triple& t) {
  check_model(m);
  check_triple(m, t);
  const double* h = m.entities.row(t.head);
  const double* r = m.relations.row(t.relation);
  const double* e = m.entities.row(t.tail);
  const std::size_t d = m.dim;
  ScoreGradients g;
  g.head.assign(d, 0.0);
  g.relation.assign(d, 0.0);
  g.tail.assign(d, 0.0);

  switch (m.kind) {
    case ModelKind::TransE: {
      double s2 = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        const double v = h[i] + r[i] - e[i];
        s2 += v * v;
      }
      const double n = std::sqrt(s2);
      if (n < kNormEps) return g;
      for (std::size_t i = 0; i < d; ++i) {
        const double v = (h[i] + r[i] - e[i]) / n;
        g.head[i] = -v;
        g.relation[i] = -v;
        g.tail[i] = v;
      }
      return g;
    }
    case ModelKind::DistMult: {
      for (std::size_t i = 0; i < d; ++i) {
        g.head[i] = r[i] * e[i];
        g.relation[i] = h[i] * e[i];
        g.tail[i] = h[i] * r[i];
      }
      return g;
    }
    case ModelKind::ComplEx: {
      for (std::size_t k = 0; k < d; k += 2) {
        const double a = h[k], b = h[k + 1];
        const double c = r[k], dd = r[k + 1];
        const double re = e[k], im = e[k + 1];
        g.head[k] = c * re + dd * im;
        g.head[k + 1] = -dd * re + c * im;
        g.relation[k] = a * re + b * im;
        g.relation[k + 1] = -b * re + a * im;
        g.tail[k] = a * c - b * dd;
        g.tail[k + 1] = a * dd + b * c;
      }
      return g;
    }
    case ModelKind::RotatE: {
      double s2 = 0.0;
      for (std::size_t k = 0; k < d; k += 2) {
        const double a = h[k], b = h[k + 1];
        const double phi = r[k];
        const double cp = std::cos(phi), sp = std::sin(phi);
        const double u = a * cp - b * sp - e[k];
        const double v = a * sp + b * cp - e[k + 1];
        s2 += u * u + v * v;
      }
      const double n = std::sqrt(s2);
      if (n < kNormEps) return g;
      for (std::size_t k = 0; k < d; k += 2) {
        const double a = h[k], b = h[k + 1];
        const double phi = r[k];
        const double cp = std::cos(phi), sp = std::sin(phi);
        const double u = a * cp - b * sp - e[k];
        const double v = a * sp + b * cp - e[k + 1];
        g.head[k] = -(u * cp + v * sp) / n;
        g.head[k + 1] = -(-u * sp + v * cp) / n;
        g.relation[k] = -(u * (-a * sp - b * cp) + v * (a * cp - b * sp)) / n;
        g.tail[k] = u / n;
        g.tail[k + 1] = v / n;
      }
      return g;
    }
  }
  throw std::invalid_argument("unknown model kind");
}

EmbeddingModel init_embeddings(ModelKind kind, std::size_t n_entities,
                               std::size_t n_relations, std::size_t dim,
                               std::uint64_t seed) {
  if (dim == 0) throw std::invalid_argument("embedding dim must be >= 1");
  if ((kind == ModelKind::ComplEx || kind == ModelKind::RotatE) && dim % 2 != 0)
    throw std::invalid_argument("complex-valued models need an even dim");
  if (n_entities == 0 || n_relations == 0)
    throw std::invalid_argument("empty vocabulary");

  EmbeddingModel m;
  m.kind = kind;
  m.dim = dim;
  m.entities = Matrix(n_entities, dim);
  m.relations = Matrix(n_relations, dim);

  std::mt19937_64 rng(seed);
  const double bound = 6.0 / std::sqrt(static_cast<double>(dim));
  std::uniform_real_distribution<double> uni(-bound, bound);
  for (double& x : m.entities.data) x = uni(rng);
  if (kind == ModelKind::RotatE) {
    std::uniform_real_distribution<double> phase(-std::numbers::pi,
                                                 std::numbers::pi);
    for (std::size_t i = 0; i < n_relations; ++i) {
      double* row = m.relations.row(i);
      for (std::size_t k = 0; k < dim; k += 2) {
        row[k] = phase(rng);
        row[k + 1] = 0.0;
      }
    }
  } else {
    for (double& x : m.relations.data) x = uni(rng);
  }
  return m;
}

void TrainConfig::validate() const {
  if (epochs == 0) throw std::invalid_argument("epochs must be >= 1");
  if (!(lr > 0.0) || !std::isfinite(lr))
    throw std::invalid_argument("lr must be positive and finite");
  if (!(margin >= 0.0) || !std::isfinite(margin))
    throw std::invalid_argument("margin must be non-negative and finite");
  if (negatives_per_positive == 0)
    throw std::invalid_argument("negatives_per_positive must be >= 1");
  if (batch_size == 0) throw std::invalid_argument("batch_size must be >= 1");
  if (eval_every == 0) throw std::invalid_argument("eval_every must be >= 1");
}

namespace {

// Sparse per-batch gradient accumulator; entry count stays tiny (a few rows
// per sample) so linear lookup beats hashing here.
struct RowAccum {
  std::vector<std::pair<std::uint32_t, std::vector<double>>> rows;

  std::vector<double>& at(std::uint32_t id, std::size_t dim) {
    for (auto& [rid, g] : rows)
      if (rid == id) return g;
    rows.emplace_back(id, std::vector<double>(dim, 0.0));
    return rows.back().second;
  }
  void clear() { rows.clear(); }
};

void axpy(std::vector<double>& acc, double a, const std::vector<double>& x) {
  for (std::size_t i = 0; i < x.size(); ++i) acc[i] += a * x[i];
}

}  // namespace

std::vector<Checkpoint> train(EmbeddingModel& model, const KnowledgeGraph& kg,
                              const TrainConfig& cfg,
                              const CheckpointSink& sink) {
  cfg.validate();
  check_model(model);
  if (model.num_entities() != kg.num_entities() ||
      model.num_relations() != kg.num_relations())
    throw std::invalid_argument("model tables do not match the graph");
  const auto& positives = kg.triples(Split::Train);
  if (positives.empty()) throw std::invalid_argument("empty train split");

  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<EntityId> random_entity(
      0, static_cast<EntityId>(kg.num_entities() - 1));

  std::vector<std::size_t> order(positives.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::vector<Checkpoint> checkpoints;
  RowAccum ent_grad, rel_grad;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;

    std::size_t in_batch = 0;
    auto flush = [&] {
      for (auto& [id, g] : ent_grad.rows) {
        double* row = model.entities.row(id);
        for (std::size_t i = 0; i < model.dim; ++i) row[i] -= cfg.lr * g[i];
      }
      for (auto& [id, g] : rel_grad.rows) {
        double* row = model.relations.row(id);
        for (std::size_t i = 0; i < model.dim; ++i) row[i] -= cfg.lr * g[i];
      }
      ent_grad.clear();
      rel_grad.clear();
      in_batch = 0;
    };

    for (std::size_t idx : order) {
      const Triple& pos = positives[idx];
      for (std::size_t j = 0; j < cfg.negatives_per_positive; ++j) {
        Triple neg = pos;
        if (rng() & 1)
          neg.head = random_entity(rng);
        else
          neg.tail = random_entity(rng);

        const double loss =
            cfg.margin - score_triple(model, pos) + score_triple(model, neg);
        if (loss > 0.0) {
          loss_sum += loss;
          const ScoreGradients gp = score_gradients(model, pos);
          const ScoreGradients gn = score_gradients(model, neg);
          axpy(ent_grad.at(pos.head, model.dim), -1.0, gp.head);
          axpy(rel_grad.at(pos.relation, model.dim), -1.0, gp.relation);
          axpy(ent_grad.at(pos.tail, model.dim), -1.0, gp.tail);
          axpy(ent_grad.at(neg.head, model.dim), 1.0, gn.head);
          axpy(rel_grad.at(neg.relation, model.dim), 1.0, gn.relation);
          axpy(ent_grad.at(neg.tail, model.dim), 1.0, gn.tail);
        }
      }
      if (++in_batch >= cfg.batch_size) flush();
    }
    if (in_batch > 0) flush();

    const double mean_loss =
        loss_sum / (static_cast<double>(positives.size()) *
                    static_cast<double>(cfg.negatives_per_positive));
    if (!std::isfinite(mean_loss))
      throw std::runtime_error("training diverged at epoch " +
                               std::to_string(epoch));

    if (epoch % cfg.eval_every == 0) {
      checkpoints.push_back(Checkpoint{epoch, mean_loss, model});
      if (sink) sink(checkpoints.back());
    }
  }
  return checkpoints;
}

namespace {

constexpr char kMagic[4] = {'K', 'P', 'E', 'B'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

void put_f64(std::ostream& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw std::runtime_error("truncated checkpoint");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw std::runtime_error("truncated checkpoint");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& in) {
  return std::bit_cast<double>(get_u64(in));
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path,
                     const EmbeddingModel& model, std::size_t epoch,
                     const TrainConfig& cfg) {
  check_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out.write(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(model.kind));
  put_u64(out, epoch);
  put_u64(out, model.num_entities());
  put_u64(out, model.num_relations());
  put_u64(out, model.dim);
  for (double v : model.entities.data) put_f64(out, v);
  for (double v : model.relations.data) put_f64(out, v);
  if (!out) throw std::runtime_error("write failed: " + path.string());
  out.close();

  nlohmann::json side = {
      {"schema", 1},
      {"kind", model_kind_name(model.kind)},
      {"epoch", epoch},
      {"dim", model.dim},
      {"entities", model.num_entities()},
      {"relations", model.num_relations()},
      {"config",
       {{"epochs", cfg.epochs},
        {"lr", cfg.lr},
        {"margin", cfg.margin},
        {"negatives_per_positive", cfg.negatives_per_positive},
        {"batch_size", cfg.batch_size},
        {"eval_every", cfg.eval_every},
        {"seed", cfg.seed}}}};
  std::ofstream js(path.string() + ".json", std::ios::trunc);
  if (!js) throw std::runtime_error("cannot open " + path.string() + ".json");
  js << side.dump(2) << '\n';
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("not a checkpoint file: " + path.string());
  const std::uint32_t version = get_u32(in);
  if (version != kVersion)
    throw std::runtime_error("unsupported checkpoint version " +
                             std::to_string(version));
  LoadedCheckpoint out;
  const std::uint32_t kind = get_u32(in);
  if (kind > static_cast<std::uint32_t>(ModelKind::RotatE))
    throw std::runtime_error("bad model kind in checkpoint");
  out.model.kind = static_cast<ModelKind>(kind);
  out.epoch = get_u64(in);
  const std::uint64_t n_ent = get_u64(in);
  const std::uint64_t n_rel = get_u64(in);
  const std::uint64_t dim = get_u64(in);
  out.model.dim = dim;
  out.model.entities = Matrix(n_ent, dim);
  out.model.relations = Matrix(n_rel, dim);
  for (double& v : out.model.entities.data) v = get_f64(in);
  for (double& v : out.model.relations.data) v = get_f64(in);
  check_model(out.model);
  return out;
}

}  // namespace kp

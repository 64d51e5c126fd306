#include "kp/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>
#include <stdexcept>

#include "kp/stats.hpp"
#include "kp/theory.hpp"

namespace kp {
namespace {

using nlohmann::json;

json num_or_null(double v) {
  if (!std::isfinite(v)) return json(nullptr);
  return json(v);
}

double num_from(const json& j, const char* key) {
  const json& v = j.at(key);
  if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return v.get<double>();
}

json ranking_to_json(const RankingReport& r) {
  if (r.n_evaluated == 0) return json(nullptr);
  return json{{"mr", r.mr},
              {"mrr", r.mrr},
              {"hits",
               {{"1", r.hits.at(1)}, {"3", r.hits.at(3)}, {"10", r.hits.at(10)}}},
              {"mode", rank_mode_name(r.mode)},
              {"side", report_side_name(r.side)},
              {"n_evaluated", r.n_evaluated},
              {"wall_time_s", r.wall_time_s}};
}

RankingReport ranking_from_json(const json& j) {
  RankingReport r;
  if (j.is_null()) return r;
  r.mr = j.at("mr").get<double>();
  r.mrr = j.at("mrr").get<double>();
  r.hits = {{1, j.at("hits").at("1").get<double>()},
            {3, j.at("hits").at("3").get<double>()},
            {10, j.at("hits").at("10").get<double>()}};
  r.mode = rank_mode_from_name(j.at("mode").get<std::string>());
  const std::string side = j.at("side").get<std::string>();
  r.side = side == "head"   ? ReportSide::Head
           : side == "tail" ? ReportSide::Tail
                            : ReportSide::Both;
  r.n_evaluated = j.at("n_evaluated").get<std::size_t>();
  r.wall_time_s = j.at("wall_time_s").get<double>();
  return r;
}

}  // namespace

json to_json(const EvalReport& r) {
  json j;
  j["schema"] = 1;
  j["run_id"] = r.run_id;
  j["model_kind"] = model_kind_name(r.model_kind);
  j["dataset"] = r.dataset;
  j["epoch"] = r.epoch;
  j["kp_train"] = num_or_null(r.kp_train);
  j["kp_test"] = num_or_null(r.kp_test);
  j["ranking"] = ranking_to_json(r.ranking);
  j["strat"] = ranking_to_json(r.strat);
  j["conicity"] = num_or_null(r.conicity);
  j["avl"] = num_or_null(r.avl);
  j["gk_train"] = num_or_null(r.gk_train);
  j["gk_test"] = num_or_null(r.gk_test);
  j["wall_times"] = r.wall_times;
  j["seeds"] = r.seeds;
  j["errors"] = r.errors;
  return j;
}

EvalReport report_from_json(const json& j) {
  if (j.at("schema").get<int>() != 1)
    throw std::runtime_error("unsupported report schema version");
  EvalReport r;
  r.run_id = j.at("run_id").get<std::string>();
  r.model_kind = model_kind_from_name(j.at("model_kind").get<std::string>());
  r.dataset = j.at("dataset").get<std::string>();
  r.epoch = j.at("epoch").get<std::size_t>();
  r.kp_train = num_from(j, "kp_train");
  r.kp_test = num_from(j, "kp_test");
  r.ranking = ranking_from_json(j.at("ranking"));
  r.strat = ranking_from_json(j.at("strat"));
  r.conicity = num_from(j, "conicity");
  r.avl = num_from(j, "avl");
  r.gk_train = num_from(j, "gk_train");
  r.gk_test = num_from(j, "gk_test");
  r.wall_times = j.at("wall_times").get<std::map<std::string, double>>();
  r.seeds = j.at("seeds").get<std::map<std::string, std::uint64_t>>();
  r.errors = j.at("errors").get<std::map<std::string, std::string>>();
  return r;
}

std::optional<double> EvalReport::metric(std::string_view name) const {
  auto plain = [](double v) -> std::optional<double> {
    if (std::isnan(v)) return std::nullopt;
    return v;
  };
  auto from_ranking = [&](const RankingReport& rep,
                          std::string_view key) -> std::optional<double> {
    if (rep.n_evaluated == 0) return std::nullopt;
    if (key == "mr") return rep.mr;
    if (key == "mrr") return rep.mrr;
    if (key == "hits@1") return rep.hits.at(1);
    if (key == "hits@3") return rep.hits.at(3);
    if (key == "hits@10") return rep.hits.at(10);
    throw std::invalid_argument("unknown metric: " + std::string(key));
  };

  if (name == "kp_train") return plain(kp_train);
  if (name == "kp_test") return plain(kp_test);
  if (name == "conicity") return plain(conicity);
  if (name == "avl") return plain(avl);
  if (name == "gk_train") return plain(gk_train);
  if (name == "gk_test") return plain(gk_test);
  if (name.starts_with("strat_")) return from_ranking(strat, name.substr(6));
  return from_ranking(ranking, name);
}

const char* eval_report_schema_text() {
  return R"({
  "$schema": "http://json-schema.org/draft-07/schema#",
  "title": "EvalReport",
  "type": "object",
  "required": ["schema", "run_id", "model_kind", "dataset", "epoch",
               "kp_train", "kp_test", "ranking", "strat", "conicity", "avl",
               "gk_train", "gk_test", "wall_times", "seeds", "errors"],
  "properties": {
    "schema": {"type": "integer", "enum": [1]},
    "run_id": {"type": "string"},
    "model_kind": {"type": "string",
                   "enum": ["transe", "distmult", "complex", "rotate"]},
    "dataset": {"type": "string"},
    "epoch": {"type": "integer"},
    "kp_train": {"type": ["number", "null"]},
    "kp_test": {"type": ["number", "null"]},
    "ranking": {
      "type": ["object", "null"],
      "required": ["mr", "mrr", "hits", "mode", "side", "n_evaluated",
                   "wall_time_s"],
      "properties": {
        "mr": {"type": "number"},
        "mrr": {"type": "number"},
        "hits": {
          "type": "object",
          "required": ["1", "3", "10"],
          "properties": {
            "1": {"type": "number"},
            "3": {"type": "number"},
            "10": {"type": "number"}
          }
        },
        "mode": {"type": "string", "enum": ["raw", "filtered"]},
        "side": {"type": "string", "enum": ["head", "tail", "both-averaged"]},
        "n_evaluated": {"type": "integer"},
        "wall_time_s": {"type": "number"}
      }
    },
    "strat": {
      "type": ["object", "null"],
      "required": ["mr", "mrr", "hits", "mode", "side", "n_evaluated",
                   "wall_time_s"],
      "properties": {
        "mr": {"type": "number"},
        "mrr": {"type": "number"},
        "hits": {
          "type": "object",
          "required": ["1", "3", "10"],
          "properties": {
            "1": {"type": "number"},
            "3": {"type": "number"},
            "10": {"type": "number"}
          }
        },
        "mode": {"type": "string", "enum": ["raw", "filtered"]},
        "side": {"type": "string", "enum": ["head", "tail", "both-averaged"]},
        "n_evaluated": {"type": "integer"},
        "wall_time_s": {"type": "number"}
      }
    },
    "conicity": {"type": ["number", "null"]},
    "avl": {"type": ["number", "null"]},
    "gk_train": {"type": ["number", "null"]},
    "gk_test": {"type": ["number", "null"]},
    "wall_times": {"type": "object"},
    "seeds": {"type": "object"},
    "errors": {"type": "object"}
  }
}
)";
}

namespace {

bool type_matches(const json& value, const std::string& type) {
  if (type == "object") return value.is_object();
  if (type == "array") return value.is_array();
  if (type == "string") return value.is_string();
  if (type == "number") return value.is_number();
  if (type == "integer") return value.is_number_integer();
  if (type == "boolean") return value.is_boolean();
  if (type == "null") return value.is_null();
  throw std::runtime_error("schema uses unsupported type: " + type);
}

void validate_node(const json& value, const json& schema,
                   const std::string& path) {
  if (schema.contains("type")) {
    const json& t = schema.at("type");
    bool ok = false;
    if (t.is_string()) {
      ok = type_matches(value, t.get<std::string>());
    } else {
      for (const json& alt : t)
        if (type_matches(value, alt.get<std::string>())) ok = true;
    }
    if (!ok)
      throw std::runtime_error("schema violation at " + path +
                               ": wrong type, got " + value.dump());
  }
  if (schema.contains("enum")) {
    bool ok = false;
    for (const json& alt : schema.at("enum"))
      if (alt == value) ok = true;
    if (!ok)
      throw std::runtime_error("schema violation at " + path +
                               ": value not in enum");
  }
  if (value.is_object()) {
    if (schema.contains("required"))
      for (const json& key : schema.at("required"))
        if (!value.contains(key.get<std::string>()))
          throw std::runtime_error("schema violation at " + path +
                                   ": missing field " +
                                   key.get<std::string>());
    if (schema.contains("properties"))
      for (const auto& [key, sub] : schema.at("properties").items())
        if (value.contains(key))
          validate_node(value.at(key), sub, path + "/" + key);
  }
  if (value.is_array() && schema.contains("items"))
    for (std::size_t i = 0; i < value.size(); ++i)
      validate_node(value[i], schema.at("items"),
                    path + "/" + std::to_string(i));
}

}  // namespace

void validate_against_schema(const json& value, const json& schema) {
  validate_node(value, schema, "");
}

std::vector<EvalReport> load_reports_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<EvalReport> reports;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      reports.push_back(report_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": " + e.what());
    }
  }
  return reports;
}

void ExperimentConfig::validate() const {
  if (model_kinds.empty())
    throw std::invalid_argument("no model kinds configured");
  if (dim == 0) throw std::invalid_argument("dim must be >= 1");
  for (ModelKind k : model_kinds)
    if ((k == ModelKind::ComplEx || k == ModelKind::RotatE) && dim % 2 != 0)
      throw std::invalid_argument("complex-valued models need an even dim");
  const bool any_path =
      !train_path.empty() || !valid_path.empty() || !test_path.empty();
  const bool all_paths =
      !train_path.empty() && !valid_path.empty() && !test_path.empty();
  if (any_path && !all_paths)
    throw std::invalid_argument("provide all three split paths or none");
  if (!any_path) synth.validate();
  if (!(sample_factor > 0.0) || !std::isfinite(sample_factor))
    throw std::invalid_argument("sample_factor must be positive");
  train_cfg.validate();
  sw.validate();
  strat.validate();
  kernel.validate();
}

json ExperimentConfig::config_json() const {
  return json{
      {"train_path", train_path.string()},
      {"valid_path", valid_path.string()},
      {"test_path", test_path.string()},
      {"dataset", dataset_name},
      {"synth",
       {{"n_entities", synth.n_entities},
        {"n_clusters", synth.n_clusters},
        {"n_base_relations", synth.n_base_relations},
        {"n_composed_relations", synth.n_composed_relations},
        {"edges_per_entity", synth.edges_per_entity},
        {"compose_fraction", synth.compose_fraction},
        {"valid_fraction", synth.valid_fraction},
        {"test_fraction", synth.test_fraction},
        {"seed", synth.seed}}},
      {"model_kinds",
       [&] {
         json arr = json::array();
         for (ModelKind k : model_kinds) arr.push_back(model_kind_name(k));
         return arr;
       }()},
      {"dim", dim},
      {"train",
       {{"epochs", train_cfg.epochs},
        {"lr", train_cfg.lr},
        {"margin", train_cfg.margin},
        {"negatives_per_positive", train_cfg.negatives_per_positive},
        {"batch_size", train_cfg.batch_size},
        {"eval_every", train_cfg.eval_every}}},
      {"sw",
       {{"n_slices", sw.n_slices},
        {"order", sw.order},
        {"grid_directions", sw.grid_directions}}},
      {"sample_factor", sample_factor},
      {"max_eval_triples", max_eval_triples},
      {"rank_mode", rank_mode_name(rank_mode)},
      {"known_scope",
       known_scope == KnownScope::AllSplits ? "all" : "exclude-valid"},
      {"strat", {{"beta_e", strat.beta_e}, {"beta_r", strat.beta_r}}},
      {"kernel",
       {{"n_sampled_nodes", kernel.n_sampled_nodes},
        {"bandwidth", kernel.bandwidth},
        {"n_repeats", kernel.n_repeats}}},
      {"seed", seed}};
}

std::string ExperimentConfig::run_id() const {
  const std::string dump = config_json().dump();
  const std::uint64_t h = seed_mix(0x6b70u, dump);
  std::ostringstream out;
  out << "run-" << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

KnowledgeGraph load_dataset(const ExperimentConfig& cfg) {
  if (!cfg.uses_synth())
    return KnowledgeGraph::load_tsv(cfg.train_path, cfg.valid_path,
                                    cfg.test_path);
  return generate_synthetic_kg(cfg.synth);
}

namespace {

std::uint64_t stage_seed(const ExperimentConfig& cfg, ModelKind kind,
                         std::size_t epoch, std::string_view stage) {
  std::uint64_t s = seed_mix(cfg.seed, model_kind_name(kind));
  s = seed_mix(s, static_cast<std::uint64_t>(epoch));
  return seed_mix(s, stage);
}

std::size_t full_sample_count(const ExperimentConfig& cfg,
                              const KnowledgeGraph& kg) {
  const double c = cfg.sample_factor * static_cast<double>(kg.num_entities());
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(c)));
}

struct SampledPair {
  ScoredGraph pos;
  ScoredGraph neg;
};

SampledPair sample_pair(const ExperimentConfig& cfg, const KnowledgeGraph& kg,
                        const EmbeddingModel& model, Split split,
                        std::size_t count, std::uint64_t seed) {
  SampledPair out;
  out.pos = build_positive_graph(kg, split, model, count,
                                 seed_mix(seed, "pos"), cfg.exec);
  out.neg = build_negative_graph(kg, model, out.pos.edges.size(),
                                 seed_mix(seed, "neg"), NegativeMode::FullGrid,
                                 cfg.known_scope, cfg.exec);
  return out;
}

double kp_stage(const ExperimentConfig& cfg, const KnowledgeGraph& kg,
                const EmbeddingModel& model, Split split, std::size_t count,
                std::uint64_t seed) {
  const SampledPair pair = sample_pair(cfg, kg, model, split, count, seed);
  SWConfig sw = cfg.sw;
  sw.seed = seed_mix(seed, "sw");
  return kp_score(pair.pos, pair.neg, sw, cfg.exec);
}

std::span<const Triple> eval_triples(const ExperimentConfig& cfg,
                                     const KnowledgeGraph& kg) {
  const std::vector<Triple>& test = kg.triples(Split::Test);
  if (cfg.max_eval_triples == 0 || cfg.max_eval_triples >= test.size())
    return test;
  return std::span<const Triple>(test.data(), cfg.max_eval_triples);
}

// Rebuilds the two KP sample pairs from their stage seeds and writes the
// graph TSVs and diagram CSVs under out_dir/dumps.
void dump_artifacts(const ExperimentConfig& cfg, const KnowledgeGraph& kg,
                    const Checkpoint& ckpt, std::size_t count) {
  const std::filesystem::path dir = cfg.out_dir / "dumps";
  std::filesystem::create_directories(dir);
  const std::string prefix = std::string(model_kind_name(ckpt.model.kind)) +
                             "_epoch" + std::to_string(ckpt.epoch);
  for (Split split : {Split::Train, Split::Test}) {
    const char* stage_name = split == Split::Train ? "kp_train" : "kp_test";
    const SampledPair pair =
        sample_pair(cfg, kg, ckpt.model, split, count,
                    stage_seed(cfg, ckpt.model.kind, ckpt.epoch, stage_name));
    const std::string base = prefix + "_" + split_name(split);
    if (cfg.dump_graphs) {
      write_graph_tsv(dir / (base + "_pos.graph.tsv"), pair.pos, kg);
      write_graph_tsv(dir / (base + "_neg.graph.tsv"), pair.neg, kg);
    }
    if (cfg.dump_diagrams) {
      const auto [lo, hi] = shared_frame(pair.pos, pair.neg);
      const std::pair<const char*, const ScoredGraph*> graphs[] = {
          {"pos", &pair.pos}, {"neg", &pair.neg}};
      for (const auto& [tag, g] : graphs) {
        std::ofstream out(dir / (base + "_" + std::string(tag) +
                                 ".diagram.csv"),
                          std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write diagram dump");
        write_diagram_csv(out, sublevel_pd(*g, lo, hi),
                          superlevel_pd(*g, lo, hi));
      }
    }
  }
}

void write_summary_csv(const std::filesystem::path& path,
                       std::span<const EvalReport> reports) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out.precision(17);
  out << "run_id,model,epoch,kp_train,kp_test,mr,mrr,hits1,hits3,hits10,"
         "strat_mr,strat_mrr,conicity,avl,gk_train,gk_test,"
         "t_kp_train,t_kp_test,t_ranking\n";
  auto cell = [&](std::optional<double> v) {
    out << ',';
    if (v) out << *v;
  };
  for (const EvalReport& r : reports) {
    out << r.run_id << ',' << model_kind_name(r.model_kind) << ',' << r.epoch;
    for (const char* name :
         {"kp_train", "kp_test", "mr", "mrr", "hits@1", "hits@3", "hits@10",
          "strat_mr", "strat_mrr", "conicity", "avl", "gk_train", "gk_test"})
      cell(r.metric(name));
    for (const char* st : {"kp_train", "kp_test", "ranking"}) {
      out << ',';
      auto it = r.wall_times.find(st);
      if (it != r.wall_times.end()) out << it->second;
    }
    out << '\n';
  }
}

}  // namespace

EvalReport evaluate_checkpoint(const ExperimentConfig& cfg,
                               const KnowledgeGraph& kg,
                               const Checkpoint& ckpt) {
  EvalReport rep;
  rep.run_id = cfg.run_id();
  rep.model_kind = ckpt.model.kind;
  rep.dataset = cfg.dataset_name;
  rep.epoch = ckpt.epoch;

  auto stage = [&](const char* name, auto&& body) {
    const std::uint64_t s = stage_seed(cfg, ckpt.model.kind, ckpt.epoch, name);
    rep.seeds[name] = s;
    Stopwatch watch;
    try {
      body(s);
    } catch (const std::exception& e) {
      rep.errors[name] = e.what();
    }
    rep.wall_times[name] = watch.seconds();
  };

  const std::size_t count = full_sample_count(cfg, kg);
  stage("kp_train", [&](std::uint64_t s) {
    rep.kp_train = kp_stage(cfg, kg, ckpt.model, Split::Train, count, s);
  });
  stage("kp_test", [&](std::uint64_t s) {
    rep.kp_test = kp_stage(cfg, kg, ckpt.model, Split::Test, count, s);
  });
  stage("ranking", [&](std::uint64_t) {
    rep.ranking = ranking_metrics(ckpt.model, kg, eval_triples(cfg, kg),
                                  cfg.rank_mode, cfg.exec, cfg.known_scope);
  });
  stage("strat", [&](std::uint64_t) {
    rep.strat = stratified_metrics(ckpt.model, kg, eval_triples(cfg, kg),
                                   cfg.rank_mode, cfg.strat, cfg.exec,
                                   cfg.known_scope);
  });
  stage("conicity",
        [&](std::uint64_t) { rep.conicity = conicity(ckpt.model); });
  stage("avl", [&](std::uint64_t) { rep.avl = avl(ckpt.model); });
  if ((cfg.dump_graphs || cfg.dump_diagrams) && !cfg.out_dir.empty()) {
    try {
      dump_artifacts(cfg, kg, ckpt, count);
    } catch (const std::exception& e) {
      rep.errors["dump"] = e.what();
    }
  }
  // The kernel stages rebuild the kp-stage graphs from the same seeds, so
  // the kernel sees exactly what KP saw without charging KP for it.
  stage("gk_train", [&](std::uint64_t s) {
    const SampledPair pair =
        sample_pair(cfg, kg, ckpt.model, Split::Train, count,
                    stage_seed(cfg, ckpt.model.kind, ckpt.epoch, "kp_train"));
    KernelConfig kc = cfg.kernel;
    kc.seed = seed_mix(s, "kernel");
    rep.gk_train = shortest_path_kernel(pair.pos, pair.neg, kc, cfg.exec);
  });
  stage("gk_test", [&](std::uint64_t s) {
    const SampledPair pair =
        sample_pair(cfg, kg, ckpt.model, Split::Test, count,
                    stage_seed(cfg, ckpt.model.kind, ckpt.epoch, "kp_test"));
    KernelConfig kc = cfg.kernel;
    kc.seed = seed_mix(s, "kernel");
    rep.gk_test = shortest_path_kernel(pair.pos, pair.neg, kc, cfg.exec);
  });
  return rep;
}

std::vector<EvalReport> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const KnowledgeGraph kg = load_dataset(cfg);
  const json schema = json::parse(eval_report_schema_text());

  std::ofstream jsonl;
  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    json manifest = {{"schema", 1},
                     {"run_id", cfg.run_id()},
                     {"dataset", cfg.dataset_name},
                     {"config", cfg.config_json()},
                     {"counts",
                      {{"entities", kg.num_entities()},
                       {"relations", kg.num_relations()},
                       {"train", kg.triples(Split::Train).size()},
                       {"valid", kg.triples(Split::Valid).size()},
                       {"test", kg.triples(Split::Test).size()}}}};
    std::ofstream mf(cfg.out_dir / "manifest.json", std::ios::trunc);
    if (!mf) throw std::runtime_error("cannot write manifest.json");
    mf << manifest.dump(2) << '\n';
    jsonl.open(cfg.out_dir / "reports.jsonl", std::ios::trunc);
    if (!jsonl) throw std::runtime_error("cannot write reports.jsonl");
  }

  std::vector<EvalReport> reports;
  for (ModelKind kind : cfg.model_kinds) {
    try {
      const std::uint64_t model_seed = seed_mix(cfg.seed, model_kind_name(kind));
      EmbeddingModel model =
          init_embeddings(kind, kg.num_entities(), kg.num_relations(), cfg.dim,
                          seed_mix(model_seed, "init"));
      TrainConfig tc = cfg.train_cfg;
      tc.seed = seed_mix(model_seed, "train");
      const std::vector<Checkpoint> ckpts = train(model, kg, tc);
      for (const Checkpoint& ckpt : ckpts) {
        EvalReport rep = evaluate_checkpoint(cfg, kg, ckpt);
        const json j = to_json(rep);
        validate_against_schema(j, schema);
        if (jsonl.is_open()) jsonl << j.dump() << '\n';
        reports.push_back(std::move(rep));
      }
    } catch (const std::exception& e) {
      EvalReport rep;
      rep.run_id = cfg.run_id();
      rep.model_kind = kind;
      rep.dataset = cfg.dataset_name;
      rep.errors["train"] = e.what();
      const json j = to_json(rep);
      validate_against_schema(j, schema);
      if (jsonl.is_open()) jsonl << j.dump() << '\n';
      reports.push_back(std::move(rep));
    }
  }

  if (!cfg.out_dir.empty())
    write_summary_csv(cfg.out_dir / "summary.csv", reports);
  return reports;
}

CorrelationResult correlate(std::span<const EvalReport> reports,
                            std::string_view metric_x,
                            std::string_view metric_y) {
  std::vector<double> xs, ys;
  for (const EvalReport& r : reports) {
    const auto x = r.metric(metric_x);
    const auto y = r.metric(metric_y);
    if (x && y) {
      xs.push_back(*x);
      ys.push_back(*y);
    }
  }
  if (xs.size() < 3)
    throw std::invalid_argument(
        "need at least 3 reports with both metrics defined");

  CorrelationResult out;
  out.n = xs.size();
  auto maybe = [&](double (*f)(std::span<const double>,
                               std::span<const double>)) {
    std::optional<double> v;
    try {
      v = f(xs, ys);
    } catch (const std::domain_error&) {
      v = std::nullopt;
    }
    return v;
  };
  out.r = maybe(pearson);
  out.rho = maybe(spearman);
  out.tau = maybe(kendall_tau_b);
  return out;
}

namespace {

bool lower_is_better(std::string_view metric) {
  return metric == "mr" || metric == "strat_mr";
}

std::size_t best_index(std::span<const EvalReport> reports,
                       std::string_view metric) {
  std::size_t best = 0;
  bool have = false;
  double best_v = 0.0;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto v = reports[i].metric(metric);
    if (!v)
      throw std::invalid_argument("metric " + std::string(metric) +
                                  " missing from report at epoch " +
                                  std::to_string(reports[i].epoch));
    const bool better = !have || (lower_is_better(metric) ? *v < best_v
                                                          : *v > best_v);
    if (better) {
      best = i;
      best_v = *v;
      have = true;
    }
  }
  return best;
}

}  // namespace

EarlyStopResult early_stop_select(std::span<const EvalReport> reports,
                                  std::string_view criterion) {
  if (reports.empty()) throw std::invalid_argument("no reports");
  const std::size_t chosen = best_index(reports, criterion);

  EarlyStopResult out;
  out.best_epoch = reports[chosen].epoch;
  for (const char* metric : {"mr", "mrr", "hits@1", "hits@3", "hits@10"}) {
    bool defined_everywhere = true;
    for (const EvalReport& r : reports)
      if (!r.metric(metric)) defined_everywhere = false;
    if (!defined_everywhere) continue;
    const std::size_t own_best = best_index(reports, metric);
    const double at_kp = *reports[chosen].metric(metric);
    const double at_own = *reports[own_best].metric(metric);
    double err;
    if (at_own == 0.0)
      err = at_kp == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    else
      err = std::abs(at_kp - at_own) / std::abs(at_own);
    out.relative_error[metric] = err;
  }
  return out;
}

std::vector<RobustnessRow> robustness_sweep(const ExperimentConfig& cfg,
                                            std::span<const double> fractions,
                                            std::size_t n_seeds) {
  if (n_seeds < 2) throw std::invalid_argument("n_seeds must be >= 2");
  std::vector<std::uint64_t> seeds(n_seeds);
  const std::uint64_t base = seed_mix(cfg.seed, "robustness-eval");
  for (std::size_t i = 0; i < n_seeds; ++i)
    seeds[i] = seed_mix(base, static_cast<std::uint64_t>(i));
  return robustness_sweep(cfg, fractions, seeds);
}

std::vector<RobustnessRow> robustness_sweep(
    const ExperimentConfig& cfg, std::span<const double> fractions,
    std::span<const std::uint64_t> eval_seeds) {
  cfg.validate();
  if (fractions.empty()) throw std::invalid_argument("no fractions given");
  for (double f : fractions)
    if (!(f > 0.0 && f <= 1.0))
      throw std::invalid_argument("fractions must lie in (0, 1]");
  if (eval_seeds.size() < 2)
    throw std::invalid_argument("need at least 2 evaluation seeds");

  const KnowledgeGraph kg = load_dataset(cfg);
  const ModelKind kind = cfg.model_kinds.front();
  const std::uint64_t model_seed = seed_mix(cfg.seed, model_kind_name(kind));
  EmbeddingModel model =
      init_embeddings(kind, kg.num_entities(), kg.num_relations(), cfg.dim,
                      seed_mix(model_seed, "init"));
  TrainConfig tc = cfg.train_cfg;
  tc.seed = seed_mix(model_seed, "train");
  const std::vector<Checkpoint> ckpts = train(model, kg, tc);
  if (ckpts.size() < 3)
    throw std::invalid_argument(
        "robustness sweep needs at least 3 checkpoints");

  // Fixed ranking series, computed once.
  std::vector<double> hits(ckpts.size());
  for (std::size_t i = 0; i < ckpts.size(); ++i)
    hits[i] = ranking_metrics(ckpts[i].model, kg, eval_triples(cfg, kg),
                              cfg.rank_mode, cfg.exec, cfg.known_scope)
                  .hits.at(10);

  const std::size_t full = full_sample_count(cfg, kg);
  std::vector<RobustnessRow> rows;
  for (double f : fractions) {
    const std::size_t count = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(f * full)));
    std::vector<double> rs;
    for (std::uint64_t es : eval_seeds) {
      std::vector<double> kp_series(ckpts.size());
      for (std::size_t i = 0; i < ckpts.size(); ++i) {
        const std::uint64_t s =
            seed_mix(seed_mix(es, "robustness"), ckpts[i].epoch);
        kp_series[i] =
            kp_stage(cfg, kg, ckpts[i].model, Split::Test, count, s);
      }
      rs.push_back(pearson(kp_series, hits));
    }
    double mean = 0.0;
    for (double r : rs) mean += r;
    mean /= static_cast<double>(rs.size());
    double var = 0.0;
    for (double r : rs) var += (r - mean) * (r - mean);
    var /= static_cast<double>(rs.size() - 1);
    rows.push_back(RobustnessRow{f, mean, std::sqrt(var)});
  }
  return rows;
}

std::vector<TimingRow> timing_report(std::span<const EvalReport> reports) {
  constexpr double kClockResolution = 1e-7;
  std::vector<TimingRow> rows;
  std::vector<ModelKind> seen;
  for (const EvalReport& r : reports) {
    if (std::find(seen.begin(), seen.end(), r.model_kind) != seen.end())
      continue;
    seen.push_back(r.model_kind);
    TimingRow row;
    row.kind = r.model_kind;
    bool complete = true;
    for (const EvalReport& q : reports) {
      if (q.model_kind != r.model_kind) continue;
      auto rt = q.wall_times.find("ranking");
      auto kt = q.wall_times.find("kp_test");
      if (rt == q.wall_times.end() || kt == q.wall_times.end()) {
        complete = false;
        continue;
      }
      row.ranking_seconds += rt->second;
      row.kp_seconds += kt->second;
    }
    if (!complete) row.note = "missing stage timings in some reports";
    row.kp_seconds = std::max(row.kp_seconds, kClockResolution);
    row.speedup = row.ranking_seconds / row.kp_seconds;
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_timing_csv(const std::filesystem::path& path,
                      std::span<const TimingRow> rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out.precision(17);
  out << "model,ranking_seconds,kp_seconds,speedup,note\n";
  for (const TimingRow& r : rows)
    out << model_kind_name(r.kind) << ',' << r.ranking_seconds << ','
        << r.kp_seconds << ',' << r.speedup << ',' << r.note << '\n';
}

TheoryReportResult theory_report(const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  TheoryReportResult result;

  std::vector<double> gaps;
  for (int i = 0; i <= 12; ++i) gaps.push_back(0.25 * i);
  const std::vector<SweepRow> sweep = lemma1_sweep(gaps, 1.0, 1.0);
  result.monotone_pass = true;
  {
    std::ofstream out(out_dir / "lemma1_sweep.csv", std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write lemma1_sweep.csv");
    out.precision(17);
    out << "gap,perm,w2,monotone_ok\n";
    for (const SweepRow& r : sweep) {
      out << r.gap << ',' << r.perm << ',' << r.w2 << ','
          << (r.monotone_ok ? 1 : 0) << '\n';
      if (!r.monotone_ok) result.monotone_pass = false;
    }
  }

  const std::vector<double> sigmas = {0.5, 0.75, 1.0, 1.5, 2.0};
  const std::vector<VarianceSweepRow> vsweep = variance_sweep(1.0, sigmas);
  {
    std::ofstream out(out_dir / "variance_sweep.csv", std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write variance_sweep.csv");
    out.precision(17);
    out << "sigma_neg,perm,w2\n";
    for (const VarianceSweepRow& r : vsweep)
      out << r.sigma_neg << ',' << r.perm << ',' << r.w2 << '\n';
  }

  // Gaussian score fixtures: separated positives and negatives.
  std::mt19937_64 rng(20240913);
  std::normal_distribution<double> pos_dist(1.0, 1.0), neg_dist(0.0, 1.0);
  std::vector<double> pos(2000), neg(2000);
  for (double& x : pos) x = pos_dist(rng);
  for (double& x : neg) x = neg_dist(rng);

  const StabilityReport zero = stability_check(pos, neg, 0.0, 10, 1);
  result.zero_noise_violations = zero.violations;
  const StabilityReport noisy = stability_check(pos, neg, 0.3, 100, 7);
  result.noisy_violations = noisy.violations;
  {
    std::ofstream out(out_dir / "stability_trials.csv", std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write stability_trials.csv");
    out.precision(17);
    out << "trial,rel_change,bound,violated\n";
    for (std::size_t i = 0; i < noisy.trials.size(); ++i)
      out << i << ',' << noisy.trials[i].rel_change << ','
          << noisy.trials[i].bound << ',' << (noisy.trials[i].violated ? 1 : 0)
          << '\n';
  }

  result.bound_at_ratio2 = stability_bound(StabilityInput{1.0, 2.0, 1.0, 1.0});
  const bool bound_ok = std::abs(result.bound_at_ratio2 - 0.64645) < 1e-4;
  result.pass = result.monotone_pass && result.zero_noise_violations == 0 &&
                result.noisy_violations == 0 && bound_ok;

  {
    std::ofstream out(out_dir / "theory_summary.csv", std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write theory_summary.csv");
    out.precision(17);
    out << "check,value,pass\n";
    out << "lemma1_monotone," << (result.monotone_pass ? 1 : 0) << ','
        << (result.monotone_pass ? 1 : 0) << '\n';
    out << "stability_zero_noise_violations," << result.zero_noise_violations
        << ',' << (result.zero_noise_violations == 0 ? 1 : 0) << '\n';
    out << "stability_noisy_violations," << result.noisy_violations << ','
        << (result.noisy_violations == 0 ? 1 : 0) << '\n';
    out << "bound_at_variance_ratio_2," << result.bound_at_ratio2 << ','
        << (bound_ok ? 1 : 0) << '\n';
  }
  return result;
}

}  // namespace kp

// Command-line front end: dataset checks, training, checkpoint evaluation,
// correlation/early-stop/timing analysis over report files, robustness
// sweeps, the theory tables and synthetic dataset generation.

#include <cctype>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <omp.h>

#include "kp/harness.hpp"
#include "kp/stats.hpp"

namespace {

using namespace kp;

// Every flag can also be set through the environment as KP_<FLAG_IN_CAPS>.
std::string env_name(std::string flag) {
  while (!flag.empty() && flag.front() == '-') flag.erase(flag.begin());
  for (char& c : flag) c = c == '-' ? '_' : static_cast<char>(std::toupper(c));
  return "KP_" + flag;
}

template <typename T>
CLI::Option* opt(CLI::App* app, const std::string& flag, T& var,
                 const std::string& desc) {
  return app->add_option(flag, var, desc)->envname(env_name(flag));
}

CLI::Option* flag(CLI::App* app, const std::string& name, bool& var,
                  const std::string& desc) {
  return app->add_flag(name, var, desc)->envname(env_name(name));
}

struct CliState {
  ExperimentConfig cfg;
  std::vector<std::string> model_names = {"transe"};
  std::string rank_mode = "filtered";
  std::string known_scope = "all";
  bool serial = false;
  int threads = 0;

  void finalize() {
    if (threads > 0) omp_set_num_threads(threads);
    cfg.exec = serial ? Exec::Serial : Exec::Parallel;
    cfg.model_kinds.clear();
    for (const std::string& name : model_names)
      cfg.model_kinds.push_back(model_kind_from_name(name));
    cfg.rank_mode = rank_mode_from_name(rank_mode);
    cfg.known_scope = known_scope == "all" ? KnownScope::AllSplits
                                           : KnownScope::ExcludeValid;
    cfg.validate();
  }
};

void add_dataset_flags(CLI::App* sub, CliState& st) {
  opt(sub, "--train", st.cfg.train_path, "train split TSV");
  opt(sub, "--valid", st.cfg.valid_path, "validation split TSV");
  opt(sub, "--test", st.cfg.test_path, "test split TSV");
  opt(sub, "--dataset", st.cfg.dataset_name, "dataset label in reports");
  opt(sub, "--synth-entities", st.cfg.synth.n_entities,
      "synthetic: entity count");
  opt(sub, "--synth-clusters", st.cfg.synth.n_clusters,
      "synthetic: cluster count");
  opt(sub, "--synth-base-relations", st.cfg.synth.n_base_relations,
      "synthetic: base relation count");
  opt(sub, "--synth-composed-relations", st.cfg.synth.n_composed_relations,
      "synthetic: composed relation count");
  opt(sub, "--synth-edges-per-entity", st.cfg.synth.edges_per_entity,
      "synthetic: edges per entity per relation");
  opt(sub, "--synth-compose-fraction", st.cfg.synth.compose_fraction,
      "synthetic: fraction of compositional shortcuts kept")
      ->check(CLI::Range(0.0, 1.0));
  opt(sub, "--synth-valid-fraction", st.cfg.synth.valid_fraction,
      "synthetic: validation split fraction");
  opt(sub, "--synth-test-fraction", st.cfg.synth.test_fraction,
      "synthetic: test split fraction");
  opt(sub, "--synth-seed", st.cfg.synth.seed, "synthetic: generator seed");
}

void add_experiment_flags(CLI::App* sub, CliState& st, bool seed_required) {
  add_dataset_flags(sub, st);
  opt(sub, "--models", st.model_names,
      "model kinds (transe, distmult, complex, rotate)")
      ->delimiter(',');
  opt(sub, "--dim", st.cfg.dim, "embedding dimension");
  opt(sub, "--epochs", st.cfg.train_cfg.epochs, "training epochs");
  opt(sub, "--lr", st.cfg.train_cfg.lr, "SGD learning rate");
  opt(sub, "--margin", st.cfg.train_cfg.margin, "ranking loss margin");
  opt(sub, "--negatives", st.cfg.train_cfg.negatives_per_positive,
      "negatives per positive");
  opt(sub, "--batch-size", st.cfg.train_cfg.batch_size, "SGD batch size");
  opt(sub, "--eval-every", st.cfg.train_cfg.eval_every,
      "checkpoint every N epochs");
  opt(sub, "--slices", st.cfg.sw.n_slices, "sliced Wasserstein directions");
  opt(sub, "--order", st.cfg.sw.order, "Wasserstein order (1 or 2)")
      ->check(CLI::IsMember({1, 2}));
  flag(sub, "--grid-directions", st.cfg.sw.grid_directions,
       "use evenly spaced slice directions");
  opt(sub, "--sample-factor", st.cfg.sample_factor,
      "sampled edges per graph as a multiple of |E|");
  opt(sub, "--max-eval-triples", st.cfg.max_eval_triples,
      "rank at most N test triples (0 = all)");
  opt(sub, "--rank-mode", st.rank_mode, "ranking protocol")
      ->check(CLI::IsMember({"raw", "filtered"}));
  opt(sub, "--known-scope", st.known_scope,
      "splits counted as known for filtering/rejection")
      ->check(CLI::IsMember({"all", "exclude-valid"}));
  opt(sub, "--beta-e", st.cfg.strat.beta_e, "stratified entity exponent");
  opt(sub, "--beta-r", st.cfg.strat.beta_r, "stratified relation exponent");
  opt(sub, "--kernel-nodes", st.cfg.kernel.n_sampled_nodes,
      "graph kernel sampled nodes");
  opt(sub, "--kernel-bandwidth", st.cfg.kernel.bandwidth,
      "graph kernel histogram bin width (<=0: span/32)");
  opt(sub, "--kernel-repeats", st.cfg.kernel.n_repeats,
      "graph kernel repeats");
  opt(sub, "--out", st.cfg.out_dir, "output directory");
  auto* seed = opt(sub, "--seed", st.cfg.seed, "global seed");
  if (seed_required) seed->required();
  flag(sub, "--serial", st.serial, "disable the parallel execution paths");
  opt(sub, "--threads", st.threads, "OpenMP thread count (0 = default)");
}

void print_correlation(const char* label, const CorrelationResult& c) {
  auto cell = [](const std::optional<double>& v) {
    return v ? std::to_string(*v) : std::string("undefined");
  };
  std::cout << label << ": n=" << c.n << " pearson=" << cell(c.r)
            << " spearman=" << cell(c.rho) << " kendall=" << cell(c.tau)
            << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"knowledge-graph embedding evaluation via persistence diagrams"};
  app.require_subcommand(1);

  CliState st;

  auto* load_check = app.add_subcommand(
      "load-check", "load a dataset and print vocabulary/triple counts");
  add_dataset_flags(load_check, st);
  load_check->callback([&] {
    const KnowledgeGraph kg = load_dataset(st.cfg);
    std::cout << "entities: " << kg.num_entities()
              << "\nrelations: " << kg.num_relations()
              << "\ntrain: " << kg.triples(Split::Train).size()
              << "\nvalid: " << kg.triples(Split::Valid).size()
              << "\ntest: " << kg.triples(Split::Test).size()
              << "\nduplicates_dropped: " << kg.duplicates_dropped() << "\n";
  });

  auto* synth_gen = app.add_subcommand(
      "synth-gen", "generate the synthetic dataset as three TSV files");
  add_dataset_flags(synth_gen, st);
  opt(synth_gen, "--out", st.cfg.out_dir, "output directory")->required();
  synth_gen->callback([&] {
    const KnowledgeGraph kg = generate_synthetic_kg(st.cfg.synth);
    std::filesystem::create_directories(st.cfg.out_dir);
    kg.write_tsv(st.cfg.out_dir / "train.tsv", st.cfg.out_dir / "valid.tsv",
                 st.cfg.out_dir / "test.tsv");
    std::cout << "wrote " << kg.triples(Split::Train).size() << "/"
              << kg.triples(Split::Valid).size() << "/"
              << kg.triples(Split::Test).size() << " triples to "
              << st.cfg.out_dir.string() << "\n";
  });

  auto* train_cmd =
      app.add_subcommand("train", "train models and save binary checkpoints");
  add_experiment_flags(train_cmd, st, true);
  train_cmd->get_option("--out")->required();
  train_cmd->callback([&] {
    st.finalize();
    const KnowledgeGraph kg = load_dataset(st.cfg);
    std::filesystem::create_directories(st.cfg.out_dir);
    for (ModelKind kind : st.cfg.model_kinds) {
      const std::uint64_t model_seed =
          seed_mix(st.cfg.seed, model_kind_name(kind));
      EmbeddingModel model =
          init_embeddings(kind, kg.num_entities(), kg.num_relations(),
                          st.cfg.dim, seed_mix(model_seed, "init"));
      TrainConfig tc = st.cfg.train_cfg;
      tc.seed = seed_mix(model_seed, "train");
      const auto ckpts = train(model, kg, tc, [&](const Checkpoint& c) {
        const std::string name = std::string(model_kind_name(kind)) +
                                 "_epoch" + std::to_string(c.epoch) + ".ckpt";
        save_checkpoint(st.cfg.out_dir / name, c.model, c.epoch, tc);
        std::cout << model_kind_name(kind) << " epoch " << c.epoch
                  << " loss " << c.train_loss << "\n";
      });
      if (ckpts.empty())
        std::cout << model_kind_name(kind)
                  << ": no checkpoints (epochs < eval-every)\n";
    }
  });

  auto* eval_cmd = app.add_subcommand(
      "eval", "train and evaluate checkpoints, writing JSON reports");
  add_experiment_flags(eval_cmd, st, true);
  eval_cmd->get_option("--out")->required();
  flag(eval_cmd, "--dump-graphs", st.cfg.dump_graphs,
       "dump sampled graphs as TSV");
  flag(eval_cmd, "--dump-diagrams", st.cfg.dump_diagrams,
       "dump persistence diagrams as CSV");
  eval_cmd->callback([&] {
    st.finalize();
    const auto reports = run_experiment(st.cfg);
    std::size_t failures = 0;
    for (const EvalReport& r : reports) failures += r.errors.size();
    std::cout << "wrote " << reports.size() << " reports to "
              << (st.cfg.out_dir / "reports.jsonl").string() << " ("
              << failures << " stage errors)\n";
  });

  std::string reports_path;
  std::string metric_x = "kp_test";
  std::string metric_y = "hits@10";
  auto* correlate_cmd = app.add_subcommand(
      "correlate", "correlate two metrics across reports");
  opt(correlate_cmd, "--reports", reports_path, "reports.jsonl path")
      ->required();
  opt(correlate_cmd, "--metric-x", metric_x, "first metric");
  opt(correlate_cmd, "--metric-y", metric_y, "second metric");
  correlate_cmd->callback([&] {
    const auto reports = load_reports_jsonl(reports_path);
    print_correlation((metric_x + " vs " + metric_y).c_str(),
                      correlate(reports, metric_x, metric_y));
  });

  std::string criterion = "kp_test";
  auto* early_cmd = app.add_subcommand(
      "early-stop", "select the best checkpoint by a criterion metric");
  opt(early_cmd, "--reports", reports_path, "reports.jsonl path")->required();
  opt(early_cmd, "--criterion", criterion, "selection metric");
  early_cmd->callback([&] {
    const auto reports = load_reports_jsonl(reports_path);
    const EarlyStopResult res = early_stop_select(reports, criterion);
    std::cout << "best_epoch: " << res.best_epoch << "\n";
    for (const auto& [metric, err] : res.relative_error)
      std::cout << "relative_error[" << metric << "]: " << err << "\n";
  });

  std::vector<double> fractions = {0.2, 0.4, 0.6, 0.8, 1.0};
  std::size_t n_seeds = 5;
  auto* robust_cmd = app.add_subcommand(
      "robustness", "correlation stability across sampling fractions/seeds");
  add_experiment_flags(robust_cmd, st, true);
  opt(robust_cmd, "--fractions", fractions, "sampling fractions in (0,1]")
      ->delimiter(',');
  opt(robust_cmd, "--eval-seeds", n_seeds, "independent seeds per fraction");
  robust_cmd->callback([&] {
    st.finalize();
    const auto rows = robustness_sweep(st.cfg, fractions, n_seeds);
    std::cout << "fraction,mean_r,std_r\n";
    for (const RobustnessRow& r : rows)
      std::cout << r.fraction << ',' << r.mean_r << ',' << r.std_r << "\n";
    if (!st.cfg.out_dir.empty()) {
      std::filesystem::create_directories(st.cfg.out_dir);
      std::ofstream out(st.cfg.out_dir / "robustness.csv", std::ios::trunc);
      out << "fraction,mean_r,std_r\n";
      out.precision(17);
      for (const RobustnessRow& r : rows)
        out << r.fraction << ',' << r.mean_r << ',' << r.std_r << "\n";
    }
  });

  auto* timing_cmd = app.add_subcommand(
      "timing", "ranking-vs-KP wall time table from reports");
  opt(timing_cmd, "--reports", reports_path, "reports.jsonl path")->required();
  std::string timing_out;
  opt(timing_cmd, "--out", timing_out, "also write timing.csv here");
  timing_cmd->callback([&] {
    const auto reports = load_reports_jsonl(reports_path);
    const auto rows = timing_report(reports);
    std::cout << "model,ranking_seconds,kp_seconds,speedup,note\n";
    for (const TimingRow& r : rows)
      std::cout << model_kind_name(r.kind) << ',' << r.ranking_seconds << ','
                << r.kp_seconds << ',' << r.speedup << ',' << r.note << "\n";
    if (!timing_out.empty()) {
      std::filesystem::create_directories(
          std::filesystem::path(timing_out).parent_path().empty()
              ? "."
              : std::filesystem::path(timing_out).parent_path());
      write_timing_csv(timing_out, rows);
    }
  });

  std::string theory_out = "theory_out";
  auto* theory_cmd = app.add_subcommand(
      "theory", "emit the analytic sweep and stability tables");
  opt(theory_cmd, "--out", theory_out, "output directory");
  theory_cmd->callback([&] {
    const TheoryReportResult res = theory_report(theory_out);
    std::cout << "lemma1_monotone: " << (res.monotone_pass ? "pass" : "FAIL")
              << "\nzero_noise_violations: " << res.zero_noise_violations
              << "\nnoisy_violations: " << res.noisy_violations
              << "\nbound_at_variance_ratio_2: " << res.bound_at_ratio2
              << "\noverall: " << (res.pass ? "pass" : "FAIL") << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

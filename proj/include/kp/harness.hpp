#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kp/baselines.hpp"
#include "kp/common.hpp"
#include "kp/kge_models.hpp"
#include "kp/ranking.hpp"
#include "kp/sampling.hpp"
#include "kp/synth.hpp"
#include "kp/transport.hpp"

namespace kp {

// One evaluation of one checkpoint. Metrics of failed stages stay NaN and the
// failure message lands in `errors`; NaN serializes as JSON null.
struct EvalReport {
  std::string run_id;
  ModelKind model_kind = ModelKind::TransE;
  std::string dataset;
  std::size_t epoch = 0;
  double kp_train = std::numeric_limits<double>::quiet_NaN();
  double kp_test = std::numeric_limits<double>::quiet_NaN();
  RankingReport ranking;
  RankingReport strat;
  double conicity = std::numeric_limits<double>::quiet_NaN();
  double avl = std::numeric_limits<double>::quiet_NaN();
  double gk_train = std::numeric_limits<double>::quiet_NaN();
  double gk_test = std::numeric_limits<double>::quiet_NaN();
  std::map<std::string, double> wall_times;
  std::map<std::string, std::uint64_t> seeds;
  std::map<std::string, std::string> errors;

  // Metric by name: kp_train, kp_test, conicity, avl, gk_train, gk_test,
  // mr, mrr, hits@1, hits@3, hits@10 and the strat_ prefixed ranking
  // variants. nullopt when the value is NaN (stage failed); unknown names
  // throw std::invalid_argument.
  std::optional<double> metric(std::string_view name) const;
};

nlohmann::json to_json(const EvalReport& r);
EvalReport report_from_json(const nlohmann::json& j);

// The JSON schema every report is validated against (schema version 1); the
// same text ships at schema/eval_report.schema.json.
const char* eval_report_schema_text();

// Minimal structural validator for the schema subset used here (type,
// properties, required, items, enum). Throws std::runtime_error naming the
// offending path.
void validate_against_schema(const nlohmann::json& value,
                             const nlohmann::json& schema);

std::vector<EvalReport> load_reports_jsonl(const std::filesystem::path& path);

struct ExperimentConfig {
  // Dataset: either three TSV paths or the bundled synthetic generator.
  std::filesystem::path train_path, valid_path, test_path;
  SynthConfig synth;
  std::string dataset_name = "synth";

  std::vector<ModelKind> model_kinds = {ModelKind::TransE};
  std::size_t dim = 16;
  TrainConfig train_cfg;
  SWConfig sw;
  // Sampled edges per graph = ceil(sample_factor * |E|).
  double sample_factor = 1.0;
  // 0 ranks the whole test split; otherwise only the first N test triples.
  std::size_t max_eval_triples = 0;
  RankMode rank_mode = RankMode::Filtered;
  KnownScope known_scope = KnownScope::AllSplits;
  StratConfig strat;
  KernelConfig kernel;
  std::filesystem::path out_dir;
  std::uint64_t seed = 0;
  Exec exec = Exec::Parallel;
  // Debug artifacts under out_dir/dumps: sampled graphs as TSV and their
  // persistence diagrams as CSV, one set per KP stage. No effect on metrics.
  bool dump_graphs = false;
  bool dump_diagrams = false;

  bool uses_synth() const { return train_path.empty(); }
  void validate() const;
  nlohmann::json config_json() const;
  std::string run_id() const;  // stable hash of the config
};

KnowledgeGraph load_dataset(const ExperimentConfig& cfg);

// Trains every configured model kind and evaluates each checkpoint: KP over
// train and test samples, ranking and stratified metrics, conicity, AVL and
// the graph kernel, each stage separately seeded and wall-timed. Persists
// manifest.json, reports.jsonl and summary.csv under out_dir (when set) and
// returns the reports. A stage failure is recorded in the report; the run
// continues.
std::vector<EvalReport> run_experiment(const ExperimentConfig& cfg);

// Evaluation of one checkpoint, exposed for the robustness sweep and tests.
EvalReport evaluate_checkpoint(const ExperimentConfig& cfg,
                               const KnowledgeGraph& kg,
                               const Checkpoint& ckpt);

struct CorrelationResult {
  std::optional<double> r, rho, tau;  // nullopt = undefined (zero variance)
  std::size_t n = 0;
};

// Paired series of two report metrics across checkpoints. Needs >= 3 reports
// where both metrics are defined.
CorrelationResult correlate(std::span<const EvalReport> reports,
                            std::string_view metric_x,
                            std::string_view metric_y);

struct EarlyStopResult {
  std::size_t best_epoch = 0;
  // Relative error per ranking metric against that metric's own best epoch.
  std::map<std::string, double> relative_error;
};

// best_epoch = argmax of the criterion (argmin for mr/strat_mr).
EarlyStopResult early_stop_select(std::span<const EvalReport> reports,
                                  std::string_view criterion);

struct RobustnessRow {
  double fraction = 0.0;
  double mean_r = 0.0;
  double std_r = 0.0;
};

// Trains the first configured model kind once, fixes the per-checkpoint
// Hits@10 series, then re-samples KP(test) at each fraction of the full
// sample count with one KP series per seed and reports mean/std of the
// Pearson correlation per fraction.
std::vector<RobustnessRow> robustness_sweep(const ExperimentConfig& cfg,
                                            std::span<const double> fractions,
                                            std::size_t n_seeds);
std::vector<RobustnessRow> robustness_sweep(
    const ExperimentConfig& cfg, std::span<const double> fractions,
    std::span<const std::uint64_t> eval_seeds);

struct TimingRow {
  ModelKind kind = ModelKind::TransE;
  double ranking_seconds = 0.0;
  double kp_seconds = 0.0;
  double speedup = 0.0;
  std::string note;  // non-empty when timings were missing
};

// Per model kind: summed ranking stage time, summed KP(test) stage time and
// their ratio. KP times are clamped to the clock resolution so the ratio
// stays finite.
std::vector<TimingRow> timing_report(std::span<const EvalReport> reports);
void write_timing_csv(const std::filesystem::path& path,
                      std::span<const TimingRow> rows);

struct TheoryReportResult {
  bool monotone_pass = false;
  std::size_t zero_noise_violations = 0;
  std::size_t noisy_violations = 0;
  double bound_at_ratio2 = 0.0;
  bool pass = false;
};

// Runs the default mean-gap sweep, variance sweep and stability trials and
// writes lemma1_sweep.csv, variance_sweep.csv, stability_trials.csv and
// theory_summary.csv under out_dir.
TheoryReportResult theory_report(const std::filesystem::path& out_dir);

}  // namespace kp

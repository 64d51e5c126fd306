// Compares the serial reference implementations against the OpenMP paths.
// Prints one row per kernel with wall times and the observed speedup.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <vector>

#include <omp.h>

#include "kp/common.hpp"
#include "kp/harness.hpp"

namespace {

using namespace kp;

struct BenchRow {
  const char* name;
  double serial_s;
  double parallel_s;
};

template <typename F>
double time_best_of(int reps, F&& f) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < reps; ++i) {
    Stopwatch sw;
    f();
    best = std::min(best, sw.seconds());
  }
  return best;
}

void print_rows(const std::vector<BenchRow>& rows) {
  std::printf("%-22s %12s %12s %9s\n", "kernel", "serial_s", "parallel_s",
              "speedup");
  for (const BenchRow& r : rows)
    std::printf("%-22s %12.6f %12.6f %8.2fx\n", r.name, r.serial_s,
                r.parallel_s, r.serial_s / r.parallel_s);
}

}  // namespace

int main(int argc, char** argv) {
  int reps = 3;
  if (argc > 1) reps = std::max(1, std::atoi(argv[1]));
  std::cout << "threads: " << omp_get_max_threads() << ", best of " << reps
            << " repetitions per cell\n\n";

  SynthConfig synth;
  synth.n_entities = 1200;
  synth.edges_per_entity = 3;
  synth.seed = 7;
  const KnowledgeGraph kg = generate_synthetic_kg(synth);

  EmbeddingModel model = init_embeddings(ModelKind::RotatE, kg.num_entities(),
                                         kg.num_relations(), 32, 11);
  const auto& test = kg.triples(Split::Test);
  const std::vector<Triple> eval_triples(
      test.begin(), test.begin() + std::min<std::size_t>(test.size(), 200));

  std::vector<BenchRow> rows;

  {
    const auto& triples = kg.triples(Split::Train);
    std::vector<double> out;
    const double s = time_best_of(
        reps, [&] { out = score_triples(model, triples, Exec::Serial); });
    const double p = time_best_of(
        reps, [&] { out = score_triples(model, triples, Exec::Parallel); });
    rows.push_back({"score_triples", s, p});
  }

  {
    RankingReport rep;
    const double s = time_best_of(reps, [&] {
      rep = ranking_metrics(model, kg, eval_triples, RankMode::Filtered,
                            Exec::Serial);
    });
    const double p = time_best_of(reps, [&] {
      rep = ranking_metrics(model, kg, eval_triples, RankMode::Filtered,
                            Exec::Parallel);
    });
    rows.push_back({"ranking_metrics", s, p});
  }

  {
    const std::size_t count = kg.triples(Split::Train).size();
    const ScoredGraph pos =
        build_positive_graph(kg, Split::Train, model, count, 5, Exec::Serial);
    ScoredGraph neg = pos;
    for (ScoredEdge& e : neg.edges) e.weight -= 0.25;
    neg.polarity = Polarity::Negative;
    SWConfig sw;
    sw.n_slices = 400;
    sw.seed = 3;
    double v = 0.0;
    const double s = time_best_of(reps, [&] {
      v = kp_score(pos, neg, sw, Exec::Serial);
    });
    const double p = time_best_of(reps, [&] {
      v = kp_score(pos, neg, sw, Exec::Parallel);
    });
    rows.push_back({"kp_score", s, p});
    (void)v;
  }

  {
    const std::size_t count = kg.triples(Split::Train).size();
    const ScoredGraph pos =
        build_positive_graph(kg, Split::Train, model, count, 5, Exec::Serial);
    ScoredGraph neg = pos;
    for (ScoredEdge& e : neg.edges) e.weight -= 0.25;
    neg.polarity = Polarity::Negative;
    KernelConfig kc;
    kc.n_sampled_nodes = 140;
    kc.n_repeats = 4;
    kc.seed = 9;
    double v = 0.0;
    const double s = time_best_of(reps, [&] {
      v = shortest_path_kernel(pos, neg, kc, Exec::Serial);
    });
    const double p = time_best_of(reps, [&] {
      v = shortest_path_kernel(pos, neg, kc, Exec::Parallel);
    });
    rows.push_back({"shortest_path_kernel", s, p});
    (void)v;
  }

  print_rows(rows);
  std::cout << "\nNote: speedups track the available cores; on a single-core "
               "host the two columns should roughly match.\n";
  return 0;
}

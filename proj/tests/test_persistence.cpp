#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "kp/persistence.hpp"
#include "oracles.hpp"

using namespace kp;

namespace {

ScoredGraph path_graph() {
  // 0 --1.0-- 1 --2.0-- 2
  ScoredGraph g;
  g.n_nodes = 3;
  g.edges = {{0, 0, 1, 1.0}, {1, 0, 2, 2.0}};
  return g;
}

std::vector<double> births(const PersistenceDiagram& d) {
  std::vector<double> out;
  for (const DiagramPoint& p : d.points) out.push_back(p.birth);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> deaths(const PersistenceDiagram& d) {
  std::vector<double> out;
  for (const DiagramPoint& p : d.points) out.push_back(p.death);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("hand-worked path graph, ascending direction") {
  const PersistenceDiagram d = sublevel_pd(path_graph(), 0.0, 3.0);
  REQUIRE(d.points.size() == 3);
  CHECK(d.baseline == 0.0);
  CHECK(d.cap == 3.0);
  CHECK(births(d) == std::vector<double>{0.0, 0.0, 0.0});
  CHECK(deaths(d) == std::vector<double>{1.0, 2.0, 3.0});
}

TEST_CASE("hand-worked path graph, descending direction") {
  const PersistenceDiagram d = superlevel_pd(path_graph(), 0.0, 3.0);
  REQUIRE(d.points.size() == 3);
  // Intervals recorded as (weight at which the bar appears walking the
  // threshold down, cap): merges at 2 and 1, survivor from the baseline.
  CHECK(births(d) == std::vector<double>{0.0, 1.0, 2.0});
  CHECK(deaths(d) == std::vector<double>{3.0, 3.0, 3.0});
}

TEST_CASE("default frame falls back to the weight range") {
  const PersistenceDiagram d = sublevel_pd(path_graph());
  CHECK(d.baseline == 1.0);
  CHECK(d.cap == 2.0);
  REQUIRE(d.points.size() == 3);
  // The first merge kills a bar the instant it is born.
  CHECK(deaths(d) == std::vector<double>{1.0, 2.0, 2.0});
}

TEST_CASE("edgeless graph: every bar spans the whole frame") {
  ScoredGraph g;
  g.n_nodes = 4;
  const PersistenceDiagram d = sublevel_pd(g, -1.0, 1.0);
  REQUIRE(d.points.size() == 4);
  for (const DiagramPoint& p : d.points) {
    CHECK(p.birth == -1.0);
    CHECK(p.death == 1.0);
  }
  // Without an explicit frame an edgeless graph collapses to (0, 0).
  const PersistenceDiagram d0 = sublevel_pd(g);
  for (const DiagramPoint& p : d0.points) {
    CHECK(p.birth == 0.0);
    CHECK(p.death == 0.0);
  }
}

TEST_CASE("frame validation") {
  ScoredGraph empty;
  CHECK_THROWS_AS(sublevel_pd(empty), std::invalid_argument);
  const ScoredGraph g = path_graph();
  CHECK_THROWS_AS(sublevel_pd(g, 1.5, 3.0), std::invalid_argument);
  CHECK_THROWS_AS(sublevel_pd(g, 0.0, 1.5), std::invalid_argument);
  ScoredGraph bad = g;
  bad.edges[0].tail = 7;  // outside the node set
  CHECK_THROWS_AS(sublevel_pd(bad, 0.0, 3.0), std::invalid_argument);
}

TEST_CASE("oracle equivalence on random graphs, both directions") {
  std::mt19937_64 rng(20240901);
  for (int trial = 0; trial < 200; ++trial) {
    const ScoredGraph g = oracle::random_graph(rng, 12, 0.3);
    const double lo = g.edges.empty() ? 0.0 : g.min_weight() - 0.5;
    const double hi = g.edges.empty() ? 1.0 : g.max_weight() + 0.5;

    const PersistenceDiagram sub = sublevel_pd(g, lo, hi);
    REQUIRE(sub.points.size() == g.n_nodes);
    CHECK(births(sub) == std::vector<double>(g.n_nodes, lo));
    std::vector<double> expected = oracle::sublevel_deaths(g, hi);
    CHECK(deaths(sub) == expected);

    const PersistenceDiagram sup = superlevel_pd(g, lo, hi);
    REQUIRE(sup.points.size() == g.n_nodes);
    CHECK(deaths(sup) == std::vector<double>(g.n_nodes, hi));
    CHECK(births(sup) == oracle::superlevel_births(g, lo));
  }
}

TEST_CASE("points stay inside the frame and order correctly") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const ScoredGraph g = oracle::random_graph(rng, 20, 0.1);
    const double lo = g.edges.empty() ? -1.0 : g.min_weight() - 1.0;
    const double hi = g.edges.empty() ? 1.0 : g.max_weight() + 1.0;
    for (const PersistenceDiagram& d :
         {sublevel_pd(g, lo, hi), superlevel_pd(g, lo, hi)}) {
      for (const DiagramPoint& p : d.points) {
        CHECK(p.birth >= lo);
        CHECK(p.death <= hi);
        CHECK(p.birth <= p.death);
      }
    }
  }
}

TEST_CASE("graph_pd concatenates both directions over one frame") {
  const ScoredGraph g = path_graph();
  const PersistenceDiagram d = graph_pd(g, 0.0, 3.0);
  REQUIRE(d.points.size() == 2 * g.n_nodes);
  CHECK(d.baseline == 0.0);
  CHECK(d.cap == 3.0);

  const PersistenceDiagram sub = sublevel_pd(g, 0.0, 3.0);
  const PersistenceDiagram sup = superlevel_pd(g, 0.0, 3.0);
  for (std::size_t i = 0; i < sub.points.size(); ++i)
    CHECK(d.points[i] == sub.points[i]);
  for (std::size_t i = 0; i < sup.points.size(); ++i)
    CHECK(d.points[sub.points.size() + i] == sup.points[i]);
}

TEST_CASE("shared_frame spans both graphs") {
  ScoredGraph a = path_graph();
  ScoredGraph b = path_graph();
  b.edges[0].weight = -4.0;
  b.edges[1].weight = 9.0;
  const auto [lo, hi] = shared_frame(a, b);
  CHECK(lo <= -4.0);
  CHECK(hi >= 9.0);
  // Both graphs accept the frame without clipping.
  CHECK_NOTHROW(graph_pd(a, lo, hi));
  CHECK_NOTHROW(graph_pd(b, lo, hi));
}

TEST_CASE("elder rule is insertion-order independent for tied weights") {
  // Triangle with all weights equal: two merges at 1.0, one survivor.
  ScoredGraph g;
  g.n_nodes = 3;
  g.edges = {{0, 0, 1, 1.0}, {1, 0, 2, 1.0}, {0, 0, 2, 1.0}};
  ScoredGraph shuffled = g;
  std::reverse(shuffled.edges.begin(), shuffled.edges.end());

  const PersistenceDiagram d1 = sublevel_pd(g, 0.0, 2.0);
  const PersistenceDiagram d2 = sublevel_pd(shuffled, 0.0, 2.0);
  CHECK(deaths(d1) == std::vector<double>{1.0, 1.0, 2.0});
  CHECK(deaths(d1) == deaths(d2));
  CHECK(births(d1) == births(d2));
}

TEST_CASE("csv dump") {
  const ScoredGraph g = path_graph();
  std::ostringstream out;
  write_diagram_csv(out, sublevel_pd(g, 0.0, 3.0), superlevel_pd(g, 0.0, 3.0));
  const std::string text = out.str();
  CHECK(text.find("direction,birth,death\n") == 0);
  CHECK(text.find("sub,") != std::string::npos);
  CHECK(text.find("super,") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') == 7);  // header + 6 points
}

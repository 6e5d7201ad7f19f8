#include <doctest.h>

#include <algorithm>
#include <random>
#include <thread>

#include "cascade_trace/error.hpp"
#include "cascade_trace/merge_graph.hpp"
#include "support.hpp"

using namespace cascade_trace;
using testing::at_ms;
using testing::mlog;
using testing::u;

namespace {

// Eight-node reference graph: {1,2}->3, {3,4}->5, {2,4,6}->7, root 8. Timestamps follow CPID order.
MergeGraph reference_graph() {
  MergeGraph g;
  for (unsigned i : {1u, 2u, 4u, 6u, 8u}) g.apply(mlog(u(i), {}, at_ms(i)));
  g.apply(mlog(u(3), {u(1), u(2)}, at_ms(3)));
  g.apply(mlog(u(5), {u(3), u(4)}, at_ms(5)));
  g.apply(mlog(u(7), {u(2), u(4), u(6)}, at_ms(7)));
  return g;
}

std::vector<Cpid> ids(std::initializer_list<unsigned> xs) {
  std::vector<Cpid> out;
  for (unsigned x : xs) out.push_back(u(x));
  return out;
}

struct RandomDag {
  std::vector<Mergelog> logs;
  std::multimap<Cpid, Cpid> edges;
  std::vector<Cpid> nodes;
};

// A random mergelog history over at most `max_nodes` CPIDs.
RandomDag random_dag(std::mt19937& rng, unsigned max_nodes) {
  RandomDag d;
  const unsigned n = 1 + rng() % max_nodes;
  for (unsigned i = 0; i < n; ++i) {
    const Cpid c = u(i + 1);
    std::vector<Cpid> sources;
    if (i > 0 && rng() % 3 != 0) {
      const unsigned k = 1 + rng() % std::min(i, 3u);
      std::vector<unsigned> pick(i);
      for (unsigned j = 0; j < i; ++j) pick[j] = j;
      std::shuffle(pick.begin(), pick.end(), rng);
      for (unsigned j = 0; j < k; ++j) sources.push_back(u(pick[j] + 1));
    }
    for (const auto& s : sources) d.edges.emplace(s, c);
    // timestamps shuffled a little so prune order is not just insertion order
    d.logs.push_back(mlog(c, sources, at_ms(static_cast<long>(rng() % 20))));
    d.nodes.push_back(c);
  }
  return d;
}

}  // namespace

TEST_CASE("apply creates nodes and edges") {
  MergeGraph g;
  const Cpid a = u(1), b = u(2), c = u(3);
  CHECK(g.apply(mlog(c, {a, b})) == ApplyOutcome::Applied);
  CHECK(g.size() == 3);
  CHECK(g.edge_count() == 2);
  CHECK(g.in_degree(c) == 2);
  CHECK(g.in_degree(a) == 0);

  const auto snap = g.snapshot();
  std::vector<GraphEdge> expect{{a, c}, {b, c}};
  CHECK(snap.edges == expect);
  for (const auto& n : snap.nodes) CHECK(n.merge_created == (n.cpid == c));
}

TEST_CASE("root registration") {
  MergeGraph g;
  CHECK(g.apply(mlog(u(1), {})) == ApplyOutcome::Applied);
  const auto snap = g.snapshot();
  REQUIRE(snap.nodes.size() == 1);
  CHECK(snap.nodes[0].cpid == u(1));
  CHECK_FALSE(snap.nodes[0].merge_created);
  CHECK(snap.edges.empty());
}

TEST_CASE("duplicates are ignored") {
  MergeGraph g;
  CHECK(g.apply(mlog(u(1), {})) == ApplyOutcome::Applied);
  CHECK(g.apply(mlog(u(1), {})) == ApplyOutcome::Duplicate);
  CHECK(g.apply(mlog(u(3), {u(1), u(2)})) == ApplyOutcome::Applied);
  const auto before = g.snapshot();
  CHECK(g.apply(mlog(u(3), {u(1), u(2)}, at_ms(99))) == ApplyOutcome::Duplicate);
  const auto after = g.snapshot();
  CHECK(before.nodes == after.nodes);
  CHECK(before.edges == after.edges);
}

TEST_CASE("a source seen first keeps its node when later registered") {
  MergeGraph g;
  g.apply(mlog(u(3), {u(1)}, at_ms(5)));
  CHECK(g.apply(mlog(u(1), {}, at_ms(1))) == ApplyOutcome::Applied);
  CHECK(g.size() == 2);
  CHECK(g.related(u(1)) == ids({1, 3}));
}

TEST_CASE("cycles are rejected and leave the graph alone") {
  MergeGraph g;
  g.apply(mlog(u(2), {u(1)}));
  g.apply(mlog(u(3), {u(2)}));
  const auto before = g.snapshot();
  CHECK_THROWS_AS(g.apply(mlog(u(1), {u(3)})), CycleRejected);
  CHECK_THROWS_AS(g.apply(mlog(u(1), {u(4), u(2)})), CycleRejected);
  const auto after = g.snapshot();
  CHECK(before.edges == after.edges);
  CHECK(before.nodes == after.nodes);
  CHECK_FALSE(g.contains(u(4)));
}

TEST_CASE("invalid mergelogs") {
  MergeGraph g;
  CHECK_THROWS_AS(g.apply(mlog(u(1), {u(1)})), MalformedContext);
  CHECK_THROWS_AS(g.apply(mlog(u(1), {u(2), u(2)})), MalformedContext);
  CHECK(g.size() == 0);
}

TEST_CASE("reference graph related lists") {
  const auto g = reference_graph();
  CHECK(g.related(u(1)) == ids({1, 3, 5}));
  CHECK(g.related(u(2)) == ids({2, 3, 7, 5}));
  CHECK(g.related(u(3)) == ids({3, 5}));
  CHECK(g.related(u(4)) == ids({4, 5, 7}));
  CHECK(g.related(u(5)) == ids({5}));
  CHECK(g.related(u(6)) == ids({6, 7}));
  CHECK(g.related(u(7)) == ids({7}));
  CHECK(g.related(u(8)) == ids({8}));
  CHECK_THROWS_AS(g.related(u(9)), NotFound);
  const auto snap = g.snapshot();
  CHECK(snap.nodes.size() == 8);
  CHECK(snap.edges.size() == 7);
}

TEST_CASE("prune examples") {
  auto g = reference_graph();
  CHECK(g.prune(7) == ids({1}));
  CHECK(g.in_degree(u(3)) == 1);
  CHECK(g.prune(100).empty());

  MergeGraph h;
  h.apply(mlog(u(1), {}, at_ms(1)));
  h.apply(mlog(u(2), {u(1)}, at_ms(2)));
  CHECK(h.prune(0) == ids({1, 2}));
  CHECK(h.size() == 0);

  MergeGraph empty;
  CHECK(empty.prune(0).empty());
}

TEST_CASE("prune never cascades into registered roots") {
  // 1 -> 3 <- 2, and 2 was auto-created (not merge-created)
  MergeGraph g;
  g.apply(mlog(u(1), {}, at_ms(1)));
  g.apply(mlog(u(3), {u(1), u(2)}, at_ms(3)));
  CHECK(g.prune(2) == ids({1}));
  CHECK(g.contains(u(2)));
  CHECK(g.prune(0) == ids({2, 3}));
}

TEST_CASE("prune to zero removes a lone root") {
  MergeGraph g;
  g.apply(mlog(u(1), {}, at_ms(1)));
  const auto removed = g.prune(0);
  CHECK(removed == ids({1}));
  CHECK(g.size() == 0);
}

TEST_CASE("prune tie-break by CPID") {
  MergeGraph g;
  g.apply(mlog(u(5), {}, at_ms(1)));
  g.apply(mlog(u(2), {}, at_ms(1)));
  g.apply(mlog(u(9), {}, at_ms(0)));
  CHECK(g.prune(1) == ids({9, 2}));
}

TEST_CASE("related matches brute-force reachability") {
  std::mt19937 rng(1234);
  for (int trial = 0; trial < 300; ++trial) {
    const auto d = random_dag(rng, 12);
    MergeGraph g;
    for (const auto& l : d.logs) g.apply(l);
    for (const auto& c : d.nodes) {
      const auto got = g.related(c);
      const auto want = testing::reachable(d.edges, c);
      CHECK(std::set<Cpid>(got.begin(), got.end()) == want);
      CHECK(got.size() == want.size());
      CHECK(got.front() == c);
      // transitivity
      for (const auto& r : got) {
        const auto sub = g.related(r);
        for (const auto& s : sub) CHECK(std::find(got.begin(), got.end(), s) != got.end());
      }
    }
  }
}

TEST_CASE("ingestion order does not change the graph") {
  std::mt19937 rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const auto d = random_dag(rng, 10);
    MergeGraph in_order;
    for (const auto& l : d.logs) in_order.apply(l);
    auto shuffled = d.logs;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    MergeGraph any_order;
    for (const auto& l : shuffled) any_order.apply(l);
    const auto a = in_order.snapshot();
    const auto b = any_order.snapshot();
    CHECK(a.edges == b.edges);
    CHECK(a.nodes == b.nodes);
  }
}

TEST_CASE("concurrent apply and query") {
  MergeGraph g;
  constexpr int kThreads = 4;
  constexpr unsigned kPer = 200;
  std::vector<std::thread> threads;
  for (int t = 0; t < kThreads; ++t) {
    threads.emplace_back([&g, t] {
      const unsigned base = static_cast<unsigned>(t) * 10'000;
      for (unsigned i = 1; i <= kPer; ++i) {
        g.apply(mlog(u(base + i), i > 1 ? std::vector<Cpid>{u(base + i - 1)} : std::vector<Cpid>{}));
        g.apply(mlog(u(base + i), i > 1 ? std::vector<Cpid>{u(base + i - 1)} : std::vector<Cpid>{}));
        (void)g.related(u(base + 1));
      }
    });
  }
  for (auto& th : threads) th.join();
  CHECK(g.size() == kThreads * kPer);
  CHECK(g.edge_count() == kThreads * (kPer - 1));
  CHECK(g.related(u(1)).size() == kPer);
}

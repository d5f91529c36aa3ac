#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "oracles.hpp"
#include "unison/topology.hpp"

using namespace unison;

TEST_CASE("constructor validation") {
  CHECK_THROWS_AS(Topology(0, {}), Error);
  CHECK_THROWS_AS(Topology(2, {{0, 2}}), Error);
  CHECK_THROWS_AS(Topology(2, {{0, 0}}), Error);
  CHECK_THROWS_AS(Topology(2, {{0, 1}, {1, 0}}), Error);
  CHECK_THROWS_AS(Topology(3, {{0, 1}}), Error);  // node 2 unreachable

  try {
    Topology(3, {{0, 1}});
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind == Error::Kind::Disconnected);
  }
}

TEST_CASE("adjacency is sorted and symmetric") {
  Topology t(4, {{2, 0}, {3, 1}, {1, 0}, {2, 3}});
  for (int u = 0; u < t.size(); ++u) {
    auto nbrs = t.neighbors(u);
    CHECK(std::is_sorted(nbrs.begin(), nbrs.end()));
    for (int v : nbrs)
      CHECK(std::count(t.neighbors(v).begin(), t.neighbors(v).end(), u) == 1);
  }
}

TEST_CASE("distances and diameter agree with Floyd-Warshall") {
  std::vector<Topology> graphs{make_path(1),   make_path(5),     make_ring(6),
                               make_star(7),   make_grid(3, 4),  make_complete(5),
                               make_random_connected(8, 12, 42)};
  for (const Topology& t : graphs) {
    auto d = oracle::all_pairs(t);
    int best = 0;
    for (int u = 0; u < t.size(); ++u)
      for (int v = 0; v < t.size(); ++v) {
        CHECK(t.distance(u, v) == d[u][v]);
        best = std::max(best, d[u][v]);
      }
    CHECK(t.diameter() == best);
  }
}

TEST_CASE("generator shapes") {
  CHECK(make_path(1).edges().empty());
  CHECK(make_path(4).edges().size() == 3);
  CHECK(make_path(4).diameter() == 3);
  CHECK(make_ring(5).edges().size() == 5);
  CHECK(make_ring(5).diameter() == 2);
  CHECK(make_star(6).diameter() == 2);
  CHECK(make_star(6).neighbors(0).size() == 5);
  CHECK(make_grid(2, 3).size() == 6);
  CHECK(make_grid(2, 3).diameter() == 3);
  CHECK(make_complete(6).edges().size() == 15);
  CHECK(make_complete(6).diameter() == 1);
  CHECK_THROWS_AS(make_ring(2), Error);
  CHECK_THROWS_AS(make_star(1), Error);
}

TEST_CASE("random_connected is deterministic per seed and respects m") {
  Topology a = make_random_connected(7, 9, 5);
  Topology b = make_random_connected(7, 9, 5);
  CHECK(a.edges() == b.edges());
  CHECK(a.edges().size() == 9);
  CHECK_THROWS_AS(make_random_connected(5, 3, 0), Error);   // m < n-1
  CHECK_THROWS_AS(make_random_connected(4, 7, 0), Error);   // m > n(n-1)/2
}

TEST_CASE("generate_topology spec strings") {
  CHECK(generate_topology("path", {3}, 0).size() == 3);
  CHECK(generate_topology("grid", {2, 2}, 0).size() == 4);
  CHECK(generate_topology("random", {6, 7}, 1).edges().size() == 7);
  CHECK_THROWS_AS(generate_topology("torus", {3}, 0), Error);
  CHECK_THROWS_AS(generate_topology("path", {3, 4}, 0), Error);
}

TEST_CASE("file format round trip") {
  Topology t = make_random_connected(6, 8, 7);
  std::stringstream ss;
  write_topology(ss, t);
  Topology back = read_topology(ss);
  CHECK(back.size() == t.size());
  CHECK(back.edges() == t.edges());

  std::stringstream bad("3");
  CHECK_THROWS_AS(read_topology(bad), Error);
  std::stringstream truncated("3 2\n0 1\n");
  CHECK_THROWS_AS(read_topology(truncated), Error);
}

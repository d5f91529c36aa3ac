#pragma once

// Anonymous, port-free, simple connected undirected graphs.
// Node indices are simulation bookkeeping only; rule guards never see them.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "unison/error.hpp"

namespace unison {

class Topology {
 public:
  Topology(int n, std::vector<std::pair<int, int>> edges) : adj_(check_size(n)) {
    std::set<std::pair<int, int>> seen;
    for (auto [u, v] : edges) {
      if (u < 0 || u >= n || v < 0 || v >= n)
        throw Error(Error::Kind::OutOfRange, "edge endpoint out of range");
      if (u == v) throw Error(Error::Kind::SelfLoop, "self-loop rejected");
      auto e = std::minmax(u, v);
      if (!seen.insert(e).second)
        throw Error(Error::Kind::DuplicateEdge, "parallel edge rejected");
    }
    for (auto [u, v] : seen) {
      adj_[u].push_back(v);
      adj_[v].push_back(u);
      edges_.emplace_back(u, v);
    }
    for (auto& nbrs : adj_) std::sort(nbrs.begin(), nbrs.end());
    if (!connected())
      throw Error(Error::Kind::Disconnected, "graph must be connected");
  }

  int size() const { return static_cast<int>(adj_.size()); }
  const std::vector<int>& neighbors(int u) const { return adj_.at(u); }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }

  // Shortest-path distance via breadth-first search.
  int distance(int u, int v) const {
    auto d = bfs(u);
    return d[v];
  }

  int diameter() const {
    if (diameter_ < 0) {
      int best = 0;
      for (int u = 0; u < size(); ++u) {
        auto d = bfs(u);
        best = std::max(best, *std::max_element(d.begin(), d.end()));
      }
      diameter_ = best;
    }
    return diameter_;
  }

 private:
  static int check_size(int n) {
    if (n <= 0) throw Error(Error::Kind::InvalidParams, "node count must be positive");
    return n;
  }

  std::vector<int> bfs(int src) const {
    std::vector<int> dist(size(), -1);
    std::queue<int> q;
    dist[src] = 0;
    q.push(src);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int v : adj_[u])
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          q.push(v);
        }
    }
    return dist;
  }

  bool connected() const {
    auto d = bfs(0);
    return std::none_of(d.begin(), d.end(), [](int x) { return x < 0; });
  }

  std::vector<std::vector<int>> adj_;
  std::vector<std::pair<int, int>> edges_;
  mutable int diameter_ = -1;
};

inline Topology build_topology(int n, std::vector<std::pair<int, int>> edges) {
  return Topology(n, std::move(edges));
}

// --- generators ------------------------------------------------------------

inline Topology make_path(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return Topology(n, e);
}

inline Topology make_ring(int n) {
  if (n < 3) throw Error(Error::Kind::InvalidParams, "ring needs n >= 3");
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
  return Topology(n, e);
}

inline Topology make_star(int n) {
  if (n < 2) throw Error(Error::Kind::InvalidParams, "star needs n >= 2");
  std::vector<std::pair<int, int>> e;
  for (int i = 1; i < n; ++i) e.emplace_back(0, i);
  return Topology(n, e);
}

inline Topology make_grid(int rows, int cols) {
  if (rows < 1 || cols < 1) throw Error(Error::Kind::InvalidParams, "grid dims must be positive");
  std::vector<std::pair<int, int>> e;
  auto id = [cols](int r, int c) { return r * cols + c; };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) e.emplace_back(id(r, c), id(r, c + 1));
      if (r + 1 < rows) e.emplace_back(id(r, c), id(r + 1, c));
    }
  return Topology(rows * cols, e);
}

inline Topology make_complete(int n) {
  std::vector<std::pair<int, int>> e;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) e.emplace_back(u, v);
  return Topology(n, e);
}

// Uniform edge sampling, retried until the sample is connected.
inline Topology make_random_connected(int n, int m, std::uint64_t seed) {
  if (n < 1 || m < n - 1 || m > n * (n - 1) / 2)
    throw Error(Error::Kind::InvalidParams, "random_connected: bad edge count");
  std::vector<std::pair<int, int>> all;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) all.emplace_back(u, v);
  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::vector<std::pair<int, int>> pool = all;
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(m);
    try {
      return Topology(n, pool);
    } catch (const Error& err) {
      if (err.kind != Error::Kind::Disconnected) throw;
    }
  }
  throw Error(Error::Kind::GenerationFailed, "random_connected: no connected sample found");
}

// Spec string form: path:N | ring:N | star:N | grid:R:C | complete:N | random:N:M
inline Topology generate_topology(const std::string& kind, const std::vector<int>& params,
                                  std::uint64_t seed) {
  auto want = [&](size_t k) {
    if (params.size() != k)
      throw Error(Error::Kind::InvalidParams, "wrong parameter count for " + kind);
  };
  if (kind == "path") { want(1); return make_path(params[0]); }
  if (kind == "ring") { want(1); return make_ring(params[0]); }
  if (kind == "star") { want(1); return make_star(params[0]); }
  if (kind == "grid") { want(2); return make_grid(params[0], params[1]); }
  if (kind == "complete") { want(1); return make_complete(params[0]); }
  if (kind == "random_connected" || kind == "random") {
    want(2);
    return make_random_connected(params[0], params[1], seed);
  }
  throw Error(Error::Kind::InvalidParams, "unknown topology kind: " + kind);
}

// --- file format: first line "n m", then m lines "u v" ---------------------

inline Topology read_topology(std::istream& in) {
  int n = 0, m = 0;
  if (!(in >> n >> m)) throw Error(Error::Kind::ParseError, "graph file: missing header");
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < m; ++i) {
    int u, v;
    if (!(in >> u >> v)) throw Error(Error::Kind::ParseError, "graph file: truncated edge list");
    edges.emplace_back(u, v);
  }
  return Topology(n, edges);
}

inline Topology load_topology(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Error::Kind::ParseError, "cannot open graph file: " + path);
  return read_topology(in);
}

inline void write_topology(std::ostream& out, const Topology& t) {
  out << t.size() << ' ' << t.edges().size() << '\n';
  for (auto [u, v] : t.edges()) out << u << ' ' << v << '\n';
}

}  // namespace unison

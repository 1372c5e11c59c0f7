#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "cis/dataset.hpp"
#include "cis/parallel.hpp"

namespace cis {

struct CorrEdge {
  int j = 0;  // j < k always
  int k = 0;
  double weight = 0.0;  // |sample correlation|
};

struct ThresholdEdges {
  double delta = 0.0;
  int p = 0;
  std::vector<CorrEdge> edges;  // sorted by (j, k)
};

struct BlockPartition {
  std::vector<std::vector<int>> blocks;  // each sorted; blocks sorted by first element
  double delta = 0.0;
  int cap = 0;
  long forced_splits = 0;  // surviving edges cut by the size cap
};

inline double default_delta(double n, double p, double c = 5.0) {
  require(n >= 2.0 && p >= 2.0 && c > 0.0, "default_delta: need n >= 2, p >= 2, c > 0");
  return c * std::sqrt(std::log(p) / n);
}

inline int default_cap(int n) { return std::max(2, n / 2); }

// panel sweep keeps the working correlation slab at p x panel instead of p x p
inline ThresholdEdges threshold_edges(const Dataset& d, double delta, int n_threads = 1) {
  validate_dataset(d);
  require(d.standardized, "threshold_edges: dataset must be standardized");
  require(delta > 0.0, "threshold_edges: delta must be > 0");
  constexpr int panel = 256;
  const int p = d.p;
  const int n_panels = (p + panel - 1) / panel;
  std::vector<std::vector<CorrEdge>> found(n_panels);
  const double inv_n = 1.0 / d.n;
  parallel_for(n_panels, n_threads, [&](int pi) {
    const int c0 = pi * panel;
    const int w = std::min(panel, p - c0);
    // only rows below the diagonal of the slab matter: j < k
    Eigen::MatrixXd G = d.X.leftCols(c0 + w).transpose() * d.X.middleCols(c0, w);
    std::vector<CorrEdge>& out = found[pi];
    for (int lc = 0; lc < w; ++lc) {
      const int k = c0 + lc;
      for (int j = 0; j < k; ++j) {
        double r = std::abs(G(j, lc) * inv_n);
        if (r >= delta) out.push_back({j, k, r});
      }
    }
  });
  ThresholdEdges result;
  result.delta = delta;
  result.p = p;
  std::size_t total = 0;
  for (const auto& v : found) total += v.size();
  result.edges.reserve(total);
  for (const auto& v : found) result.edges.insert(result.edges.end(), v.begin(), v.end());
  std::sort(result.edges.begin(), result.edges.end(),
            [](const CorrEdge& a, const CorrEdge& b) {
              return a.j != b.j ? a.j < b.j : a.k < b.k;
            });
  return result;
}

namespace detail {

struct UnionFind {
  std::vector<int> parent;
  std::vector<int> size;
  explicit UnionFind(int n) : parent(n), size(n, 1) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size[a] < size[b]) std::swap(a, b);
    parent[b] = a;
    size[a] += size[b];
    return true;
  }
};

inline std::vector<std::vector<int>> components(const std::vector<int>& verts,
                                                const std::vector<CorrEdge>& edges) {
  std::vector<int> local(verts.size());
  std::iota(local.begin(), local.end(), 0);
  // map global vertex id to position in verts (verts is sorted)
  auto pos = [&](int v) {
    return (int)(std::lower_bound(verts.begin(), verts.end(), v) - verts.begin());
  };
  UnionFind uf((int)verts.size());
  for (const auto& e : edges) uf.unite(pos(e.j), pos(e.k));
  std::vector<std::vector<int>> groups(verts.size());
  for (std::size_t i = 0; i < verts.size(); ++i) groups[uf.find((int)i)].push_back(verts[i]);
  std::vector<std::vector<int>> out;
  for (auto& g : groups) {
    if (!g.empty()) out.push_back(std::move(g));
  }
  return out;
}

// greedy merge of the strongest edges that never grows a component past cap;
// used when threshold escalation cannot break a component (near-clique or
// all edges at equal weight)
inline std::vector<std::vector<int>> capped_union(const std::vector<int>& verts,
                                                  std::vector<CorrEdge> edges, int cap) {
  std::sort(edges.begin(), edges.end(), [](const CorrEdge& a, const CorrEdge& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    return a.j != b.j ? a.j < b.j : a.k < b.k;
  });
  auto pos = [&](int v) {
    return (int)(std::lower_bound(verts.begin(), verts.end(), v) - verts.begin());
  };
  UnionFind uf((int)verts.size());
  for (const auto& e : edges) {
    int a = uf.find(pos(e.j));
    int b = uf.find(pos(e.k));
    if (a != b && uf.size[a] + uf.size[b] <= cap) uf.unite(a, b);
  }
  std::vector<std::vector<int>> groups(verts.size());
  for (std::size_t i = 0; i < verts.size(); ++i) groups[uf.find((int)i)].push_back(verts[i]);
  std::vector<std::vector<int>> out;
  for (auto& g : groups) {
    if (!g.empty()) out.push_back(std::move(g));
  }
  return out;
}

inline void split_oversized(std::vector<int> verts, std::vector<CorrEdge> edges,
                            double threshold, int cap,
                            std::vector<std::vector<int>>& out) {
  while (true) {
    if ((int)verts.size() <= cap) {
      out.push_back(std::move(verts));
      return;
    }
    threshold *= 1.25;
    std::vector<CorrEdge> kept;
    kept.reserve(edges.size());
    for (const auto& e : edges) {
      if (e.weight >= threshold) kept.push_back(e);
    }
    if (kept.empty()) {
      auto groups = capped_union(verts, std::move(edges), cap);
      for (auto& g : groups) out.push_back(std::move(g));
      return;
    }
    auto comps = components(verts, kept);
    if (comps.size() == 1 && comps[0].size() == verts.size()) {
      // no progress at this threshold; raise again unless the component is a
      // near-clique of ties that escalation can never separate
      double min_w = kept[0].weight;
      for (const auto& e : kept) min_w = std::min(min_w, e.weight);
      std::size_t full = verts.size() * (verts.size() - 1) / 2;
      if (kept.size() == full && min_w >= 0.999) {
        auto groups = capped_union(verts, std::move(edges), cap);
        for (auto& g : groups) out.push_back(std::move(g));
        return;
      }
      edges = std::move(kept);
      continue;
    }
    for (auto& comp : comps) {
      std::sort(comp.begin(), comp.end());
      std::vector<CorrEdge> sub;
      for (const auto& e : kept) {
        if (std::binary_search(comp.begin(), comp.end(), e.j)) sub.push_back(e);
      }
      split_oversized(std::move(comp), std::move(sub), threshold, cap, out);
    }
    return;
  }
}

}  // namespace detail

inline BlockPartition partition_blocks(const ThresholdEdges& te, int cap) {
  require(te.p >= 1, "partition_blocks: need p >= 1");
  require(cap >= 1, "partition_blocks: cap must be >= 1");
  for (const auto& e : te.edges) {
    require(e.j >= 0 && e.j < e.k && e.k < te.p, "partition_blocks: edge endpoint out of range");
  }
  const int p = te.p;
  detail::UnionFind uf(p);
  for (const auto& e : te.edges) uf.unite(e.j, e.k);

  std::vector<std::vector<int>> comps(p);
  for (int v = 0; v < p; ++v) comps[uf.find(v)].push_back(v);

  BlockPartition part;
  part.delta = te.delta;
  part.cap = cap;
  for (auto& comp : comps) {
    if (comp.empty()) continue;
    if ((int)comp.size() <= cap) {
      part.blocks.push_back(std::move(comp));
      continue;
    }
    std::sort(comp.begin(), comp.end());
    std::vector<CorrEdge> sub;
    for (const auto& e : te.edges) {
      if (std::binary_search(comp.begin(), comp.end(), e.j)) sub.push_back(e);
    }
    detail::split_oversized(std::move(comp), std::move(sub), te.delta, cap, part.blocks);
  }
  for (auto& b : part.blocks) std::sort(b.begin(), b.end());
  std::sort(part.blocks.begin(), part.blocks.end(),
            [](const std::vector<int>& a, const std::vector<int>& b) { return a[0] < b[0]; });

  // forced splits = original surviving edges that now cross block boundaries
  std::vector<int> block_of(p, -1);
  for (std::size_t b = 0; b < part.blocks.size(); ++b) {
    for (int v : part.blocks[b]) block_of[v] = (int)b;
  }
  for (const auto& e : te.edges) {
    if (block_of[e.j] != block_of[e.k]) ++part.forced_splits;
  }
  return part;
}

inline std::vector<int> block_ids(const BlockPartition& part, int p) {
  std::vector<int> ids(p, -1);
  for (std::size_t b = 0; b < part.blocks.size(); ++b) {
    for (int v : part.blocks[b]) {
      require(v >= 0 && v < p, "block_ids: vertex out of range");
      ids[v] = (int)b;
    }
  }
  for (int v = 0; v < p; ++v) require(ids[v] >= 0, "block_ids: partition does not cover all columns");
  return ids;
}

}  // namespace cis

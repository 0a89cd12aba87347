#include "tmap/sparsity.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tmap/error.hpp"

namespace tmap {

SparsityPattern SparsityPattern::dense(std::size_t n, std::size_t data_dim) {
  SparsityPattern s;
  s.data_dim = data_dim;
  s.active.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i <= data_dim + k; ++i) s.active[k].push_back(i);
  }
  return s;
}

SparsityPattern SparsityPattern::diagonal(std::size_t n) {
  SparsityPattern s;
  s.active.resize(n);
  for (std::size_t k = 0; k < n; ++k) s.active[k] = {k};
  return s;
}

void SparsityPattern::validate() const {
  for (std::size_t k = 0; k < active.size(); ++k) {
    const auto& a = active[k];
    if (a.empty() || a.back() != data_dim + k) {
      throw ArgumentError("sparsity set of component " + std::to_string(k) + " must end with its own index");
    }
    if (!std::is_sorted(a.begin(), a.end()) || std::adjacent_find(a.begin(), a.end()) != a.end()) {
      throw ArgumentError("sparsity set of component " + std::to_string(k) + " must be strictly increasing");
    }
  }
}

UndirectedGraph::UndirectedGraph(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges)
    : adjacency_(n) {
  for (const auto& [a, b] : edges) add_edge(a, b);
}

void UndirectedGraph::add_edge(std::size_t a, std::size_t b) {
  if (a >= size() || b >= size()) throw ArgumentError("edge endpoint out of range");
  if (a == b) throw ArgumentError("self-loops are not allowed");
  adjacency_[a].insert(b);
  adjacency_[b].insert(a);
}

bool UndirectedGraph::has_edge(std::size_t a, std::size_t b) const {
  return a < size() && adjacency_[a].count(b) > 0;
}

std::size_t UndirectedGraph::edge_count() const {
  std::size_t twice = 0;
  for (const auto& nb : adjacency_) twice += nb.size();
  return twice / 2;
}

double line_distance(std::size_t i, std::size_t j) {
  return std::abs(static_cast<double>(i) - static_cast<double>(j));
}

Distance cycle_distance(std::size_t n) {
  return [n](std::size_t i, std::size_t j) {
    const double d = line_distance(i, j);
    return std::min(d, static_cast<double>(n) - d);
  };
}

SparsityPattern distance_sparsity(const Distance& distance, std::size_t n, double r,
                                  std::optional<std::size_t> identity_cutoff) {
  if (!(r >= 0.0)) throw ArgumentError("localization radius must be nonnegative");
  SparsityPattern s;
  s.active.resize(n);
  s.identity_cutoff = identity_cutoff;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i <= k; ++i) {
      if (distance(i, k) <= r) s.active[k].push_back(i);
    }
  }
  return s;
}

SparsityPattern graph_sparsity(const UndirectedGraph& g) {
  const std::size_t n = g.size();
  std::vector<std::set<std::size_t>> adj(n);
  for (std::size_t v = 0; v < n; ++v) adj[v] = g.neighbors(v);

  SparsityPattern s;
  s.active.resize(n);
  for (std::size_t k = n; k-- > 0;) {
    std::vector<std::size_t> nb(adj[k].begin(), adj[k].end());
    s.active[k] = nb;
    s.active[k].push_back(k);
    for (std::size_t a : nb) {
      adj[a].erase(k);
      for (std::size_t b : nb) {
        if (a != b) adj[a].insert(b);
      }
    }
    adj[k].clear();
  }
  return s;
}

SparsityPattern with_data_slots(const SparsityPattern& pattern, std::size_t data_dim, bool data_to_all) {
  if (pattern.data_dim != 0) throw ArgumentError("pattern already has data slots");
  SparsityPattern s;
  s.data_dim = data_dim;
  s.identity_cutoff = pattern.identity_cutoff;
  s.active.resize(pattern.dimension());
  for (std::size_t k = 0; k < pattern.dimension(); ++k) {
    if ((k == 0 || data_to_all) && !pattern.is_identity(k)) {
      for (std::size_t d = 0; d < data_dim; ++d) s.active[k].push_back(d);
    }
    for (std::size_t i : pattern.active[k]) s.active[k].push_back(i + data_dim);
  }
  return s;
}

}  // namespace tmap

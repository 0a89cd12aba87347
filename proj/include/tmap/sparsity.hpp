#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <set>
#include <utility>
#include <vector>

namespace tmap {

/// Per-component input positions over [data..., state...]. Component k always
/// contains its own position data_dim + k as the last entry.
struct SparsityPattern {
  std::size_t data_dim = 0;
  std::vector<std::vector<std::size_t>> active;
  /// Components with index >= identity_cutoff are left as the identity.
  std::optional<std::size_t> identity_cutoff;

  std::size_t dimension() const { return active.size(); }
  bool is_identity(std::size_t k) const { return identity_cutoff && k >= *identity_cutoff; }

  static SparsityPattern dense(std::size_t n, std::size_t data_dim = 0);
  static SparsityPattern diagonal(std::size_t n);

  /// Throws ArgumentError when an entry is out of triangular order or k is missing.
  void validate() const;
};

class UndirectedGraph {
 public:
  explicit UndirectedGraph(std::size_t n = 0) : adjacency_(n) {}
  UndirectedGraph(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges);

  void add_edge(std::size_t a, std::size_t b);
  bool has_edge(std::size_t a, std::size_t b) const;
  std::size_t size() const { return adjacency_.size(); }
  const std::set<std::size_t>& neighbors(std::size_t v) const { return adjacency_.at(v); }
  std::size_t edge_count() const;

 private:
  std::vector<std::set<std::size_t>> adjacency_;
};

using Distance = std::function<double(std::size_t, std::size_t)>;

double line_distance(std::size_t i, std::size_t j);
Distance cycle_distance(std::size_t n);

/// active[k] = { i <= k : distance(i, k) <= r }.
SparsityPattern distance_sparsity(const Distance& distance, std::size_t n, double r,
                                  std::optional<std::size_t> identity_cutoff = std::nullopt);

/// Eliminates vertices from the last to the first, completing each
/// eliminated vertex's remaining neighbourhood into a clique.
SparsityPattern graph_sparsity(const UndirectedGraph& g);

/// Prepends data_dim data slots. With data_to_all false only component 0 reads
/// the data; otherwise every non-identity component does.
SparsityPattern with_data_slots(const SparsityPattern& pattern, std::size_t data_dim, bool data_to_all);

}  // namespace tmap

#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "linkx/graph.hpp"
#include "linkx/rng.hpp"

namespace linkx {

enum class SynthKind {
  pure_homophily,
  pure_heterophily,
  one_per_class,
  erdos_renyi,
  planted_partition,
};

struct SynthSpec {
  SynthKind kind = SynthKind::erdos_renyi;
  std::int32_t n = 0;
  std::int32_t num_classes = 2;
  double p = 0.0;  // edge probability (within-class for planted_partition)
  double q = 0.0;  // cross-class probability for planted_partition
  std::vector<double> class_fractions;  // empty -> balanced
  std::uint64_t seed = 0;
};

namespace detail {

// Class sizes by largest remainder; ties resolved toward lower class index.
inline std::vector<std::int32_t> apportion(std::int32_t n, std::span<const double> fractions) {
  double sum = std::accumulate(fractions.begin(), fractions.end(), 0.0);
  if (std::fabs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("class fractions must sum to 1 (got " + std::to_string(sum) + ")");
  const std::size_t c = fractions.size();
  std::vector<std::int32_t> counts(c);
  std::vector<std::pair<double, std::size_t>> remainders(c);
  std::int32_t assigned = 0;
  for (std::size_t k = 0; k < c; ++k) {
    if (fractions[k] < 0.0 || fractions[k] > 1.0)
      throw std::invalid_argument("class fraction out of [0,1]");
    double exact = fractions[k] * n;
    counts[k] = static_cast<std::int32_t>(std::floor(exact));
    remainders[k] = {-(exact - counts[k]), k};  // negated for ascending sort
    assigned += counts[k];
  }
  std::sort(remainders.begin(), remainders.end());
  for (std::int32_t r = 0; r < n - assigned; ++r) counts[remainders[static_cast<std::size_t>(r)].second]++;
  return counts;
}

inline std::vector<double> balanced_fractions(std::int32_t c) {
  return std::vector<double>(static_cast<std::size_t>(c), 1.0 / c);
}

// Labels assigned to consecutive index ranges per class.
inline Labels block_labels(std::span<const std::int32_t> counts) {
  Labels labels;
  labels.num_classes = static_cast<std::int32_t>(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k)
    labels.values.insert(labels.values.end(), static_cast<std::size_t>(counts[k]),
                         static_cast<std::int32_t>(k));
  return labels;
}

// One-hot class indicators plus a zero noise row: D = C + 1.
inline DenseMatrix onehot_features(const Labels& labels) {
  DenseMatrix x(labels.num_classes + 1, static_cast<std::int64_t>(labels.values.size()));
  for (std::size_t u = 0; u < labels.values.size(); ++u)
    x(labels.values[u], static_cast<std::int64_t>(u)) = 1.0;
  return x;
}

inline Dataset finish(Graph&& g, Labels&& labels, DenseMatrix&& features) {
  Dataset d{std::move(g), std::move(features), std::move(labels)};
  validate_dataset(d);
  return d;
}

}  // namespace detail

// Canonical deterministic instances of the hand-constructed example graphs:
//   pure_homophily   - one clique per class
//   pure_heterophily - complete bipartite between two classes
//   one_per_class    - regular graph where every node has exactly one
//                      neighbor in each class (within-class perfect matching
//                      plus aligned cross-class matchings); needs 2C | n.
// Output is independent of the spec seed.
inline Dataset generate_pattern(const SynthSpec& spec) {
  const std::int32_t n = spec.n;
  const std::int32_t c = spec.num_classes;
  if (n <= 0 || c < 1) throw std::invalid_argument("generate_pattern: bad n or class count");
  auto fractions = spec.class_fractions.empty() ? detail::balanced_fractions(c) : spec.class_fractions;

  std::vector<Edge> edges;
  Labels labels;
  switch (spec.kind) {
    case SynthKind::pure_homophily: {
      auto counts = detail::apportion(n, fractions);
      for (std::int32_t s : counts)
        if (s < 2)
          throw std::invalid_argument("pure_homophily: every class needs >= 2 members");
      labels = detail::block_labels(counts);
      std::int32_t base = 0;
      for (std::int32_t s : counts) {
        for (std::int32_t i = 0; i < s; ++i)
          for (std::int32_t j = i + 1; j < s; ++j) edges.emplace_back(base + i, base + j);
        base += s;
      }
      break;
    }
    case SynthKind::pure_heterophily: {
      if (c != 2) throw std::invalid_argument("pure_heterophily: requires exactly 2 classes");
      if (n < 2) throw std::invalid_argument("pure_heterophily: n must be >= 2");
      std::int32_t half = n / 2;
      if (half < 1 || n - half < 1)
        throw std::invalid_argument("pure_heterophily: both sides need members");
      labels.num_classes = 2;
      labels.values.assign(static_cast<std::size_t>(n), 1);
      for (std::int32_t u = 0; u < half; ++u) labels.values[static_cast<std::size_t>(u)] = 0;
      for (std::int32_t u = 0; u < half; ++u)
        for (std::int32_t v = half; v < n; ++v) edges.emplace_back(u, v);
      break;
    }
    case SynthKind::one_per_class: {
      if (n % (2 * c) != 0)
        throw std::invalid_argument("one_per_class: n must be divisible by 2*classes");
      const std::int32_t per_class = n / c;
      labels = detail::block_labels(std::vector<std::int32_t>(static_cast<std::size_t>(c), per_class));
      // within-class perfect matching
      for (std::int32_t k = 0; k < c; ++k) {
        const std::int32_t base = k * per_class;
        for (std::int32_t i = 0; i < per_class; i += 2) edges.emplace_back(base + i, base + i + 1);
      }
      // aligned matchings between every class pair
      for (std::int32_t k = 0; k < c; ++k)
        for (std::int32_t l = k + 1; l < c; ++l)
          for (std::int32_t i = 0; i < per_class; ++i)
            edges.emplace_back(k * per_class + i, l * per_class + i);
      break;
    }
    default:
      throw std::invalid_argument("generate_pattern: kind must be a deterministic pattern");
  }
  Graph g = build_graph(edges, n, /*directed=*/false);
  auto features = detail::onehot_features(labels);
  return detail::finish(std::move(g), std::move(labels), std::move(features));
}

// Undirected Erdos-Renyi graph with labels independent of the wiring: each
// unordered pair is included with probability p; labels are a deterministic
// largest-remainder apportionment assigned to index ranges.
inline Dataset generate_er_labeled(std::int32_t n, double p, std::span<const double> fractions,
                                   std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("generate_er_labeled: n must be >= 2");
  if (p <= 0.0 || p > 1.0) throw std::invalid_argument("generate_er_labeled: p must be in (0,1]");
  auto counts = detail::apportion(n, fractions);
  Labels labels = detail::block_labels(counts);
  Rng rng = Rng::stream(seed, {stream::kGraph});
  std::vector<Edge> edges;
  for (std::int32_t i = 0; i < n; ++i)
    for (std::int32_t j = i + 1; j < n; ++j)
      if (rng.uniform() < p) edges.emplace_back(i, j);
  Graph g = build_graph(edges, n, /*directed=*/false);
  auto features = detail::onehot_features(labels);
  return detail::finish(std::move(g), std::move(labels), std::move(features));
}

// Pairwise planted partition: probability p within a class, q across.
inline Dataset generate_planted_partition(std::int32_t n, std::int32_t c, double p, double q,
                                          std::span<const double> fractions, std::uint64_t seed) {
  if (n < 2 || c < 1) throw std::invalid_argument("generate_planted_partition: bad n or classes");
  if (p < 0 || p > 1 || q < 0 || q > 1)
    throw std::invalid_argument("generate_planted_partition: probabilities must be in [0,1]");
  auto fr = fractions.empty() ? detail::balanced_fractions(c)
                              : std::vector<double>(fractions.begin(), fractions.end());
  auto counts = detail::apportion(n, fr);
  Labels labels = detail::block_labels(counts);
  Rng rng = Rng::stream(seed, {stream::kGraph});
  std::vector<Edge> edges;
  for (std::int32_t i = 0; i < n; ++i)
    for (std::int32_t j = i + 1; j < n; ++j) {
      double prob = labels.values[i] == labels.values[j] ? p : q;
      if (rng.uniform() < prob) edges.emplace_back(i, j);
    }
  Graph g = build_graph(edges, n, /*directed=*/false);
  auto features = detail::onehot_features(labels);
  return detail::finish(std::move(g), std::move(labels), std::move(features));
}

inline Dataset generate_synth(const SynthSpec& spec) {
  switch (spec.kind) {
    case SynthKind::erdos_renyi: {
      auto fr = spec.class_fractions.empty() ? detail::balanced_fractions(spec.num_classes)
                                             : spec.class_fractions;
      return generate_er_labeled(spec.n, spec.p, fr, spec.seed);
    }
    case SynthKind::planted_partition:
      return generate_planted_partition(spec.n, spec.num_classes, spec.p, spec.q,
                                        spec.class_fractions, spec.seed);
    default:
      return generate_pattern(spec);
  }
}

enum class AdjacencySignal { none, monophilous, heterophilous };
enum class FeatureSignal { none, gaussian };

struct TwoChannelDataset {
  Dataset dataset;
  DenseMatrix mixing;  // expected class-to-class edge distribution, row per class
};

// Benchmark generator with independently controllable adjacency and feature
// channels, for probing which signal a model can exploit.
//
//   adjacency monophilous:   every node draws a hidden preference class and
//                            sends kTwoChannelDegree edges mostly into it, so
//                            a node's in-neighborhood identifies its own
//                            class while one-hop homophily stays near the
//                            null level.
//   adjacency heterophilous: edges target a uniformly random *other* class
//                            (pure off-diagonal mixing for two classes).
//   features gaussian:       x_u = e_{k_u} + (2*noise) * N(0, I), D = C + 2.
//   features none:           x_u = N(0, I).
//
// `noise` in [0,1] degrades both channels: each edge is rewired to a uniform
// target with probability `noise`, and the feature noise scale is 2*noise.
// The graph is undirected. Returns the expected class-to-class mixing for
// estimator checks.
inline constexpr std::int32_t kTwoChannelDegree = 10;

inline TwoChannelDataset generate_two_channel(std::int32_t n, std::int32_t c,
                                              AdjacencySignal adjacency_signal,
                                              FeatureSignal feature_signal, double noise,
                                              std::uint64_t seed) {
  if (c < 2) throw std::invalid_argument("generate_two_channel: needs >= 2 classes");
  if (n < 10 * c) throw std::invalid_argument("generate_two_channel: n must be >= 10*classes");
  if (noise < 0.0 || noise > 1.0) throw std::invalid_argument("generate_two_channel: noise in [0,1]");

  auto counts = detail::apportion(n, detail::balanced_fractions(c));
  Labels labels = detail::block_labels(counts);
  std::vector<std::vector<std::int32_t>> members(static_cast<std::size_t>(c));
  for (std::int32_t u = 0; u < n; ++u)
    members[static_cast<std::size_t>(labels.values[u])].push_back(u);

  // "none" still wires label-independent edges, so topology metrics stay
  // measurable; only the signal is absent.
  std::vector<Edge> edges;
  {
    Rng rng = Rng::stream(seed, {stream::kGraph});
    std::vector<std::int32_t> preference(static_cast<std::size_t>(n));
    for (auto& pk : preference) pk = static_cast<std::int32_t>(rng.uniform_index(c));
    for (std::int32_t u = 0; u < n; ++u) {
      for (std::int32_t e = 0; e < kTwoChannelDegree; ++e) {
        std::int32_t v;
        if (adjacency_signal == AdjacencySignal::none || rng.uniform() < noise) {
          v = static_cast<std::int32_t>(rng.uniform_index(n));
        } else {
          std::int32_t target_class;
          if (adjacency_signal == AdjacencySignal::monophilous) {
            target_class = preference[static_cast<std::size_t>(u)];
          } else {
            auto step = static_cast<std::int32_t>(rng.uniform_index(c - 1));
            target_class = (labels.values[u] + 1 + step) % c;
          }
          const auto& pool = members[static_cast<std::size_t>(target_class)];
          v = pool[rng.uniform_index(pool.size())];
        }
        if (v != u) edges.emplace_back(u, v);
      }
    }
  }
  Graph g = build_graph(edges, n, /*directed=*/false);
  if (g.num_stored_edges() == 0)
    throw std::invalid_argument("generate_two_channel: degenerate wiring produced no edges");

  const std::int64_t dim = c + 2;
  DenseMatrix features(dim, n);
  Rng frng = Rng::stream(seed, {stream::kFeatures});
  if (feature_signal == FeatureSignal::gaussian) {
    const double sigma = 2.0 * noise;
    for (std::int32_t u = 0; u < n; ++u) {
      for (std::int64_t d = 0; d < dim; ++d) features(d, u) = sigma * frng.normal();
      features(labels.values[u], u) += 1.0;
    }
  } else {
    for (std::int32_t u = 0; u < n; ++u)
      for (std::int64_t d = 0; d < dim; ++d) features(d, u) = frng.normal();
  }

  DenseMatrix mixing(c, c);
  for (std::int32_t k = 0; k < c; ++k) {
    for (std::int32_t l = 0; l < c; ++l) {
      const double uniform_share = static_cast<double>(counts[static_cast<std::size_t>(l)]) / n;
      double signal_share;
      if (adjacency_signal == AdjacencySignal::monophilous) {
        signal_share = 1.0 / c;  // preferences are label-independent
      } else if (adjacency_signal == AdjacencySignal::heterophilous) {
        signal_share = k == l ? 0.0 : 1.0 / (c - 1);
      } else {
        signal_share = uniform_share;
      }
      mixing(k, l) = (1.0 - noise) * signal_share + noise * uniform_share;
    }
  }

  TwoChannelDataset out;
  out.dataset = detail::finish(std::move(g), std::move(labels), std::move(features));
  out.mixing = std::move(mixing);
  return out;
}

}  // namespace linkx

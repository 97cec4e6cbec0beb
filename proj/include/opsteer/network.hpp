#pragma once

#include <cstdint>
#include <utility>

#include "opsteer/linalg.hpp"

namespace opsteer {

struct SocialGraph {
  int n = 0;
  Mat adjacency;
  Mat laplacian;  // diag(row sums) - adjacency
};

/// Per-agent parameters. `lambda` is the diagonal of the stubbornness matrix,
/// `h` the susceptibility to the planner (hidden from online controllers).
/// `h_min`/`h_max` are the a-priori bounds a controller may rely on.
struct AgentParams {
  Vec lambda;
  Vec h;
  double h_min = 0.0;
  double h_max = 0.0;
};

struct MixingMatrix {
  Mat V;
  double lambda_V = 0.0;  // smallest singular value of V
};

/// A fully validated network: graph, parameters and the derived mixing matrix.
struct Network {
  SocialGraph graph;
  AgentParams params;
  MixingMatrix mixing;

  int n() const { return graph.n; }
};

SocialGraph build_laplacian(const Mat& adjacency);

/// Checks lambda in [0,1], at least one lambda < 1, and 0 < h_min <= h_i <= h_max.
void validate_params(const AgentParams& params, int n);

/// V = (Lambda L + I - Lambda)^{-1} (I - Lambda) via partial-pivot LU.
/// Throws SingularSystem when the reciprocal condition estimate is below 1e-12.
MixingMatrix build_mixing_matrix(const SocialGraph& graph, const AgentParams& params);

/// Validates an externally supplied V: row-stochastic (1e-10), nonnegative,
/// and full rank (lambda_V > 1e-12).
MixingMatrix make_mixing_matrix(Mat V);

double min_singular_value(const MixingMatrix& mixing);

Network make_network(const Mat& adjacency, AgentParams params);

struct RandomNetworkSpec {
  int n = 5;
  double density = 0.0;
  std::pair<double, double> lambda_range{0.2, 0.8};
  std::pair<double, double> h_range{0.2, 0.8};
  std::uint64_t seed = 0;
};

/// Symmetric ring backbone plus extra undirected edges with probability
/// `density`; edge weights in [0.1, 1]. Deterministic in `seed`.
std::pair<SocialGraph, AgentParams> random_network(const RandomNetworkSpec& spec);

/// Number of undirected edges (unordered pairs with positive weight in either direction).
int edge_count(const SocialGraph& graph);

/// True when every ordered pair is connected along the directed support.
bool strongly_connected(const Mat& adjacency);

}  // namespace opsteer

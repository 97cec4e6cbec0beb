#include "opsteer/network.hpp"

#include <cmath>
#include <queue>
#include <vector>

#include "opsteer/error.hpp"
#include "opsteer/rng.hpp"

namespace opsteer {

namespace {

constexpr double kRcondFloor = 1e-12;
constexpr double kStochasticTol = 1e-10;
constexpr double kRenormalizeTol = 1e-8;
constexpr double kNegativeTol = 1e-12;

std::vector<bool> reachable(const Mat& adjacency, int source, bool reverse) {
  const auto n = static_cast<int>(adjacency.rows());
  std::vector<bool> seen(n, false);
  std::queue<int> frontier;
  seen[source] = true;
  frontier.push(source);
  while (!frontier.empty()) {
    const int i = frontier.front();
    frontier.pop();
    for (int j = 0; j < n; ++j) {
      const double w = reverse ? adjacency(j, i) : adjacency(i, j);
      if (w > 0.0 && !seen[j]) {
        seen[j] = true;
        frontier.push(j);
      }
    }
  }
  return seen;
}

}  // namespace

bool strongly_connected(const Mat& adjacency) {
  if (adjacency.rows() <= 1) return true;
  for (bool reverse : {false, true}) {
    for (bool r : reachable(adjacency, 0, reverse))
      if (!r) return false;
  }
  return true;
}

SocialGraph build_laplacian(const Mat& adjacency) {
  if (adjacency.rows() != adjacency.cols() || adjacency.rows() == 0)
    throw Error(Errc::InvalidInput, "adjacency must be a non-empty square matrix");
  const auto n = static_cast<int>(adjacency.rows());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double w = adjacency(i, j);
      if (!std::isfinite(w)) throw Error(Errc::InvalidInput, "adjacency entry is not finite");
      if (w < 0.0) throw Error(Errc::NegativeWeight, "adjacency(" + std::to_string(i) + "," + std::to_string(j) + ") < 0");
    }
    if (adjacency(i, i) != 0.0) throw Error(Errc::InvalidInput, "adjacency diagonal must be zero");
  }
  if (!strongly_connected(adjacency)) throw Error(Errc::NotStronglyConnected, "some ordered pair of agents is unreachable");

  SocialGraph g;
  g.n = n;
  g.adjacency = adjacency;
  g.laplacian = -adjacency;
  g.laplacian.diagonal() = adjacency.rowwise().sum();
  return g;
}

void validate_params(const AgentParams& p, int n) {
  if (p.lambda.size() != n || p.h.size() != n)
    throw Error(Errc::InvalidInput, "lambda and h must have one entry per agent");
  if (!(p.h_min > 0.0) || !(p.h_min <= p.h_max))
    throw Error(Errc::InvalidRange, "need 0 < h_min <= h_max");
  bool anchored = false;
  for (int i = 0; i < n; ++i) {
    if (!(p.lambda(i) >= 0.0 && p.lambda(i) <= 1.0))
      throw Error(Errc::InvalidRange, "lambda_" + std::to_string(i) + " outside [0,1]");
    if (p.lambda(i) < 1.0) anchored = true;
    if (!(p.h(i) >= p.h_min && p.h(i) <= p.h_max))
      throw Error(Errc::InvalidRange, "h_" + std::to_string(i) + " outside [h_min, h_max]");
  }
  if (!anchored) throw Error(Errc::SingularSystem, "I - Lambda = 0: at least one agent needs lambda < 1");
}

MixingMatrix make_mixing_matrix(Mat V) {
  if (V.rows() != V.cols() || V.rows() == 0) throw Error(Errc::InvalidInput, "V must be square");
  const double min_entry = V.minCoeff();
  if (min_entry < -kNegativeTol) throw Error(Errc::NotStochastic, "V has a negative entry");
  V = V.cwiseMax(0.0);
  const Vec sums = V.rowwise().sum();
  const double drift = (sums.array() - 1.0).abs().maxCoeff();
  if (drift > kRenormalizeTol) throw Error(Errc::NotStochastic, "row sums of V drift from 1");
  if (drift > 0.0) V = sums.asDiagonal().inverse() * V;
  if ((V.rowwise().sum().array() - 1.0).abs().maxCoeff() > kStochasticTol)
    throw Error(Errc::NotStochastic, "V is not row-stochastic after renormalization");

  MixingMatrix m;
  m.lambda_V = opsteer::min_singular_value(V);
  if (!(m.lambda_V > 1e-12)) throw Error(Errc::DegenerateMixing, "V is rank deficient");
  m.V = std::move(V);
  return m;
}

MixingMatrix build_mixing_matrix(const SocialGraph& graph, const AgentParams& params) {
  validate_params(params, graph.n);
  const int n = graph.n;
  const Mat lam = params.lambda.asDiagonal();
  const Mat I = Mat::Identity(n, n);
  const Mat system = lam * graph.laplacian + I - lam;
  Eigen::PartialPivLU<Mat> lu(system);
  const double rcond = lu.rcond();
  if (!(rcond >= kRcondFloor))
    throw Error(Errc::SingularSystem, "Lambda L + I - Lambda is numerically singular (rcond " + std::to_string(rcond) + ")");
  Mat V = lu.solve(I - lam);
  return make_mixing_matrix(std::move(V));
}

double min_singular_value(const MixingMatrix& mixing) { return opsteer::min_singular_value(mixing.V); }

Network make_network(const Mat& adjacency, AgentParams params) {
  Network net;
  net.graph = build_laplacian(adjacency);
  net.mixing = build_mixing_matrix(net.graph, params);
  net.params = std::move(params);
  return net;
}

std::pair<SocialGraph, AgentParams> random_network(const RandomNetworkSpec& spec) {
  const auto [lam_lo, lam_hi] = spec.lambda_range;
  const auto [h_lo, h_hi] = spec.h_range;
  if (spec.n < 2) throw Error(Errc::InvalidRange, "n must be at least 2");
  if (!(spec.density >= 0.0 && spec.density <= 1.0)) throw Error(Errc::InvalidRange, "density outside [0,1]");
  if (!(lam_lo >= 0.0 && lam_lo <= lam_hi && lam_hi <= 1.0)) throw Error(Errc::InvalidRange, "lambda_range must satisfy 0 <= lo <= hi <= 1");
  if (!(h_lo > 0.0 && h_lo <= h_hi && std::isfinite(h_hi))) throw Error(Errc::InvalidRange, "h_range must satisfy 0 < lo <= hi");

  Rng rng(spec.seed);
  const int n = spec.n;
  Mat adj = Mat::Zero(n, n);
  auto connect = [&](int i, int j) {
    const double w = rng.uniform(0.1, 1.0);
    adj(i, j) = w;
    adj(j, i) = w;
  };
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    if (adj(i, j) == 0.0) connect(i, j);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 2; j < n; ++j) {
      if (adj(i, j) != 0.0) continue;
      if (rng.uniform() < spec.density) connect(i, j);
    }
  }

  AgentParams params;
  params.lambda.resize(n);
  params.h.resize(n);
  params.h_min = h_lo;
  params.h_max = h_hi;
  for (int i = 0; i < n; ++i) {
    params.lambda(i) = rng.uniform(lam_lo, lam_hi);
    params.h(i) = rng.uniform(h_lo, h_hi);
  }
  if ((params.lambda.array() >= 1.0).all()) params.lambda(0) = 0.5;

  return {build_laplacian(adj), params};
}

int edge_count(const SocialGraph& graph) {
  int count = 0;
  for (int i = 0; i < graph.n; ++i)
    for (int j = i + 1; j < graph.n; ++j)
      if (graph.adjacency(i, j) > 0.0 || graph.adjacency(j, i) > 0.0) ++count;
  return count;
}

}  // namespace opsteer

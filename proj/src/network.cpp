#include "socialpower/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace socialpower {

PowerVector PowerVector::validated(Vector x) {
  if (x.size() < 1) throw SimplexViolation("power vector is empty");
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x(i)) || x(i) < 0.0)
      throw SimplexViolation("power vector component " + std::to_string(i + 1) +
                             " is negative or non-finite");
  }
  const double sum = x.sum();
  if (std::abs(sum - 1.0) > kSimplexTol)
    throw SimplexViolation("power vector sums to " + std::to_string(sum) +
                           ", expected 1 within 1e-12");
  return PowerVector(std::move(x));
}

PowerVector PowerVector::from_computation(Vector x) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x(i)) || x(i) < 0.0)
      throw SimplexViolation("computed power vector left the simplex at " +
                             std::to_string(i + 1));
  }
  const double drift = std::abs(x.sum() - 1.0);
  if (drift > kSimplexTol)
    throw SimplexViolation("computed power vector drifted off the simplex by " +
                           std::to_string(drift));
  if (drift > kSimplexRenormFloor) x /= x.sum();
  return PowerVector(std::move(x));
}

PowerVector PowerVector::uniform(int n) {
  return PowerVector(Vector::Constant(n, 1.0 / n));
}

PowerVector PowerVector::vertex(int n, int i) {
  Vector x = Vector::Zero(n);
  x(i) = 1.0;
  return PowerVector(std::move(x));
}

InfluenceNetwork validate_network(const Matrix& raw) {
  if (raw.rows() != raw.cols()) throw NonSquare(raw.rows(), raw.cols());
  const int n = static_cast<int>(raw.rows());
  if (n < 2) throw DomainError("network needs at least 2 individuals");

  // Sums that differ from 1 by no more than the summation noise floor
  // count as exact and are left untouched; a renormalized row lands
  // under the floor, so re-validating never changes bits again.
  const double exact_slack = 8.0 * std::numeric_limits<double>::epsilon() * n;

  Matrix C = raw;
  std::vector<int> renormalized;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double v = C(i, j);
      if (!std::isfinite(v) || v < 0.0) throw NegativeEntry(i + 1, j + 1);
      if (i == j && v != 0.0) throw NonzeroDiagonal(i + 1);
    }
    const double sum = C.row(i).sum();
    const double defect = std::abs(sum - 1.0);
    if (defect > kStochasticTol) throw RowSumViolation(i + 1, sum);
    if (defect > exact_slack) {
      C.row(i) /= sum;
      renormalized.push_back(i);
    }
  }
  return InfluenceNetwork(n, std::move(C), std::move(renormalized));
}

StubbornnessProfile::StubbornnessProfile(Vector theta) : theta_(std::move(theta)) {
  const int n = static_cast<int>(theta_.size());
  theta_min_ = theta_.minCoeff();
  theta_max_ = theta_.maxCoeff();
  theta_ave_ = theta_.sum() / n;
  zeta_ = n * theta_ave_ - theta_min_;
  for (int i = 0; i < n; ++i) {
    if (theta_(i) == 0.0)
      fully_.push_back(i);
    else
      partially_.push_back(i);
  }
}

StubbornnessProfile StubbornnessProfile::validated(Vector theta) {
  if (theta.size() < 1) throw AssumptionViolation("susceptibility vector is empty");
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double t = theta(i);
    if (!std::isfinite(t) || t < 0.0 || t >= 1.0)
      throw AssumptionViolation("theta_" + std::to_string(i + 1) + " = " +
                                std::to_string(t) + " outside [0, 1)");
  }
  if (theta.maxCoeff() <= 0.0)
    throw AssumptionViolation(
        "no partially stubborn individual: all theta are zero");
  return StubbornnessProfile(std::move(theta));
}

namespace {

// Iterative Tarjan; comp[v] gets the component id, ids assigned in
// reverse topological order of the condensation.
std::vector<int> tarjan_components(const Matrix& C, int n, int& comp_count) {
  std::vector<int> index(n, -1), lowlink(n, 0), comp(n, -1);
  std::vector<bool> on_stack(n, false);
  std::vector<int> stack;
  int next_index = 0;
  comp_count = 0;

  struct Frame {
    int v;
    int j;  // next neighbor column to scan
  };
  for (int root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    std::vector<Frame> call;
    call.push_back({root, 0});
    index[root] = lowlink[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      Frame& f = call.back();
      if (f.j < n) {
        const int w = f.j++;
        if (C(f.v, w) <= 0.0 || w == f.v) continue;
        if (index[w] == -1) {
          index[w] = lowlink[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          lowlink[f.v] = std::min(lowlink[f.v], index[w]);
        }
      } else {
        if (lowlink[f.v] == index[f.v]) {
          int w;
          do {
            w = stack.back();
            stack.pop_back();
            on_stack[w] = false;
            comp[w] = comp_count;
          } while (w != f.v);
          ++comp_count;
        }
        const int v = f.v;
        call.pop_back();
        if (!call.empty())
          lowlink[call.back().v] = std::min(lowlink[call.back().v], lowlink[v]);
      }
    }
  }
  return comp;
}

}  // namespace

GraphStructure analyze_structure(const InfluenceNetwork& net) {
  const int n = net.size();
  const Matrix& C = net.interactions();
  GraphStructure gs;

  int comp_count = 0;
  const std::vector<int> comp = tarjan_components(C, n, comp_count);
  gs.sccs.assign(comp_count, {});
  for (int v = 0; v < n; ++v) gs.sccs[comp[v]].push_back(v);
  std::sort(gs.sccs.begin(), gs.sccs.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });

  std::vector<int> relabel(n);
  for (int c = 0; c < comp_count; ++c)
    for (int v : gs.sccs[c]) relabel[v] = c;
  std::vector<bool> has_out_edge(comp_count, false);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (C(i, j) > 0.0 && relabel[i] != relabel[j]) has_out_edge[relabel[i]] = true;
  for (int c = 0; c < comp_count; ++c)
    if (!has_out_edge[c]) gs.sink_sccs.push_back(c);

  // A star center, if any, is an endpoint of the first edge found.
  int a = -1, b = -1;
  for (int i = 0; i < n && a < 0; ++i)
    for (int j = 0; j < n; ++j)
      if (C(i, j) > 0.0) {
        a = i;
        b = j;
        break;
      }
  for (int cand : {a, b}) {
    bool ok = cand >= 0;
    for (int i = 0; ok && i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (C(i, j) > 0.0 && i != cand && j != cand) {
          ok = false;
          break;
        }
    if (ok) {
      gs.star_center = cand;
      break;
    }
  }

  gs.doubly_stochastic = true;
  for (int j = 0; j < n; ++j)
    if (std::abs(C.col(j).sum() - 1.0) > kStochasticTol) {
      gs.doubly_stochastic = false;
      break;
    }
  return gs;
}

bool check_assumption_a1(const InfluenceNetwork& net, const Vector& theta,
                         const Vector& x0) {
  if (theta.size() != net.size() || x0.size() != net.size())
    throw DimensionMismatch("theta/x0 size does not match network");
  const GraphStructure gs = analyze_structure(net);
  for (int c : gs.sink_sccs) {
    bool has_stubborn = false;
    for (int v : gs.sccs[c])
      if (theta(v) < 1.0) {
        has_stubborn = true;
        break;
      }
    if (!has_stubborn) return false;
  }
  for (int i = 0; i < net.size(); ++i)
    if (x0(i) == 1.0 && theta(i) >= 1.0) return false;
  return true;
}

bool check_assumption_a2(const Vector& theta) {
  if (theta.size() < 1) return false;
  for (Eigen::Index i = 0; i < theta.size(); ++i)
    if (theta(i) >= 1.0) return false;
  return theta.maxCoeff() > 0.0;
}

}  // namespace socialpower

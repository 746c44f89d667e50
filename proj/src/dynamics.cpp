#include "socialpower/dynamics.hpp"

#include <Eigen/LU>
#include <cmath>

namespace socialpower {

namespace {

void require_size(Eigen::Index got, Eigen::Index want, const char* what) {
  if (got != want)
    throw DimensionMismatch(std::string(what) + ": got " + std::to_string(got) +
                            ", expected " + std::to_string(want));
}

Matrix influence_matrix_raw(const Matrix& C, const Vector& x) {
  const Eigen::Index n = C.rows();
  Matrix W = (Vector::Ones(n) - x).asDiagonal() * C;
  W.diagonal() = x;
  return W;
}

}  // namespace

Matrix influence_matrix(const InfluenceNetwork& net, const PowerVector& x) {
  require_size(x.size(), net.size(), "power vector");
  return influence_matrix_raw(net.interactions(), x.values());
}

Vector fj_step(const Vector& y, const Vector& y0, const Vector& theta,
               const Matrix& W) {
  require_size(y0.size(), y.size(), "initial opinions");
  require_size(theta.size(), y.size(), "susceptibilities");
  require_size(W.rows(), y.size(), "influence matrix");
  return theta.asDiagonal() * (W * y) +
         (Vector::Ones(y.size()) - theta).asDiagonal() * y0;
}

Matrix control_matrix_raw(const Matrix& C, const Vector& theta,
                          const Vector& x) {
  const Eigen::Index n = C.rows();
  const Matrix W = influence_matrix_raw(C, x);
  Matrix A = -(theta.asDiagonal() * W);
  A.diagonal().array() += 1.0;
  Matrix V = Eigen::PartialPivLU<Matrix>(A).solve(
      Matrix((Vector::Ones(n) - theta).asDiagonal()));
  if (!V.allFinite())
    throw SingularSystem("opinion process does not settle: I - Theta W(x) singular");
  return V;
}

Matrix control_matrix(const InfluenceNetwork& net,
                      const StubbornnessProfile& prof, const PowerVector& x) {
  require_size(prof.size(), net.size(), "profile");
  require_size(x.size(), net.size(), "power vector");
  Matrix V = control_matrix_raw(net.interactions(), prof.theta(), x.values());
  const double defect =
      (V.rowwise().sum() - Vector::Ones(net.size())).cwiseAbs().maxCoeff();
  if (defect > 1e-10 || V.minCoeff() < -1e-10)
    throw RowStochasticityViolation(defect);
  return V;
}

Vector power_map_raw(const Matrix& C, const Vector& theta, const Vector& x) {
  const Eigen::Index n = C.rows();
  const Matrix W = influence_matrix_raw(C, x);
  Matrix A = -(W.transpose() * theta.asDiagonal());
  A.diagonal().array() += 1.0;
  Vector z = Eigen::PartialPivLU<Matrix>(A).solve(Vector::Constant(n, 1.0 / n));
  if (!z.allFinite())
    throw SingularSystem("power map solve failed: I - W(x)^T Theta singular");
  return (Vector::Ones(n) - theta).cwiseProduct(z);
}

PowerVector power_map(const InfluenceNetwork& net,
                      const StubbornnessProfile& prof, const PowerVector& x) {
  require_size(prof.size(), net.size(), "profile");
  require_size(x.size(), net.size(), "power vector");
  return PowerVector::from_computation(
      power_map_raw(net.interactions(), prof.theta(), x.values()));
}

Trajectory iterate_issue_sequence(const InfluenceNetwork& net,
                                  const StubbornnessProfile& prof,
                                  const PowerVector& x0, long max_issues,
                                  double tol) {
  if (max_issues < 1) throw OutOfRange("max_issues must be >= 1");
  if (!(tol > 0)) throw OutOfRange("tol must be positive");
  Trajectory traj;
  traj.points.push_back(x0);
  for (long s = 0; s < max_issues; ++s) {
    PowerVector next = power_map(net, prof, traj.points.back());
    traj.final_residual =
        (next.values() - traj.points.back().values()).lpNorm<1>();
    traj.points.push_back(std::move(next));
    if (traj.final_residual < tol) {
      traj.converged = true;
      break;
    }
  }
  return traj;
}

PowerVector perceived_power_process(const InfluenceNetwork& net,
                                    const StubbornnessProfile& prof,
                                    const PowerVector& x, const Vector& p0,
                                    double tol, long max_iter) {
  const int n = net.size();
  require_size(prof.size(), n, "profile");
  require_size(x.size(), n, "power vector");
  require_size(p0.size(), n, "initial perception");
  const Vector& theta = prof.theta();
  const Vector one_minus = Vector::Ones(n) - theta;
  const Matrix W = influence_matrix_raw(net.interactions(), x.values());
  // Wtilde = (I-Theta) W^T Theta (I-Theta)^-1, spectral radius < 1.
  const Matrix Wt = one_minus.asDiagonal() * W.transpose() *
                    theta.cwiseQuotient(one_minus).asDiagonal();
  const Vector drive = one_minus / n;

  Vector p = p0;
  for (long k = 0; k < max_iter; ++k) {
    Vector next = Wt * p + drive;
    const double change = (next - p).lpNorm<1>();
    p = std::move(next);
    if (change < tol) {
      // The limit lies on the simplex; the stopped iterate is within
      // ~tol/(1-rate) of it, so its drift scales with tol rather than
      // with solver roundoff.
      const double sum = p.sum();
      if (std::abs(sum - 1.0) > std::max(kSimplexTol, 1e3 * tol))
        throw SimplexViolation("perceived power stopped far from the simplex");
      p /= sum;
      return PowerVector::from_computation(std::move(p));
    }
  }
  throw IterationLimit("perceived-power process did not settle within " +
                       std::to_string(max_iter) + " steps");
}

SingleIssueState SingleIssueState::initial(const PowerVector& x0) {
  SingleIssueState s;
  s.V = Matrix::Identity(x0.size(), x0.size());
  s.x = x0.values();
  s.k = 0;
  return s;
}

SingleIssueState single_issue_step_raw(const Matrix& C, const Vector& theta,
                                       const SingleIssueState& state) {
  const Eigen::Index n = C.rows();
  const Matrix W = influence_matrix_raw(C, state.x);
  SingleIssueState next;
  next.V = theta.asDiagonal() * (W * state.V);
  next.V.diagonal() += Vector::Ones(n) - theta;
  next.renormalizations = state.renormalizations;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = next.V.row(i).sum();
    if (std::abs(s - 1.0) > 1e-10) {
      next.V.row(i) /= s;
      ++next.renormalizations;
    }
  }
  next.x = next.V.transpose() * Vector::Constant(n, 1.0 / n);
  next.k = state.k + 1;
  return next;
}

SingleIssueState single_issue_step(const SingleIssueState& state,
                                   const InfluenceNetwork& net,
                                   const StubbornnessProfile& prof) {
  require_size(prof.size(), net.size(), "profile");
  require_size(state.x.size(), net.size(), "state power vector");
  require_size(state.V.rows(), net.size(), "state control matrix");
  return single_issue_step_raw(net.interactions(), prof.theta(), state);
}

Trajectory iterate_single_issue(const InfluenceNetwork& net,
                                const StubbornnessProfile& prof,
                                const PowerVector& x0, long max_steps,
                                double tol) {
  if (max_steps < 1) throw OutOfRange("max_steps must be >= 1");
  if (!(tol > 0)) throw OutOfRange("tol must be positive");
  Trajectory traj;
  traj.points.push_back(x0);
  SingleIssueState state = SingleIssueState::initial(x0);
  for (long k = 0; k < max_steps; ++k) {
    state = single_issue_step(state, net, prof);
    traj.final_residual = (state.x - traj.points.back().values()).lpNorm<1>();
    traj.points.push_back(PowerVector::from_computation(state.x));
    if (traj.final_residual < tol) {
      traj.converged = true;
      break;
    }
  }
  traj.renormalizations = state.renormalizations;
  return traj;
}

}  // namespace socialpower

#pragma once

#include <stdexcept>
#include <string>

namespace socialpower {

// Base class for all library errors. DomainError covers model/invariant
// violations (CLI exit code 1); ConfigError covers file/flag problems
// (CLI exit code 2). Indices carried by errors are 1-based, matching the
// human-readable messages and the JSON reports.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct NonSquare : DomainError {
  long rows, cols;
  NonSquare(long r, long c)
      : DomainError("interaction matrix is not square: " + std::to_string(r) +
                    "x" + std::to_string(c)),
        rows(r), cols(c) {}
};

struct RowSumViolation : DomainError {
  int row;     // 1-based
  double sum;
  RowSumViolation(int row1, double s)
      : DomainError("row " + std::to_string(row1) + " sums to " +
                    std::to_string(s) + ", expected 1 within 1e-12"),
        row(row1), sum(s) {}
};

struct NonzeroDiagonal : DomainError {
  int index;  // 1-based
  explicit NonzeroDiagonal(int i1)
      : DomainError("diagonal entry " + std::to_string(i1) +
                    " is nonzero; self-weights live in the power vector"),
        index(i1) {}
};

struct NegativeEntry : DomainError {
  int row, col;  // 1-based
  NegativeEntry(int r1, int c1)
      : DomainError("negative weight at (" + std::to_string(r1) + "," +
                    std::to_string(c1) + ")"),
        row(r1), col(c1) {}
};

struct AssumptionViolation : DomainError {
  using DomainError::DomainError;
};

struct DimensionMismatch : DomainError {
  using DomainError::DomainError;
};

struct SingularSystem : DomainError {
  using DomainError::DomainError;
};

struct RowStochasticityViolation : DomainError {
  double max_defect;
  explicit RowStochasticityViolation(double d)
      : DomainError("control matrix rows drifted from stochasticity by " +
                    std::to_string(d)),
        max_defect(d) {}
};

struct SimplexViolation : DomainError {
  using DomainError::DomainError;
};

struct NotStar : DomainError {
  NotStar() : DomainError("influence graph is not a star topology") {}
};

struct CenterNotFullyStubborn : DomainError {
  CenterNotFullyStubborn()
      : DomainError("star center is not fully stubborn (theta != 0)") {}
};

struct CenterFullyStubborn : DomainError {
  CenterFullyStubborn()
      : DomainError("star center is fully stubborn (theta == 0)") {}
};

struct StaleEquilibrium : DomainError {
  double residual;
  explicit StaleEquilibrium(double r)
      : DomainError("power vector is not an equilibrium: map residual " +
                    std::to_string(r) + " >= 1e-10"),
        residual(r) {}
};

struct InsufficientTail : DomainError {
  InsufficientTail()
      : DomainError("trajectory tail too short to fit a geometric rate") {}
};

struct OutOfRange : DomainError {
  using DomainError::DomainError;
};

struct IterationLimit : DomainError {
  using DomainError::DomainError;
};

}  // namespace socialpower

#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace noisebound {

// Absolute tolerance on |sum - 1| accepted by ProbVector. Inputs inside the
// tolerance are renormalized, outside it rejected, so float drift never
// cascades into loss evaluations.
inline constexpr double kSimplexSumTol = 1e-9;

// A point on the c-dimensional probability simplex. Immutable once built.
class ProbVector {
 public:
  // Validates and renormalizes. Throws std::domain_error if any entry is
  // negative (beyond -1e-12 rounding slack) or the sum is off by more than
  // kSimplexSumTol.
  explicit ProbVector(std::vector<double> entries);

  std::size_t size() const { return entries_.size(); }
  double operator[](std::size_t i) const { return entries_[i]; }
  const std::vector<double>& entries() const { return entries_; }
  std::span<const double> span() const { return entries_; }

  bool operator==(const ProbVector&) const = default;

 private:
  std::vector<double> entries_;
};

// True if `v` satisfies the ProbVector invariants without modification
// (entries >= -1e-12, sum within kSimplexSumTol of 1).
bool is_in_simplex(std::span<const double> v);

// u_sym(eta, c) = (1-eta, eta/(c-1), ..., eta/(c-1)): symmetric label noise
// puts the corrupted mass uniformly on the other classes.
ProbVector u_sym(double eta, std::size_t c);

// u_pair(eta, c) = (1-eta, eta, 0, ..., 0): pairwise noise concentrates the
// corrupted mass on a single class.
ProbVector u_pair(double eta, std::size_t c);

// Result of solving T q = p. The solution may leave the simplex; callers
// decide what to do with it rather than having it silently clipped.
struct SimplexSolveResult {
  std::vector<double> value;
  bool in_simplex = false;
};

// Column-stochastic transition matrix: column k holds p(noisy = . | clean = k).
// Stored column-major to match that convention. A factorization is cached at
// construction together with an infinity-norm condition estimate.
class TransitionMatrix {
 public:
  explicit TransitionMatrix(std::vector<ProbVector> columns);

  static TransitionMatrix identity(std::size_t c);

  // Diagonal 1-eta, off-diagonal eta/(c-1). Flagged non-invertible when
  // eta >= (c-1)/c: at equality the matrix is singular, beyond it the inverse
  // flips signs and is useless for correction.
  static TransitionMatrix symmetric(double eta, std::size_t c);

  std::size_t dim() const { return c_; }
  double at(std::size_t row, std::size_t col) const {
    return data_[col * c_ + row];
  }
  ProbVector column(std::size_t k) const;

  bool invertible() const { return invertible_; }
  double condition_estimate() const { return condition_; }

  // T p, renormalized (the drift is at most ~1e-12 for stochastic columns).
  ProbVector apply(const ProbVector& p) const;

  // Solves T x = noisy. Throws std::domain_error if flagged non-invertible.
  SimplexSolveResult invert(const ProbVector& noisy) const;

  // CSV layout: c rows by c columns, row i column j = p(noisy=i | clean=j).
  void save_csv(std::ostream& out) const;
  void save_csv(const std::string& path) const;
  static TransitionMatrix load_csv(std::istream& in);
  static TransitionMatrix load_csv(const std::string& path);

 private:
  TransitionMatrix() = default;
  void factorize();

  std::size_t c_ = 0;
  std::vector<double> data_;  // column-major, c_*c_
  std::vector<double> lu_;    // LU factors, column-major
  std::vector<int> pivot_;
  bool invertible_ = false;
  double condition_ = 0.0;
};

}  // namespace noisebound

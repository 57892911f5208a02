#include "noisebound/simplex.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace noisebound {

namespace {

constexpr double kEntrySlack = 1e-12;  // rounding slack below zero

double checked_sum(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw std::domain_error("ProbVector: non-finite entry");
    }
    sum += x;
  }
  return sum;
}

}  // namespace

ProbVector::ProbVector(std::vector<double> entries) : entries_(std::move(entries)) {
  if (entries_.size() < 2) {
    throw std::domain_error("ProbVector: need at least 2 classes");
  }
  for (double& x : entries_) {
    if (x < -kEntrySlack) {
      throw std::domain_error("ProbVector: negative entry " + std::to_string(x));
    }
    if (x < 0.0) x = 0.0;
  }
  const double sum = checked_sum(entries_);
  if (std::abs(sum - 1.0) > kSimplexSumTol) {
    throw std::domain_error("ProbVector: entries sum to " + std::to_string(sum));
  }
  for (double& x : entries_) x /= sum;
}

bool is_in_simplex(std::span<const double> v) {
  if (v.size() < 2) return false;
  double sum = 0.0;
  for (double x : v) {
    if (!std::isfinite(x) || x < -kEntrySlack) return false;
    sum += x;
  }
  return std::abs(sum - 1.0) <= kSimplexSumTol;
}

ProbVector u_sym(double eta, std::size_t c) {
  if (eta < 0.0 || eta > 1.0) {
    throw std::domain_error("u_sym: eta must be in [0,1]");
  }
  if (c < 2) throw std::domain_error("u_sym: c must be >= 2");
  std::vector<double> v(c, eta / static_cast<double>(c - 1));
  v[0] = 1.0 - eta;
  return ProbVector(std::move(v));
}

ProbVector u_pair(double eta, std::size_t c) {
  if (eta < 0.0 || eta > 1.0) {
    throw std::domain_error("u_pair: eta must be in [0,1]");
  }
  if (c < 2) throw std::domain_error("u_pair: c must be >= 2");
  std::vector<double> v(c, 0.0);
  v[0] = 1.0 - eta;
  v[1] = eta;
  return ProbVector(std::move(v));
}

TransitionMatrix::TransitionMatrix(std::vector<ProbVector> columns) {
  c_ = columns.size();
  if (c_ < 2) throw std::domain_error("TransitionMatrix: need at least 2 columns");
  data_.resize(c_ * c_);
  for (std::size_t j = 0; j < c_; ++j) {
    if (columns[j].size() != c_) {
      throw std::domain_error("TransitionMatrix: column dimension mismatch");
    }
    for (std::size_t i = 0; i < c_; ++i) data_[j * c_ + i] = columns[j][i];
  }
  factorize();
}

TransitionMatrix TransitionMatrix::identity(std::size_t c) {
  if (c < 2) throw std::domain_error("TransitionMatrix: c must be >= 2");
  TransitionMatrix t;
  t.c_ = c;
  t.data_.assign(c * c, 0.0);
  for (std::size_t i = 0; i < c; ++i) t.data_[i * c + i] = 1.0;
  t.factorize();
  return t;
}

TransitionMatrix TransitionMatrix::symmetric(double eta, std::size_t c) {
  if (eta < 0.0 || eta > 1.0) {
    throw std::domain_error("TransitionMatrix::symmetric: eta must be in [0,1]");
  }
  if (c < 2) throw std::domain_error("TransitionMatrix::symmetric: c must be >= 2");
  TransitionMatrix t;
  t.c_ = c;
  const double off = eta / static_cast<double>(c - 1);
  t.data_.assign(c * c, off);
  for (std::size_t i = 0; i < c; ++i) t.data_[i * c + i] = 1.0 - eta;
  t.factorize();
  if (eta >= static_cast<double>(c - 1) / static_cast<double>(c)) {
    t.invertible_ = false;
  }
  return t;
}

ProbVector TransitionMatrix::column(std::size_t k) const {
  std::vector<double> v(data_.begin() + static_cast<std::ptrdiff_t>(k * c_),
                        data_.begin() + static_cast<std::ptrdiff_t>((k + 1) * c_));
  return ProbVector(std::move(v));
}

// LU with partial pivoting on the column-major copy. The condition estimate is
// kappa_inf = ||T||_inf * ||T^-1||_inf with the inverse built column by column.
void TransitionMatrix::factorize() {
  const std::size_t n = c_;
  lu_ = data_;
  pivot_.resize(n);
  invertible_ = true;

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = std::abs(lu_[k * n + k]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::abs(lu_[k * n + i]);
      if (v > best) {
        best = v;
        p = i;
      }
    }
    pivot_[k] = static_cast<int>(p);
    if (best < 1e-14) {
      invertible_ = false;
      condition_ = std::numeric_limits<double>::infinity();
      return;
    }
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(lu_[j * n + k], lu_[j * n + p]);
      }
    }
    const double diag = lu_[k * n + k];
    for (std::size_t i = k + 1; i < n; ++i) {
      lu_[k * n + i] /= diag;
      const double m = lu_[k * n + i];
      for (std::size_t j = k + 1; j < n; ++j) {
        lu_[j * n + i] -= m * lu_[j * n + k];
      }
    }
  }

  double norm_t = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += std::abs(data_[j * n + i]);
    norm_t = std::max(norm_t, row);
  }

  // ||T^-1||_inf as max row sum of the solved basis columns.
  std::vector<double> inv_row_sum(n, 0.0);
  std::vector<double> x(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::fill(x.begin(), x.end(), 0.0);
    x[col] = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
      std::swap(x[k], x[static_cast<std::size_t>(pivot_[k])]);
      for (std::size_t i = k + 1; i < n; ++i) x[i] -= lu_[k * n + i] * x[k];
    }
    for (std::size_t k = n; k-- > 0;) {
      for (std::size_t j = k + 1; j < n; ++j) x[k] -= lu_[j * n + k] * x[j];
      x[k] /= lu_[k * n + k];
    }
    for (std::size_t i = 0; i < n; ++i) inv_row_sum[i] += std::abs(x[i]);
  }
  double norm_inv = 0.0;
  for (double r : inv_row_sum) norm_inv = std::max(norm_inv, r);
  condition_ = norm_t * norm_inv;
}

ProbVector TransitionMatrix::apply(const ProbVector& p) const {
  if (p.size() != c_) {
    throw std::domain_error("TransitionMatrix::apply: dimension mismatch");
  }
  std::vector<double> out(c_, 0.0);
  for (std::size_t j = 0; j < c_; ++j) {
    const double pj = p[j];
    for (std::size_t i = 0; i < c_; ++i) out[i] += data_[j * c_ + i] * pj;
  }
  return ProbVector(std::move(out));
}

SimplexSolveResult TransitionMatrix::invert(const ProbVector& noisy) const {
  if (noisy.size() != c_) {
    throw std::domain_error("TransitionMatrix::invert: dimension mismatch");
  }
  if (!invertible_) {
    throw std::domain_error("TransitionMatrix::invert: matrix flagged singular");
  }
  const std::size_t n = c_;
  std::vector<double> x(noisy.entries());
  for (std::size_t k = 0; k < n; ++k) {
    std::swap(x[k], x[static_cast<std::size_t>(pivot_[k])]);
    for (std::size_t i = k + 1; i < n; ++i) x[i] -= lu_[k * n + i] * x[k];
  }
  for (std::size_t k = n; k-- > 0;) {
    for (std::size_t j = k + 1; j < n; ++j) x[k] -= lu_[j * n + k] * x[j];
    x[k] /= lu_[k * n + k];
  }
  SimplexSolveResult result;
  result.in_simplex = is_in_simplex(x);
  result.value = std::move(x);
  return result;
}

void TransitionMatrix::save_csv(std::ostream& out) const {
  char buf[48];
  for (std::size_t i = 0; i < c_; ++i) {
    for (std::size_t j = 0; j < c_; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", at(i, j));
      out << buf << (j + 1 < c_ ? "," : "");
    }
    out << "\n";
  }
}

void TransitionMatrix::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  save_csv(out);
}

TransitionMatrix TransitionMatrix::load_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  const std::size_t c = rows.size();
  if (c < 2) throw std::domain_error("transition matrix CSV: need >= 2 rows");
  for (const auto& r : rows) {
    if (r.size() != c) {
      throw std::domain_error("transition matrix CSV: not square");
    }
  }
  std::vector<ProbVector> cols;
  cols.reserve(c);
  for (std::size_t j = 0; j < c; ++j) {
    std::vector<double> col(c);
    for (std::size_t i = 0; i < c; ++i) col[i] = rows[i][j];
    cols.emplace_back(std::move(col));
  }
  return TransitionMatrix(std::move(cols));
}

TransitionMatrix TransitionMatrix::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_csv(in);
}

}  // namespace noisebound

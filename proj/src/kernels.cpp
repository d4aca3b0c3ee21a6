#include "plexp/kernels.hpp"

#include <algorithm>
#include <vector>

namespace plexp::kernels {

namespace {
// Below this many multiply-adds a parallel region costs more than it saves.
constexpr long kParallelWork = 1L << 16;
}  // namespace

namespace serial {

void column_dots(const Eigen::MatrixXd& X, std::span<const int> cols, const Eigen::VectorXd& v, Eigen::VectorXd& out) {
  out.resize(static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) {
    double s = 0.0;
    const double* x = X.col(cols[k]).data();
    for (Eigen::Index i = 0; i < X.rows(); ++i) s += x[i] * v[i];
    out[static_cast<Eigen::Index>(k)] = s;
  }
}

void column_combination(const Eigen::MatrixXd& X, std::span<const int> cols, const Eigen::VectorXd& coef,
                        Eigen::VectorXd& out) {
  out.setZero(X.rows());
  for (std::size_t k = 0; k < cols.size(); ++k) {
    const double c = coef[static_cast<Eigen::Index>(k)];
    if (c == 0.0) continue;
    const double* x = X.col(cols[k]).data();
    for (Eigen::Index i = 0; i < X.rows(); ++i) out[i] += c * x[i];
  }
}

double expectile_terms(const Eigen::VectorXd& r, ExpectileLevel a, Eigen::VectorXd& psi) {
  psi.resize(r.size());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    loss += expectile_loss(r[i], a);
    psi[i] = expectile_grad(r[i], a);
  }
  return loss;
}

}  // namespace serial

namespace omp {

void column_dots(const Eigen::MatrixXd& X, std::span<const int> cols, const Eigen::VectorXd& v, Eigen::VectorXd& out) {
  const auto m = static_cast<long>(cols.size());
  out.resize(m);
  const bool par = m * static_cast<long>(X.rows()) > kParallelWork;
#pragma omp parallel for schedule(static) if (par)
  for (long k = 0; k < m; ++k) out[k] = X.col(cols[static_cast<std::size_t>(k)]).dot(v);
}

void column_combination(const Eigen::MatrixXd& X, std::span<const int> cols, const Eigen::VectorXd& coef,
                        Eigen::VectorXd& out) {
  const Eigen::Index n = X.rows();
  out.setZero(n);
  std::vector<int> nz;
  std::vector<double> c;
  for (std::size_t k = 0; k < cols.size(); ++k) {
    const double v = coef[static_cast<Eigen::Index>(k)];
    if (v != 0.0) {
      nz.push_back(cols[k]);
      c.push_back(v);
    }
  }
  if (nz.empty()) return;
  // Row blocks; each element accumulates columns in the same order as the serial loop.
  const Eigen::Index block = 256;
  const long nblocks = static_cast<long>((n + block - 1) / block);
  const bool par = static_cast<long>(nz.size()) * static_cast<long>(n) > kParallelWork;
#pragma omp parallel for schedule(static) if (par)
  for (long b = 0; b < nblocks; ++b) {
    const Eigen::Index lo = b * block;
    const Eigen::Index len = std::min(block, n - lo);
    auto seg = out.segment(lo, len);
    for (std::size_t k = 0; k < nz.size(); ++k) seg += c[k] * X.col(nz[k]).segment(lo, len);
  }
}

double expectile_terms(const Eigen::VectorXd& r, ExpectileLevel a, Eigen::VectorXd& psi) {
  const Eigen::Index n = r.size();
  psi.resize(n);
  const long nblocks = static_cast<long>((n + kReductionBlock - 1) / kReductionBlock);
  std::vector<double> partial(static_cast<std::size_t>(nblocks), 0.0);
  const bool par = n > kParallelWork / 8;
#pragma omp parallel for schedule(static) if (par)
  for (long b = 0; b < nblocks; ++b) {
    const Eigen::Index lo = b * kReductionBlock;
    const Eigen::Index hi = std::min(lo + kReductionBlock, n);
    double s = 0.0;
    for (Eigen::Index i = lo; i < hi; ++i) {
      const double w = a.weight(r[i]);
      s += w * r[i] * r[i];
      psi[i] = 2.0 * w * r[i];
    }
    partial[static_cast<std::size_t>(b)] = s;
  }
  double loss = 0.0;
  for (double s : partial) loss += s;
  return loss;
}

}  // namespace omp

}  // namespace plexp::kernels

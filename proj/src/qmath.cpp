// Copyright 2026 The uncertainty-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ulab/qmath.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ulab/error.hpp"

namespace ulab::qmath {

namespace {

void check_dim(int dim) {
  if (dim < 1 || dim > kMaxDim) {
    throw Error(ErrorCode::DimMismatch,
                "dimension " + std::to_string(dim) + " out of range");
  }
}

}  // namespace

CVector::CVector(int dim) : dim_(dim) { check_dim(dim); }

CVector::CVector(std::initializer_list<cplx> values)
    : dim_(static_cast<int>(values.size())) {
  check_dim(dim_);
  std::copy(values.begin(), values.end(), v_.begin());
}

CVector CVector::basis(int dim, int index) {
  CVector v(dim);
  if (index < 0 || index >= dim) {
    throw Error(ErrorCode::BadIndex, "basis index out of range");
  }
  v[index] = 1.0;
  return v;
}

double CVector::norm() const {
  double s = 0.0;
  for (int i = 0; i < dim_; ++i) s += std::norm(v_[i]);
  return std::sqrt(s);
}

CVector CVector::normalized() const {
  const double n = norm();
  CVector out = *this;
  out *= 1.0 / n;
  return out;
}

CVector& CVector::operator+=(const CVector& o) {
  require_same_dim(dim_, o.dim_, "vector add");
  for (int i = 0; i < dim_; ++i) v_[i] += o.v_[i];
  return *this;
}

CVector& CVector::operator-=(const CVector& o) {
  require_same_dim(dim_, o.dim_, "vector subtract");
  for (int i = 0; i < dim_; ++i) v_[i] -= o.v_[i];
  return *this;
}

CVector& CVector::operator*=(cplx s) {
  for (int i = 0; i < dim_; ++i) v_[i] *= s;
  return *this;
}

CVector operator+(CVector a, const CVector& b) { return a += b; }
CVector operator-(CVector a, const CVector& b) { return a -= b; }
CVector operator*(cplx s, CVector a) { return a *= s; }

cplx inner(const CVector& u, const CVector& v) {
  require_same_dim(u.dim(), v.dim(), "inner product");
  cplx s = 0.0;
  for (int i = 0; i < u.dim(); ++i) s += std::conj(u[i]) * v[i];
  return s;
}

CVector fix_global_phase(CVector v) {
  for (int i = 0; i < v.dim(); ++i) {
    if (std::abs(v[i]) > 1e-9) {
      v *= std::conj(v[i]) / std::abs(v[i]);
      v[i] = std::abs(v[i]);
      break;
    }
  }
  return v;
}

bool same_ray(const CVector& u, const CVector& v, double tol) {
  return std::abs(std::abs(inner(u, v)) - 1.0) <= tol;
}

CMatrix::CMatrix(int dim) : dim_(dim) { check_dim(dim); }

CMatrix::CMatrix(std::initializer_list<std::initializer_list<cplx>> rows)
    : dim_(static_cast<int>(rows.size())) {
  check_dim(dim_);
  int r = 0;
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != dim_) {
      throw Error(ErrorCode::DimMismatch, "matrix must be square");
    }
    int c = 0;
    for (const auto& x : row) (*this)(r, c++) = x;
    ++r;
  }
}

CMatrix CMatrix::identity(int dim) {
  CMatrix m(dim);
  for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
  return m;
}

CMatrix CMatrix::diagonal(const std::vector<cplx>& d) {
  CMatrix m(static_cast<int>(d.size()));
  for (int i = 0; i < m.dim(); ++i) m(i, i) = d[i];
  return m;
}

CVector CMatrix::row(int r) const {
  CVector v(dim_);
  for (int c = 0; c < dim_; ++c) v[c] = (*this)(r, c);
  return v;
}

CVector CMatrix::col(int c) const {
  CVector v(dim_);
  for (int r = 0; r < dim_; ++r) v[r] = (*this)(r, c);
  return v;
}

void CMatrix::set_row(int r, const CVector& v) {
  require_same_dim(dim_, v.dim(), "set_row");
  for (int c = 0; c < dim_; ++c) (*this)(r, c) = v[c];
}

void CMatrix::set_col(int c, const CVector& v) {
  require_same_dim(dim_, v.dim(), "set_col");
  for (int r = 0; r < dim_; ++r) (*this)(r, c) = v[r];
}

CMatrix CMatrix::adjoint() const {
  CMatrix out(dim_);
  for (int r = 0; r < dim_; ++r)
    for (int c = 0; c < dim_; ++c) out(c, r) = std::conj((*this)(r, c));
  return out;
}

CMatrix CMatrix::transpose() const {
  CMatrix out(dim_);
  for (int r = 0; r < dim_; ++r)
    for (int c = 0; c < dim_; ++c) out(c, r) = (*this)(r, c);
  return out;
}

cplx CMatrix::trace() const {
  cplx t = 0.0;
  for (int i = 0; i < dim_; ++i) t += (*this)(i, i);
  return t;
}

cplx CMatrix::determinant() const {
  // Gaussian elimination with partial pivoting; dim <= 4.
  CMatrix a = *this;
  cplx det = 1.0;
  for (int k = 0; k < dim_; ++k) {
    int piv = k;
    for (int r = k + 1; r < dim_; ++r)
      if (std::abs(a(r, k)) > std::abs(a(piv, k))) piv = r;
    if (std::abs(a(piv, k)) == 0.0) return 0.0;
    if (piv != k) {
      for (int c = 0; c < dim_; ++c) std::swap(a(k, c), a(piv, c));
      det = -det;
    }
    det *= a(k, k);
    for (int r = k + 1; r < dim_; ++r) {
      const cplx f = a(r, k) / a(k, k);
      for (int c = k; c < dim_; ++c) a(r, c) -= f * a(k, c);
    }
  }
  return det;
}

double CMatrix::max_abs() const {
  double m = 0.0;
  for (int r = 0; r < dim_; ++r)
    for (int c = 0; c < dim_; ++c) m = std::max(m, std::abs((*this)(r, c)));
  return m;
}

bool CMatrix::is_hermitian(double tol) const {
  for (int r = 0; r < dim_; ++r)
    for (int c = r; c < dim_; ++c)
      if (std::abs((*this)(r, c) - std::conj((*this)(c, r))) > tol)
        return false;
  return true;
}

bool CMatrix::is_unitary(double tol) const {
  return max_abs_diff(*this * adjoint(), identity(dim_)) <= tol;
}

bool CMatrix::is_real(double tol) const {
  for (int r = 0; r < dim_; ++r)
    for (int c = 0; c < dim_; ++c)
      if (std::abs((*this)(r, c).imag()) > tol) return false;
  return true;
}

CMatrix& CMatrix::operator+=(const CMatrix& o) {
  require_same_dim(dim_, o.dim_, "matrix add");
  for (int r = 0; r < dim_; ++r)
    for (int c = 0; c < dim_; ++c) (*this)(r, c) += o(r, c);
  return *this;
}

CMatrix& CMatrix::operator-=(const CMatrix& o) {
  require_same_dim(dim_, o.dim_, "matrix subtract");
  for (int r = 0; r < dim_; ++r)
    for (int c = 0; c < dim_; ++c) (*this)(r, c) -= o(r, c);
  return *this;
}

CMatrix& CMatrix::operator*=(cplx s) {
  for (int r = 0; r < dim_; ++r)
    for (int c = 0; c < dim_; ++c) (*this)(r, c) *= s;
  return *this;
}

CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }
CMatrix operator*(cplx s, CMatrix a) { return a *= s; }

CMatrix operator*(const CMatrix& a, const CMatrix& b) {
  require_same_dim(a.dim(), b.dim(), "matrix product");
  CMatrix out(a.dim());
  for (int r = 0; r < a.dim(); ++r)
    for (int k = 0; k < a.dim(); ++k) {
      const cplx x = a(r, k);
      if (x == cplx(0.0)) continue;
      for (int c = 0; c < a.dim(); ++c) out(r, c) += x * b(k, c);
    }
  return out;
}

CVector operator*(const CMatrix& a, const CVector& v) {
  require_same_dim(a.dim(), v.dim(), "matrix-vector product");
  CVector out(a.dim());
  for (int r = 0; r < a.dim(); ++r)
    for (int c = 0; c < a.dim(); ++c) out[r] += a(r, c) * v[c];
  return out;
}

double max_abs_diff(const CMatrix& a, const CMatrix& b) {
  return (a - b).max_abs();
}

double max_abs_diff(const CVector& a, const CVector& b) {
  require_same_dim(a.dim(), b.dim(), "max_abs_diff");
  double m = 0.0;
  for (int i = 0; i < a.dim(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

QState QState::from(const CVector& v) {
  if (std::abs(v.norm() - 1.0) > kNormTol) {
    throw Error(ErrorCode::NotNormalized,
                fmt::format("state norm {:.17g}", v.norm()));
  }
  return QState(v);
}

QState QState::normalize(const CVector& v) {
  const double n = v.norm();
  if (n < 1e-14) throw Error(ErrorCode::NotNormalized, "zero vector");
  return QState(v.normalized());
}

CMatrix EigenSystem::reconstruct() const {
  const int n = vectors.dim();
  CMatrix out(n);
  for (int i = 0; i < n; ++i) {
    const CVector v = vector(i);
    out += cplx(values[i]) * outer_product(v, v);
  }
  return out;
}

namespace {

double off_diagonal_norm(const CMatrix& a) {
  double s = 0.0;
  for (int r = 0; r < a.dim(); ++r)
    for (int c = 0; c < a.dim(); ++c)
      if (r != c) s += std::norm(a(r, c));
  return std::sqrt(s);
}

// Replaces the vectors of each degenerate cluster by Gram-Schmidt over the
// projected standard basis, which depends only on the eigenspace.
void resolve_degeneracy(EigenSystem& es) {
  const int n = es.vectors.dim();
  const double scale = std::max(
      1.0, std::max(std::abs(es.values.front()), std::abs(es.values.back())));
  int start = 0;
  while (start < n) {
    int end = start + 1;
    while (end < n && es.values[end] - es.values[end - 1] < 1e-9 * scale) ++end;
    const int size = end - start;
    if (size > 1) {
      CMatrix proj(n);
      for (int i = start; i < end; ++i) {
        const CVector v = es.vector(i);
        proj += outer_product(v, v);
      }
      std::vector<CVector> picked;
      for (int j = 0; j < n && static_cast<int>(picked.size()) < size; ++j) {
        CVector w = proj * CVector::basis(n, j);
        for (const auto& p : picked) w -= inner(p, w) * p;
        // Second pass keeps orthogonality at machine precision.
        for (const auto& p : picked) w -= inner(p, w) * p;
        if (w.norm() > 1e-6) picked.push_back(w.normalized());
      }
      const double mean =
          std::accumulate(es.values.begin() + start, es.values.begin() + end,
                          0.0) /
          size;
      for (int i = 0; i < size; ++i) {
        es.vectors.set_col(start + i, picked[i]);
        es.values[start + i] = mean;
      }
    }
    start = end;
  }
}

}  // namespace

EigenSystem hermitian_eigensystem(const CMatrix& m) {
  require_hermitian(m, "hermitian_eigensystem");
  const int n = m.dim();
  CMatrix a = m;
  CMatrix v = CMatrix::identity(n);
  const double tol = 1e-14 * std::max(1.0, m.max_abs());
  for (int sweep = 0; sweep < 100 && off_diagonal_norm(a) > tol; ++sweep) {
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double g = std::abs(a(p, q));
        if (g < 1e-300) continue;
        const cplx e = a(p, q) / g;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double tau = (aqq - app) / (2.0 * g);
        const double t = (tau >= 0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        CMatrix rot = CMatrix::identity(n);
        rot(p, p) = c;
        rot(p, q) = s;
        rot(q, p) = -s * std::conj(e);
        rot(q, q) = c * std::conj(e);
        a = rot.adjoint() * a * rot;
        v = v * rot;
      }
    }
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
    return a(i, i).real() < a(j, j).real();
  });
  EigenSystem es;
  es.vectors = CMatrix(n);
  for (int i = 0; i < n; ++i) {
    es.values.push_back(a(order[i], order[i]).real());
    es.vectors.set_col(i, v.col(order[i]));
  }
  resolve_degeneracy(es);
  for (int i = 0; i < n; ++i) {
    es.vectors.set_col(i, fix_global_phase(es.vector(i)));
  }
  return es;
}

CMatrix commutator(const CMatrix& a, const CMatrix& b) {
  require_same_dim(a.dim(), b.dim(), "commutator");
  return a * b - b * a;
}

cplx expectation(const CMatrix& m, const CVector& v) {
  return inner(v, m * v);
}

MeanVariance expectation_variance(const CMatrix& m, const QState& psi) {
  require_hermitian(m, "expectation_variance");
  require_same_dim(m.dim(), psi.dim(), "expectation_variance");
  const double mean = expectation(m, psi).real();
  const double second = expectation(m * m, psi).real();
  return {mean, std::max(0.0, second - mean * mean)};
}

CMatrix outer_product(const CVector& u, const CVector& v) {
  require_same_dim(u.dim(), v.dim(), "outer_product");
  CMatrix out(u.dim());
  for (int r = 0; r < u.dim(); ++r)
    for (int c = 0; c < u.dim(); ++c) out(r, c) = u[r] * std::conj(v[c]);
  return out;
}

void require_hermitian(const CMatrix& m, const std::string& what) {
  if (!m.is_hermitian()) {
    throw Error(ErrorCode::NotHermitian, what + ": operator is not Hermitian");
  }
}

void require_same_dim(int a, int b, const std::string& what) {
  if (a != b) {
    throw Error(ErrorCode::DimMismatch, what + ": dimensions " +
                                            std::to_string(a) + " and " +
                                            std::to_string(b));
  }
}

namespace {

std::string fmt_cplx(cplx z, int precision) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(precision);
  os << std::fixed << z.real();
  if (std::abs(z.imag()) > 0.5 * std::pow(10.0, -precision)) {
    os << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i";
  }
  return os.str();
}

}  // namespace

std::string to_string(const CVector& v, int precision) {
  std::string s = "(";
  for (int i = 0; i < v.dim(); ++i) {
    if (i) s += ", ";
    s += fmt_cplx(v[i], precision);
  }
  return s + ")";
}

std::string to_string(const CMatrix& m, int precision) {
  std::string s = "[";
  for (int r = 0; r < m.dim(); ++r) {
    if (r) s += "; ";
    for (int c = 0; c < m.dim(); ++c) {
      if (c) s += ", ";
      s += fmt_cplx(m(r, c), precision);
    }
  }
  return s + "]";
}

}  // namespace ulab::qmath

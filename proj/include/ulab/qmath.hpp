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

#pragma once

#include <array>
#include <complex>
#include <initializer_list>
#include <string>
#include <vector>

namespace ulab::qmath {

using cplx = std::complex<double>;

inline constexpr int kMaxDim = 4;
inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kNormTol = 1e-12;

class CVector {
 public:
  CVector() = default;
  explicit CVector(int dim);
  CVector(std::initializer_list<cplx> values);

  static CVector basis(int dim, int index);

  int dim() const noexcept { return dim_; }
  cplx& operator[](int i) { return v_[i]; }
  const cplx& operator[](int i) const { return v_[i]; }

  double norm() const;
  CVector normalized() const;

  CVector& operator+=(const CVector& o);
  CVector& operator-=(const CVector& o);
  CVector& operator*=(cplx s);

 private:
  int dim_ = 0;
  std::array<cplx, kMaxDim> v_{};
};

CVector operator+(CVector a, const CVector& b);
CVector operator-(CVector a, const CVector& b);
CVector operator*(cplx s, CVector a);

// <u|v>
cplx inner(const CVector& u, const CVector& v);

// Multiplies by a global phase so the first component with modulus above
// 1e-9 is real and positive.
CVector fix_global_phase(CVector v);

// |<u|v>| == 1 within tol, for unit vectors.
bool same_ray(const CVector& u, const CVector& v, double tol = 1e-9);

class CMatrix {
 public:
  CMatrix() = default;
  explicit CMatrix(int dim);
  CMatrix(std::initializer_list<std::initializer_list<cplx>> rows);

  static CMatrix identity(int dim);
  static CMatrix zero(int dim) { return CMatrix(dim); }
  static CMatrix diagonal(const std::vector<cplx>& d);

  int dim() const noexcept { return dim_; }
  cplx& operator()(int r, int c) { return m_[r * kMaxDim + c]; }
  const cplx& operator()(int r, int c) const { return m_[r * kMaxDim + c]; }

  CVector row(int r) const;
  CVector col(int c) const;
  void set_row(int r, const CVector& v);
  void set_col(int c, const CVector& v);

  CMatrix adjoint() const;
  CMatrix transpose() const;
  cplx trace() const;
  cplx determinant() const;
  double max_abs() const;
  bool is_hermitian(double tol = kHermitianTol) const;
  bool is_unitary(double tol = 1e-10) const;
  bool is_real(double tol = 1e-12) const;

  CMatrix& operator+=(const CMatrix& o);
  CMatrix& operator-=(const CMatrix& o);
  CMatrix& operator*=(cplx s);

 private:
  int dim_ = 0;
  std::array<cplx, kMaxDim * kMaxDim> m_{};
};

CMatrix operator+(CMatrix a, const CMatrix& b);
CMatrix operator-(CMatrix a, const CMatrix& b);
CMatrix operator*(cplx s, CMatrix a);
CMatrix operator*(const CMatrix& a, const CMatrix& b);
CVector operator*(const CMatrix& a, const CVector& v);

double max_abs_diff(const CMatrix& a, const CMatrix& b);
double max_abs_diff(const CVector& a, const CVector& b);

// Unit-norm vector. The invariant is checked on construction.
class QState {
 public:
  QState() = default;
  // Throws NotNormalized when | |v| - 1 | > kNormTol.
  static QState from(const CVector& v);
  // Throws NotNormalized for the zero vector.
  static QState normalize(const CVector& v);

  int dim() const noexcept { return v_.dim(); }
  const CVector& vec() const noexcept { return v_; }
  operator const CVector&() const noexcept { return v_; }
  const cplx& operator[](int i) const { return v_[i]; }

 private:
  explicit QState(const CVector& v) : v_(v) {}
  CVector v_;
};

struct EigenSystem {
  std::vector<double> values;  // ascending
  CMatrix vectors;             // column i pairs with values[i]

  CVector vector(int i) const { return vectors.col(i); }
  CMatrix reconstruct() const;
};

// Cyclic complex Jacobi. Degenerate eigenspaces are resolved
// deterministically by Gram-Schmidt over projected standard basis vectors,
// and every eigenvector carries the phase convention of fix_global_phase.
EigenSystem hermitian_eigensystem(const CMatrix& m);

CMatrix commutator(const CMatrix& a, const CMatrix& b);

struct MeanVariance {
  double mean = 0.0;
  double variance = 0.0;
};

MeanVariance expectation_variance(const CMatrix& m, const QState& psi);

// <v|m|v>
cplx expectation(const CMatrix& m, const CVector& v);

// |u><v|
CMatrix outer_product(const CVector& u, const CVector& v);

void require_hermitian(const CMatrix& m, const std::string& what);
void require_same_dim(int a, int b, const std::string& what);

std::string to_string(const CMatrix& m, int precision = 6);
std::string to_string(const CVector& v, int precision = 6);

}  // namespace ulab::qmath

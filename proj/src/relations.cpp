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

#include "ulab/relations.hpp"

#include <cmath>
#include <numbers>

#include "ulab/error.hpp"

namespace ulab::relations {

using qmath::cplx;

namespace {

const cplx kI(0.0, 1.0);

void require_orthogonal(const QState& psi, const QState& perp) {
  qmath::require_same_dim(psi.dim(), perp.dim(), "orthogonal state");
  const double overlap = std::abs(qmath::inner(psi, perp));
  if (overlap > kOrthoTol) {
    throw Error(ErrorCode::NotOrthogonal,
                "|<psi|perp>| = " + std::to_string(overlap));
  }
}

// (M - <M>)|psi>
CVector centered(const CMatrix& m, const QState& psi) {
  const cplx mean = qmath::expectation(m, psi);
  return m * psi.vec() - mean * psi.vec();
}

OrthogonalChoice make_choice(const CVector& v, Origin origin, int k = 0) {
  return {QState::normalize(qmath::fix_global_phase(v)), origin, k};
}

}  // namespace

ObservablePair::ObservablePair(CMatrix a, CMatrix b, std::string label)
    : a_(std::move(a)), b_(std::move(b)), label_(std::move(label)) {
  qmath::require_same_dim(a_.dim(), b_.dim(), "observable pair");
  qmath::require_hermitian(a_, "observable A");
  qmath::require_hermitian(b_, "observable B");
}

CMatrix ObservablePair::i_commutator() const {
  return kI * qmath::commutator(a_, b_);
}

StandardObservables standard_observables(int dim) {
  if (dim == 3) {
    const double r = 1.0 / std::numbers::sqrt2;
    CMatrix jx{{0, r, 0}, {r, 0, r}, {0, r, 0}};
    CMatrix jy{{0, kI * r, 0}, {-kI * r, 0, kI * r}, {0, -kI * r, 0}};
    return {jx, jy, CMatrix::diagonal({1.0, 0.0, -1.0})};
  }
  if (dim == 2) {
    CMatrix sx{{0, 1}, {1, 0}};
    CMatrix sy{{0, -kI}, {kI, 0}};
    return {sx, sy, CMatrix::diagonal({1.0, -1.0})};
  }
  throw Error(ErrorCode::DimMismatch, "standard observables need dim 2 or 3");
}

ObservablePair standard_pair(int dim) {
  const StandardObservables s = standard_observables(dim);
  return ObservablePair(s.a, s.b, dim == 3 ? "spin1" : "pauli");
}

QState family_state(double phi, int dim) {
  if (!std::isfinite(phi)) {
    throw Error(ErrorCode::InvalidArgument, "phi must be finite");
  }
  if (dim == 3) return QState::from(CVector{std::sin(phi), 0.0, std::cos(phi)});
  if (dim == 2) return QState::from(CVector{std::sin(phi), std::cos(phi)});
  throw Error(ErrorCode::DimMismatch, "family state needs dim 2 or 3");
}

std::string OrthogonalChoice::tag() const {
  switch (origin) {
    case Origin::Optimal: return "opt";
    case Origin::RandomFamily: return "r" + std::to_string(k);
    case Origin::SumDirection: return "sum";
    case Origin::Custom: return "custom";
  }
  return "custom";
}

OrthogonalChoice custom_orthogonal(const QState& state) {
  return {state, Origin::Custom, 0};
}

int sign_rule(const ObservablePair& pair, const QState& psi) {
  qmath::require_same_dim(pair.dim(), psi.dim(), "sign_rule");
  const double v = qmath::expectation(pair.i_commutator(), psi).real();
  if (std::abs(v) < kSignTieTol) return 1;
  return v > 0 ? 1 : -1;
}

int family_sign(double phi) {
  const double pi = std::numbers::pi;
  double r = std::fmod(phi, pi);
  if (r < 0) r += pi;
  const double eps = 1e-9;
  if (r <= pi / 4 + eps || r > 3 * pi / 4 + eps) return -1;
  return 1;
}

HrQuantities hr_quantities(const ObservablePair& pair, const QState& psi) {
  qmath::require_same_dim(pair.dim(), psi.dim(), "hr_quantities");
  const double va = qmath::expectation_variance(pair.a(), psi).variance;
  const double vb = qmath::expectation_variance(pair.b(), psi).variance;
  const cplx k = qmath::expectation(qmath::commutator(pair.a(), pair.b()), psi);
  return {va * vb, std::norm(k / 2.0)};
}

OrthogonalChoice optimal_orthogonal(const ObservablePair& pair,
                                    const QState& psi,
                                    std::optional<int> sign) {
  qmath::require_same_dim(pair.dim(), psi.dim(), "optimal_orthogonal");
  const CVector da = centered(pair.a(), psi);
  const CVector db = centered(pair.b(), psi);
  const double va = da.norm() * da.norm();
  const double vb = db.norm() * db.norm();
  if (va < 1e-12 && vb < 1e-12) {
    throw Error(ErrorCode::JointEigenstate,
                "state is an eigenstate of both observables");
  }
  if (va < 1e-12) return make_choice(db, Origin::Optimal);
  if (vb < 1e-12) return make_choice(da, Origin::Optimal);
  const int s = sign.value_or(sign_rule(pair, psi));
  // The maximizer of |<psi|A + s iB|perp>| is along (A - s iB) psi.
  const CVector best = da - (cplx(s) * kI) * db;
  if (best.norm() > 1e-10) return make_choice(best, Origin::Optimal);
  // Any orthogonal state saturates here; take the other branch.
  return make_choice(da + (cplx(s) * kI) * db, Origin::Optimal);
}

OrthogonalChoice orthogonal_family(double phi, int k) {
  static const double a[] = {std::sqrt(3.0) / 2, std::numbers::sqrt2 / 2, 0.5};
  static const double b[] = {1.0 / std::sqrt(3.0), 1.0, std::sqrt(3.0)};
  if (k < 1 || k > 3) {
    throw Error(ErrorCode::BadIndex, "family index must be 1, 2 or 3");
  }
  const double ak = a[k - 1];
  const CVector v{ak * std::cos(phi), ak * b[k - 1], -ak * std::sin(phi)};
  return {QState::normalize(v), Origin::RandomFamily, k};
}

Mp1 mp1_bound(const ObservablePair& pair, const QState& psi,
              const OrthogonalChoice& perp, std::optional<int> sign) {
  qmath::require_same_dim(pair.dim(), psi.dim(), "mp1_bound");
  require_orthogonal(psi, perp.state);
  const int s = sign.value_or(sign_rule(pair, psi));
  const double comm = qmath::expectation(pair.i_commutator(), psi).real();
  const CMatrix op = pair.a() + (cplx(s) * kI) * pair.b();
  const double overlap =
      std::norm(qmath::inner(psi, op * perp.state.vec()));
  return {s * comm + overlap, s};
}

CMatrix c_operator(const ObservablePair& pair, const QState& perp, int sign) {
  qmath::require_same_dim(pair.dim(), perp.dim(), "c_operator");
  const CMatrix plus = pair.a() + (cplx(sign) * kI) * pair.b();
  const CVector v = plus * perp.vec();
  return qmath::outer_product(v, v);
}

DOperator d_operator(const ObservablePair& pair, const QState& psi) {
  qmath::require_same_dim(pair.dim(), psi.dim(), "d_operator");
  const CMatrix sum = pair.a() + pair.b();
  const CVector dv = centered(sum, psi);
  if (dv.norm() < 1e-10) {
    throw Error(ErrorCode::SumEigenstate, "state is an eigenstate of A+B");
  }
  OrthogonalChoice perp = make_choice(dv, Origin::SumDirection);
  const CVector w = sum * perp.state.vec();
  return {cplx(0.5) * qmath::outer_product(w, w), perp};
}

double mp2_bound(const ObservablePair& pair, const QState& psi) {
  const DOperator d = d_operator(pair, psi);
  const CMatrix sum = pair.a() + pair.b();
  return 0.5 * std::norm(qmath::inner(d.perp_sum.state, sum * psi.vec()));
}

const Mp1Entry* BoundReport::find(const std::string& origin) const {
  for (const auto& e : mp1)
    if (e.origin == origin) return &e;
  return nullptr;
}

BoundReport evaluate_bounds(const ObservablePair& pair, const QState& psi,
                            const std::vector<OrthogonalRequest>& requests,
                            std::optional<double> phi, SignPolicy policy) {
  qmath::require_same_dim(pair.dim(), psi.dim(), "evaluate_bounds");
  BoundReport rep;
  rep.phi = phi;
  rep.lhs_sum = qmath::expectation_variance(pair.a(), psi).variance +
                qmath::expectation_variance(pair.b(), psi).variance;
  const HrQuantities hr = hr_quantities(pair, psi);
  rep.hr_product = hr.product;
  rep.hr_bound = hr.bound;
  std::optional<int> sign;
  if (policy == SignPolicy::Family) {
    if (!phi) {
      throw Error(ErrorCode::InvalidArgument, "family sign policy needs phi");
    }
    sign = family_sign(*phi);
  }
  for (const auto& req : requests) {
    OrthogonalChoice perp;
    switch (req.origin) {
      case Origin::Optimal:
        perp = optimal_orthogonal(pair, psi, sign);
        break;
      case Origin::RandomFamily:
        if (!phi || pair.dim() != 3) {
          throw Error(ErrorCode::InvalidArgument,
                      "family orthogonal states need dim 3 and phi");
        }
        perp = orthogonal_family(*phi, req.k);
        break;
      case Origin::SumDirection:
        perp = d_operator(pair, psi).perp_sum;
        break;
      case Origin::Custom:
        if (!req.state) {
          throw Error(ErrorCode::InvalidArgument, "custom state missing");
        }
        perp = custom_orthogonal(*req.state);
        break;
    }
    const Mp1 m = mp1_bound(pair, psi, perp, sign);
    rep.mp1.push_back({perp.tag(), m.bound, m.sign});
  }
  rep.mp2 = mp2_bound(pair, psi);
  return rep;
}

BoundReport evaluate_family(int dim, double phi,
                            const std::vector<OrthogonalRequest>& requests) {
  return evaluate_bounds(standard_pair(dim), family_state(phi, dim), requests,
                         phi,
                         dim == 3 ? SignPolicy::Family : SignPolicy::Generic);
}

std::vector<OrthogonalRequest> default_requests(int dim) {
  if (dim == 2) return {OrthogonalRequest::optimal()};
  return {OrthogonalRequest::optimal(), OrthogonalRequest::family(1),
          OrthogonalRequest::family(2), OrthogonalRequest::family(3)};
}

}  // namespace ulab::relations

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

#include <optional>
#include <string>
#include <vector>

#include "ulab/qmath.hpp"

namespace ulab::relations {

using qmath::CMatrix;
using qmath::CVector;
using qmath::QState;

inline constexpr double kOrthoTol = 1e-10;
inline constexpr double kSignTieTol = 1e-12;

class ObservablePair {
 public:
  // Throws NotHermitian or DimMismatch.
  ObservablePair(CMatrix a, CMatrix b, std::string label);

  const CMatrix& a() const noexcept { return a_; }
  const CMatrix& b() const noexcept { return b_; }
  const std::string& label() const noexcept { return label_; }
  int dim() const noexcept { return a_.dim(); }

  // i[A,B], Hermitian.
  CMatrix i_commutator() const;

 private:
  CMatrix a_, b_;
  std::string label_;
};

struct StandardObservables {
  CMatrix a, b, z;
};

// dim 3: spin-1 Jx, Jy scaled by 1/sqrt(2) (Jy carries +i above the
// diagonal), Jz = diag(1,0,-1). dim 2: Pauli matrices.
StandardObservables standard_observables(int dim);
ObservablePair standard_pair(int dim);

QState family_state(double phi, int dim);

enum class Origin { Optimal, RandomFamily, SumDirection, Custom };

struct OrthogonalChoice {
  QState state;
  Origin origin = Origin::Custom;
  int k = 0;  // 1..3 for RandomFamily

  std::string tag() const;  // opt, r1, r2, r3, sum, custom
};

OrthogonalChoice custom_orthogonal(const QState& state);

// +1 if i<[A,B]> >= 0 else -1, with +1 on |.| < kSignTieTol.
int sign_rule(const ObservablePair& pair, const QState& psi);

// Six/six grouping used for the spin-1 family: -1 iff (phi mod pi) lies in
// [0, pi/4] or (3pi/4, pi).
int family_sign(double phi);

struct HrQuantities {
  double product = 0.0;
  double bound = 0.0;
};

HrQuantities hr_quantities(const ObservablePair& pair, const QState& psi);

// Saturating state for the first relation. With no sign given, sign_rule
// decides. Throws JointEigenstate.
OrthogonalChoice optimal_orthogonal(const ObservablePair& pair,
                                    const QState& psi,
                                    std::optional<int> sign = std::nullopt);

// Closed-form orthogonal states of the spin-1 family. Throws BadIndex.
OrthogonalChoice orthogonal_family(double phi, int k);

struct Mp1 {
  double bound = 0.0;
  int sign = 1;
};

// Throws NotOrthogonal when |<psi|perp>| > kOrthoTol.
Mp1 mp1_bound(const ObservablePair& pair, const QState& psi,
              const OrthogonalChoice& perp,
              std::optional<int> sign = std::nullopt);

// (A + s iB)|perp><perp|(A - s iB)
CMatrix c_operator(const ObservablePair& pair, const QState& perp, int sign);

struct DOperator {
  CMatrix d;
  OrthogonalChoice perp_sum;
};

// Throws SumEigenstate.
DOperator d_operator(const ObservablePair& pair, const QState& psi);

double mp2_bound(const ObservablePair& pair, const QState& psi);

struct Mp1Entry {
  std::string origin;
  double bound = 0.0;
  int sign = 1;
};

struct BoundReport {
  std::optional<double> phi;
  double lhs_sum = 0.0;
  double hr_product = 0.0;
  double hr_bound = 0.0;
  std::vector<Mp1Entry> mp1;
  double mp2 = 0.0;

  const Mp1Entry* find(const std::string& origin) const;
};

enum class SignPolicy { Generic, Family };

// What to pair with psi: Optimal, RandomFamily(k) or a Custom state.
struct OrthogonalRequest {
  Origin origin = Origin::Optimal;
  int k = 0;
  std::optional<QState> state;

  static OrthogonalRequest optimal() { return {Origin::Optimal, 0, {}}; }
  static OrthogonalRequest family(int k) {
    return {Origin::RandomFamily, k, {}};
  }
  static OrthogonalRequest custom(const QState& s) {
    return {Origin::Custom, 0, s};
  }
};

BoundReport evaluate_bounds(const ObservablePair& pair, const QState& psi,
                            const std::vector<OrthogonalRequest>& requests,
                            std::optional<double> phi = std::nullopt,
                            SignPolicy policy = SignPolicy::Generic);

// Standard pair on family_state(phi, dim); the spin-1 family uses the
// six/six sign grouping.
BoundReport evaluate_family(int dim, double phi,
                            const std::vector<OrthogonalRequest>& requests);

// opt, 1, 2, 3 for dim 3; opt for dim 2.
std::vector<OrthogonalRequest> default_requests(int dim);

}  // namespace ulab::relations

// Copyright 2026 The seqmcm Authors
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

// Seeded random states, ensembles and channels for property checks.

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "seqmcm/qcore.hpp"
#include "seqmcm/seqchan.hpp"

namespace seqmcm::random {

using Rng = std::mt19937_64;

inline ComplexMatrix ginibre(Rng& rng, std::size_t rows, std::size_t cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  ComplexMatrix g(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = Complex(n(rng), n(rng));
  }
  return g;
}

inline PureState pure_state(Rng& rng, std::size_t dim) {
  return PureState::normalized(ginibre(rng, dim, 1).col(0));
}

/// G G^dag / tr with G of shape d x rank; rank = d gives full-rank states.
inline DensityMatrix density_matrix(Rng& rng, std::size_t dim, std::size_t rank) {
  const ComplexMatrix g = ginibre(rng, dim, rank);
  ComplexMatrix m = g * g.adjoint();
  m /= m.trace().real();
  return DensityMatrix(hermitian_part(m));
}

inline ComplexMatrix hermitian(Rng& rng, std::size_t dim) {
  const ComplexMatrix g = ginibre(rng, dim, dim);
  return 0.5 * (g + g.adjoint());
}

/// Random priors (Dirichlet(1)) over random states of random rank.
inline Ensemble ensemble(Rng& rng, std::size_t dim, std::size_t size) {
  std::exponential_distribution<double> ex(1.0);
  std::uniform_int_distribution<std::size_t> rank(1, dim);
  std::vector<double> q(size);
  double total = 0.0;
  for (double& v : q) total += (v = ex(rng));
  for (double& v : q) v /= total;
  // Renormalize exactly so the prior check sees a unit sum.
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < size; ++i) s += q[i];
  q.back() = 1.0 - s;
  std::vector<DensityMatrix> states;
  for (std::size_t x = 0; x < size; ++x) states.push_back(density_matrix(rng, dim, rank(rng)));
  return Ensemble(std::move(q), std::move(states));
}

/// Channel from a Haar-like isometry d -> d * kraus_count, split into blocks.
inline KrausChannel channel(Rng& rng, std::size_t dim, std::size_t kraus_count) {
  const ComplexMatrix g = ginibre(rng, dim * kraus_count, dim);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  const ComplexMatrix v = qr.householderQ() * ComplexMatrix::Identity(g.rows(), g.cols());
  std::vector<KrausOp> ops;
  const auto d = static_cast<Eigen::Index>(dim);
  for (std::size_t k = 0; k < kraus_count; ++k) {
    ops.push_back({kInconclusive, v.middleRows(static_cast<Eigen::Index>(k) * d, d)});
  }
  return KrausChannel(std::move(ops));
}

}  // namespace seqmcm::random

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

// Numeric choice of post-measurement (retarget) states that minimize the
// average trace distance between the ensembles before and after a weak MCM.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "seqmcm/errors.hpp"
#include "seqmcm/mcm.hpp"
#include "seqmcm/optim.hpp"
#include "seqmcm/qcore.hpp"
#include "seqmcm/seqchan.hpp"

namespace seqmcm {

/// Maps a parameter vector to one retarget state per label. The caller
/// declares the symmetry by choosing the map.
struct RetargetParameterization {
  std::vector<std::pair<double, double>> bounds;
  std::function<std::vector<PureState>(std::span<const double>)> states;

  std::size_t num_params() const { return bounds.size(); }
};

struct DisturbanceResult {
  std::vector<double> params;
  std::vector<PureState> retarget;
  double disturbance = 0.0;  // D at params
  double lower_bound = 0.0;  // ||rho - rho'||_1 at params
  // Minimizer of the lower bound, for comparison.
  std::vector<double> bound_params;
  double bound_value = 0.0;
  double bound_disturbance = 0.0;  // D at bound_params
  bool converged = true;
  std::size_t evaluations = 0;
};

inline constexpr std::size_t kSearchRestarts = 8;
inline constexpr unsigned kSearchSeed = 7;

namespace detail {

inline std::vector<double> clamp_params(std::span<const double> p,
                                        const std::vector<std::pair<double, double>>& b) {
  std::vector<double> out(p.begin(), p.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::clamp(out[i], b[i].first, b[i].second);
  return out;
}

/// Best-of search: golden section on 8 equal subintervals for one parameter,
/// Nelder-Mead from 8 seeded starts for two or three.
inline SearchResult search_box(const std::function<double(std::span<const double>)>& f,
                               const std::vector<std::pair<double, double>>& bounds) {
  const std::size_t n = bounds.size();
  SearchResult best;
  best.converged = true;
  auto take = [&](SearchResult r) {
    best.evaluations += r.evaluations;
    best.converged = best.converged && r.converged;
    if (r.value < best.value) {
      best.value = r.value;
      best.x = std::move(r.x);
    }
  };
  if (n == 1) {
    const double lo = bounds[0].first, hi = bounds[0].second;
    for (std::size_t k = 0; k < kSearchRestarts; ++k) {
      const double a = lo + (hi - lo) * static_cast<double>(k) / kSearchRestarts;
      const double b = lo + (hi - lo) * static_cast<double>(k + 1) / kSearchRestarts;
      take(golden_section([&](double t) { return f(std::span<const double>(&t, 1)); }, a, b));
    }
  } else if (n <= 3) {
    for (std::size_t k = 0; k < kSearchRestarts; ++k) {
      std::mt19937_64 rng(kSearchSeed + k);
      std::vector<double> x0(n), step(n);
      for (std::size_t i = 0; i < n; ++i) {
        std::uniform_real_distribution<double> u(bounds[i].first, bounds[i].second);
        x0[i] = u(rng);
        step[i] = 0.1 * (bounds[i].second - bounds[i].first);
      }
      auto g = [&](std::span<const double> p) { return f(clamp_params(p, bounds)); };
      SearchResult r = nelder_mead(g, x0, step);
      r.x = clamp_params(r.x, bounds);
      take(std::move(r));
    }
  } else {
    throw UnsupportedScaleError("retarget search supports at most 3 parameters");
  }
  return best;
}

}  // namespace detail

/// Minimizes D over the declared retarget family for the weak MCM of
/// inconclusive rate `eta0`, and separately minimizes the lower bound.
inline DisturbanceResult minimize_disturbance_numeric(const Ensemble& e, const McmSolution& mcm,
                                                      double eta0,
                                                      const RetargetParameterization& param) {
  if (param.num_params() == 0 || !param.states) {
    throw ValidationError("minimize_disturbance_numeric: empty parameterization");
  }
  const WeakDesign design = design_weak_mcm(e, mcm, eta0);
  auto evaluate = [&](std::span<const double> p) {
    WeakMcm w = design.weak;
    for (auto& s : param.states(p)) w.retarget.emplace_back(std::move(s));
    return ensemble_distance(e, kraus_from_weak(w).apply(e));
  };
  DisturbanceResult out;
  const SearchResult full = detail::search_box(
      [&](std::span<const double> p) { return evaluate(p).distance; }, param.bounds);
  const SearchResult bound = detail::search_box(
      [&](std::span<const double> p) { return evaluate(p).lower_bound; }, param.bounds);
  out.params = full.x;
  out.retarget = param.states(full.x);
  const EnsembleDistance at_full = evaluate(full.x);
  out.disturbance = at_full.distance;
  out.lower_bound = at_full.lower_bound;
  out.bound_params = bound.x;
  out.bound_value = bound.value;
  out.bound_disturbance = evaluate(bound.x).distance;
  out.converged = full.converged && bound.converged;
  out.evaluations = full.evaluations + bound.evaluations + 2;
  return out;
}

/// Qubit retarget states without a declared symmetry: each label gets its own
/// (polar, azimuth) pair, improved one label at a time by the box search.
inline std::vector<PureState> minimize_disturbance_blockwise(const Ensemble& e,
                                                             const McmSolution& mcm,
                                                             double eta0,
                                                             std::size_t sweeps = 3) {
  if (e.dim() != 2) {
    throw UnsupportedScaleError("blockwise retarget search is implemented for qubits");
  }
  const WeakDesign design = design_weak_mcm(e, mcm, eta0);
  auto ket = [](double polar, double azimuth) {
    ComplexVector v(2);
    v << std::cos(polar / 2), std::polar(std::sin(polar / 2), azimuth);
    return PureState(v);
  };
  // Start from the leading eigenvector of each state.
  std::vector<std::array<double, 2>> angles;
  for (const auto& s : e.states()) {
    const BlochVector r = to_bloch(s);
    const double len = norm(r);
    angles.push_back(len > 1e-12 ? std::array<double, 2>{std::acos(std::clamp(r[2] / len, -1.0, 1.0)),
                                                         std::atan2(r[1], r[0])}
                                 : std::array<double, 2>{0.0, 0.0});
  }
  auto distance = [&]() {
    WeakMcm w = design.weak;
    for (const auto& a : angles) w.retarget.emplace_back(ket(a[0], a[1]));
    return ensemble_distance(e, kraus_from_weak(w).apply(e)).distance;
  };
  const std::vector<std::pair<double, double>> box{{0.0, kPi}, {-kPi, kPi}};
  for (std::size_t sweep = 0; sweep < sweeps; ++sweep) {
    for (std::size_t x = 0; x < angles.size(); ++x) {
      const auto saved = angles[x];
      const double before = distance();
      const SearchResult r = detail::search_box(
          [&](std::span<const double> p) {
            angles[x] = {p[0], p[1]};
            return distance();
          },
          box);
      angles[x] = r.value < before ? std::array<double, 2>{r.x[0], r.x[1]} : saved;
    }
  }
  std::vector<PureState> out;
  for (const auto& a : angles) out.push_back(ket(a[0], a[1]));
  return out;
}

}  // namespace seqmcm

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

// JSON and CSV encodings. Matrices are {"dim": d, "entries": [[re, im], ...]}
// in row-major order; vectors are {"dim": d, "amplitudes": [[re, im], ...]}.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "seqmcm/errors.hpp"
#include "seqmcm/mcm.hpp"
#include "seqmcm/optim.hpp"
#include "seqmcm/qcore.hpp"
#include "seqmcm/seqchan.hpp"

namespace seqmcm::io {

using Json = nlohmann::json;

inline constexpr const char* kTraceSchema = "seqmcm-trace/1";

/// Shortest round-trip decimal form.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline Json complex_to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

inline Complex complex_from_json(const Json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ValidationError("complex entry must be a number or an [re, im] pair");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

inline Json matrix_to_json(const ComplexMatrix& m) {
  Json entries = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) entries.push_back(complex_to_json(m(i, k)));
  }
  return {{"dim", m.rows()}, {"entries", entries}};
}

inline ComplexMatrix matrix_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("entries")) {
    throw ValidationError("matrix must be an object with \"dim\" and \"entries\"");
  }
  const auto d = j.at("dim").get<std::int64_t>();
  const Json& e = j.at("entries");
  if (d <= 0 || !e.is_array() || static_cast<std::int64_t>(e.size()) != d * d) {
    throw ValidationError("matrix entries length must equal dim^2");
  }
  ComplexMatrix m(d, d);
  for (std::int64_t i = 0; i < d; ++i) {
    for (std::int64_t k = 0; k < d; ++k) {
      m(i, k) = complex_from_json(e[static_cast<std::size_t>(i * d + k)]);
    }
  }
  return m;
}

inline Json vector_to_json(const PureState& v) {
  Json amps = Json::array();
  for (Eigen::Index i = 0; i < v.amplitudes().size(); ++i) {
    amps.push_back(complex_to_json(v.amplitudes()[i]));
  }
  return {{"dim", v.dim()}, {"amplitudes", amps}};
}

inline PureState vector_from_json(const Json& j) {
  const Json& a = j.is_object() ? j.at("amplitudes") : j;
  if (!a.is_array() || a.empty()) throw ValidationError("amplitudes must be a nonempty array");
  ComplexVector v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = complex_from_json(a[i]);
  return PureState::normalized(std::move(v));
}

/// A state is a matrix object, an {"amplitudes": ...} pure state or a
/// {"bloch": [x, y, z]} qubit.
inline DensityMatrix state_from_json(const Json& j) {
  if (j.is_object() && j.contains("amplitudes")) {
    return DensityMatrix::from_pure(vector_from_json(j));
  }
  if (j.is_object() && j.contains("bloch")) {
    const auto r = j.at("bloch").get<std::vector<double>>();
    if (r.size() != 3) throw ValidationError("bloch vector must have three components");
    return from_bloch({r[0], r[1], r[2]});
  }
  return DensityMatrix(matrix_from_json(j));
}

inline Json ensemble_to_json(const Ensemble& e) {
  Json states = Json::array();
  for (const auto& s : e.states()) states.push_back(matrix_to_json(s.matrix()));
  return {{"priors", e.priors()}, {"states", states}};
}

inline Ensemble ensemble_from_json(const Json& j) {
  try {
    if (!j.is_object() || !j.contains("states")) {
      throw ValidationError("ensemble must be an object with \"states\"");
    }
    std::vector<DensityMatrix> states;
    for (const auto& s : j.at("states")) states.push_back(state_from_json(s));
    if (!j.contains("priors")) return Ensemble::uniform(std::move(states));
    return Ensemble(j.at("priors").get<std::vector<double>>(), std::move(states));
  } catch (const Json::exception& ex) {
    throw ValidationError(std::string("ensemble JSON: ") + ex.what());
  }
}

inline Json povm_to_json(const Povm& p) {
  Json conc = Json::array();
  for (std::size_t x = 0; x < p.size(); ++x) {
    conc.push_back({{"label", x}, {"operator", matrix_to_json(p.conclusive()[x])}});
  }
  return {{"conclusive", conc}, {"inconclusive", matrix_to_json(p.inconclusive())}};
}

/// Parses and validates (PSD and completeness at 1e-10).
inline Povm povm_from_json(const Json& j) {
  try {
    std::vector<ComplexMatrix> conc;
    for (const auto& c : j.at("conclusive")) {
      const auto label = c.at("label").get<std::size_t>();
      if (label != conc.size()) throw ValidationError("POVM labels must be 0..N-1 in order");
      conc.push_back(matrix_from_json(c.at("operator")));
    }
    Povm p(std::move(conc), matrix_from_json(j.at("inconclusive")));
    const PovmReport r = validate_povm(p);
    if (!r.passed) {
      throw ValidationError("POVM fails validation (psd margin " + format_double(r.psd_margin()) +
                            ", completeness residual " + format_double(r.completeness_residual) +
                            ")");
    }
    return p;
  } catch (const Json::exception& ex) {
    throw ValidationError(std::string("POVM JSON: ") + ex.what());
  }
}

inline Json mcm_to_json(const McmSolution& sol) {
  Json out = Json::array();
  for (std::size_t x = 0; x < sol.size(); ++x) {
    const McmEntry& m = sol[x];
    Json basis = Json::array();
    for (const auto& v : m.basis) basis.push_back(vector_to_json(v));
    out.push_back({{"label", x},
                   {"C", m.confidence},
                   {"degeneracy", m.degeneracy},
                   {"basis", basis},
                   {"sigma", m.sigma ? matrix_to_json(m.sigma->matrix()) : Json()},
                   {"r", m.weight_r},
                   {"mu", m.mixing}});
  }
  return out;
}

inline Json weights_to_json(const WeightSolution& w) {
  return {{"weights", w.weights},
          {"eta0", w.inconclusive_rate},
          {"psd_margin", w.psd_margin},
          {"duality_gap", w.duality_gap}};
}

inline Json kkt_to_json(const KktReport& r) {
  Json labels = Json::array();
  for (const auto& l : r.labels) {
    labels.push_back({{"stationarity", l.stationarity}, {"slackness", l.slackness}});
  }
  return {{"passed", r.passed}, {"tolerance", r.tolerance}, {"labels", labels}};
}

inline Json channel_to_json(const KrausChannel& ch) {
  Json ops = Json::array();
  for (const auto& k : ch.operators()) {
    ops.push_back({{"label", k.label == kInconclusive ? Json("inconclusive") : Json(k.label)},
                   {"operator", matrix_to_json(k.op)}});
  }
  return ops;
}

inline Json trace_to_json(const SequentialTrace& t) {
  Json parties = Json::array();
  for (std::size_t j = 0; j < t.parties.size(); ++j) {
    const PartyRecord& p = t.parties[j];
    parties.push_back({{"j", j + 1},
                       {"ensemble", ensemble_to_json(p.ensemble)},
                       {"confidences", p.mcm.confidences()},
                       {"gain", p.gain},
                       {"eta0", p.inconclusive_rate},
                       {"D", p.disturbance},
                       {"D_lower_bound", p.lower_bound},
                       {"povm", povm_to_json(p.povm)},
                       {"kraus", channel_to_json(p.channel)}});
  }
  Json out{{"schema", kTraceSchema}, {"parties", parties}};
  if (t.final_ensemble) out["final_ensemble"] = ensemble_to_json(*t.final_ensemble);
  if (t.final_mcm) out["final_confidences"] = t.final_mcm->confidences();
  out["P_J"] = t.joint_success;
  out["P_I"] = t.joint_inconclusive;
  return out;
}

/// One row per ensemble S^(1)..S^(R+1). Party columns (G, eta0, D, D_lb) are
/// empty on the last row, which carries P_J and P_I. Qubit ensembles add
/// Bloch polar/azimuth angles in radians.
inline std::string trace_to_csv(const SequentialTrace& t) {
  if (t.parties.empty()) throw StateError("trace_to_csv: empty trace");
  const std::size_t n = t.parties.front().ensemble.size();
  const bool qubit = t.parties.front().ensemble.dim() == 2;
  std::ostringstream os;
  os << "j";
  for (std::size_t x = 1; x <= n; ++x) os << ",C_" << x;
  os << ",G,eta0,D,D_lb";
  for (std::size_t x = 1; x <= n; ++x) os << ",purity_" << x;
  if (qubit) {
    for (std::size_t x = 1; x <= n; ++x) os << ",polar_" << x << ",azimuth_" << x;
  }
  os << ",P_J,P_I\n";
  auto row = [&](std::size_t j, const Ensemble& e, const McmSolution& m, const PartyRecord* p,
                 bool last) {
    os << j;
    for (double c : m.confidences()) os << ',' << format_double(c);
    if (p) {
      os << ',' << format_double(p->gain) << ',' << format_double(p->inconclusive_rate) << ','
         << format_double(p->disturbance) << ',' << format_double(p->lower_bound);
    } else {
      os << ",,,,";
    }
    for (const auto& s : e.states()) os << ',' << format_double(purity(s));
    if (qubit) {
      for (const auto& s : e.states()) {
        const BlochVector r = to_bloch(s);
        const double len = norm(r);
        const double polar = len > 0.0 ? std::acos(std::clamp(r[2] / len, -1.0, 1.0)) : 0.0;
        os << ',' << format_double(polar) << ',' << format_double(std::atan2(r[1], r[0]));
      }
    }
    if (last) {
      os << ',' << format_double(t.joint_success) << ',' << format_double(t.joint_inconclusive);
    } else {
      os << ",,";
    }
    os << '\n';
  };
  for (std::size_t j = 0; j < t.parties.size(); ++j) {
    row(j + 1, t.parties[j].ensemble, t.parties[j].mcm, &t.parties[j], false);
  }
  if (t.final_ensemble && t.final_mcm) {
    row(t.parties.size() + 1, *t.final_ensemble, *t.final_mcm, nullptr, true);
  }
  return os.str();
}

}  // namespace seqmcm::io

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

// Command-line front end. Everything is reachable through run(), so tests
// drive the same code paths as the installed binary.
//
// Exit codes: 0 success, 1 failed invariant, 2 malformed input, 3 KKT
// failure, 4 infeasible strategy.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "seqmcm/disturbance.hpp"
#include "seqmcm/errors.hpp"
#include "seqmcm/families.hpp"
#include "seqmcm/io.hpp"
#include "seqmcm/mcm.hpp"
#include "seqmcm/optim.hpp"
#include "seqmcm/qcore.hpp"
#include "seqmcm/seqchan.hpp"
#include "seqmcm/verify.hpp"

namespace seqmcm::cli {

using io::Json;

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitMalformed = 2,
  kExitKkt = 3,
  kExitInfeasible = 4,
};

inline constexpr std::size_t kMaxGridPoints = 100000;

/// Resolved settings for one invocation. A --config file fills these first;
/// explicit flags override it.
struct Config {
  std::string family;
  Json params = Json::object();
  std::optional<Json> ensemble;  // explicit ensemble JSON
  std::size_t parties = 1;
  std::vector<double> eta0;
  std::string retarget;  // empty selects the per-family default
  Json strategies;       // optional per-party list
  std::string out_dir;
  std::uint64_t seed = 7;
  std::string format;  // empty selects the per-command default
  std::string suite = "all";
  std::size_t count = 500;
};

// ---------------------------------------------------------------------------
// Parameter parsing

/// Radians from a number, or from a string with a "deg" or "rad" suffix.
inline double parse_angle(const Json& v) {
  if (v.is_number()) return v.get<double>();
  if (!v.is_string()) throw ValidationError("angle must be a number or a suffixed string");
  const std::string s = v.get<std::string>();
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ValidationError("cannot parse angle '" + s + "'");
  }
  std::string unit = s.substr(used);
  unit.erase(std::remove_if(unit.begin(), unit.end(), ::isspace), unit.end());
  if (unit == "deg") return x * kPi / 180.0;
  if (unit == "rad" || unit.empty()) return x;
  throw ValidationError("unknown angle unit '" + unit + "' (use deg or rad)");
}

inline double number_param(const Json& p, const char* key, std::optional<double> fallback = {}) {
  if (!p.contains(key)) {
    if (fallback) return *fallback;
    throw ValidationError(std::string("missing parameter '") + key + "'");
  }
  const Json& v = p.at(key);
  if (!v.is_number()) throw ValidationError(std::string("parameter '") + key + "' must be a number");
  return v.get<double>();
}

inline double angle_param(const Json& p, const char* key, std::optional<double> fallback = {}) {
  if (!p.contains(key)) {
    if (fallback) return *fallback;
    throw ValidationError(std::string("missing parameter '") + key + "'");
  }
  return parse_angle(p.at(key));
}

inline std::size_t count_param(const Json& p, std::size_t fallback) {
  for (const char* key : {"N", "n"}) {
    if (p.contains(key)) {
      const Json& v = p.at(key);
      if (!v.is_number_integer() || v.get<std::int64_t>() < 2) {
        throw ValidationError("parameter N must be an integer >= 2");
      }
      return v.get<std::size_t>();
    }
  }
  return fallback;
}

inline std::string canonical_family(const std::string& name) {
  if (name == "trine") return "gu";
  for (const char* known : {"two_mixed", "gu", "lifted_gu", "mirror"}) {
    if (name == known) return name;
  }
  throw ValidationError("unknown family '" + name +
                        "' (two_mixed, gu, trine, lifted_gu, mirror)");
}

inline families::TwoMixedParams two_mixed_params(const Json& p) {
  return {number_param(p, "p", 1.0), angle_param(p, "theta")};
}

inline families::LiftedGuParams lifted_gu_params(const Json& p) {
  return {count_param(p, 3), angle_param(p, "theta", kPi / 2), number_param(p, "lambda", 1.0)};
}

inline families::MirrorState mirror_params(const Json& p) {
  return {number_param(p, "r1", 1.0), number_param(p, "r2", 1.0),
          angle_param(p, "theta", 2 * kPi / 3)};
}

inline std::size_t gu_size(const std::string& raw_name, const Json& p) {
  const std::size_t n = count_param(p, 3);
  if (raw_name == "trine" && n != 3) throw ValidationError("trine is gu with N = 3");
  return n;
}

inline Ensemble family_ensemble(const std::string& raw_name, const Json& p) {
  const std::string name = canonical_family(raw_name);
  if (name == "two_mixed") return families::two_mixed(two_mixed_params(p));
  if (name == "gu") return families::gu({gu_size(raw_name, p)});
  if (name == "lifted_gu") return families::lifted_gu(lifted_gu_params(p));
  return families::mirror(mirror_params(p));
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& ex) {
    throw ValidationError("'" + path + "' is not valid JSON: " + ex.what());
  }
}

inline Ensemble config_ensemble(const Config& c) {
  if (c.ensemble) return io::ensemble_from_json(*c.ensemble);
  if (c.family.empty()) throw ValidationError("need --ensemble or --family");
  return family_ensemble(c.family, c.params);
}

// ---------------------------------------------------------------------------
// Strategies

namespace detail {

/// Rate for one party given either "eta0" or "alpha".
inline double party_rate(const Json& spec, const Ensemble& e, const McmSolution& mcm) {
  if (spec.contains("eta0")) return spec.at("eta0").get<double>();
  if (spec.contains("alpha")) {
    const double a = spec.at("alpha").get<double>();
    if (!(a >= 0.0 && a <= 1.0)) throw ValidationError("alpha must lie in [0, 1]");
    const double eta_min = min_inconclusive_rate(e, mcm.projectors()).inconclusive_rate;
    return 1.0 - a * (1.0 - eta_min);
  }
  throw ValidationError("strategy entry needs \"eta0\" or \"alpha\"");
}

/// Weak MCM with a named or explicit retarget policy.
inline WeakMcm policy_weak_mcm(const Ensemble& e, const McmSolution& mcm, double eta,
                               const Json& policy) {
  WeakDesign d = design_weak_mcm(e, mcm, eta);
  if (policy.is_array()) {
    if (policy.size() != e.size()) throw ValidationError("explicit retarget needs one state per label");
    for (const auto& s : policy) d.weak.retarget.emplace_back(io::vector_from_json(s));
    return d.weak;
  }
  const std::string name = policy.is_string() ? policy.get<std::string>() : "optimal";
  if (name == "optimal") {
    for (auto& s : minimize_disturbance_blockwise(e, mcm, eta)) d.weak.retarget.emplace_back(std::move(s));
  } else if (name == "measured") {
    for (auto& s : mcm.projectors()) d.weak.retarget.emplace_back(std::move(s));
  } else if (name != "luders") {
    throw ValidationError("unknown retarget policy '" + name + "' (optimal, measured, luders)");
  }
  return d.weak;
}

inline double eta_at(const std::vector<double>& etas, std::size_t party) {
  return etas[std::min(party, etas.size()) - 1];
}

}  // namespace detail

/// One strategy per party, from the config's strategy list or its family.
inline std::vector<Strategy> build_strategies(const Config& c) {
  if (c.parties < 1) throw ValidationError("--parties must be at least 1");
  for (double eta : c.eta0) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw ValidationError("eta0 values must lie in [0, 1]");
  }
  if (c.strategies.is_array() && !c.strategies.empty()) {
    std::vector<Strategy> out;
    for (const auto& spec : c.strategies) {
      out.push_back([spec](const Ensemble& e, const McmSolution& mcm, std::size_t) {
        return detail::policy_weak_mcm(e, mcm, detail::party_rate(spec, e, mcm),
                                       spec.contains("retarget") ? spec.at("retarget") : Json("optimal"));
      });
    }
    return out;
  }
  const std::size_t r = c.parties;
  if (c.ensemble) {
    if (c.eta0.empty()) throw ValidationError("sequence on an explicit ensemble needs --eta0");
    const Json policy = c.retarget.empty() ? Json("optimal") : Json(c.retarget);
    const auto etas = c.eta0;
    return std::vector<Strategy>(r, [policy, etas](const Ensemble& e, const McmSolution& mcm,
                                                   std::size_t party) {
      return detail::policy_weak_mcm(e, mcm, detail::eta_at(etas, party), policy);
    });
  }
  const std::string name = canonical_family(c.family);
  if (name == "two_mixed") {
    const auto t = two_mixed_params(c.params);
    if (c.eta0.empty()) {
      return std::vector<Strategy>(r, families::two_mixed_strategy(families::two_mixed_schedule(t, r)));
    }
    std::vector<double> gains;
    const double conf = families::two_mixed_oracle(t).confidence;
    for (std::size_t j = 1; j <= r; ++j) gains.push_back(conf * (1.0 - detail::eta_at(c.eta0, j)));
    return std::vector<Strategy>(r, families::two_mixed_strategy(gains));
  }
  if (c.eta0.empty()) throw ValidationError("sequence on family '" + c.family + "' needs --eta0");
  if (name == "gu") {
    return std::vector<Strategy>(r, families::gu_strategy(gu_size(c.family, c.params), c.eta0));
  }
  if (name == "lifted_gu") {
    return std::vector<Strategy>(r, families::lifted_gu_strategy(lifted_gu_params(c.params).n, c.eta0));
  }
  families::MirrorRetarget rule = families::MirrorRetarget::kLowerBound;
  if (c.retarget == "numeric" || c.retarget == "optimal") {
    rule = families::MirrorRetarget::kNumeric;
  } else if (!c.retarget.empty() && c.retarget != "lower_bound") {
    throw ValidationError("mirror retarget must be lower_bound or numeric");
  }
  return std::vector<Strategy>(r, families::mirror_strategy(c.eta0, rule));
}

// ---------------------------------------------------------------------------
// Output

inline void emit(const Config& c, const std::string& file, const std::string& content,
                 std::ostream& out) {
  if (c.out_dir.empty()) {
    out << content;
    return;
  }
  std::filesystem::create_directories(c.out_dir);
  const auto path = std::filesystem::path(c.out_dir) / file;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write '" + path.string() + "'");
  f << content;
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string csv() const {
    std::ostringstream os;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) os << ',';
        const bool quote = cells[i].find_first_of(",\"\n") != std::string::npos;
        if (!quote) {
          os << cells[i];
          continue;
        }
        os << '"';
        for (char ch : cells[i]) os << (ch == '"' ? "\"\"" : std::string(1, ch));
        os << '"';
      }
      os << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return os.str();
  }

  Json json() const {
    Json out = Json::array();
    for (const auto& r : rows) {
      Json obj = Json::object();
      for (std::size_t i = 0; i < header.size(); ++i) obj[header[i]] = i < r.size() ? r[i] : "";
      out.push_back(obj);
    }
    return out;
  }
};

inline std::string num(double v) { return io::format_double(v); }

// ---------------------------------------------------------------------------
// Subcommands

/// MCM, inconclusive-rate weights and KKT report. Returns 3 on KKT failure.
inline int cmd_mcm(const Config& c, std::ostream& out) {
  const Ensemble e = config_ensemble(c);
  const McmSolution sol = solve_mcm(e);
  // Labels with zero prior get a zero element; the rest use SDP weights when
  // the MCM is rank one.
  std::vector<std::size_t> live;
  for (std::size_t x = 0; x < sol.size(); ++x) {
    if (!sol[x].basis.empty()) live.push_back(x);
  }
  const auto d = static_cast<Eigen::Index>(e.dim());
  std::vector<ComplexMatrix> elems(sol.size(), ComplexMatrix::Zero(d, d));
  Json weights = nullptr;
  bool rank_one = !live.empty();
  for (std::size_t x : live) rank_one = rank_one && sol[x].degeneracy == 1;
  if (rank_one) {
    std::vector<PureState> proj;
    for (std::size_t x : live) proj.push_back(sol[x].basis.front());
    const WeightSolution w = min_inconclusive_rate(e, proj);
    weights = io::weights_to_json(w);
    for (std::size_t i = 0; i < live.size(); ++i) {
      elems[live[i]] = w.weights[i] * proj[i].projector();
    }
  }
  if (weights.is_null()) {
    for (std::size_t x : live) elems[x] = sol[x].projector() / static_cast<double>(sol.size());
  }
  const Povm povm = Povm::complete(std::move(elems));
  const KktReport kkt = verify_kkt(e, sol, povm);
  if (c.format == "csv") {
    Table t{{"label", "C", "degeneracy", "weight", "stationarity", "slackness"}, {}};
    for (std::size_t x = 0; x < sol.size(); ++x) {
      std::string w;
      if (!weights.is_null()) {
        const auto it = std::find(live.begin(), live.end(), x);
        if (it != live.end()) w = num(weights["weights"][static_cast<std::size_t>(it - live.begin())].get<double>());
      }
      t.rows.push_back({std::to_string(x), num(sol[x].confidence), std::to_string(sol[x].degeneracy), w,
                        num(kkt.labels[x].stationarity), num(kkt.labels[x].slackness)});
    }
    emit(c, "mcm.csv", t.csv(), out);
  } else {
    Json j{{"ensemble", io::ensemble_to_json(e)},
           {"mcm", io::mcm_to_json(sol)},
           {"weights", weights},
           {"povm", io::povm_to_json(povm)},
           {"kkt", io::kkt_to_json(kkt)}};
    emit(c, "mcm.json", dump(j), out);
  }
  return kkt.passed ? kExitOk : kExitKkt;
}

inline int cmd_sequence(const Config& c, std::ostream& out) {
  const Ensemble e = config_ensemble(c);
  const std::vector<Strategy> strategies = build_strategies(c);
  const SequentialTrace trace = run_sequence(e, strategies);
  if (!c.out_dir.empty()) {
    emit(c, "trace.json", dump(io::trace_to_json(trace)), out);
    emit(c, "trace.csv", io::trace_to_csv(trace), out);
  } else if (c.format == "csv") {
    out << io::trace_to_csv(trace);
  } else {
    out << dump(io::trace_to_json(trace));
  }
  return kExitOk;
}

inline Json family_report(const Config& c) {
  const std::string name = canonical_family(c.family);
  const std::size_t r = c.parties;
  Json j{{"family", name}};
  if (name == "two_mixed") {
    const auto t = two_mixed_params(c.params);
    const auto o = families::two_mixed_oracle(t);
    const GainSchedule s = families::two_mixed_schedule(t, r);
    j["C"] = o.confidence;
    j["s"] = o.overlap;
    j["schedule"] = {{"R", r},
                     {"gains", s.gains},
                     {"overlaps", s.overlaps},
                     {"P_J", s.joint_success},
                     {"P_I", o.overlap}};
    return j;
  }
  if (name == "gu") {
    const std::size_t n = gu_size(c.family, c.params);
    const auto o = families::gu_oracle({n});
    j["N"] = n;
    j["C"] = o.confidence;
    j["a"] = o.weight;
    j["eta_min"] = 0.0;
    if (!c.eta0.empty()) {
      Json traj = Json::array();
      std::vector<double> earlier;
      for (std::size_t k = 1; k <= r + 1; ++k) {
        traj.push_back({{"j", k},
                        {"P_plus", families::gu_p_plus(earlier)},
                        {"C", families::gu_confidence(n, earlier)}});
        earlier.push_back(detail::eta_at(c.eta0, k));
      }
      j["trajectory"] = traj;
    }
    return j;
  }
  if (name == "lifted_gu") {
    const auto l = lifted_gu_params(c.params);
    const auto o = families::lifted_gu_oracle(l);
    j["N"] = l.n;
    j["theta"] = l.theta;
    j["lambda"] = l.lambda;
    j["C"] = o.confidence;
    j["a"] = o.weight;
    j["eta_min"] = o.eta_min;
    if (!c.eta0.empty()) {
      std::vector<double> etas;
      for (std::size_t k = 1; k <= r; ++k) etas.push_back(detail::eta_at(c.eta0, k));
      const auto lambdas = families::lifted_gu_lambdas(l, etas);
      Json traj = Json::array();
      for (std::size_t k = 0; k < lambdas.size(); ++k) {
        Json row{{"j", k + 1},
                 {"lambda", lambdas[k]},
                 {"C", (1.0 + lambdas[k]) / static_cast<double>(l.n)}};
        if (k < etas.size()) {
          row["Delta"] = families::lifted_gu_delta(etas[k], l.theta);
          row["D"] = families::lifted_gu_disturbance(lambdas[k], l.theta, etas[k]);
        }
        traj.push_back(row);
      }
      j["trajectory"] = traj;
      if (c.params.contains("c_th")) {
        const auto b = families::lifted_gu_party_bound(l, c.eta0.front(), number_param(c.params, "c_th"));
        j["party_bound"] = {{"bound", b.unbounded ? Json("inf") : Json(b.bound)},
                            {"R_max", b.unbounded ? Json("inf") : Json(b.r_max)}};
      }
    }
    return j;
  }
  const auto m = mirror_params(c.params);
  j["r1"] = m.r1;
  j["r2"] = m.r2;
  j["theta"] = m.theta;
  if (m.r1 == 1.0 && m.r2 == 1.0) {
    const auto o = families::mirror_oracle({m.theta});
    j["cos_phi"] = o.cos_phi;
    j["a"] = {o.a1, o.a2, o.a2};
    j["C"] = {o.c1, o.c2, o.c2};
    j["cos_varphi"] = o.cos_varphi;
  }
  if (!c.eta0.empty()) {
    Json traj = Json::array();
    families::MirrorState s = m;
    for (std::size_t k = 1; k <= r; ++k) {
      const auto step = families::mirror_step(s, detail::eta_at(c.eta0, k));
      traj.push_back({{"j", k},
                      {"r1", s.r1},
                      {"r2", s.r2},
                      {"theta", s.theta},
                      {"C", step.confidences},
                      {"a", step.weights},
                      {"cos_phi", step.cos_phi},
                      {"cos_varphi", step.cos_varphi}});
      s = step.next;
    }
    traj.push_back({{"j", r + 1}, {"r1", s.r1}, {"r2", s.r2}, {"theta", s.theta}});
    j["trajectory"] = traj;
  }
  return j;
}

inline int cmd_family(const Config& c, std::ostream& out) {
  if (c.family.empty()) throw ValidationError("family needs --family");
  emit(c, "family.json", dump(family_report(c)), out);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// Sweep

struct GridPoint {
  Json params;  // scalar values only
  std::optional<double> eta;
  std::size_t parties = 1;
  std::vector<std::string> labels;  // grid coordinates as printed
};

struct Grid {
  std::vector<std::string> keys;
  std::vector<GridPoint> points;
};

/// Cartesian product of list-valued parameters, eta0 and parties, with the
/// first key varying slowest.
inline Grid expand_grid(const Config& c) {
  std::vector<std::pair<std::string, std::vector<Json>>> axes;
  for (const auto& [k, v] : c.params.items()) {
    if (k == "family" || k == "parties") continue;
    if (v.is_array()) {
      if (v.empty()) throw ValidationError("grid axis '" + k + "' is empty");
      axes.emplace_back(k, std::vector<Json>(v.begin(), v.end()));
    }
  }
  std::vector<Json> etas;
  for (double eta : c.eta0) etas.push_back(eta);
  if (etas.empty()) etas.push_back(nullptr);
  std::vector<Json> parties;
  if (c.params.contains("parties")) {
    const Json& p = c.params.at("parties");
    if (p.is_array()) {
      parties.assign(p.begin(), p.end());
    } else {
      parties.push_back(p);
    }
  } else {
    parties.push_back(c.parties);
  }
  axes.emplace_back("eta0", etas);
  axes.emplace_back("R", parties);
  std::size_t total = 1;
  for (const auto& a : axes) {
    total *= a.second.size();
    if (total > kMaxGridPoints) throw ValidationError("sweep grid exceeds 100000 points");
  }
  Grid g;
  for (const auto& a : axes) g.keys.push_back(a.first);
  std::vector<std::size_t> idx(axes.size(), 0);
  for (std::size_t n = 0; n < total; ++n) {
    std::size_t rem = n;
    for (std::size_t a = axes.size(); a-- > 0;) {
      idx[a] = rem % axes[a].second.size();
      rem /= axes[a].second.size();
    }
    GridPoint p;
    p.params = c.params;
    p.params.erase("parties");
    for (std::size_t a = 0; a < axes.size(); ++a) {
      const Json& v = axes[a].second[idx[a]];
      const std::string& key = axes[a].first;
      if (key == "eta0") {
        if (!v.is_null()) p.eta = v.get<double>();
      } else if (key == "R") {
        if (!v.is_number_integer() || v.get<std::int64_t>() < 1) {
          throw ValidationError("parties must be positive integers");
        }
        p.parties = v.get<std::size_t>();
      } else {
        p.params[key] = v;
      }
      p.labels.push_back(v.is_null() ? "" : v.is_string() ? v.get<std::string>() : v.dump());
    }
    g.points.push_back(std::move(p));
  }
  return g;
}

inline std::vector<std::string> sweep_columns(const std::string& family) {
  std::vector<std::string> cols{"j", "C_oracle", "C_engine", "C_residual"};
  std::vector<std::string> extra;
  if (family == "gu") {
    extra = {"eta_engine", "eta_residual"};
  } else if (family == "lifted_gu") {
    extra = {"lambda_oracle", "lambda_engine", "D_oracle", "D_engine", "D_residual",
             "meets_threshold", "feasible"};
  } else if (family == "mirror") {
    extra = {"C2_oracle", "C2_engine", "C2_residual", "theta_oracle", "theta_engine",
             "theta_residual", "dtheta_engine"};
  } else {
    extra = {"s_oracle", "s_engine", "s_residual", "G_oracle", "G_engine",
             "PJ_oracle", "PJ_engine", "PJ_residual", "PI_engine"};
  }
  cols.insert(cols.end(), extra.begin(), extra.end());
  cols.push_back("error");
  return cols;
}

/// Rows (without grid coordinates) for one point; j runs over 1..R.
inline std::vector<std::vector<std::string>> sweep_point(const Config& base, const std::string& raw,
                                                         const GridPoint& p) {
  Config c = base;
  c.params = p.params;
  c.parties = p.parties;
  c.eta0.clear();
  if (p.eta) c.eta0.push_back(*p.eta);
  c.strategies = Json();
  const std::string family = canonical_family(raw);
  const std::size_t r = p.parties;
  const Ensemble e = family_ensemble(raw, c.params);
  const SequentialTrace tr = run_sequence(e, build_strategies(c));
  auto ens = [&](std::size_t j) -> const Ensemble& {
    return j <= r ? tr.parties[j - 1].ensemble : *tr.final_ensemble;
  };
  auto conf = [&](std::size_t j, std::size_t x) {
    return j <= r ? tr.parties[j - 1].mcm[x].confidence : (*tr.final_mcm)[x].confidence;
  };
  std::vector<std::vector<std::string>> rows;
  if (family == "gu") {
    const std::size_t n = gu_size(raw, c.params);
    std::vector<double> earlier;
    for (std::size_t j = 1; j <= r; ++j) {
      const double oracle = families::gu_confidence(n, earlier);
      double worst = 0.0;
      for (std::size_t x = 0; x < n; ++x) worst = std::max(worst, std::abs(conf(j, x) - oracle));
      const double eta = tr.parties[j - 1].inconclusive_rate;
      rows.push_back({std::to_string(j), num(oracle), num(conf(j, 0)), num(worst), num(eta),
                      num(std::abs(eta - *p.eta)), ""});
      earlier.push_back(*p.eta);
    }
  } else if (family == "lifted_gu") {
    const auto l = lifted_gu_params(c.params);
    const std::vector<double> etas(r, *p.eta);
    const auto lambdas = families::lifted_gu_lambdas(l, etas);
    const auto n = static_cast<double>(l.n);
    const bool has_cth = c.params.contains("c_th");
    const double cth = has_cth ? number_param(c.params, "c_th") : 0.0;
    const bool feasible = has_cth && conf(r, 0) >= cth - 1e-12;
    for (std::size_t j = 1; j <= r; ++j) {
      const double oracle = (1.0 + lambdas[j - 1]) / n;
      double worst = 0.0;
      for (std::size_t x = 0; x < l.n; ++x) worst = std::max(worst, std::abs(conf(j, x) - oracle));
      const double d_oracle = families::lifted_gu_disturbance(lambdas[j - 1], l.theta, *p.eta);
      const double d_engine = tr.parties[j - 1].disturbance;
      rows.push_back({std::to_string(j), num(oracle), num(conf(j, 0)), num(worst), num(lambdas[j - 1]),
                      num(n * conf(j, 0) - 1.0), num(d_oracle), num(d_engine),
                      num(std::abs(d_oracle - d_engine)),
                      has_cth ? (conf(j, 0) >= cth - 1e-12 ? "1" : "0") : "",
                      has_cth ? (feasible ? "1" : "0") : "", ""});
    }
  } else if (family == "mirror") {
    families::MirrorState s = mirror_params(c.params);
    for (std::size_t j = 1; j <= r; ++j) {
      const auto step = families::mirror_step(s, *p.eta);
      const double th = families::mirror_state_of(ens(j)).theta;
      const double th_next = families::mirror_state_of(ens(j + 1)).theta;
      rows.push_back({std::to_string(j), num(step.confidences[0]), num(conf(j, 0)),
                      num(std::abs(step.confidences[0] - conf(j, 0))), num(step.confidences[1]),
                      num(conf(j, 1)), num(std::abs(step.confidences[1] - conf(j, 1))), num(s.theta),
                      num(th), num(std::abs(s.theta - th)), num(th_next - th), ""});
      s = step.next;
    }
  } else {
    const auto t = two_mixed_params(c.params);
    const auto o = families::two_mixed_oracle(t);
    const GainSchedule sched = families::two_mixed_schedule(t, r);
    const double pj = o.confidence * std::pow(1.0 - std::pow(o.overlap, 1.0 / static_cast<double>(r)),
                                              static_cast<double>(r));
    for (std::size_t j = 1; j <= r; ++j) {
      const auto v = tr.parties[j - 1].mcm.projectors();
      const double s_engine = std::abs(v[0].inner(v[1]));
      const double s_oracle =
          std::pow(o.overlap, 1.0 - static_cast<double>(j - 1) / static_cast<double>(r));
      double worst = 0.0;
      for (std::size_t x = 0; x < 2; ++x) worst = std::max(worst, std::abs(conf(j, x) - o.confidence));
      rows.push_back({std::to_string(j), num(o.confidence), num(conf(j, 0)), num(worst), num(s_oracle),
                      num(s_engine), num(std::abs(s_oracle - s_engine)), num(sched.gains[j - 1]),
                      num(tr.parties[j - 1].gain), num(pj), num(tr.joint_success),
                      num(std::abs(pj - tr.joint_success)), num(tr.joint_inconclusive), ""});
    }
  }
  return rows;
}

/// Worker count from SEQMCM_THREADS, else the hardware concurrency.
inline std::size_t thread_cap() {
  if (const char* env = std::getenv("SEQMCM_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

inline Table sweep_table(const Config& c) {
  if (c.family.empty()) throw ValidationError("sweep needs --family");
  const std::string family = canonical_family(c.family);
  if (family != "two_mixed" && c.eta0.empty()) {
    throw ValidationError("sweep on family '" + c.family + "' needs --eta0");
  }
  const Grid grid = expand_grid(c);
  Table t;
  t.header = grid.keys;
  const auto cols = sweep_columns(family);
  t.header.insert(t.header.end(), cols.begin(), cols.end());
  std::vector<std::vector<std::vector<std::string>>> results(grid.points.size());
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (std::size_t i = next++; i < grid.points.size(); i = next++) {
      try {
        results[i] = sweep_point(c, c.family, grid.points[i]);
      } catch (const std::exception& ex) {
        std::vector<std::string> row(cols.size(), "");
        row.back() = ex.what();
        results[i] = {row};
      }
    }
  };
  const std::size_t workers = std::min(thread_cap(), grid.points.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  for (std::size_t i = 0; i < grid.points.size(); ++i) {
    for (auto& r : results[i]) {
      std::vector<std::string> row = grid.points[i].labels;
      row.insert(row.end(), r.begin(), r.end());
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

inline int cmd_sweep(const Config& c, std::ostream& out) {
  const Table t = sweep_table(c);
  if (c.format == "json") {
    emit(c, "sweep.json", dump(t.json()), out);
  } else {
    emit(c, "sweep.csv", t.csv(), out);
  }
  return kExitOk;
}

inline Json verify_to_json(const verify::Report& r) {
  Json checks = Json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"suite", c.suite},
                      {"module", c.module},
                      {"invariant", c.invariant},
                      {"instances", c.instances},
                      {"violations", c.violations},
                      {"worst", c.worst},
                      {"tolerance", c.tolerance},
                      {"passed", c.passed()},
                      {"witness", c.witness}});
  }
  return {{"passed", r.passed()}, {"checks", checks}};
}

inline int cmd_verify(const Config& c, std::ostream& out, std::ostream& err) {
  const verify::Report r = verify::run(c.suite, {c.seed, c.count});
  emit(c, "verify.json", dump(verify_to_json(r)), out);
  for (const auto& ch : r.checks) {
    if (!ch.passed()) {
      err << "FAILED " << ch.module << ": " << ch.invariant << " (worst " << num(ch.worst)
          << ", witness " << ch.witness << ")\n";
    }
  }
  return r.passed() ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------------------
// Entry point

/// Applies a --config file. Recognized keys mirror the flags, plus
/// "strategies": [{"eta0" | "alpha", "retarget"}, ...].
inline void apply_config_file(Config& c, const Json& j) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  try {
    if (j.contains("family")) c.family = j.at("family").get<std::string>();
    if (j.contains("params")) c.params = j.at("params");
    if (j.contains("ensemble")) {
      const Json& e = j.at("ensemble");
      c.ensemble = e.is_string() ? read_json_file(e.get<std::string>()) : e;
    }
    if (j.contains("parties")) c.parties = j.at("parties").get<std::size_t>();
    if (j.contains("eta0")) {
      const Json& e = j.at("eta0");
      c.eta0 = e.is_array() ? e.get<std::vector<double>>() : std::vector<double>{e.get<double>()};
    }
    if (j.contains("retarget")) c.retarget = j.at("retarget").get<std::string>();
    if (j.contains("strategies")) {
      c.strategies = j.at("strategies");
      if (!c.strategies.is_array()) throw ValidationError("strategies must be a list");
      c.parties = c.strategies.size();
    }
    if (j.contains("out")) c.out_dir = j.at("out").get<std::string>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("format")) c.format = j.at("format").get<std::string>();
  } catch (const Json::exception& ex) {
    throw ValidationError(std::string("config: ") + ex.what());
  }
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Sequential maximum-confidence measurement simulator", "seqmcm"};
  app.require_subcommand(1, 1);

  struct Raw {
    std::string config, ensemble, family, params, out, format, retarget, suite = "all";
    std::vector<double> eta0;
    std::size_t parties = 1, count = 500;
    std::uint64_t seed = 7;
  } raw;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", raw.config, "JSON config file");
    sub->add_option("--ensemble", raw.ensemble, "ensemble JSON file");
    sub->add_option("--family", raw.family, "two_mixed | gu | trine | lifted_gu | mirror");
    sub->add_option("--params", raw.params, "family parameters as JSON");
    sub->add_option("--parties", raw.parties, "number of parties R")->check(CLI::PositiveNumber);
    sub->add_option("--eta0", raw.eta0, "inconclusive rate(s), comma separated")->delimiter(',');
    sub->add_option("--retarget", raw.retarget,
                    "optimal | measured | luders (explicit), lower_bound | numeric (mirror)");
    sub->add_option("--out", raw.out, "output directory");
    sub->add_option("--seed", raw.seed, "random seed");
    sub->add_option("--format", raw.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
  };
  CLI::App* mcm = app.add_subcommand("mcm", "maximum-confidence measurement of one ensemble");
  CLI::App* seq = app.add_subcommand("sequence", "run a chain of parties");
  CLI::App* sweep = app.add_subcommand("sweep", "oracle versus engine over a parameter grid");
  CLI::App* ver = app.add_subcommand("verify", "run invariant suites");
  CLI::App* fam = app.add_subcommand("family", "print a family's closed-form values");
  for (CLI::App* sub : {mcm, seq, sweep, ver, fam}) common(sub);
  ver->add_option("--suite", raw.suite, "duality | kkt | monotonicity | proposition | channels | families | all");
  ver->add_option("--count", raw.count, "random instances per check")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitMalformed;
  }

  CLI::App* sub = app.get_subcommands().front();
  auto given = [&](const char* flag) { return sub->count(flag) > 0; };
  try {
    Config c;
    if (!raw.config.empty()) apply_config_file(c, read_json_file(raw.config));
    if (given("--ensemble")) c.ensemble = read_json_file(raw.ensemble);
    if (given("--family")) c.family = raw.family;
    if (given("--params")) {
      try {
        c.params = Json::parse(raw.params);
      } catch (const Json::exception& ex) {
        throw ValidationError(std::string("--params is not valid JSON: ") + ex.what());
      }
      if (!c.params.is_object()) throw ValidationError("--params must be a JSON object");
      if (c.params.contains("family") && c.family.empty()) {
        c.family = c.params.at("family").get<std::string>();
      }
    }
    if (given("--parties")) c.parties = raw.parties;
    if (given("--eta0")) c.eta0 = raw.eta0;
    if (given("--retarget")) c.retarget = raw.retarget;
    if (given("--out")) c.out_dir = raw.out;
    if (given("--seed")) c.seed = raw.seed;
    if (given("--format")) c.format = raw.format;
    c.suite = raw.suite;
    c.count = raw.count;
    if (c.ensemble && !c.family.empty()) throw ValidationError("give --ensemble or --family, not both");

    if (sub == mcm) return cmd_mcm(c, out);
    if (sub == seq) return cmd_sequence(c, out);
    if (sub == sweep) return cmd_sweep(c, out);
    if (sub == ver) return cmd_verify(c, out, err);
    return cmd_family(c, out);
  } catch (const SequenceError& e) {
    err << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::kInfeasible: return kExitInfeasible;
      case ErrorKind::kValidation:
      case ErrorKind::kDomain: return kExitMalformed;
      default: return kExitFailure;
    }
  } catch (const InfeasibleError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const InvariantError& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitMalformed;
  } catch (const Json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitMalformed;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitMalformed;
  }
}

}  // namespace seqmcm::cli

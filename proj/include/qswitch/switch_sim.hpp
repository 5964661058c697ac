#pragma once

// Discrete-time simulation of the switch under the frame-based randomised
// matching policy.
//
// Slot order: schedule, service, decoherence, arrivals. At every frame
// boundary the request queues become LP weights, the LP optimum is
// decomposed into a matching mixture, and one matching is sampled i.i.d. from
// that mixture in every slot of the frame.

#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qswitch/decomposition.hpp"
#include "qswitch/lp_scheduler.hpp"
#include "qswitch/model.hpp"
#include "qswitch/refchain.hpp"
#include "qswitch/rng.hpp"

namespace qswitch {

enum class PolicyKind { alg1, alg2, fixed_mixture };

inline const char* to_string(PolicyKind p) {
  switch (p) {
    case PolicyKind::alg1: return "alg1";
    case PolicyKind::alg2: return "alg2";
    case PolicyKind::fixed_mixture: return "fixed-mixture";
  }
  return "?";
}

/// T_k = max(t_min, ceil(c * log(1 + sum_e R_e(kT)))).
struct AdaptiveFrame {
  bool enabled = false;
  int t_min = 1;
  double c = 1.0;
};

struct SimState {
  std::vector<int> L;            // per vertex, 0..B_v
  std::vector<std::int64_t> R;   // per edge
  std::int64_t t = 0;

  static SimState empty(const SwitchInstance& g) {
    return SimState{std::vector<int>(g.num_vertices(), 0), std::vector<std::int64_t>(g.num_edges(), 0), 0};
  }

  std::int64_t backlog() const {
    std::int64_t s = 0;
    for (auto r : R) s += r;
    return s;
  }

  /// V(R) = 1/2 sum_e R_e^2
  double lyapunov() const {
    double v = 0.0;
    for (auto r : R) v += 0.5 * static_cast<double>(r) * static_cast<double>(r);
    return v;
  }

  friend bool operator==(const SimState&, const SimState&) = default;
};

struct SimConfig {
  SwitchInstance instance;
  int frame_length = 100;
  std::int64_t horizon = 0;
  std::uint64_t seed = 1;
  PolicyKind policy = PolicyKind::alg1;
  std::int64_t warmup = 0;
  std::optional<MatchingMixture> fixed_mixture;
  std::optional<SimState> initial;
  AdaptiveFrame adaptive;
  std::int64_t poisson_cap = 1000000;
};

inline void check_config(const SimConfig& c) {
  const auto& g = c.instance;
  if (c.frame_length < 1) throw Error("frame length must be >= 1");
  if (c.horizon < c.frame_length) throw Error("horizon must be >= frame length");
  if (c.warmup < 0 || c.warmup > c.horizon) throw Error("warmup must lie in [0, horizon]");
  if (c.adaptive.enabled && (c.adaptive.t_min < 1 || !(c.adaptive.c > 0.0)))
    throw Error("adaptive frame needs t_min >= 1 and c > 0");
  if (c.policy == PolicyKind::fixed_mixture) {
    if (!c.fixed_mixture) throw Error("fixed-mixture policy needs a mixture");
    check_mixture(g, *c.fixed_mixture);
  }
  if (c.initial) {
    const SimState& s = *c.initial;
    if (s.L.size() != g.num_vertices() || s.R.size() != g.num_edges()) throw Error("initial state has wrong shape");
    for (VertexId v = 0; v < g.num_vertices(); ++v)
      if (s.L[v] < 0 || s.L[v] > g.node(v).buffer) throw Error("initial buffer level out of range");
    for (auto r : s.R)
      if (r < 0) throw Error("initial request queue must be nonnegative");
  }
}

/// One stream per (entity, purpose); see StreamPurpose.
struct SimStreams {
  std::vector<RandomStream> vertex_arrival;
  std::vector<RandomStream> vertex_decoherence;
  std::vector<RandomStream> edge_arrival;
  RandomStream matching;

  SimStreams(const SwitchInstance& g, std::uint64_t seed)
      : matching(RandomStream::derive(seed, StreamPurpose::matching_sample, 0)) {
    for (VertexId v = 0; v < g.num_vertices(); ++v) {
      vertex_arrival.push_back(RandomStream::derive(seed, StreamPurpose::vertex_arrival, v));
      vertex_decoherence.push_back(RandomStream::derive(seed, StreamPurpose::vertex_decoherence, v));
    }
    for (EdgeId e = 0; e < g.num_edges(); ++e)
      edge_arrival.push_back(RandomStream::derive(seed, StreamPurpose::edge_arrival, e));
  }
};

/// Per-edge indicators produced by one slot.
struct SlotOutcome {
  std::vector<std::uint8_t> served;     // S_e
  std::vector<std::uint8_t> potential;  // Shat_e: scheduled with both buffers nonempty
  std::vector<std::int64_t> arrivals;   // A_e
};

/// Advances state by one slot under the given matching.
inline SlotOutcome step(SimState& state, const Matching& matching, SimStreams& rng, const SwitchInstance& g,
                        std::int64_t poisson_cap = 1000000) {
  SlotOutcome out;
  out.served.assign(g.num_edges(), 0);
  out.potential.assign(g.num_edges(), 0);
  out.arrivals.assign(g.num_edges(), 0);

  for (EdgeId e : matching.edges) {
    const Edge& ed = g.edge(e);
    if (state.L[ed.u] > 0 && state.L[ed.v] > 0) {
      out.potential[e] = 1;
      if (state.R[e] > 0) {
        out.served[e] = 1;
        --state.R[e];
        --state.L[ed.u];
        --state.L[ed.v];
      }
    }
  }

  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    const double keep = 1.0 - g.node(v).mu;
    int survivors = 0;
    for (int k = 0; k < state.L[v]; ++k) survivors += rng.vertex_decoherence[v].bernoulli(keep) ? 1 : 0;
    state.L[v] = survivors;
  }

  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    if (rng.vertex_arrival[v].bernoulli(g.node(v).lambda)) state.L[v] = std::min(g.node(v).buffer, state.L[v] + 1);
  }
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    const EdgeDemand& d = g.demand(e);
    std::int64_t a = 0;
    if (d.kind == ArrivalKind::bernoulli) {
      a = rng.edge_arrival[e].bernoulli(d.nu) ? 1 : 0;
    } else {
      a = static_cast<std::int64_t>(std::min<std::uint64_t>(rng.edge_arrival[e].poisson(d.nu),
                                                            static_cast<std::uint64_t>(poisson_cap)));
    }
    out.arrivals[e] = a;
    state.R[e] += a;
  }
  ++state.t;
  return out;
}

struct FrameRecord {
  std::int64_t start = 0;
  int length = 0;
  double lyapunov_start = 0.0;
  double lyapunov_end = 0.0;
  std::int64_t backlog_start = 0;
  std::int64_t backlog_end = 0;
  std::int64_t max_backlog = 0;  // max over the slots of the frame, start included

  double drift() const { return lyapunov_end - lyapunov_start; }

  friend bool operator==(const FrameRecord&, const FrameRecord&) = default;
};

/// Counters over the post-warmup window, plus whole-run totals for
/// conservation checks.
struct SimStats {
  std::int64_t slots = 0;
  int frame_length = 0;
  std::vector<std::int64_t> served, potential, scheduled, arrivals, both_available;
  std::vector<double> sum_R;
  std::vector<std::int64_t> max_R;
  std::vector<std::int64_t> nonempty;  // per vertex, slots with L_v > 0 at slot start
  std::vector<FrameRecord> frames;     // frames starting at or after warmup

  SimState initial_state;
  SimState final_state;
  std::vector<std::int64_t> total_arrivals, total_served;

  double time_average_R(EdgeId e) const { return slots ? sum_R[e] / static_cast<double>(slots) : 0.0; }
  double empty_frequency(VertexId v) const {
    return slots ? 1.0 - static_cast<double>(nonempty[v]) / static_cast<double>(slots) : 0.0;
  }

  friend bool operator==(const SimStats&, const SimStats&) = default;
};

namespace detail {

inline MatchingMixture frame_mixture(const SimConfig& cfg, const SimState& state) {
  if (cfg.policy == PolicyKind::fixed_mixture) return *cfg.fixed_mixture;
  std::vector<double> w(state.R.begin(), state.R.end());
  const LpSolution sol =
      cfg.policy == PolicyKind::alg1 ? solve_algorithm1(cfg.instance, w) : solve_algorithm2(cfg.instance, w);
  return decompose(cfg.instance, sol.x).mixture;
}

inline void write_trace_header(std::ostream& os, const SwitchInstance& g) {
  os << "t";
  for (const auto& n : g.vertex_names()) os << ",L_" << n;
  for (EdgeId e = 0; e < g.num_edges(); ++e) os << ",R_" << g.edge_label(e);
  os << ",matching";
  for (EdgeId e = 0; e < g.num_edges(); ++e) os << ",S_" << g.edge_label(e);
  for (EdgeId e = 0; e < g.num_edges(); ++e) os << ",Shat_" << g.edge_label(e);
  os << '\n';
}

inline void write_trace_row(std::ostream& os, const SwitchInstance& g, const SimState& before, const Matching& m,
                            const SlotOutcome& out) {
  os << before.t;
  for (int l : before.L) os << ',' << l;
  for (auto r : before.R) os << ',' << r;
  os << ',';
  for (std::size_t i = 0; i < m.edges.size(); ++i) os << (i ? ";" : "") << g.edge_label(m.edges[i]);
  for (auto s : out.served) os << ',' << int(s);
  for (auto s : out.potential) os << ',' << int(s);
  os << '\n';
}

}  // namespace detail

/// Runs the policy for cfg.horizon slots. Bit-identical for identical
/// (cfg, seed). When trace is given, one CSV row per slot is written to it.
inline SimStats run(const SimConfig& cfg, std::ostream* trace = nullptr) {
  check_config(cfg);
  const SwitchInstance& g = cfg.instance;
  const std::size_t m = g.num_edges(), n = g.num_vertices();

  SimState state = cfg.initial ? *cfg.initial : SimState::empty(g);
  state.t = 0;
  SimStreams rng(g, cfg.seed);

  SimStats st;
  st.frame_length = cfg.adaptive.enabled ? cfg.adaptive.t_min : cfg.frame_length;
  st.served.assign(m, 0);
  st.potential.assign(m, 0);
  st.scheduled.assign(m, 0);
  st.arrivals.assign(m, 0);
  st.both_available.assign(m, 0);
  st.sum_R.assign(m, 0.0);
  st.max_R.assign(m, 0);
  st.nonempty.assign(n, 0);
  st.total_arrivals.assign(m, 0);
  st.total_served.assign(m, 0);
  st.initial_state = state;

  if (trace) detail::write_trace_header(*trace, g);

  while (state.t < cfg.horizon) {
    int len = cfg.frame_length;
    if (cfg.adaptive.enabled) {
      const double raw = std::ceil(cfg.adaptive.c * std::log1p(static_cast<double>(state.backlog())));
      len = std::max(cfg.adaptive.t_min, static_cast<int>(std::min(raw, 1e9)));
    }
    len = static_cast<int>(std::min<std::int64_t>(len, cfg.horizon - state.t));

    const MixtureSampler sampler(detail::frame_mixture(cfg, state));
    FrameRecord frame;
    frame.start = state.t;
    frame.length = len;
    frame.lyapunov_start = state.lyapunov();
    frame.backlog_start = frame.max_backlog = state.backlog();
    const bool record_frame = state.t >= cfg.warmup;

    for (int k = 0; k < len; ++k) {
      const Matching& M = sampler.sample(rng.matching);
      const bool counted = state.t >= cfg.warmup;
      if (counted) {
        ++st.slots;
        for (VertexId v = 0; v < n; ++v) st.nonempty[v] += state.L[v] > 0;
        for (EdgeId e = 0; e < m; ++e) {
          st.sum_R[e] += static_cast<double>(state.R[e]);
          st.max_R[e] = std::max(st.max_R[e], state.R[e]);
          st.both_available[e] += state.L[g.edge(e).u] > 0 && state.L[g.edge(e).v] > 0;
        }
        for (EdgeId e : M.edges) ++st.scheduled[e];
      }
      const SimState before = trace ? state : SimState{};
      const SlotOutcome out = step(state, M, rng, g, cfg.poisson_cap);
      if (trace) detail::write_trace_row(*trace, g, before, M, out);
      for (EdgeId e = 0; e < m; ++e) {
        st.total_arrivals[e] += out.arrivals[e];
        st.total_served[e] += out.served[e];
        if (counted) {
          st.served[e] += out.served[e];
          st.potential[e] += out.potential[e];
          st.arrivals[e] += out.arrivals[e];
        }
      }
      frame.max_backlog = std::max(frame.max_backlog, state.backlog());
    }

    frame.lyapunov_end = state.lyapunov();
    frame.backlog_end = state.backlog();
    if (record_frame) st.frames.push_back(frame);
  }
  st.final_state = state;
  return st;
}

struct DriftOptions {
  std::int64_t backlog_threshold = -1;  // -1: |E| * frame length
  std::size_t min_samples = 30;
};

struct DriftSummary {
  std::size_t count = 0;
  double mean = 0.0;
  double ci_low = 0.0;  // 95% normal interval on the mean
  double ci_high = 0.0;
};

struct DriftReport {
  DriftSummary all_frames;
  DriftSummary large_backlog;  // frames starting with backlog >= threshold
  std::int64_t backlog_threshold = 0;
  double fraction_positive = 0.0;
  std::int64_t max_backlog = 0;
  std::int64_t max_backlog_first_half = 0;
  std::int64_t max_backlog_second_half = 0;
  double growth_slope = 0.0;  // d(backlog)/dt over the second half, per slot
  double growth_slope_se = 0.0;
  bool growth_detected = false;
  bool negative_drift = false;  // large-backlog drift CI lies below zero
  std::string verdict;          // "stable" or "unstable"
};

namespace detail {

inline DriftSummary summarize(const std::vector<double>& xs) {
  DriftSummary s;
  s.count = xs.size();
  if (xs.empty()) return s;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var = xs.size() > 1 ? var / static_cast<double>(xs.size() - 1) : 0.0;
  const double half = 1.96 * std::sqrt(var / static_cast<double>(xs.size()));
  s.mean = mean;
  s.ci_low = mean - half;
  s.ci_high = mean + half;
  return s;
}

}  // namespace detail

/// Frame-level Lyapunov drift diagnostics.
///
/// The run is flagged unstable when the backlog at frame starts keeps growing
/// over the second half: the regression slope is positive at 95% and the
/// implied rise over that half exceeds a quarter of its mean level.
inline DriftReport drift_report(const SimStats& stats, std::size_t num_edges, const DriftOptions& opt = {}) {
  const auto& fr = stats.frames;
  if (fr.size() < opt.min_samples)
    throw Error("drift_report: insufficient samples (" + std::to_string(fr.size()) + " frames, need " +
                std::to_string(opt.min_samples) + ")");
  DriftReport rep;
  rep.backlog_threshold = opt.backlog_threshold >= 0
                              ? opt.backlog_threshold
                              : static_cast<std::int64_t>(num_edges) * stats.frame_length;

  std::vector<double> all, large;
  std::size_t positive = 0;
  for (const auto& f : fr) {
    all.push_back(f.drift());
    if (f.backlog_start >= rep.backlog_threshold && f.backlog_start > 0) large.push_back(f.drift());
    positive += f.drift() > 0.0;
    rep.max_backlog = std::max(rep.max_backlog, f.max_backlog);
  }
  rep.all_frames = detail::summarize(all);
  rep.large_backlog = detail::summarize(large);
  rep.fraction_positive = static_cast<double>(positive) / static_cast<double>(fr.size());
  rep.negative_drift = rep.large_backlog.count >= 2 && rep.large_backlog.ci_high < 0.0;

  const std::size_t half = fr.size() / 2;
  for (std::size_t k = 0; k < fr.size(); ++k) {
    auto& target = k < half ? rep.max_backlog_first_half : rep.max_backlog_second_half;
    target = std::max(target, fr[k].max_backlog);
  }

  // Least squares of backlog_start on frame start time over the second half.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const std::size_t cnt = fr.size() - half;
  for (std::size_t k = half; k < fr.size(); ++k) {
    const double x = static_cast<double>(fr[k].start), y = static_cast<double>(fr[k].backlog_start);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  const double dn = static_cast<double>(cnt);
  const double vx = sxx - sx * sx / dn;
  if (cnt >= 3 && vx > 0.0) {
    rep.growth_slope = (sxy - sx * sy / dn) / vx;
    const double intercept = (sy - rep.growth_slope * sx) / dn;
    double rss = 0.0;
    for (std::size_t k = half; k < fr.size(); ++k) {
      const double r = static_cast<double>(fr[k].backlog_start) -
                       (intercept + rep.growth_slope * static_cast<double>(fr[k].start));
      rss += r * r;
    }
    rep.growth_slope_se = std::sqrt(rss / (dn - 2.0) / vx);
    const double span = static_cast<double>(fr.back().start - fr[half].start);
    const double level = sy / dn;
    rep.growth_detected =
        rep.growth_slope - 1.96 * rep.growth_slope_se > 0.0 && rep.growth_slope * span > 0.25 * level + 1.0;
  }
  rep.verdict = rep.growth_detected ? "unstable" : "stable";
  return rep;
}

/// Whether nu lies in the conservative guaranteed region
/// nu in factor / (1 + eps) * P, where P is the degree-capped matching
/// polytope and factor is Gamma (alg1) or (2/3) Gamma' (alg2).
inline bool in_guaranteed_region(const SwitchInstance& g, const std::vector<double>& nu, Variant variant,
                                 double eps = 0.0) {
  if (nu.size() != g.num_edges()) throw Error("rate vector has wrong dimension");
  double factor = coherence_factor(g, variant).gamma;
  if (variant == Variant::alg2) factor *= 2.0 / 3.0;
  bool all_zero = true;
  for (double v : nu) {
    if (v < 0.0) return false;
    all_zero = all_zero && v == 0.0;
  }
  if (all_zero) return true;
  if (!(factor > 0.0)) return false;
  FractionalEdgeVector q = FractionalEdgeVector::zeros(g.num_edges());
  for (EdgeId e = 0; e < g.num_edges(); ++e) q[e] = nu[e] * (1.0 + eps) / factor;
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    double deg = 0.0;
    for (EdgeId e : g.incident(v)) deg += q[e];
    if (deg > g.node(v).lambda + 1e-12) return false;
  }
  return !separate_blossom(g, q).has_value();
}

}  // namespace qswitch

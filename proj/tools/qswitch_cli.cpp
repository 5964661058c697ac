// qswitch: command-line front end for the scheduling library.
//
//   qswitch match       --instance I [--weights W]
//   qswitch lp-solve    --instance I [--weights W] --alg {1,2}
//   qswitch decompose   --input F            (F = {"instance": ..., "x": ...})
//   qswitch gamma       --instance I [--variant alg1|alg2]
//   qswitch chain-sweep [--config C | grid flags] [--meta-out M]
//   qswitch simulate    --instance I --frame T --horizon H --seed S --alg {1,2}
//   qswitch figures     --out-dir D
//
// Every subcommand writes to --out (stdout when omitted) and exits nonzero on
// any error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qswitch/decomposition.hpp"
#include "qswitch/experiments.hpp"
#include "qswitch/json_io.hpp"
#include "qswitch/lp_scheduler.hpp"
#include "qswitch/matching.hpp"
#include "qswitch/refchain.hpp"
#include "qswitch/switch_sim.hpp"

namespace {

using namespace qswitch;

void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::vector<double> load_weights(const SwitchInstance& g, const std::string& path) {
  if (path.empty()) return std::vector<double>(g.num_edges(), 1.0);
  json j = read_json_file(path);
  if (j.is_object() && j.contains("weights")) j = j["weights"];
  return edge_values_from_json(g, j, "weight");
}

Variant parse_variant(const std::string& s) {
  if (s == "alg1" || s == "1") return Variant::alg1;
  if (s == "alg2" || s == "2") return Variant::alg2;
  throw Error("unknown variant '" + s + "'");
}

SweepSpec sweep_from_json(const json& j) {
  SweepSpec s = SweepSpec::paper_grid();
  if (j.contains("lambda_grid")) s.lambda_grid = j["lambda_grid"].get<std::vector<double>>();
  if (j.contains("b_grid")) s.b_grid = j["b_grid"].get<std::vector<int>>();
  if (j.contains("variants")) {
    s.variants.clear();
    for (const auto& v : j["variants"]) s.variants.push_back(parse_variant(v.get<std::string>()));
  }
  if (j.contains("mu_rules")) {
    s.mu_rules.clear();
    for (const auto& r : j["mu_rules"]) {
      if (r.contains("fraction"))
        s.mu_rules.push_back(MuRule::times_lambda(r["fraction"].get<double>()));
      else if (r.contains("values"))
        s.mu_rules.push_back(MuRule::list(r["values"].get<std::vector<double>>()));
      else
        throw Error("mu rule needs 'fraction' or 'values'");
    }
  }
  return s;
}

json sweep_to_json(const SweepSpec& s) {
  json rules = json::array();
  for (const auto& r : s.mu_rules) {
    if (r.kind == MuRuleKind::fraction)
      rules.push_back({{"fraction", r.fraction}});
    else
      rules.push_back({{"values", r.values}});
  }
  json vars = json::array();
  for (Variant v : s.variants) vars.push_back(to_string(v));
  return {{"lambda_grid", s.lambda_grid}, {"mu_rules", rules}, {"b_grid", s.b_grid}, {"variants", vars}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LP-based quantum switch scheduling toolkit"};
  app.require_subcommand(1);

  std::string out_path;
  auto add_out = [&](CLI::App* sub) { sub->add_option("--out", out_path, "Output file (default stdout)"); };

  // match
  std::string instance_path, weights_path;
  auto* match = app.add_subcommand("match", "Maximum-weight matching under the given edge weights");
  match->add_option("--instance", instance_path, "Instance JSON")->required();
  match->add_option("--weights", weights_path, "Edge weights JSON (default all ones)");
  add_out(match);

  // lp-solve
  int alg = 1;
  auto* lp = app.add_subcommand("lp-solve", "Solve the scheduling LP (alg 1: odd-set cuts, alg 2: degree-only x 2/3)");
  lp->add_option("--instance", instance_path, "Instance JSON")->required();
  lp->add_option("--weights", weights_path, "Edge weights JSON (default all ones)");
  lp->add_option("--alg", alg, "Algorithm")->check(CLI::IsMember({1, 2}));
  add_out(lp);

  // decompose
  std::string input_path;
  auto* dec = app.add_subcommand("decompose", "Decompose a matching-polytope point into a matching mixture");
  dec->add_option("--input", input_path, "JSON with 'instance' and 'x'")->required();
  add_out(dec);

  // gamma
  std::string variant_name = "alg1";
  auto* gam = app.add_subcommand("gamma", "Node availabilities and coherence factor of an instance");
  gam->add_option("--instance", instance_path, "Instance JSON")->required();
  gam->add_option("--variant", variant_name, "alg1 or alg2");
  add_out(gam);

  // chain-sweep
  std::string config_path, meta_path;
  std::vector<double> lambdas, mu_fractions, mu_values;
  std::vector<int> buffers;
  std::vector<std::string> variant_names;
  auto* sweep = app.add_subcommand("chain-sweep", "Reference-chain availability sweep as CSV");
  sweep->add_option("--config", config_path, "Sweep config JSON (defaults to the standard grid)");
  sweep->add_option("--lambdas", lambdas, "Lambda grid");
  sweep->add_option("--mu-fractions", mu_fractions, "mu = f * lambda rules");
  sweep->add_option("--mu-values", mu_values, "Explicit mu values");
  sweep->add_option("--buffers", buffers, "Buffer grid");
  sweep->add_option("--variants", variant_names, "alg1 and/or alg2");
  sweep->add_option("--meta-out", meta_path, "Resolved-config sidecar JSON");
  add_out(sweep);

  // simulate
  int frame = 100, t_min = 1;
  std::int64_t horizon = 100000, warmup = 0, initial_backlog = 0;
  std::uint64_t seed = 1;
  double adaptive_c = 0.0;
  std::string mixture_path, trace_path, stats_path;
  auto* sim = app.add_subcommand("simulate", "Run the frame-based randomised policy");
  sim->add_option("--instance", instance_path, "Instance JSON")->required();
  sim->add_option("--frame", frame, "Frame length T")->check(CLI::PositiveNumber);
  sim->add_option("--horizon", horizon, "Slots to simulate");
  sim->add_option("--seed", seed, "Root random seed");
  sim->add_option("--alg", alg, "1 or 2")->check(CLI::IsMember({1, 2}));
  sim->add_option("--warmup", warmup, "Slots excluded from statistics");
  sim->add_option("--mixture", mixture_path, "Fixed matching mixture JSON (overrides --alg)");
  sim->add_option("--initial-backlog", initial_backlog, "Initial request queue length on every edge");
  sim->add_option("--adaptive-c", adaptive_c, "Enable adaptive frames T_k = max(t_min, ceil(c log(1+sum R)))");
  sim->add_option("--t-min", t_min, "Minimum adaptive frame length");
  sim->add_option("--trace-out", trace_path, "Per-slot trace CSV");
  sim->add_option("--stats-out", stats_path, "Statistics JSON (default stdout)");

  // figures
  std::string out_dir = "figures";
  auto* fig = app.add_subcommand("figures", "Run the standard grid and write figure-ready CSVs");
  fig->add_option("--out-dir", out_dir, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*match) {
      const SwitchInstance g = instance_from_json(read_json_file(instance_path));
      const auto w = load_weights(g, weights_path);
      const auto r = max_weight_matching(g, w);
      emit(out_path, dump({{"matching", matching_to_json(g, r.matching)}, {"weight", r.weight}}));
    } else if (*lp) {
      const SwitchInstance g = instance_from_json(read_json_file(instance_path));
      const auto w = load_weights(g, weights_path);
      const LpSolution sol = alg == 1 ? solve_algorithm1(g, w) : solve_algorithm2(g, w);
      json j = lp_solution_to_json(g, sol);
      j["alg"] = alg;
      emit(out_path, dump(j));
    } else if (*dec) {
      const json in = read_json_file(input_path);
      if (!in.is_object() || !in.contains("instance") || !in.contains("x"))
        throw Error("decompose input needs 'instance' and 'x'");
      const SwitchInstance g = instance_from_json(in["instance"]);
      const FractionalEdgeVector x(edge_values_from_json(g, in["x"], "value"));
      const auto r = decompose(g, x);
      json j = mixture_to_json(g, r.mixture);
      j["columns"] = r.columns;
      j["max_error"] = r.max_error;
      emit(out_path, dump(j));
    } else if (*gam) {
      const SwitchInstance g = instance_from_json(read_json_file(instance_path));
      const auto rep = coherence_factor(g, parse_variant(variant_name));
      if (rep.clipped) std::cerr << "warning: coherence factor clipped at zero\n";
      emit(out_path, dump(coherence_to_json(g, rep)));
    } else if (*sweep) {
      SweepSpec spec = config_path.empty() ? SweepSpec::paper_grid() : sweep_from_json(read_json_file(config_path));
      if (!lambdas.empty()) spec.lambda_grid = lambdas;
      if (!buffers.empty()) spec.b_grid = buffers;
      if (!mu_fractions.empty() || !mu_values.empty()) {
        spec.mu_rules.clear();
        for (double f : mu_fractions) spec.mu_rules.push_back(MuRule::times_lambda(f));
        if (!mu_values.empty()) spec.mu_rules.push_back(MuRule::list(mu_values));
      }
      if (!variant_names.empty()) {
        spec.variants.clear();
        for (const auto& v : variant_names) spec.variants.push_back(parse_variant(v));
      }
      const auto rows = run_sweep(spec);
      std::ostringstream csv;
      write_sweep_csv(csv, rows);
      emit(out_path, csv.str());
      if (!meta_path.empty()) emit(meta_path, dump({{"resolved_config", sweep_to_json(spec)}, {"rows", rows.size()}}));
    } else if (*sim) {
      SimConfig cfg;
      cfg.instance = instance_from_json(read_json_file(instance_path));
      cfg.frame_length = frame;
      cfg.horizon = horizon;
      cfg.seed = seed;
      cfg.warmup = warmup;
      cfg.policy = alg == 1 ? PolicyKind::alg1 : PolicyKind::alg2;
      if (!mixture_path.empty()) {
        cfg.policy = PolicyKind::fixed_mixture;
        cfg.fixed_mixture = mixture_from_json(cfg.instance, read_json_file(mixture_path));
      }
      if (initial_backlog < 0) throw Error("initial backlog must be nonnegative");
      if (initial_backlog > 0) {
        SimState s = SimState::empty(cfg.instance);
        s.R.assign(cfg.instance.num_edges(), initial_backlog);
        cfg.initial = s;
      }
      if (adaptive_c > 0.0) cfg.adaptive = AdaptiveFrame{true, t_min, adaptive_c};

      std::ofstream trace;
      if (!trace_path.empty()) {
        trace.open(trace_path, std::ios::binary);
        if (!trace) throw Error("cannot write " + trace_path);
      }
      const SimStats stats = run(cfg, trace_path.empty() ? nullptr : &trace);

      json resolved = {{"frame", frame},         {"horizon", horizon},
                       {"seed", seed},           {"policy", to_string(cfg.policy)},
                       {"warmup", warmup},       {"initial_backlog", initial_backlog},
                       {"adaptive_c", adaptive_c}, {"t_min", t_min},
                       {"instance", to_json(cfg.instance)}};
      json j = {{"config", resolved}, {"stats", stats_to_json(cfg.instance, stats)}};
      if (stats.frames.size() >= 30)
        j["drift"] = drift_to_json(drift_report(stats, cfg.instance.num_edges()));
      else
        j["drift"] = nullptr;
      emit(stats_path, dump(j));
    } else if (*fig) {
      std::filesystem::create_directories(out_dir);
      const SweepSpec spec = SweepSpec::paper_grid();
      const auto rows = run_sweep(spec);
      for (Variant v : spec.variants) {
        std::vector<SweepRow> sub;
        for (const auto& r : rows)
          if (r.variant == v) sub.push_back(r);
        std::ostringstream csv;
        write_sweep_csv(csv, sub);
        emit(out_dir + "/fig_" + to_string(v) + ".csv", csv.str());
      }
      std::vector<std::pair<SweepRow, ConvergenceProfile>> profiles;
      for (Variant v : spec.variants)
        for (const auto& rule : spec.mu_rules)
          for (double lam : spec.lambda_grid) {
            SweepRow key;
            key.lambda = lam;
            key.mu = rule.fraction * lam;
            key.variant = v;
            key.mu_rule = rule.label();
            profiles.emplace_back(key, convergence_profile(lam, key.mu, service_attempt_probability(lam, v), spec.b_grid));
          }
      std::ostringstream gap;
      write_convergence_csv(gap, profiles);
      emit(out_dir + "/convergence.csv", gap.str());
      const auto cmp = compare_variants(rows);
      std::ostringstream cmp_csv;
      write_comparison_csv(cmp_csv, cmp);
      emit(out_dir + "/comparison.csv", cmp_csv.str());
      emit(out_dir + "/resolved_config.json",
           dump({{"resolved_config", sweep_to_json(spec)},
                 {"reference_buffer", 200},
                 {"alg1_dominance_fraction", cmp.dominance_fraction},
                 {"ties", cmp.ties},
                 {"points", cmp.points.size()}}));
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: invalid instance\n";
    for (const auto& i : e.issues()) std::cerr << "  - " << i << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

// Command-line front end: evaluate / solve / classify / elicit / experiment /
// validate.  Configs are flat key=value files with one [section] nesting
// level; outputs are RFC-4180 CSV plus a JSON manifest echoing the resolved
// configuration.  Exit codes: 0 success, 1 validation/usage failure, 2 the
// requested quantity is non-finite (the dual integrability condition fails).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <phirisk/phirisk.hpp>

namespace {

using nlohmann::json;
using namespace phirisk;

struct cli_state {
  std::string config_path;
  long seed = -1;  // -1: not given
  std::string out_path;
  int threads = 1;
  run_config cfg;

  std::uint64_t resolve_seed(bool required) const {
    if (seed >= 0) return static_cast<std::uint64_t>(seed);
    if (cfg.has("seed")) return static_cast<std::uint64_t>(cfg.get_int("seed", 1));
    if (required)
      throw param_error("a seed is required (--seed N or 'seed = N' in the config)");
    return 1;
  }
};

void write_manifest(const cli_state& st, const std::string& command,
                    const json& resolved) {
  json m;
  m["version"] = PHIRISK_VERSION;
  m["command"] = command;
  m["config_path"] = st.config_path;
  m["out"] = st.out_path;
  m["threads"] = st.threads;
  json cfg_echo = json::object();
  for (const auto& [k, v] : st.cfg.kv) cfg_echo[k] = v;
  m["config"] = cfg_echo;
  m["resolved"] = resolved;
  const std::string path =
      st.out_path.empty() ? "run_manifest.json" : st.out_path + ".manifest.json";
  std::ofstream f(path, std::ios::binary);
  f << m.dump(2) << "\n";
}

void emit(const cli_state& st, const csv_writer& csv) {
  if (!st.out_path.empty())
    csv.save(st.out_path);
  else
    std::cout << csv.text();
}

// --- evaluate ----------------------------------------------------------------

int cmd_evaluate(cli_state& st) {
  const std::string risk_s = st.cfg.get_str("risk.spec", "cvar(0.975)");
  const std::string model_s = st.cfg.get_str("model.spec", "pareto_neg(alpha=2,xm=1)");
  const std::string mode = st.cfg.get_str("evaluate.mode", "exact");
  const risk_spec rs = risk_from_spec(risk_s);
  const nominal_model model = model_from_spec(model_s);
  double value = kNaN;
  json resolved{{"risk", risk_s}, {"model", model.id}, {"mode", mode}};
  if (mode == "exact") {
    value = exact_oce(rs, model);
  } else if (mode == "sample") {
    const std::uint64_t seed = st.resolve_seed(true);
    const std::size_t n = static_cast<std::size_t>(st.cfg.get_int("evaluate.n", 1000));
    value = nominal_oce(rs, sample(model, n, seed));
    resolved["n"] = n;
    resolved["seed"] = seed;
  } else {
    throw param_error("evaluate.mode must be 'exact' or 'sample'");
  }
  csv_writer csv({"risk", "model", "mode", "value"});
  csv.add_row({risk_s, model.id, mode, csv_num(value)});
  emit(st, csv);
  resolved["value"] = value;
  write_manifest(st, "evaluate", resolved);
  std::cout << "value = " << csv_num(value) << "\n";
  return 0;
}

// --- solve ---------------------------------------------------------------

robust_problem problem_from_config(const run_config& cfg) {
  robust_problem p;
  p.form = form_from_string(cfg.get_str("problem.form", "ball"));
  p.phi1 = divergence_from_spec(cfg.get_str("problem.phi1", "cvar_indicator(alpha=0.975)"));
  p.phi2 = divergence_from_spec(cfg.get_str("problem.phi2", "polynomial(p=3)"));
  if (cfg.has("problem.phi3"))
    p.phi3 = divergence_from_spec(cfg.require_str("problem.phi3"));
  if (form_has_radius(p.form)) p.radius = cfg.get_num("problem.radius", 0.0);
  return p;
}

solver_options options_from_config(const run_config& cfg) {
  solver_options o;
  o.tol = cfg.get_num("solver.tol", o.tol);
  o.max_iter = cfg.get_int("solver.max_iter", o.max_iter);
  o.lambda_floor = cfg.get_num("solver.lambda_floor", o.lambda_floor);
  o.box_pad = cfg.get_num("solver.box_pad", o.box_pad);
  return o;
}

int cmd_solve(cli_state& st) {
  const robust_problem prob = problem_from_config(st.cfg);
  const std::string model_s = st.cfg.get_str("model.spec", "pareto_neg(alpha=2,xm=1)");
  const nominal_model model = model_from_spec(model_s);
  const std::uint64_t seed = st.resolve_seed(true);
  const std::size_t n = static_cast<std::size_t>(st.cfg.get_int("model.n", 1000));
  const sample_set draw = sample(model, n, seed);
  const dual_solution sol = solve(prob, draw, options_from_config(st.cfg));

  csv_writer csv({"form", "phi1", "phi2", "radius", "n", "seed", "value", "lambda",
                  "certified_gap", "branch", "iterations", "converged",
                  "box_fallback"});
  csv.add_row({form_to_string(prob.form), prob.phi1.id, prob.phi2.id,
               csv_num(prob.radius), std::to_string(n), std::to_string(seed),
               csv_num(sol.value), csv_num(sol.lambda), csv_num(sol.certified_gap),
               sol.branch, std::to_string(sol.iterations),
               sol.converged ? "true" : "false",
               sol.box.fallback ? "true" : "false"});
  emit(st, csv);
  json resolved{{"form", form_to_string(prob.form)},
                {"phi1", prob.phi1.id},
                {"phi2", prob.phi2.id},
                {"radius", prob.radius},
                {"model", model.id},
                {"n", n},
                {"seed", seed},
                {"value", sol.value},
                {"branch", sol.branch}};
  write_manifest(st, "solve", resolved);
  std::cout << "value = " << csv_num(sol.value) << " (branch " << sol.branch
            << ", gap " << csv_num(sol.certified_gap) << ")\n";
  if (sol.box.fallback)
    std::cerr << "warning: compactness bounds fell back to the default box\n";
  return 0;
}

// --- classify ------------------------------------------------------------

csv_writer classify_csv(const std::string& risk) {
  csv_writer csv({"risk", "divergence", "gaussian", "weibull", "lognormal",
                  "pareto", "student_t"});
  const auto cells = classify_table(risk);
  for (std::size_t i = 0; i < cells.size(); i += 5) {
    std::vector<std::string> row{risk, cells[i].divergence_label};
    for (std::size_t j = 0; j < 5; ++j) row.push_back(to_string(cells[i + j].v.status));
    csv.add_row(row);
  }
  return csv;
}

std::string with_suffix(const std::string& path, const std::string& tag) {
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos || path.find('/', dot) != std::string::npos)
    return path + tag;
  return path.substr(0, dot) + tag + path.substr(dot);
}

int cmd_classify(cli_state& st) {
  const std::string which = st.cfg.get_str("classify.risk", "both");
  if (which != "both") {
    const csv_writer csv = classify_csv(which);
    emit(st, csv);
    write_manifest(st, "classify", json{{"risk", which}});
    return 0;
  }
  const csv_writer cvar_csv = classify_csv("cvar");
  const csv_writer ent_csv = classify_csv("entropic");
  if (st.out_path.empty()) {
    std::cout << cvar_csv.text() << ent_csv.text();
  } else {
    // combined file plus one file per summary table
    csv_writer both({"risk", "divergence", "gaussian", "weibull", "lognormal",
                     "pareto", "student_t"});
    for (const std::string risk : {"cvar", "entropic"}) {
      const auto cells = classify_table(risk);
      for (std::size_t i = 0; i < cells.size(); i += 5) {
        std::vector<std::string> row{risk, cells[i].divergence_label};
        for (std::size_t j = 0; j < 5; ++j)
          row.push_back(to_string(cells[i + j].v.status));
        both.add_row(row);
      }
    }
    both.save(st.out_path);
    cvar_csv.save(with_suffix(st.out_path, "_cvar"));
    ent_csv.save(with_suffix(st.out_path, "_entropic"));
  }
  write_manifest(st, "classify", json{{"risk", "both"}});
  return 0;
}

// --- elicit ----------------------------------------------------------------

int cmd_elicit(cli_state& st) {
  const std::string mode = st.cfg.get_str("elicit.mode", "composite");
  const std::vector<double> xs = st.cfg.get_list("elicit.x", {-2.0, -1.0, 1.0});
  csv_writer csv({"x", "recovered", "target_kind", "p_last", "estimate_at_p_last"});
  json rows = json::array();
  for (double x : xs) {
    elicitation_result res;
    if (mode == "composite") {
      robust_problem prob;
      prob.form = form_from_string(st.cfg.get_str("elicit.form", "penalty"));
      prob.phi1 = divergence_from_spec(st.cfg.get_str("elicit.phi1", "kl"));
      prob.phi2 = divergence_from_spec(st.cfg.get_str("elicit.phi2", "kl"));
      res = elicit_composite(prob, x);
    } else if (mode == "utility") {
      const risk_spec rs = risk_from_spec(st.cfg.get_str("risk.spec", "entropic(1.0)"));
      res = ce_recover(rs, x);
    } else {
      throw param_error("elicit.mode must be 'composite' or 'utility'");
    }
    csv.add_row({csv_num(x), csv_num(res.extrapolated), res.target_kind,
                 csv_num(res.estimates.back().first),
                 csv_num(res.estimates.back().second)});
    rows.push_back({{"x", x}, {"recovered", res.extrapolated}});
  }
  emit(st, csv);
  write_manifest(st, "elicit", json{{"mode", mode}, {"rows", rows}});
  return 0;
}

// --- experiments -------------------------------------------------------------

int cmd_experiment(cli_state& st, const std::string& which) {
  const std::uint64_t seed = st.resolve_seed(true);
  json resolved{{"experiment", which}, {"seed", seed}};
  if (which == "toy") {
    const std::vector<double> radii =
        st.cfg.get_list("toy.radii", default_toy_radii());
    const std::size_t n = static_cast<std::size_t>(st.cfg.get_int("toy.n", 1000));
    const divergence phi2 =
        divergence_from_spec(st.cfg.get_str("toy.phi2", "polynomial(p=3)"));
    const double alpha = st.cfg.get_num("toy.alpha", 0.975);
    const auto rows = toy_pareto_cvar(radii, n, seed, phi2, alpha);
    csv_writer csv({"r", "robust_value"});
    for (const auto& row : rows) csv.add_row({csv_num(row.r), csv_num(row.robust_value)});
    emit(st, csv);
    resolved["n"] = n;
  } else if (which == "compare") {
    std::vector<std::size_t> sizes;
    for (double v : st.cfg.get_list("compare.sizes", {}))
      sizes.push_back(static_cast<std::size_t>(v));
    if (sizes.empty()) sizes = default_compare_sizes();
    const double r = st.cfg.get_num("compare.r", 0.02);
    const bool is = st.cfg.get_str("compare.importance", "false") == "true";
    const auto rows = divergence_comparison(sizes, r, seed, is);
    csv_writer csv({"n", "polynomial", "kl"});
    for (const auto& row : rows)
      csv.add_row({std::to_string(row.n), csv_num(row.polynomial_value),
                   csv_num(row.kl_value)});
    emit(st, csv);
    resolved["r"] = r;
    resolved["importance"] = is;
  } else if (which == "hedging") {
    hedging_config cfg;
    cfg.seed = seed;
    cfg.mu_s = st.cfg.get_num("hedging.mu_s", cfg.mu_s);
    cfg.sigma_s = st.cfg.get_num("hedging.sigma_s", cfg.sigma_s);
    cfg.r_f = st.cfg.get_num("hedging.r_f", cfg.r_f);
    cfg.t_mat = st.cfg.get_num("hedging.T", cfg.t_mat);
    cfg.s0 = st.cfg.get_num("hedging.S0", cfg.s0);
    cfg.strike = st.cfg.get_num("hedging.K", cfg.strike);
    cfg.k0 = st.cfg.get_num("hedging.k0", cfg.k0);
    cfg.k_prop = st.cfg.get_num("hedging.k", cfg.k_prop);
    cfg.paths = static_cast<std::size_t>(
        st.cfg.get_int("hedging.paths", static_cast<long>(cfg.paths)));
    cfg.alpha = st.cfg.get_num("hedging.alpha", cfg.alpha);
    cfg.radius = st.cfg.get_num("hedging.radius", cfg.radius);
    if (st.cfg.has("hedging.n_grid")) {
      cfg.n_grid.clear();
      for (double v : st.cfg.get_list("hedging.n_grid", {}))
        cfg.n_grid.push_back(static_cast<long>(v));
    }
    const auto rows = hedging_study(cfg);
    csv_writer csv({"n", "nominal_cvar", "robust_cvar"});
    for (const auto& row : rows)
      csv.add_row({std::to_string(row.n), csv_num(row.nominal_cvar),
                   csv_num(row.robust_cvar)});
    emit(st, csv);
    resolved["paths"] = cfg.paths;
  } else if (which == "newsvendor") {
    newsvendor_config cfg;
    cfg.seed = seed;
    cfg.v = st.cfg.get_num("newsvendor.v", cfg.v);
    cfg.c = st.cfg.get_num("newsvendor.c", cfg.c);
    cfg.s = st.cfg.get_num("newsvendor.s", cfg.s);
    cfg.l = st.cfg.get_num("newsvendor.l", cfg.l);
    cfg.alpha = st.cfg.get_num("newsvendor.alpha", cfg.alpha);
    cfg.n_samples = static_cast<std::size_t>(
        st.cfg.get_int("newsvendor.n", static_cast<long>(cfg.n_samples)));
    if (st.cfg.has("newsvendor.demand"))
      cfg.demand = model_from_spec(st.cfg.require_str("newsvendor.demand"));
    cfg.radius_grid = st.cfg.get_list("newsvendor.radii", cfg.radius_grid);
    const auto rows = newsvendor_robust_curve(cfg);
    csv_writer csv({"r", "y_robust", "value"});
    for (const auto& row : rows)
      csv.add_row({csv_num(row.r), csv_num(row.y_robust), csv_num(row.value)});
    emit(st, csv);
    resolved["closed_form_y"] = newsvendor_closed_form(cfg);
  } else {
    throw param_error("unknown experiment '" + which +
                      "' (toy | compare | hedging | newsvendor)");
  }
  write_manifest(st, "experiment " + which, resolved);
  return 0;
}

// --- validate ------------------------------------------------------------

int cmd_validate(cli_state& st) {
  std::vector<std::string> diags;
  const auto check_spec = [&](const std::string& key, auto&& resolver,
                              const char* what) {
    if (!st.cfg.has(key)) return;
    try {
      resolver(st.cfg.require_str(key));
    } catch (const std::exception& e) {
      diags.push_back(std::string("error: ") + what + " '" +
                      st.cfg.require_str(key) + "' (" + key + "): " + e.what());
    }
  };
  check_spec("problem.phi1", [](const std::string& s) { divergence_from_spec(s); },
             "unresolvable divergence");
  check_spec("problem.phi2", [](const std::string& s) { divergence_from_spec(s); },
             "unresolvable divergence");
  check_spec("problem.phi3", [](const std::string& s) { divergence_from_spec(s); },
             "unresolvable divergence");
  check_spec("model.spec", [](const std::string& s) { model_from_spec(s); },
             "unresolvable model");
  check_spec("risk.spec", [](const std::string& s) { risk_from_spec(s); },
             "unresolvable risk");
  check_spec("elicit.phi1", [](const std::string& s) { divergence_from_spec(s); },
             "unresolvable divergence");
  check_spec("elicit.phi2", [](const std::string& s) { divergence_from_spec(s); },
             "unresolvable divergence");
  if (st.cfg.has("problem.form")) {
    try {
      form_from_string(st.cfg.require_str("problem.form"));
    } catch (const std::exception& e) {
      diags.push_back(std::string("error: ") + e.what());
    }
  }

  // finiteness cross-check: warn when the rule table predicts an infinite value
  if (st.cfg.has("problem.phi1") && st.cfg.has("problem.phi2") &&
      st.cfg.has("model.spec")) {
    try {
      const call_spec c1 = parse_call(st.cfg.require_str("problem.phi1"));
      const call_spec c2 = parse_call(st.cfg.require_str("problem.phi2"));
      const call_spec cm = parse_call(st.cfg.require_str("model.spec"));
      std::string risk;
      if (c1.name == "cvar_indicator") risk = "cvar";
      if (c1.name == "kl" || c1.name == "scaled_kl") risk = "entropic";
      std::map<std::string, double> params;
      for (const auto& [k, v] : c2.args) params[k] = v;
      for (const auto& [k, v] : cm.args)
        params.emplace(k == "alpha" ? "alpha0" : k, v);
      if (c1.has("alpha", 0)) params["alpha"] = c1.get("alpha", 0);
      if (!risk.empty()) {
        const finiteness_verdict v = classify(risk, c2.name, cm.name, params);
        if (v.status == finiteness_status::infinite)
          diags.push_back("warning: the rule table predicts an infinite robust "
                          "value for this triple — " + v.rationale);
      }
    } catch (const std::exception&) {
      // unresolvable pieces already reported above
    }
  }

  for (const auto& d : diags) std::cout << d << "\n";
  if (diags.empty()) std::cout << "ok: all identifiers resolve\n";
  write_manifest(st, "validate", json{{"diagnostics", diags}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"robust risk measures via phi-divergence duals"};
  app.require_subcommand(1);
  cli_state st;
  app.add_option("--config", st.config_path, "key=value config file");
  app.add_option("--seed", st.seed, "RNG seed (overrides the config)");
  app.add_option("--out", st.out_path, "output CSV path");
  app.add_option("--threads", st.threads, "worker threads (accepted; solver is deterministic)");

  auto* c_eval = app.add_subcommand("evaluate", "nominal risk of a model");
  auto* c_solve = app.add_subcommand("solve", "robust dual solve on a sampled model");
  auto* c_classify = app.add_subcommand("classify", "finiteness rule tables");
  auto* c_elicit = app.add_subcommand("elicit", "two-point-lottery elicitation");
  auto* c_exp = app.add_subcommand("experiment", "numerical studies");
  std::string exp_name;
  c_exp->add_option("name", exp_name, "toy | compare | hedging | newsvendor")
      ->required();
  auto* c_validate = app.add_subcommand("validate", "dry-run config resolution");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!st.config_path.empty()) st.cfg = load_config(st.config_path);
    if (c_eval->parsed()) return cmd_evaluate(st);
    if (c_solve->parsed()) return cmd_solve(st);
    if (c_classify->parsed()) return cmd_classify(st);
    if (c_elicit->parsed()) return cmd_elicit(st);
    if (c_exp->parsed()) return cmd_experiment(st, exp_name);
    if (c_validate->parsed()) return cmd_validate(st);
  } catch (const phirisk::nonfinite_error& e) {
    std::cerr << "non-finite result: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

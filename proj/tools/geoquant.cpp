// geoquant -- geometric quantiles, halfspace depth, and their extremal
// diagnostics for empirical point clouds. Emits CSV for geometry and JSON for
// reports; every command is deterministic given its seed.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "geoquant/geoquant.hpp"

using nlohmann::json;
using namespace geoquant;

namespace {

constexpr int kSchemaVersion = 1;

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const char* begin = cell.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || (end && *end != '\0'))
      throw Error(ErrorKind::BadParams, "bad numeric list entry: " + cell);
    out.push_back(v);
  }
  if (out.empty()) throw Error(ErrorKind::BadParams, "empty numeric list");
  return out;
}

UnitVector parse_direction(const std::string& text) {
  const auto v = parse_list(text);
  Eigen::VectorXd u(static_cast<Eigen::Index>(v.size()));
  for (size_t i = 0; i < v.size(); ++i) u[static_cast<Eigen::Index>(i)] = v[i];
  return UnitVector(u);
}

json vec_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

json report_to_json(const SolveReport& rep) {
  return json{{"q", vec_to_json(rep.q)},
              {"residual", rep.residual},
              {"iters", rep.iters},
              {"status", to_string(rep.status)}};
}

int default_threads() {
  if (const char* env = std::getenv("GEOQUANT_THREADS")) {
    const int t = std::atoi(env);
    if (t >= 1) return t;
  }
  return 1;
}

struct CommonOpts {
  std::string input;
  bool header = false;
  std::uint64_t seed = 0;
  int threads = default_threads();
  double tol = tol::solver_residual;

  PointCloud load() const { return read_cloud(input, header); }
  SolverConfig solver_config() const {
    SolverConfig cfg;
    cfg.residual_tol = tol;
    return cfg;
  }
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool needs_input = true) {
  auto* in = cmd->add_option("--input", opts.input, "input cloud (.csv or .json)");
  if (needs_input) in->required();
  cmd->add_flag("--header", opts.header, "skip the first CSV line");
  cmd->add_option("--seed", opts.seed, "random seed");
  cmd->add_option("--threads", opts.threads, "worker threads (env GEOQUANT_THREADS)");
  cmd->add_option("--tol", opts.tol, "solver residual tolerance");
}

DistributionSpec spec_from_json(const json& j) {
  DistributionSpec spec;
  spec.family = family_from_string(j.at("family").get<std::string>());
  spec.d = j.value("d", 2);
  spec.n = j.at("n").get<Eigen::Index>();
  spec.seed = j.value("seed", 0ull);
  if (j.contains("rho"))
    spec.covariance = DistributionSpec::correlation(spec.d, j["rho"].get<double>());
  if (j.contains("covariance")) {
    const auto& rows = j["covariance"];
    spec.covariance.resize(static_cast<Eigen::Index>(rows.size()),
                           static_cast<Eigen::Index>(rows.size()));
    for (size_t r = 0; r < rows.size(); ++r)
      for (size_t c = 0; c < rows[r].size(); ++c)
        spec.covariance(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            rows[r][c].get<double>();
  }
  if (j.contains("nu")) {
    if (j["nu"].is_array()) {
      spec.nu_margins.resize(static_cast<Eigen::Index>(j["nu"].size()));
      for (size_t i = 0; i < j["nu"].size(); ++i)
        spec.nu_margins[static_cast<Eigen::Index>(i)] = j["nu"][i].get<double>();
    } else {
      spec.nu = j["nu"].get<double>();
    }
  }
  if (j.contains("mean")) {
    spec.mean.resize(static_cast<Eigen::Index>(j["mean"].size()));
    for (size_t i = 0; i < j["mean"].size(); ++i)
      spec.mean[static_cast<Eigen::Index>(i)] = j["mean"][i].get<double>();
  }
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"geometric quantiles, halfspace depth, and extremal diagnostics"};
  app.require_subcommand(1);

  // ---- sample
  auto* c_sample = app.add_subcommand("sample", "draw a synthetic point cloud");
  struct {
    std::string family = "gaussian", preset, spec_file, nu_list, mean_list, output;
    double rho = 0.0;
    Eigen::Index d = 2, n = 0;
    std::uint64_t seed = 0;
  } s;
  c_sample->add_option("--family", s.family, "gaussian|student-t|cauchy|gaussian-copula-t|exponential-centered");
  c_sample->add_option("--preset", s.preset, "fig1a|fig1b-text|fig1b-caption");
  c_sample->add_option("--spec", s.spec_file, "JSON spec file");
  c_sample->add_option("--rho", s.rho, "equicorrelation");
  c_sample->add_option("--nu", s.nu_list, "degrees of freedom (scalar or per-margin list)");
  c_sample->add_option("--mean", s.mean_list, "mean shift, comma separated");
  c_sample->add_option("--d", s.d, "dimension");
  c_sample->add_option("--n", s.n, "sample size");
  c_sample->add_option("--seed", s.seed, "random seed");
  c_sample->add_option("--output", s.output, "output cloud path")->required();

  // ---- quantile
  auto* c_quant = app.add_subcommand("quantile", "solve a geometric quantile");
  CommonOpts q_opts;
  struct {
    double alpha = 0.0;
    std::string direction, output = "json";
    int max_iters = 10000;
  } q;
  add_common(c_quant, q_opts);
  c_quant->add_option("--alpha", q.alpha, "quantile level in [0,1)")->required();
  c_quant->add_option("--direction", q.direction, "direction, comma separated")->required();
  c_quant->add_option("--max-iters", q.max_iters, "iteration cap");
  c_quant->add_option("--output", q.output, "json|csv (stdout)");

  // ---- depth
  auto* c_depth = app.add_subcommand("depth", "halfspace depth of a point");
  CommonOpts d_opts;
  struct {
    std::string point;
    bool exact = false;
    int ndirs = 20000;
  } dd;
  add_common(c_depth, d_opts);
  c_depth->add_option("--point", dd.point, "query point, comma separated")->required();
  c_depth->add_flag("--exact", dd.exact, "exact 2D sweep (default for d = 2)");
  c_depth->add_option("--ndirs", dd.ndirs, "projection directions for the estimate");

  // ---- contour
  auto* c_contour = app.add_subcommand("contour", "depth contour or the three-contour bundle");
  CommonOpts ct_opts;
  struct {
    std::string kind = "depth", output, output_prefix;
    double tau = 0.25, alpha = -1.0, gamma = 0.01;
    int rays = 360, ndirs = 180;
  } ct;
  add_common(c_contour, ct_opts);
  c_contour->add_option("--kind", ct.kind, "depth|bundle");
  c_contour->add_option("--tau", ct.tau, "depth level (kind=depth)");
  c_contour->add_option("--rays", ct.rays, "boundary rays (kind=depth)");
  c_contour->add_option("--output", ct.output, "boundary CSV path (kind=depth)");
  c_contour->add_option("--alpha", ct.alpha, "quantile level (kind=bundle; default mid-admissible)");
  c_contour->add_option("--gamma", ct.gamma, "cap-mass gamma (kind=bundle)");
  c_contour->add_option("--ndirs", ct.ndirs, "fan directions (kind=bundle)");
  c_contour->add_option("--output-prefix", ct.output_prefix, "bundle output prefix (kind=bundle)");

  // ---- mgamma
  auto* c_mg = app.add_subcommand("mgamma", "directional cap-mass constant estimate");
  CommonOpts mg_opts;
  struct {
    double gamma = 0.01;
    int ndirs = 720;
  } mg;
  add_common(c_mg, mg_opts);
  c_mg->add_option("--gamma", mg.gamma, "gamma in (0,1)")->required();
  c_mg->add_option("--ndirs", mg.ndirs, "directions in the minimization grid");

  // ---- projq
  auto* c_pq = app.add_subcommand("projq", "univariate quantile of a projection");
  CommonOpts pq_opts;
  struct {
    std::string direction;
    double beta = 0.5;
  } pq;
  add_common(c_pq, pq_opts);
  c_pq->add_option("--direction", pq.direction, "projection direction")->required();
  c_pq->add_option("--beta", pq.beta, "quantile level in [0,1)")->required();

  // ---- bounds-check
  auto* c_bc = app.add_subcommand("bounds-check", "upper/lower bound and inclusion report");
  CommonOpts bc_opts;
  struct {
    double alpha = 0.0, gamma = 0.01;
    std::string direction, output;
    bool symmetric = false;
    int n_probe = 200;
  } bc;
  add_common(c_bc, bc_opts);
  c_bc->add_option("--alpha", bc.alpha, "quantile level")->required();
  c_bc->add_option("--gamma", bc.gamma, "cap-mass gamma");
  c_bc->add_option("--direction", bc.direction, "direction for the quantile solve")->required();
  c_bc->add_flag("--symmetric", bc.symmetric, "use the halfspace-symmetric depth bound 1/2");
  c_bc->add_option("--probes", bc.n_probe, "inclusion probe count");
  c_bc->add_option("--output", bc.output, "report JSON path")->required();

  // ---- rate-fit
  auto* c_rf = app.add_subcommand("rate-fit", "log-log growth-rate fit of |q(alpha u)|");
  CommonOpts rf_opts;
  struct {
    std::string direction, alphas, output;
  } rf;
  add_common(c_rf, rf_opts);
  c_rf->add_option("--direction", rf.direction, "direction")->required();
  c_rf->add_option("--alphas", rf.alphas, "increasing alpha ladder")->required();
  c_rf->add_option("--output", rf.output, "fit JSON path")->required();

  // ---- expansion
  auto* c_ex = app.add_subcommand("expansion", "first/third-order expansion sweep");
  CommonOpts ex_opts;
  struct {
    std::string direction, alphas, output;
  } ex;
  add_common(c_ex, ex_opts);
  c_ex->add_option("--direction", ex.direction, "direction")->required();
  c_ex->add_option("--alphas", ex.alphas, "increasing alpha ladder")->required();
  c_ex->add_option("--output", ex.output, "sweep CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help() << std::endl;
    return 2;
  }

  try {
    if (*c_sample) {
      DistributionSpec spec;
      if (!s.spec_file.empty()) {
        std::ifstream in(s.spec_file);
        if (!in) throw Error(ErrorKind::FileNotFound, "cannot open: " + s.spec_file);
        json j;
        in >> j;
        spec = spec_from_json(j);
      } else if (!s.preset.empty()) {
        if (s.n == 0) throw Error(ErrorKind::BadParams, "--n is required with --preset");
        spec = preset_spec(s.preset, s.n, s.seed);
      } else {
        spec.family = family_from_string(s.family);
        spec.d = s.d;
        spec.n = s.n;
        spec.seed = s.seed;
        if (s.rho != 0.0) spec.covariance = DistributionSpec::correlation(s.d, s.rho);
        if (!s.nu_list.empty()) {
          const auto nus = parse_list(s.nu_list);
          if (spec.family == Family::GaussianCopulaTMargins) {
            spec.nu_margins.resize(static_cast<Eigen::Index>(nus.size()));
            for (size_t i = 0; i < nus.size(); ++i)
              spec.nu_margins[static_cast<Eigen::Index>(i)] = nus[i];
          } else {
            spec.nu = nus.at(0);
          }
        }
        if (!s.mean_list.empty()) {
          const auto m = parse_list(s.mean_list);
          spec.mean.resize(static_cast<Eigen::Index>(m.size()));
          for (size_t i = 0; i < m.size(); ++i) spec.mean[static_cast<Eigen::Index>(i)] = m[i];
        }
      }
      const auto cloud = sample(spec);
      if (std::filesystem::path(s.output).extension() == ".json")
        write_cloud_json(s.output, cloud);
      else
        write_cloud_csv(s.output, cloud);
      return 0;
    }

    if (*c_quant) {
      const auto cloud = q_opts.load();
      SolverConfig cfg = q_opts.solver_config();
      cfg.max_iters = q.max_iters;
      const auto rep = solve_quantile(cloud, IndexVector(q.alpha, parse_direction(q.direction)), cfg);
      if (q.output == "csv") {
        std::ostringstream out;
        for (Eigen::Index i = 0; i < rep.q.size(); ++i) out << format_double(rep.q[i]) << ',';
        out << format_double(rep.residual) << ',' << rep.iters << ',' << to_string(rep.status);
        std::cout << out.str() << std::endl;
      } else {
        json j = report_to_json(rep);
        j["schema_version"] = kSchemaVersion;
        std::cout << j.dump(2) << std::endl;
      }
      return 0;
    }

    if (*c_depth) {
      const auto cloud = d_opts.load();
      const auto pv = parse_list(dd.point);
      Eigen::VectorXd x(static_cast<Eigen::Index>(pv.size()));
      for (size_t i = 0; i < pv.size(); ++i) x[static_cast<Eigen::Index>(i)] = pv[i];
      json j{{"schema_version", kSchemaVersion}, {"point", vec_to_json(x)}};
      if (dd.exact || cloud.d() == 2) {
        const auto dv = depth_exact_2d(cloud, x);
        j["value"] = dv.value;
        j["witness_direction"] = vec_to_json(dv.witness_direction.coords());
        j["method"] = "exact";
      } else {
        const auto dv = depth_approx(cloud, x, dd.ndirs, d_opts.seed);
        j["value"] = dv.value;
        j["witness_direction"] = vec_to_json(dv.witness_direction.coords());
        j["method"] = "approx";
        j["ndirs"] = dd.ndirs;
        j["seed"] = d_opts.seed;
      }
      std::cout << j.dump(2) << std::endl;
      return 0;
    }

    if (*c_contour) {
      const auto cloud = ct_opts.load();
      if (ct.kind == "depth") {
        if (ct.output.empty()) throw Error(ErrorKind::BadParams, "--output required");
        const auto region =
            depth_region_boundary(cloud, ct.tau, ct.rays, ct_opts.seed, ct_opts.threads);
        write_file_atomic(ct.output, polyline_to_csv(region.boundary));
        return 0;
      }
      if (ct.kind != "bundle") throw Error(ErrorKind::BadParams, "--kind must be depth|bundle");
      if (ct.output_prefix.empty()) throw Error(ErrorKind::BadParams, "--output-prefix required");
      double alpha = ct.alpha;
      if (alpha < 0.0) {
        const auto mg_est =
            m_gamma_estimate(cloud, ct.gamma, detail::m_gamma_dirs(cloud.d()), ct_opts.seed);
        alpha = mid_admissible_alpha(mg_est.m_gamma, cloud.d());
      }
      const auto bundle = contour_experiment(cloud, alpha, ct.gamma, ct.ndirs,
                                             ct_opts.solver_config(), ct_opts.seed);
      write_file_atomic(ct.output_prefix + "_galpha.csv", polyline_to_csv(bundle.g_alpha));
      write_file_atomic(ct.output_prefix + "_dbest.csv",
                        polyline_to_csv(bundle.d_best.boundary));
      write_file_atomic(ct.output_prefix + "_dtheory.csv",
                        polyline_to_csv(bundle.d_theory.boundary));
      const std::string stem = std::filesystem::path(ct.output_prefix).filename().string();
      json manifest{{"schema_version", kSchemaVersion},
                    {"alpha", bundle.alpha},
                    {"alpha_best", bundle.alpha_best},
                    {"m_gamma", bundle.m_gamma},
                    {"gamma", ct.gamma},
                    {"theta", vec_to_json(bundle.theta)},
                    {"eccentricity", bundle.eccentricity},
                    {"d_best_level", bundle.d_best.tau},
                    {"d_theory_level", bundle.d_theory.tau},
                    {"n_dirs", ct.ndirs},
                    {"seed", ct_opts.seed},
                    {"n", cloud.n()},
                    {"files", json::array({stem + "_galpha.csv", stem + "_dbest.csv",
                                           stem + "_dtheory.csv"})}};
      write_file_atomic(ct.output_prefix + "_manifest.json", manifest.dump(2) + "\n");
      return 0;
    }

    if (*c_mg) {
      const auto cloud = mg_opts.load();
      const auto dropped = count_zero_points(cloud);
      if (dropped > 0)
        std::cerr << "warning: dropped " << dropped << " zero points (direction undefined)"
                  << std::endl;
      const auto est = m_gamma_estimate(cloud, mg.gamma, mg.ndirs, mg_opts.seed);
      json j{{"schema_version", kSchemaVersion},
             {"gamma", est.gamma},
             {"m_gamma", est.m_gamma},
             {"method", to_string(est.method)},
             {"ndirs", mg.ndirs},
             {"seed", mg_opts.seed},
             {"dropped_zeros", dropped}};
      std::cout << j.dump(2) << std::endl;
      return 0;
    }

    if (*c_pq) {
      const auto cloud = pq_opts.load();
      const auto res = projected_quantile(cloud, parse_direction(pq.direction), pq.beta);
      json j{{"schema_version", kSchemaVersion},
             {"direction", vec_to_json(res.direction.coords())},
             {"beta", res.beta},
             {"value", res.value}};
      std::cout << j.dump(2) << std::endl;
      return 0;
    }

    if (*c_bc) {
      const auto cloud = bc_opts.load();
      const UnitVector u = parse_direction(bc.direction);
      const SolverConfig cfg = bc_opts.solver_config();

      const auto sol = solve_quantile(cloud, IndexVector(bc.alpha, u), cfg);
      UpperBoundReport upper;
      upper.alpha = bc.alpha;
      upper.observed_norm = sol.q.norm();
      upper.k_alpha = auto_k_alpha(cloud, bc.alpha, default_k_epsilon(bc.alpha));
      upper.ub1 = upper_bound_ub1(cloud, bc.alpha, upper.k_alpha);
      upper.ub2 = upper_bound_ub2(cloud, bc.alpha);
      upper.ub1_satisfied = upper.observed_norm <= *upper.ub1;
      upper.ub2_satisfied = upper.observed_norm <= *upper.ub2;

      const auto incl =
          check_inclusion(cloud, bc.gamma, bc.alpha, bc.n_probe, bc_opts.seed, bc.symmetric);

      json lower_j;
      try {
        const auto low = lower_bound_check(cloud, bc.gamma, bc.alpha, u, cfg, bc_opts.seed);
        lower_j = json{{"alpha", low.alpha},
                       {"theta", vec_to_json(low.theta)},
                       {"lower_bound", low.lower_bound},
                       {"observed_displacement", low.observed_displacement},
                       {"satisfied", low.satisfied}};
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NotAdmissible) throw;
        lower_j = json{{"skipped", "NotAdmissible"}};
      }

      json report{
          {"schema_version", kSchemaVersion},
          {"provenance",
           {{"seed", bc_opts.seed},
            {"n", cloud.n()},
            {"d", cloud.d()},
            {"gamma", bc.gamma},
            {"alpha", bc.alpha},
            {"residual_tol", cfg.residual_tol},
            {"inclusion_slack", kInclusionSlack},
            {"n_probe", bc.n_probe},
            {"ndirs", detail::m_gamma_dirs(cloud.d())}}},
          {"upper",
           {{"alpha", upper.alpha},
            {"k_alpha", upper.k_alpha},
            {"ub1", *upper.ub1},
            {"ub2", *upper.ub2},
            {"observed_norm", upper.observed_norm},
            {"ub1_satisfied", upper.ub1_satisfied},
            {"ub2_satisfied", upper.ub2_satisfied}}},
          {"inclusion",
           {{"gamma", incl.gamma},
            {"m_gamma", incl.m_gamma},
            {"alpha", incl.alpha},
            {"depth_threshold", incl.depth_threshold},
            {"admissible", incl.admissible},
            {"n_tested", incl.n_tested},
            {"n_violations", incl.n_violations},
            {"max_norm_mean_u", incl.max_norm_mean_u}}},
          {"lower", lower_j}};
      write_file_atomic(bc.output, report.dump(2) + "\n");
      return 0;
    }

    if (*c_rf) {
      const auto cloud = rf_opts.load();
      const auto fit = rate_fit(cloud, parse_direction(rf.direction), parse_list(rf.alphas),
                                rf_opts.solver_config());
      json j{{"schema_version", kSchemaVersion},
             {"alphas", fit.alphas},
             {"norms", fit.norms},
             {"slope", fit.slope},
             {"intercept", fit.intercept},
             {"r_squared", fit.r_squared}};
      write_file_atomic(rf.output, j.dump(2) + "\n");
      return 0;
    }

    if (*c_ex) {
      const auto cloud = ex_opts.load();
      const auto rep = expansion_sweep(cloud, parse_direction(ex.direction),
                                       parse_list(ex.alphas), ex_opts.solver_config());
      std::ostringstream out;
      out << "alpha,first_order_value,third_order_value,first_order_limit,third_order_limit_rhs";
      for (Eigen::Index j2 = 0; j2 < cloud.d(); ++j2) out << ",gap_" << j2;
      for (Eigen::Index j2 = 0; j2 < cloud.d(); ++j2) out << ",gap_limit_" << j2;
      out << '\n';
      for (size_t k = 0; k < rep.alphas.size(); ++k) {
        out << format_double(rep.alphas[k]) << ',' << format_double(rep.first_order_values[k])
            << ',' << format_double(rep.third_order_values[k]) << ','
            << format_double(rep.first_order_limit) << ','
            << format_double(rep.third_order_limit_rhs);
        for (Eigen::Index j2 = 0; j2 < cloud.d(); ++j2)
          out << ',' << format_double(rep.direction_gaps[k][j2]);
        for (Eigen::Index j2 = 0; j2 < cloud.d(); ++j2)
          out << ',' << format_double(rep.direction_limit[j2]);
        out << '\n';
      }
      write_file_atomic(ex.output, out.str());
      return 0;
    }
  } catch (const Error& e) {
    json err{{"error", {{"kind", e.kind_name()}, {"message", e.what()}}}};
    std::cerr << err.dump() << std::endl;
    return 1;
  } catch (const std::exception& e) {
    json err{{"error", {{"kind", "Internal"}, {"message", e.what()}}}};
    std::cerr << err.dump() << std::endl;
    return 1;
  }
  return 2;
}

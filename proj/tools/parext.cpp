// Batch front-end for the parallel-section laboratory: run named scenarios or
// config-described experiments and drive the individual operations.

#include "parext/counterexamples.hpp"
#include "parext/extension.hpp"
#include "parext/io.hpp"
#include "parext/runner.hpp"
#include "parext/sets.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace parext;

std::vector<double> parse_csv_doubles(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

Point parse_point(const std::string& s) {
  std::string body = s;
  if (!body.empty() && body.front() == '(') body = body.substr(1, body.size() - 2);
  const std::vector<double> v = parse_csv_doubles(body);
  Point p(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) p[static_cast<Eigen::Index>(i)] = v[i];
  return p;
}

// "segment:(0,0)->(1,1)" or "polyline:(0,0)->(1,0)->(1,1)".
PiecewisePath parse_path(const std::string& spec, const OpenBox& box) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("path needs 'segment:...' form");
  const std::string kind = spec.substr(0, colon);
  std::vector<Point> vertices;
  std::string body = spec.substr(colon + 1);
  std::size_t pos = 0;
  while (pos < body.size()) {
    const auto open = body.find('(', pos);
    if (open == std::string::npos) break;
    const auto close = body.find(')', open);
    if (close == std::string::npos) throw std::invalid_argument("unbalanced parens in path");
    vertices.push_back(parse_point(body.substr(open, close - open + 1)));
    pos = close + 1;
  }
  if (kind == "segment") {
    if (vertices.size() != 2) throw std::invalid_argument("segment needs exactly two points");
    return PiecewisePath::line(vertices[0], vertices[1], box);
  }
  if (kind == "polyline") return PiecewisePath::polyline(vertices, box);
  throw std::invalid_argument("unknown path kind '" + kind + "'");
}

ConnectionForm connection_by_name(const std::string& name, int dim) {
  if (name.rfind("const:", 0) == 0) {
    const std::vector<double> c = parse_csv_doubles(name.substr(6));
    const int n = static_cast<int>(c.size());
    std::vector<MatrixField> comps;
    for (double ci : c)
      comps.push_back([ci](const Point&) {
        Eigen::MatrixXd m(1, 1);
        m(0, 0) = ci;
        return m;
      });
    return ConnectionForm(OpenBox::cube(n, -1e9, 1e9), 1, std::move(comps), Smoothness::Cinf);
  }
  if (name == "standard") return standard_connection(dim, 1);
  return make_scenario(name, dim).connection;
}

void apply_common(CLI::App* cmd, RunConfig* cfg, std::string* config_path, int* res,
                  std::string* expected) {
  cmd->add_option("--config", *config_path, "config file (flat key=value with [sections])");
  cmd->add_option("--dim", cfg->dim, "dimension override");
  cmd->add_option("--connection", cfg->connection,
                  "registry connection for the hyperplane-patch scenario");
  cmd->add_option("--res", *res, "grid resolution per axis");
  cmd->add_option("--step", cfg->step, "integrator substep");
  cmd->add_option("--window", cfg->window, "scan window half-width");
  cmd->add_option("--depth", [cfg](const std::vector<std::string>& v) {
    cfg->depth = std::stoi(v.front());
    return true;
  }, "obstacle stage depth");
  cmd->add_option("--out", cfg->out_dir, "output directory");
  cmd->add_option("--expected", *expected, "expected verdict override (extended|obstructed)");
  cmd->add_flag_callback("--assert-c1",
                         [cfg]() { cfg->policy = RunConfig::PolicyFlag::AssertC1; },
                         "assert the thin-axis residual (C1 policy)");
  cmd->add_flag_callback("--assert-c0-only",
                         [cfg]() { cfg->policy = RunConfig::PolicyFlag::AssertC0Only; },
                         "use the smooth companion connection for the same geometry");
  cmd->add_flag_callback("--no-csv", [cfg]() { cfg->write_csv = false; }, "skip the CSV artifact");
  cmd->add_flag_callback("--no-report", [cfg]() { cfg->write_report = false; },
                         "skip the report artifact");
}

int finish_run(RunConfig cfg, const std::string& config_path, int res,
               const std::string& expected) {
  if (!config_path.empty()) {
    RunConfig from_file = parse_config_file(config_path);
    if (cfg.scenario.empty()) cfg.scenario = from_file.scenario;
    if (!from_file.scenario.empty() && cfg.scenario.empty()) cfg.scenario = from_file.scenario;
    if (from_file.experiment && cfg.scenario.empty()) cfg.experiment = from_file.experiment;
    if (cfg.dim == 0) cfg.dim = from_file.dim;
    if (cfg.resolution.empty()) cfg.resolution = from_file.resolution;
    cfg.tol_agreement = cfg.tol_agreement ? cfg.tol_agreement : from_file.tol_agreement;
    cfg.tol_residual = cfg.tol_residual ? cfg.tol_residual : from_file.tol_residual;
    cfg.tol_input = cfg.tol_input ? cfg.tol_input : from_file.tol_input;
    cfg.tol_consistency = cfg.tol_consistency ? cfg.tol_consistency : from_file.tol_consistency;
    if (!from_file.resolution.empty() && cfg.resolution.empty())
      cfg.resolution = from_file.resolution;
    if (from_file.expected_override) cfg.expected_override = from_file.expected_override;
    if (from_file.policy != RunConfig::PolicyFlag::Default) cfg.policy = from_file.policy;
    if (from_file.depth) cfg.depth = from_file.depth;
  }
  if (res > 0) cfg.resolution = {res};
  if (expected == "extended") cfg.expected_override = Verdict::Extended;
  else if (expected == "obstructed") cfg.expected_override = Verdict::Obstructed;
  else if (!expected.empty()) throw std::invalid_argument("bad --expected value");

  const RunOutcome outcome = run(cfg);
  std::cout << outcome.report_text;
  if (!outcome.report_path.empty()) std::cout << "report: " << outcome.report_path << "\n";
  if (!outcome.csv_path.empty()) std::cout << "csv: " << outcome.csv_path << "\n";
  return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"parallel-section extension laboratory"};
  app.require_subcommand(1);

  // --- run -----------------------------------------------------------------
  RunConfig run_cfg;
  std::string run_scenario, run_config_path, run_expected;
  int run_res = 0;
  CLI::App* cmd_run = app.add_subcommand("run", "run a named scenario or a config experiment");
  cmd_run->add_option("scenario", run_scenario, "registry scenario name");
  apply_common(cmd_run, &run_cfg, &run_config_path, &run_res, &run_expected);

  // --- extend / scan -------------------------------------------------------
  RunConfig ext_cfg;
  std::string ext_scenario, ext_config_path, ext_expected;
  int ext_res = 0;
  CLI::App* cmd_extend = app.add_subcommand("extend", "extend across a slab obstacle");
  cmd_extend->add_option("scenario", ext_scenario, "registry scenario name")->required();
  apply_common(cmd_extend, &ext_cfg, &ext_config_path, &ext_res, &ext_expected);

  RunConfig scan_cfg;
  std::string scan_scenario, scan_config_path, scan_expected;
  int scan_res = 0;
  CLI::App* cmd_scan = app.add_subcommand("scan", "maximal extension scan");
  cmd_scan->add_option("scenario", scan_scenario, "registry scenario name")->required();
  apply_common(cmd_scan, &scan_cfg, &scan_config_path, &scan_res, &scan_expected);

  // --- transport -------------------------------------------------------------
  std::string tr_conn = "standard", tr_path, tr_v0 = "1";
  double tr_step = 1e-3;
  int tr_dim = 2;
  CLI::App* cmd_transport = app.add_subcommand("transport", "parallel transport along a path");
  cmd_transport->add_option("--connection", tr_conn, "connection name or const:c1,c2,...");
  cmd_transport->add_option("--path", tr_path, "segment:(..)->(..) or polyline:...")->required();
  cmd_transport->add_option("--v0", tr_v0, "start vector, comma separated");
  cmd_transport->add_option("--step", tr_step, "integrator substep");
  cmd_transport->add_option("--dim", tr_dim, "dimension for named connections");

  // --- jump ------------------------------------------------------------------
  std::string jump_scenario = "noextension";
  int jump_dim = 2;
  CLI::App* cmd_jump = app.add_subcommand("jump", "one-sided limits of the scenario section");
  cmd_jump->add_option("--scenario", jump_scenario, "scenario with a jump probe");
  cmd_jump->add_option("--dim", jump_dim, "dimension");

  // --- fatcantor ---------------------------------------------------------------
  std::string fc_ambient = "0,1";
  double fc_target = 0.5;
  CLI::App* cmd_fat = app.add_subcommand("fatcantor", "build a fat Cantor set, print its measure");
  cmd_fat->add_option("--ambient", fc_ambient, "ambient interval lo,hi");
  cmd_fat->add_option("--target", fc_target, "measure the residual must exceed")->required();

  // --- decompose ----------------------------------------------------------------
  std::string dc_box = "0,1x0,1", dc_out;
  int dc_level = 3;
  CLI::App* cmd_dec = app.add_subcommand("decompose", "maximal dyadic cubes inside an open box");
  cmd_dec->add_option("--box", dc_box, "box as lo,hi per axis joined by 'x'");
  cmd_dec->add_option("--max-level", dc_level, "finest dyadic level");
  cmd_dec->add_option("--out", dc_out, "CSV output file (stdout when omitted)");

  // --- components ------------------------------------------------------------------
  std::string cp_obstacle, cp_box = "0,1x0,1";
  int cp_res = 64, cp_depth = 12;
  CLI::App* cmd_comp = app.add_subcommand("components", "complement components on a grid");
  cmd_comp->add_option("--obstacle", cp_obstacle, "obstacle descriptor")->required();
  cmd_comp->add_option("--box", cp_box, "box as lo,hi per axis joined by 'x'");
  cmd_comp->add_option("--res", cp_res, "grid resolution per axis");
  cmd_comp->add_option("--depth", cp_depth, "obstacle stage depth");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_run->parsed()) {
      run_cfg.scenario = run_scenario;
      return finish_run(run_cfg, run_config_path, run_res, run_expected);
    }
    if (cmd_extend->parsed()) {
      ext_cfg.scenario = ext_scenario;
      return finish_run(ext_cfg, ext_config_path, ext_res, ext_expected);
    }
    if (cmd_scan->parsed()) {
      scan_cfg.scenario = scan_scenario;
      scan_cfg.force_scan = true;
      return finish_run(scan_cfg, scan_config_path, scan_res, scan_expected);
    }
    if (cmd_transport->parsed()) {
      const ConnectionForm conn = connection_by_name(tr_conn, tr_dim);
      const PiecewisePath path = parse_path(tr_path, conn.box());
      const std::vector<double> v0v = parse_csv_doubles(tr_v0);
      Eigen::VectorXd v0(static_cast<Eigen::Index>(v0v.size()));
      for (std::size_t i = 0; i < v0v.size(); ++i) v0[static_cast<Eigen::Index>(i)] = v0v[i];
      const TransportResult r = parallel_transport(conn, path, v0, tr_step);
      for (Eigen::Index i = 0; i < r.value.size(); ++i) {
        if (i) std::cout << " ";
        std::cout << fmt12(r.value[i]);
      }
      std::cout << "\n";
      std::cout << "richardson_defect: " << fmt12(r.richardson_defect) << "\n";
      return 0;
    }
    if (cmd_jump->parsed()) {
      const NamedScenario sc = make_scenario(jump_scenario, jump_dim);
      if (!sc.jump_base) throw std::invalid_argument("scenario has no jump probe");
      const JumpProbe probe =
          detect_jump(sc.connection, sc.section.value, sc.jump_axis, *sc.jump_base,
                      {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6});
      std::cout << "limit_below: " << fmt12(probe.limit_below) << "\n";
      std::cout << "limit_above: " << fmt12(probe.limit_above) << "\n";
      std::cout << "jump: " << fmt12(probe.jump) << "\n";
      return 0;
    }
    if (cmd_fat->parsed()) {
      const std::vector<double> ends = parse_csv_doubles(fc_ambient);
      if (ends.size() != 2) throw std::invalid_argument("--ambient needs lo,hi");
      const CantorLikeSet set = fat_cantor_build({ends[0], ends[1]}, fc_target);
      const Rational measure = set.exact_measure();
      std::cout << "residual_measure: " << to_string(measure) << " ("
                << fmt12(to_double(measure)) << ")\n";
      return 0;
    }
    if (cmd_dec->parsed()) {
      std::vector<Interval> axes;
      std::stringstream ss(dc_box);
      std::string part;
      while (std::getline(ss, part, 'x')) {
        const std::vector<double> ends = parse_csv_doubles(part);
        if (ends.size() != 2) throw std::invalid_argument("--box axis needs lo,hi");
        axes.push_back({ends[0], ends[1]});
      }
      const OpenBox box(std::move(axes));
      const CubeDecomposition cubes = dyadic_decompose(
          [&box](const Point& p) { return box.contains(p); }, box, dc_level);
      if (dc_out.empty()) {
        write_cubes_csv(std::cout, cubes);
      } else {
        std::ofstream f(dc_out, std::ios::binary);
        write_cubes_csv(f, cubes);
      }
      std::cerr << "cubes: " << cubes.cubes.size() << " interior_measure: "
                << to_string(cubes.interior_measure(box.dim())) << "\n";
      return 0;
    }
    if (cmd_comp->parsed()) {
      std::vector<Interval> axes;
      std::stringstream ss(cp_box);
      std::string part;
      while (std::getline(ss, part, 'x')) {
        const std::vector<double> ends = parse_csv_doubles(part);
        if (ends.size() != 2) throw std::invalid_argument("--box axis needs lo,hi");
        axes.push_back({ends[0], ends[1]});
      }
      const OpenBox box(std::move(axes));
      const Grid grid(box, std::vector<int>(static_cast<std::size_t>(box.dim()), cp_res));
      const ObstacleSet F = parse_obstacle(cp_obstacle, box, cp_depth);
      const ComponentLabels labels = complement_components(grid, F, cp_depth);
      std::cout << labels.count << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

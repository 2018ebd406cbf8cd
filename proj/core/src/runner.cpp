#include "parext/runner.hpp"

#include "parext/io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace parext {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("bad number '" + s + "' for " + what);
  }
}

int parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("bad integer '" + s + "' for " + what);
  }
}

std::vector<double> parse_doubles(const std::string& s, char sep, const std::string& what) {
  std::vector<double> out;
  for (const std::string& item : split(s, sep)) out.push_back(parse_double(trim(item), what));
  return out;
}

CantorLikeSet parse_thin_set(const std::string& spec, const Interval& fallback_ambient) {
  const auto colon = spec.find(':');
  const std::string kind = colon == std::string::npos ? spec : spec.substr(0, colon);
  std::vector<double> args;
  if (colon != std::string::npos)
    args = parse_doubles(spec.substr(colon + 1), ';', "thin set arguments");
  if (kind == "ternary") {
    if (args.empty()) return CantorLikeSet::ternary(fallback_ambient);
    if (args.size() == 2) return CantorLikeSet::ternary({args[0], args[1]});
    throw std::invalid_argument("ternary set takes 'ternary' or 'ternary:lo;hi'");
  }
  if (kind == "point") {
    if (args.empty()) throw std::invalid_argument("point set needs at least one point");
    return CantorLikeSet::discrete(fallback_ambient, args);
  }
  if (kind == "fat") {
    if (args.size() == 1) return fat_cantor_build(fallback_ambient, args[0]);
    if (args.size() == 3) return fat_cantor_build({args[0], args[1]}, args[2]);
    throw std::invalid_argument("fat set takes 'fat:target' or 'fat:lo;hi;target'");
  }
  throw std::invalid_argument("unknown thin set kind '" + kind + "'");
}

std::map<std::string, std::string> parse_kv_list(const std::string& body) {
  std::map<std::string, std::string> kv;
  for (const std::string& item : split(body, ',')) {
    const std::string t = trim(item);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("expected key=value in '" + t + "'");
    kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return kv;
}

HalfSlab parse_halfslab_kv(const std::map<std::string, std::string>& kv, const OpenBox& box,
                           const std::string& suffix) {
  HalfSlab slab;
  auto get = [&](const std::string& key) -> std::optional<std::string> {
    auto it = kv.find(key + suffix);
    if (it == kv.end()) return std::nullopt;
    return it->second;
  };
  slab.slab_axis = get("axis") ? parse_int(*get("axis"), "axis") - 1 : 0;
  slab.thin_axis = get("thin") ? parse_int(*get("thin"), "thin") - 1 : 1;
  if (auto b = get("b"); b)
    slab.threshold = parse_double(*b, "threshold");
  else if (auto b1 = get("b1"); b1 && suffix.empty())
    slab.threshold = parse_double(*b1, "threshold");
  else
    throw std::invalid_argument("half-slab needs b" + (suffix.empty() ? "1" : suffix) + "=...");
  const std::string set_key = kv.count("C" + suffix) ? "C" + suffix : "set" + suffix;
  auto it = kv.find(set_key);
  if (it == kv.end()) throw std::invalid_argument("half-slab needs C=<set spec>");
  slab.thin_set = parse_thin_set(it->second, box.axis(slab.thin_axis));
  if (slab.slab_axis == slab.thin_axis || slab.slab_axis < 0 || slab.thin_axis < 0 ||
      slab.slab_axis >= box.dim() || slab.thin_axis >= box.dim())
    throw std::invalid_argument("half-slab axes out of range");
  return slab;
}

}  // namespace

ObstacleSet parse_obstacle(const std::string& spec, const OpenBox& box, int default_depth) {
  (void)default_depth;
  const std::string s = trim(spec);
  if (s == "empty" || s.empty()) return ObstacleSet(EmptyObstacle{});
  const auto colon = s.find(':');
  const std::string kind = colon == std::string::npos ? s : s.substr(0, colon);
  const std::string body = colon == std::string::npos ? "" : s.substr(colon + 1);
  if (kind == "halfslab") {
    // b1= keeps the paper's name for the slab threshold.
    auto kv = parse_kv_list(body);
    return ObstacleSet(parse_halfslab_kv(kv, box, ""));
  }
  if (kind == "bislab") {
    auto kv = parse_kv_list(body);
    BiSlab bi;
    if (!kv.count("axis1")) kv["axis1"] = "1";
    if (!kv.count("thin1")) kv["thin1"] = "2";
    if (!kv.count("axis2")) kv["axis2"] = "2";
    if (!kv.count("thin2")) kv["thin2"] = "1";
    bi.first = parse_halfslab_kv(kv, box, "1");
    bi.second = parse_halfslab_kv(kv, box, "2");
    return ObstacleSet(bi);
  }
  if (kind == "hyperplane") {
    auto kv = parse_kv_list(body);
    HyperplanePatch patch;
    if (!kv.count("axis") || !kv.count("level"))
      throw std::invalid_argument("hyperplane needs axis=... and level=...");
    patch.axis = parse_int(kv.at("axis"), "axis") - 1;
    patch.level = parse_double(kv.at("level"), "level");
    for (const auto& [key, value] : kv) {
      if (key.rfind("min", 0) == 0) {
        SideConstraint sc;
        sc.axis = parse_int(key.substr(3), "side axis") - 1;
        sc.lo = parse_double(value, key);
        patch.sides.push_back(sc);
      } else if (key.rfind("max", 0) == 0) {
        SideConstraint sc;
        sc.axis = parse_int(key.substr(3), "side axis") - 1;
        sc.hi = parse_double(value, key);
        patch.sides.push_back(sc);
      }
    }
    if (patch.axis < 0 || patch.axis >= box.dim())
      throw std::invalid_argument("hyperplane axis out of range");
    return ObstacleSet(patch);
  }
  if (kind == "box") {
    auto kv = parse_kv_list(body);
    if (!kv.count("lo") || !kv.count("hi"))
      throw std::invalid_argument("box obstacle needs lo=v;v and hi=v;v");
    ClosedBoxObstacle cb;
    cb.lo = parse_doubles(kv.at("lo"), ';', "box lo");
    cb.hi = parse_doubles(kv.at("hi"), ';', "box hi");
    if (static_cast<int>(cb.lo.size()) != box.dim() || cb.lo.size() != cb.hi.size())
      throw std::invalid_argument("box obstacle endpoints must match the dimension");
    return ObstacleSet(cb);
  }
  throw std::invalid_argument("unknown obstacle kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

namespace {

Verdict parse_verdict(const std::string& s) {
  if (s == "extended") return Verdict::Extended;
  if (s == "obstructed") return Verdict::Obstructed;
  throw std::invalid_argument("verdict must be 'extended' or 'obstructed', got '" + s + "'");
}

struct RawConfig {
  std::map<std::string, std::map<std::string, std::string>> sections;

  std::optional<std::string> get(const std::string& section, const std::string& key) const {
    auto it = sections.find(section);
    if (it == sections.end()) return std::nullopt;
    auto jt = it->second.find(key);
    if (jt == it->second.end()) return std::nullopt;
    return jt->second;
  }
};

RawConfig parse_raw(const std::string& text) {
  RawConfig raw;
  std::string section = "run";
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line is not key=value: '" + line + "'");
    raw.sections[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return raw;
}

OpenBox parse_box_section(const RawConfig& raw, int dim_hint) {
  std::vector<Interval> axes;
  for (int i = 0;; ++i) {
    const auto v = raw.get("box", "axis" + std::to_string(i));
    if (!v) break;
    const std::vector<double> ends = parse_doubles(*v, ',', "box axis");
    if (ends.size() != 2) throw std::invalid_argument("box axis needs 'lo,hi'");
    axes.push_back({ends[0], ends[1]});
  }
  if (axes.empty()) return OpenBox::cube(dim_hint > 0 ? dim_hint : 2, 0.0, 1.0);
  return OpenBox(std::move(axes));
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  const RawConfig raw = parse_raw(text);
  RunConfig cfg;
  if (auto v = raw.get("run", "scenario")) cfg.scenario = *v;
  if (auto v = raw.get("run", "dim")) cfg.dim = parse_int(*v, "dim");
  if (auto v = raw.get("run", "resolution")) {
    for (const std::string& item : split(*v, ','))
      cfg.resolution.push_back(parse_int(trim(item), "resolution"));
  }
  if (auto v = raw.get("run", "step")) cfg.step = parse_double(*v, "step");
  if (auto v = raw.get("run", "window")) cfg.window = parse_int(*v, "window");
  if (auto v = raw.get("run", "depth")) cfg.depth = parse_int(*v, "depth");
  if (auto v = raw.get("run", "out")) cfg.out_dir = *v;
  if (auto v = raw.get("run", "csv")) cfg.write_csv = (*v == "true" || *v == "1");
  if (auto v = raw.get("run", "report")) cfg.write_report = (*v == "true" || *v == "1");
  if (auto v = raw.get("run", "expected")) cfg.expected_override = parse_verdict(*v);
  if (auto v = raw.get("run", "policy")) {
    if (*v == "default") cfg.policy = RunConfig::PolicyFlag::Default;
    else if (*v == "assert-c1") cfg.policy = RunConfig::PolicyFlag::AssertC1;
    else if (*v == "assert-c0-only") cfg.policy = RunConfig::PolicyFlag::AssertC0Only;
    else throw std::invalid_argument("policy must be default|assert-c1|assert-c0-only");
  }
  if (auto v = raw.get("tolerances", "agreement")) cfg.tol_agreement = parse_double(*v, "agreement");
  if (auto v = raw.get("tolerances", "residual")) cfg.tol_residual = parse_double(*v, "residual");
  if (auto v = raw.get("tolerances", "input")) cfg.tol_input = parse_double(*v, "input");
  if (auto v = raw.get("tolerances", "consistency"))
    cfg.tol_consistency = parse_double(*v, "consistency");

  if (cfg.scenario.empty() && raw.sections.count("connection")) {
    InlineExperiment exp;
    exp.box = parse_box_section(raw, cfg.dim);
    const int n = exp.box.dim();
    exp.rank = raw.get("connection", "rank") ? parse_int(*raw.get("connection", "rank"), "rank") : 1;
    for (int i = 1; i <= n; ++i) {
      const auto v = raw.get("connection", "omega" + std::to_string(i));
      Eigen::MatrixXd m = Eigen::MatrixXd::Zero(exp.rank, exp.rank);
      if (v) {
        const std::vector<double> entries = parse_doubles(*v, ',', "omega entries");
        if (static_cast<int>(entries.size()) != exp.rank * exp.rank)
          throw std::invalid_argument("omega needs rank*rank row-major entries");
        for (int a = 0; a < exp.rank; ++a)
          for (int b = 0; b < exp.rank; ++b)
            m(a, b) = entries[static_cast<std::size_t>(a * exp.rank + b)];
      }
      exp.omega.push_back(m);
    }
    if (auto v = raw.get("section", "type")) exp.section_kind = *v;
    if (auto v = raw.get("section", "value"))
      exp.section_constant = parse_double(*v, "section value");
    if (auto v = raw.get("obstacle", "spec"))
      exp.obstacle = parse_obstacle(*v, exp.box);
    if (cfg.expected_override) exp.expected = *cfg.expected_override;
    cfg.experiment = std::move(exp);
  }
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

namespace {

NamedScenario scenario_from_experiment(const InlineExperiment& exp) {
  NamedScenario sc;
  sc.name = "experiment";
  sc.dim = exp.box.dim();
  sc.box = exp.box;
  std::vector<MatrixField> comps;
  for (const Eigen::MatrixXd& m : exp.omega)
    comps.push_back([m](const Point&) { return m; });
  sc.connection = ConnectionForm(exp.box, exp.rank, std::move(comps), Smoothness::Cinf);
  if (exp.section_kind == "exp") {
    if (exp.rank != 1)
      throw std::invalid_argument("inline 'exp' section requires rank 1");
    std::vector<double> c;
    for (const Eigen::MatrixXd& m : exp.omega) c.push_back(m(0, 0));
    sc.section.value = [c](const Point& x) {
      double e = 0.0;
      for (std::size_t i = 0; i < c.size(); ++i) e -= c[i] * x[static_cast<Eigen::Index>(i)];
      return std::exp(e);
    };
  } else if (exp.section_kind == "const") {
    const double v = exp.section_constant;
    sc.section.value = [v](const Point&) { return v; };
  } else {
    throw std::invalid_argument("inline section type must be 'exp' or 'const'");
  }
  sc.section.in_domain = [](const Point&) { return true; };
  sc.obstacle = exp.obstacle;
  sc.expected = exp.expected;
  return sc;
}

std::vector<double> default_jump_epsilons() {
  return {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
}

std::vector<double> ternary_h_sequence() {
  std::vector<double> h;
  for (int k = 4; k <= 10; ++k) h.push_back(std::pow(3.0, -k));
  return h;
}

}  // namespace

RunOutcome run(const RunConfig& config) {
  NamedScenario sc = [&]() {
    if (!config.scenario.empty()) {
      if (config.scenario == "cantor-c0" && config.policy == RunConfig::PolicyFlag::AssertC0Only) {
        // Same obstacle geometry under the smooth companion connection.
        return make_scenario("cantor-c1", config.dim);
      }
      if (config.scenario == "hyperplane-patch" && !config.connection.empty())
        return hyperplane_patch_scenario(config.connection);
      return make_scenario(config.scenario, config.dim);
    }
    if (config.experiment) return scenario_from_experiment(*config.experiment);
    throw std::invalid_argument("run: need a scenario name or an inline experiment");
  }();
  if (config.policy == RunConfig::PolicyFlag::AssertC1)
    sc.thin_policy = ThinResidualPolicy::Assert;

  std::vector<int> res = config.resolution;
  if (res.empty()) res.assign(static_cast<std::size_t>(sc.box.dim()), 128);
  if (res.size() == 1) res.assign(static_cast<std::size_t>(sc.box.dim()), res[0]);
  if (static_cast<int>(res.size()) != sc.box.dim())
    throw std::invalid_argument("run: resolution must match the dimension");
  for (int r : res)
    if (r < 8) throw std::invalid_argument("run: resolution must be >= 8 per axis");
  if (!(config.step > 0.0)) throw std::invalid_argument("run: step must be > 0");
  const Grid grid(sc.box, res);

  Tolerances tol = sc.tolerances;
  tol.step = config.step;
  if (config.tol_agreement) tol.agreement = *config.tol_agreement;
  if (config.tol_residual) tol.residual = *config.tol_residual;
  if (config.tol_input) tol.input_residual = *config.tol_input;
  if (config.tol_consistency) tol.consistency = *config.tol_consistency;
  const int depth = config.depth.value_or(sc.obstacle_depth);

  // Build the input section off F.
  const std::vector<std::uint8_t> fmask = obstacle_mask(sc.obstacle, grid, depth);
  std::vector<std::uint8_t> defined(grid.node_count(), 0);
  for (std::size_t node = 0; node < grid.node_count(); ++node)
    defined[node] = (!fmask[node] && sc.section.in_domain(grid.point(node))) ? 1 : 0;
  const int rank = sc.connection.rank();
  const SampledSection input = SampledSection::sample(
      grid, rank,
      [&sc, rank](const Point& p) {
        Eigen::VectorXd v = Eigen::VectorXd::Constant(rank, sc.section.value(p));
        return v;
      },
      defined);

  RunOutcome out;
  out.expected = config.expected_override.value_or(sc.expected);
  for (std::uint8_t m : fmask) out.obstacle_nodes += m;

  std::ostringstream report;
  report << "scenario: " << sc.name << "\n";
  report << "dim: " << sc.box.dim() << "\n";
  report << "grid:";
  for (int r : res) report << " " << r;
  report << "\n";
  report << "step: " << fmt12(config.step) << "\n";
  report << "depth: " << depth << "\n";
  report << "tolerances: agreement=" << fmt12(tol.agreement) << " residual=" << fmt12(tol.residual)
         << " input=" << fmt12(tol.input_residual) << " consistency=" << fmt12(tol.consistency)
         << "\n";
  report << "obstacle_nodes: " << out.obstacle_nodes << "\n";
  if (sc.obstacle_measure)
    report << "obstacle_measure: " << to_string(*sc.obstacle_measure) << " ("
           << fmt12(to_double(*sc.obstacle_measure)) << ")\n";

  SampledSection extended(grid, rank);
  const HalfSlab* slab_ptr = config.force_scan ? nullptr : sc.obstacle.get_if<HalfSlab>();
  const BiSlab* bislab_ptr = config.force_scan ? nullptr : sc.obstacle.get_if<BiSlab>();
  if (const HalfSlab* slab = slab_ptr) {
    const double a1 = 0.5 * (sc.box.axis(slab->slab_axis).lo + slab->threshold);
    ExtensionReport er = extend_slab(sc.connection, input, *slab, a1, tol, depth, sc.thin_policy);
    out.observed = er.verdict;
    out.agreement = er.agreement;
    out.axis_residual = er.axis_residual;
    extended = er.extended;
    report << "operation: extend_slab\n";
    report << "base_coordinate: " << fmt12(er.base_coordinate) << "\n";
    report << "agreement: " << fmt12(er.agreement) << "\n";
    for (std::size_t i = 0; i < er.axis_residual.size(); ++i)
      report << "residual_axis_" << (i + 1) << ": " << fmt12(er.axis_residual[i]) << "\n";
    if (er.evidence) {
      report << "evidence: " << er.evidence->kind << " magnitude=" << fmt12(er.evidence->magnitude)
             << " at";
      for (Eigen::Index i = 0; i < er.evidence->location.size(); ++i)
        report << " " << fmt12(er.evidence->location[i]);
      report << "\n";
    }
  } else if (const BiSlab* bi = bislab_ptr) {
    const double a1 = 0.5 * (sc.box.axis(bi->first.slab_axis).lo + bi->first.threshold);
    const double a2 = 0.5 * (sc.box.axis(bi->second.slab_axis).lo + bi->second.threshold);
    ExtensionReport er = extend_bidirectional(sc.connection, input, *bi, a1, a2, tol, depth);
    out.observed = er.verdict;
    out.agreement = er.agreement;
    out.axis_residual = er.axis_residual;
    extended = er.extended;
    report << "operation: extend_bidirectional\n";
    report << "agreement: " << fmt12(er.agreement) << "\n";
    report << "bidirectional_gap: " << fmt12(er.bidirectional_gap) << "\n";
    for (std::size_t i = 0; i < er.axis_residual.size(); ++i)
      report << "residual_axis_" << (i + 1) << ": " << fmt12(er.axis_residual[i]) << "\n";
  } else {
    MaximalRegion region =
        maximal_extension_scan(sc.connection, input, sc.obstacle, grid, config.window, tol, depth);
    out.observed = region.full() ? Verdict::Extended : Verdict::Obstructed;
    out.frontier_count = region.frontier.size();
    out.unextended_count = region.unextended_count;
    extended = region.section;
    report << "operation: maximal_extension_scan\n";
    report << "window: " << config.window << "\n";
    report << "extended_nodes: " << (grid.node_count() - region.unextended_count) << "/"
           << grid.node_count() << "\n";
    report << "frontier_nodes: " << region.frontier.size() << "\n";
  }

  // Obstruction detectors supply the paper-style evidence.
  if (sc.jump_base) {
    out.jump = detect_jump(sc.connection, sc.section.value, sc.jump_axis, *sc.jump_base,
                           default_jump_epsilons());
    report << "jump: below=" << fmt12(out.jump->limit_below)
           << " above=" << fmt12(out.jump->limit_above) << " jump=" << fmt12(out.jump->jump)
           << "\n";
  }
  if (!sc.divergence_probes.empty() || !sc.convergence_probes.empty()) {
    std::vector<Point> points = sc.divergence_probes;
    points.insert(points.end(), sc.convergence_probes.begin(), sc.convergence_probes.end());
    out.probes = detect_nondifferentiability(sc.section.value, 1, points, ternary_h_sequence());
    for (const QuotientProbe& probe : out.probes) {
      report << "quotients at";
      for (Eigen::Index i = 0; i < probe.point.size(); ++i)
        report << " " << fmt12(probe.point[i]);
      report << ": " << to_string(probe.verdict);
      for (double q : probe.quotients) report << " " << fmt12(q);
      report << "\n";
    }
  }

  report << "verdict: " << to_string(out.observed) << "\n";
  report << "expected: " << to_string(out.expected) << "\n";
  out.exit_code = out.observed == out.expected ? 0 : 2;
  report << "exit: " << out.exit_code << "\n";
  out.report_text = report.str();

  namespace fs = std::filesystem;
  if (config.write_report || config.write_csv) fs::create_directories(config.out_dir);
  if (config.write_report) {
    out.report_path = (fs::path(config.out_dir) / (sc.name + "-report.txt")).string();
    std::ofstream f(out.report_path, std::ios::binary);
    f << out.report_text;
  }
  if (config.write_csv) {
    out.csv_path = (fs::path(config.out_dir) / (sc.name + "-section.csv")).string();
    std::ofstream f(out.csv_path, std::ios::binary);
    write_section_csv(f, extended);
  }
  return out;
}

}  // namespace parext

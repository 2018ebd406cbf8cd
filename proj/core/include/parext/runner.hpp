#pragma once

#include "parext/counterexamples.hpp"
#include "parext/extension.hpp"

#include <optional>
#include <string>
#include <vector>

namespace parext {

/// Inline experiment: constant-coefficient connection, closed-form section and
/// an obstacle descriptor, all expressible in the flat config format.
struct InlineExperiment {
  OpenBox box = OpenBox::cube(2, 0.0, 1.0);
  int rank = 1;
  std::vector<Eigen::MatrixXd> omega;  // constant matrix per axis
  std::string section_kind = "exp";    // "exp" (rank 1) | "const"
  double section_constant = 1.0;
  ObstacleSet obstacle;
  Verdict expected = Verdict::Extended;
};

struct RunConfig {
  std::string scenario;  // registry name; empty means inline experiment
  std::string connection;  // hyperplane-patch only: which registry connection
  std::optional<InlineExperiment> experiment;

  int dim = 0;                  // 0 = scenario default
  std::vector<int> resolution;  // per axis; single value replicated; default 128
  double step = 1e-3;
  std::optional<double> tol_agreement;
  std::optional<double> tol_residual;
  std::optional<double> tol_input;
  std::optional<double> tol_consistency;
  int window = 2;  // scan half-width in cells
  std::optional<int> depth;

  enum class PolicyFlag { Default, AssertC1, AssertC0Only };
  PolicyFlag policy = PolicyFlag::Default;
  bool force_scan = false;  // run maximal_extension_scan even for slab obstacles

  std::string out_dir = "out";
  bool write_csv = true;
  bool write_report = true;
  std::optional<Verdict> expected_override;
};

struct RunOutcome {
  int exit_code = 0;  // 0 verdict matches, 2 mismatch (1 = usage, via exception)
  Verdict observed = Verdict::Extended;
  Verdict expected = Verdict::Extended;
  std::size_t frontier_count = 0;
  std::size_t obstacle_nodes = 0;
  std::size_t unextended_count = 0;
  double agreement = 0.0;
  std::vector<double> axis_residual;
  std::optional<JumpProbe> jump;
  std::vector<QuotientProbe> probes;
  std::string report_path;
  std::string csv_path;
  std::string report_text;
};

/// Executes the scenario pipeline: build, verify input parallelism, extend or
/// scan, run the obstruction detectors, write artifacts. Throws
/// std::invalid_argument for unknown scenarios or bad configs (exit 1 at the
/// CLI level).
RunOutcome run(const RunConfig& config);

/// Flat key=value config with [section] headers; '#' starts a comment.
RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_text(const std::string& text);

/// Compact obstacle descriptor strings shared by the CLI and the config
/// format, e.g. "halfslab:b1=0.5,thin=2,C=point:0.5" or
/// "hyperplane:axis=2,level=0.5,min1=0.25". Axes are 1-based here. Ambient
/// intervals default to the box axis of the thin coordinate.
ObstacleSet parse_obstacle(const std::string& spec, const OpenBox& box, int default_depth = 12);

}  // namespace parext

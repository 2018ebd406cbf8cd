#pragma once

#include "parext/connection.hpp"
#include "parext/sets.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace parext {

enum class Verdict { Extended, Obstructed };

std::string to_string(Verdict v);

/// Which residuals are asserted for the thin axis: the discrete and the
/// C1-connection cases assert everywhere, the plain-C0 case reports only.
enum class ThinResidualPolicy { Assert, Report };

struct Tolerances {
  double input_residual = 1e-5;  // gate on the given section being parallel off F
  double agreement = 1e-6;       // || s~ - s || over off-F nodes
  double residual = 1e-5;        // asserted covariant residuals of s~
  double consistency = 1e-6;     // scan: agreement with already-extended values
  double step = 1e-3;            // integrator substep
};

struct Evidence {
  Point location;
  std::string kind;               // "jump" | "residual" | "divergent-quotients"
  double magnitude = 0.0;
  std::vector<double> quotients;  // present for divergent-quotient evidence
};

struct ExtensionReport {
  SampledSection extended;
  std::vector<double> axis_residual;  // max eligible residual per axis
  double agreement = 0.0;
  Verdict verdict = Verdict::Extended;
  std::optional<Evidence> evidence;
  double base_coordinate = 0.0;  // a1 actually used (snapped to a node)
  int slab_axis = 0;
  int thin_axis = 1;
  ThinResidualPolicy thin_policy = ThinResidualPolicy::Report;
  double bidirectional_gap = 0.0;  // extend_bidirectional only
};

/// Cross-order disagreement in extend_bidirectional.
class InconsistencyError : public std::runtime_error {
 public:
  InconsistencyError(std::string what, Point location, double magnitude);
  const Point& location() const { return location_; }
  double magnitude() const { return magnitude_; }

 private:
  Point location_;
  double magnitude_;
};

/// Extends a parallel section across a half-slab obstacle by the fundamental
/// solution transported from the base hyperplane x_slab = a1:
/// s~(t, x') = X(t, x') s(a1, x'). a1 is snapped to the nearest admissible
/// node coordinate left of the slab threshold. Throws on a1 >= threshold and
/// when the input section is not parallel off F at the input tolerance.
ExtensionReport extend_slab(const ConnectionForm& conn, const SampledSection& s,
                            const HalfSlab& F, double a1, const Tolerances& tol, int depth,
                            std::optional<ThinResidualPolicy> policy_override = std::nullopt);

/// Runs extend_slab in both axis orders of a bi-slab and checks that the two
/// extensions agree on the full grid; throws InconsistencyError beyond the
/// agreement tolerance.
ExtensionReport extend_bidirectional(const ConnectionForm& conn, const SampledSection& s,
                                     const BiSlab& F, double a1, double a2,
                                     const Tolerances& tol, int depth);

struct MaximalRegion {
  std::vector<std::uint8_t> extended_mask;  // nodes where extension succeeded
  std::vector<std::size_t> frontier;        // F-nodes adjacent to the region
  SampledSection section;                   // values on the extended region
  std::size_t unextended_count = 0;

  bool full() const { return unextended_count == 0; }
};

/// Fixed-point sweep over F-nodes: each attempts a local window extension fed
/// from a fully-known window slice, integrating across the window along that
/// axis; a node joins the region when the local values agree with everything
/// already known and the local covariant residuals pass. window is the
/// half-width in cells.
MaximalRegion maximal_extension_scan(const ConnectionForm& conn, const SampledSection& s,
                                     const ObstacleSet& F, const Grid& grid, int window,
                                     const Tolerances& tol, int depth);

struct JumpProbe {
  double limit_below = 0.0;
  double limit_above = 0.0;
  double jump = 0.0;
};

/// One-sided limits of a closed-form scalar section along an axis at base, by
/// evaluating at base +- eps down a decreasing sequence.
JumpProbe detect_jump(const ConnectionForm& conn,
                      const std::function<double(const Point&)>& section, int axis,
                      const Point& base, const std::vector<double>& epsilons);

enum class QuotientVerdict { Divergent, Convergent, Inconclusive };

std::string to_string(QuotientVerdict v);

struct QuotientProbe {
  Point point;
  std::vector<double> quotients;
  QuotientVerdict verdict = QuotientVerdict::Inconclusive;
};

/// Symmetric difference quotients over a strictly decreasing h sequence.
/// Divergent: every consecutive quotient ratio >= 1.5 (the Cantor-function
/// growth rate per ternary step). Convergent: the last two agree within 1%.
std::vector<QuotientProbe> detect_nondifferentiability(
    const std::function<double(const Point&)>& section, int axis,
    const std::vector<Point>& points, const std::vector<double>& h_seq);

}  // namespace parext

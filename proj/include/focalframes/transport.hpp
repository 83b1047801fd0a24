#ifndef FOCALFRAMES_TRANSPORT_HPP
#define FOCALFRAMES_TRANSPORT_HPP

#include <vector>

#include "focalframes/immersion.hpp"

namespace focalframes {
namespace transport {

/// Parameter-space curve t -> u(t): one expression per patch parameter.
struct PathSpec {
  std::vector<ExprPtr> curve;
  double t0 = 0.0;
  double t1 = 1.0;
  int steps = 100;
};

/// Straight parameter segment from one point to another over t in [0, 1].
PathSpec make_segment(const std::vector<double>& from, const std::vector<double>& to, int steps);

struct PathPoint {
  std::vector<double> u;
  std::vector<double> du;
};

PathPoint path_at(const PathSpec& path, double t);

enum class Bundle { Tangent, Normal };

/// Fixed-step fourth-order transport. The invariant norm (metric norm on the
/// tangent bundle, frame norm on the normal bundle) is tracked; a relative
/// drift above 0.1 raises StepTooCoarse.
struct TransportResult {
  std::vector<double> final_components;
  Mat<double> log; // steps+1 rows of components along the way
  double norm_drift = 0.0;
};

TransportResult transport_vector(const ImmersionSpec& spec, const PathSpec& path, Bundle bundle,
                                 const std::vector<double>& x0);

/// Transports a full basis; columns are the transported coordinate vectors.
Mat<double> transport_matrix(const ImmersionSpec& spec, const PathSpec& path, Bundle bundle);

/// Transport around a loop that returns to its starting point (checked in
/// ambient space, so periodic parameters that wind are fine).
struct HolonomyReport {
  Mat<double> matrix;
  double rotation_angle = 0.0; // tangent bundle on a surface, else 0
  double max_deviation_from_identity = 0.0;
};

HolonomyReport holonomy_loop(const ImmersionSpec& spec, const PathSpec& path, Bundle bundle,
                             double tol = kDefaultTol);

/// Axis-aligned parameter rectangle with the curvature-based first-order
/// prediction for its holonomy.
struct RectSpec {
  std::vector<double> corner;
  int s_axis = 0;
  int t_axis = 1;
  double eps = 0.1;
  double delta = 0.1;
  int steps_per_leg = 100;
};

struct RectHolonomy {
  Mat<double> measured;
  Mat<double> predicted;
  double measured_angle = 0.0;
  double predicted_angle = 0.0;
};

RectHolonomy rect_holonomy(const ImmersionSpec& spec, const RectSpec& rect,
                           double tol = kDefaultTol);

/// Grid for building a parallel displaced patch. Bounds must sit inside the
/// immersion domain.
struct GridSpec {
  std::vector<double> lo, hi;
  std::vector<int> counts;
  int steps_per_edge = 8;
};

struct ParallelReport {
  bool pass = false;
  double max_route_mismatch = 0.0;
  double max_angle = 0.0;
  std::vector<std::vector<double>> points; // displaced points, lexicographic node order
};

/// Transports a normal vector over the grid along two different monotone
/// route families and displaces the patch by the transported field. Requires
/// a flat normal connection (NotFlat otherwise); disagreement between the
/// route families raises PathDependence.
ParallelReport parallel_variety(const ImmersionSpec& spec, const GridSpec& grid,
                                const std::vector<double>& xi0, double tol = kDefaultTol);

/// How a normal field is specified for subbundle and sweep checks.
enum class FieldKind { Components, Ambient, Transported };

struct NormalField {
  FieldKind kind = FieldKind::Components;
  std::vector<ExprPtr> components; // Components: l exprs; Ambient: n exprs
  std::vector<double> initial;     // Transported: frame components at the start
};

struct SubbundleReport {
  bool parallel = false;
  double max_residual = 0.0;
  int samples = 0;
};

/// Checks that the span of the given normal fields is preserved by the
/// normal connection: the covariant derivative of every field must stay in
/// the span at every sample point.
SubbundleReport parallel_subbundle_check(const ImmersionSpec& spec,
                                         const std::vector<NormalField>& fields,
                                         int samples_per_axis = 5, double tol = kDefaultTol);

struct SweepSpec {
  int nodes = 2001;                    // dense pass / transport resolution for r == 1
  std::vector<double> fiber = {0.25, 0.5};
  int generators = 200;
};

struct SweepReport {
  double max_angle = 0.0;
  bool field_parallel = false;
  double field_residual = 0.0;
  int generators_sampled = 0;
};

/// Sweeps the patch along a normal field and measures how far the tangent
/// plane tilts along each generator line. A parallel field keeps the plane
/// constant; the report carries the field's own covariant residual so
/// non-parallel fields are visibly flagged rather than rejected.
SweepReport swept_tangent_constancy(const ImmersionSpec& spec, const NormalField& field,
                                    const SweepSpec& sw, double tol = kDefaultTol);

} // namespace transport
} // namespace focalframes

#endif

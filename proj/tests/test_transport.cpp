#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "focalframes/immersion.hpp"
#include "focalframes/transport.hpp"

using namespace focalframes;
using namespace focalframes::transport;

namespace {

ImmersionSpec unit_sphere() {
  return make_immersion({"u", "v"},
                        {"cos(u)*cos(v)", "cos(u)*sin(v)", "sin(u)"},
                        {{-0.6, 0.6}, {-0.5, 70.0}});
}

PathSpec latitude(double u0, double turns, int steps) {
  PathSpec ps;
  ps.curve = {parse_expression(std::to_string(u0), {"t"}),
              parse_expression("t", {"t"})};
  ps.t0 = 0.0;
  ps.t1 = turns * 2.0 * 3.14159265358979323846;
  ps.steps = steps;
  return ps;
}

// Transport along a latitude circle has the closed form
//   X(T) = cos(sT) X0 - sin(sT)/s * G X0,   s = sin(u0),
// where G is the connection matrix in the v direction and G^2 = -s^2 I.
std::vector<double> latitude_exact(double u0, double T, const std::vector<double>& x0) {
  double s = std::sin(u0);
  double g01 = std::sin(u0) * std::cos(u0);  // transports the v-component along v
  double g10 = -std::tan(u0);
  double c = std::cos(s * T), k = std::sin(s * T) / s;
  return {c * x0[0] - k * g01 * x0[1], c * x0[1] - k * g10 * x0[0]};
}

}  // namespace

TEST_CASE("latitude transport matches the closed form") {
  ImmersionSpec spec = unit_sphere();
  const double u0 = 0.3;
  PathSpec ps = latitude(u0, 1.0, 2000);
  std::vector<double> x0 = {1.0, 0.5};
  TransportResult res = transport_vector(spec, ps, Bundle::Tangent, x0);
  std::vector<double> exact = latitude_exact(u0, ps.t1, x0);
  CHECK(res.final_components[0] == doctest::Approx(exact[0]).epsilon(1e-8));
  CHECK(res.final_components[1] == doctest::Approx(exact[1]).epsilon(1e-8));
  CHECK(res.norm_drift < 1e-10);
  CHECK(static_cast<int>(res.log.size()) == ps.steps + 1);
}

TEST_CASE("halving the step size divides the error by about sixteen") {
  ImmersionSpec spec = unit_sphere();
  const double u0 = 0.3;
  std::vector<double> x0 = {1.0, 0.0};
  std::vector<double> exact = latitude_exact(u0, 2.0 * 3.14159265358979323846, x0);
  auto err = [&](int steps) {
    TransportResult res = transport_vector(spec, latitude(u0, 1.0, steps), Bundle::Tangent, x0);
    return std::hypot(res.final_components[0] - exact[0], res.final_components[1] - exact[1]);
  };
  double e1 = err(100), e2 = err(200);
  CHECK(e1 / e2 > 10.0);
  CHECK(e1 / e2 < 22.0);
}

TEST_CASE("hopelessly coarse steps are refused instead of reported") {
  ImmersionSpec spec = unit_sphere();
  PathSpec ps = latitude(0.3, 5.0, 4);
  try {
    transport_vector(spec, ps, Bundle::Tangent, {1.0, 0.0});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::StepTooCoarse);
  }
  PathSpec one = latitude(0.3, 1.0, 1);
  CHECK_THROWS_AS(transport_vector(spec, one, Bundle::Tangent, {1.0, 0.0}), Error);
}

TEST_CASE("loop holonomy of a latitude circle rotates by the classical angle") {
  ImmersionSpec spec = unit_sphere();
  const double u0 = 0.3;
  HolonomyReport hr = holonomy_loop(spec, latitude(u0, 1.0, 4000), Bundle::Tangent);
  CHECK(std::abs(hr.rotation_angle) ==
        doctest::Approx(2.0 * 3.14159265358979323846 * std::sin(u0)).epsilon(1e-6));
  CHECK(hr.max_deviation_from_identity > 0.1);  // visibly non-trivial

  // The normal bundle of a hypersurface cannot rotate.
  HolonomyReport hn = holonomy_loop(spec, latitude(u0, 1.0, 2000), Bundle::Normal);
  CHECK(hn.max_deviation_from_identity < 1e-9);
}

TEST_CASE("open paths are rejected by the loop check in ambient space") {
  ImmersionSpec spec = unit_sphere();
  PathSpec open;
  open.curve = {parse_expression("0.3", {"t"}), parse_expression("t", {"t"})};
  open.t0 = 0.0;
  open.t1 = 3.0;
  open.steps = 500;
  try {
    holonomy_loop(spec, open, Bundle::Tangent);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NotClosed);
  }

  // Many full turns close in ambient space even though the parameter moved.
  HolonomyReport hr = holonomy_loop(spec, latitude(0.3, 2.0, 4000), Bundle::Tangent);
  CHECK(hr.matrix.size() == 2);
}

TEST_CASE("rectangle holonomy approximates the curvature prediction") {
  ImmersionSpec spec = unit_sphere();
  RectSpec rect;
  rect.corner = {0.2, 0.3};
  rect.eps = 0.1;
  rect.delta = 0.1;
  rect.steps_per_leg = 200;
  RectHolonomy rh = rect_holonomy(spec, rect);
  CHECK(rh.measured_angle != 0.0);
  CHECK(rh.measured_angle == doctest::Approx(rh.predicted_angle).epsilon(0.05));

  // A plane has no holonomy at all.
  ImmersionSpec plane = make_immersion({"u", "v"}, {"u", "v", "u + v"},
                                       {{-1.0, 1.0}, {-1.0, 1.0}});
  RectSpec prect;
  prect.corner = {-0.5, -0.5};
  prect.eps = 0.6;
  prect.delta = 0.6;
  prect.steps_per_leg = 100;
  RectHolonomy ph = rect_holonomy(plane, prect);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(ph.measured[i][j] == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-8));
  CHECK(std::abs(ph.measured_angle) < 1e-8);
}

TEST_CASE("a flat normal bundle displaces the whole patch consistently") {
  ImmersionSpec torus = make_immersion({"u", "v"},
                                       {"cos(u)", "sin(u)", "cos(v)", "sin(v)"},
                                       {{-0.3, 6.5}, {-0.3, 6.5}});
  GridSpec grid;
  grid.lo = {0.2, 0.2};
  grid.hi = {1.2, 1.2};
  grid.counts = {3, 3};
  grid.steps_per_edge = 8;
  ParallelReport rep = parallel_variety(torus, grid, {0.3, -0.2});
  CHECK(rep.pass);
  CHECK(rep.max_route_mismatch < 1e-7);
  CHECK(rep.max_angle < 1e-6);
  CHECK(rep.points.size() == 9);
}

TEST_CASE("a curved normal bundle is refused before any displacement") {
  ImmersionSpec surf = make_immersion({"u", "v"},
                                      {"u", "v", "u^2 - v^2", "u*v"},
                                      {{-1.0, 1.0}, {-1.0, 1.0}});
  GridSpec grid;
  grid.lo = {0.1, 0.1};
  grid.hi = {0.6, 0.6};
  grid.counts = {3, 3};
  try {
    parallel_variety(surf, grid, {0.2, 0.1});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NotFlat);
  }
}

TEST_CASE("subbundle parallelism separates constant from rotating fields") {
  ImmersionSpec torus = make_immersion({"u", "v"},
                                       {"cos(u)", "sin(u)", "cos(v)", "sin(v)"},
                                       {{-0.3, 6.5}, {-0.3, 6.5}});
  NormalField constant;
  constant.kind = FieldKind::Components;
  constant.components = {parse_expression("1", {"u", "v"}),
                         parse_expression("0", {"u", "v"})};
  SubbundleReport ok = parallel_subbundle_check(torus, {constant}, 4);
  CHECK(ok.parallel);
  CHECK(ok.max_residual < 1e-8);

  NormalField rotating;
  rotating.kind = FieldKind::Components;
  rotating.components = {parse_expression("cos(u)", {"u", "v"}),
                         parse_expression("sin(u)", {"u", "v"})};
  SubbundleReport bad = parallel_subbundle_check(torus, {rotating}, 4);
  CHECK_FALSE(bad.parallel);
  CHECK(bad.max_residual > 0.5);

  NormalField zero;
  zero.kind = FieldKind::Components;
  zero.components = {parse_expression("0", {"u", "v"}),
                     parse_expression("0", {"u", "v"})};
  try {
    parallel_subbundle_check(torus, {zero}, 3);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::RankDeficientField);
  }
}

TEST_CASE("a transported seed sweeps a helix without twisting the planes") {
  ImmersionSpec helix = make_immersion({"t"}, {"cos(t)", "sin(t)", "0.5*t"},
                                       {{0.0, 12.6}});
  NormalField seed;
  seed.kind = FieldKind::Transported;
  seed.initial = {1.0, 0.0};
  SweepSpec sw;
  sw.nodes = 2001;
  sw.fiber = {0.2, 0.4};
  sw.generators = 50;
  SweepReport rep = swept_tangent_constancy(helix, seed, sw);
  CHECK(rep.field_parallel);
  CHECK(rep.max_angle < 1e-6);
  CHECK(rep.generators_sampled == 50);

  // The principal normal rotates against the transported frame, and the
  // swept tangent planes show it.
  NormalField frenet;
  frenet.kind = FieldKind::Ambient;
  frenet.components = {parse_expression("-cos(t)", {"t"}),
                       parse_expression("-sin(t)", {"t"}),
                       parse_expression("0", {"t"})};
  SweepReport rot = swept_tangent_constancy(helix, frenet, sw);
  CHECK_FALSE(rot.field_parallel);
  CHECK(rot.max_angle > 1e-3);
}

TEST_CASE("analytic sweeps work across surfaces too") {
  ImmersionSpec torus = make_immersion({"u", "v"},
                                       {"cos(u)", "sin(u)", "cos(v)", "sin(v)"},
                                       {{-0.3, 6.5}, {-0.3, 6.5}});
  NormalField constant;
  constant.kind = FieldKind::Components;
  constant.components = {parse_expression("1", {"u", "v"}),
                         parse_expression("0", {"u", "v"})};
  SweepSpec sw;
  sw.generators = 16;
  sw.fiber = {0.25, 0.5};
  SweepReport rep = swept_tangent_constancy(torus, constant, sw);
  CHECK(rep.field_parallel);
  CHECK(rep.max_angle < 1e-6);
  CHECK(rep.generators_sampled == 16);

  NormalField rotating;
  rotating.kind = FieldKind::Components;
  rotating.components = {parse_expression("cos(u)", {"u", "v"}),
                         parse_expression("sin(u)", {"u", "v"})};
  SweepReport vr = swept_tangent_constancy(torus, rotating, sw);
  CHECK_FALSE(vr.field_parallel);
  CHECK(vr.max_angle > 0.1);

  NormalField seed;
  seed.kind = FieldKind::Transported;
  seed.initial = {1.0, 0.0};
  try {
    swept_tangent_constancy(torus, seed, sw);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DomainError);
  }
}

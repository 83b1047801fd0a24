#include "focalframes/transport.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "focalframes/curvature.hpp"

namespace focalframes {
namespace transport {

namespace {

constexpr double kDriftLimit = 0.1;
constexpr double kClosureTol = 1e-12;
constexpr double kRouteTol = 1e-7;
constexpr double kAngleTol = 1e-6;
constexpr double kFlatGate = 1e-8;

Mat<double> mat_axpy(const Mat<double>& x, double h, const Mat<double>& k) {
  Mat<double> out = x;
  for (std::size_t i = 0; i < out.size(); ++i)
    for (std::size_t j = 0; j < out[i].size(); ++j) out[i][j] += h * k[i][j];
  return out;
}

} // namespace

PathSpec make_segment(const std::vector<double>& from, const std::vector<double>& to, int steps) {
  if (from.size() != to.size()) fail(Errc::ShapeMismatch, "segment endpoints differ in length");
  PathSpec path;
  path.t0 = 0.0;
  path.t1 = 1.0;
  path.steps = steps;
  for (std::size_t i = 0; i < from.size(); ++i) {
    ExprPtr t = make_var(0);
    ExprPtr expr = make_add(make_const(from[i]), make_scale(to[i] - from[i], t));
    path.curve.push_back(std::move(expr));
  }
  return path;
}

PathPoint path_at(const PathSpec& path, double t) {
  std::vector<Taylor1> vars = {Taylor1::var(1, 0, t)};
  PathPoint pp;
  pp.u.reserve(path.curve.size());
  pp.du.reserve(path.curve.size());
  for (const ExprPtr& e : path.curve) {
    Taylor1 j = eval_expr(e, vars, 1);
    pp.u.push_back(j.v);
    pp.du.push_back(j.g[0]);
  }
  return pp;
}

namespace {

int bundle_dim(const ImmersionSpec& spec, Bundle bundle) {
  return bundle == Bundle::Tangent ? spec.r() : spec.n() - spec.r();
}

/// Connection matrix contracted with the path velocity at parameter t.
Mat<double> conn_at(const ImmersionSpec& spec, const PathSpec& path, Bundle bundle, double t) {
  PathPoint pp = path_at(path, t);
  FrameData fd = extract_frames(spec, pp.u);
  const int r = spec.r();
  const int dim = bundle_dim(spec, bundle);
  Mat<double> m = mat_zero<double>(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) {
      double acc = 0.0;
      for (int s = 0; s < r; ++s)
        acc += (bundle == Bundle::Tangent ? fd.Gamma(i, j, s) : fd.gammaN(i, j, s)) * pp.du[static_cast<std::size_t>(s)];
      m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = acc;
    }
  return m;
}

/// Classic fixed-step fourth-order integration of X' = -M(t) X. `record` is
/// called with the state after every node including the first.
template <class Recorder>
Mat<double> rk4_run(const ImmersionSpec& spec, const PathSpec& path, Bundle bundle, Mat<double> x,
                    Recorder&& record) {
  if (path.steps < 2) fail(Errc::InputError, "a path needs at least 2 steps");
  const double h = (path.t1 - path.t0) / path.steps;
  record(x);
  for (int i = 0; i < path.steps; ++i) {
    double t = path.t0 + h * i;
    Mat<double> a1 = conn_at(spec, path, bundle, t);
    Mat<double> a2 = conn_at(spec, path, bundle, t + 0.5 * h);
    Mat<double> a4 = conn_at(spec, path, bundle, t + h);
    Mat<double> k1 = mat_mul(a1, x);
    Mat<double> k2 = mat_mul(a2, mat_axpy(x, -0.5 * h, k1));
    Mat<double> k3 = mat_mul(a2, mat_axpy(x, -0.5 * h, k2));
    Mat<double> k4 = mat_mul(a4, mat_axpy(x, -h, k3));
    for (std::size_t p = 0; p < x.size(); ++p)
      for (std::size_t q = 0; q < x[p].size(); ++q)
        x[p][q] -= h / 6.0 *
                   (k1[p][q] + 2.0 * k2[p][q] + 2.0 * k3[p][q] + k4[p][q]);
    record(x);
  }
  return x;
}

double bundle_norm(const ImmersionSpec& spec, Bundle bundle, const std::vector<double>& u,
                   const std::vector<double>& x) {
  double acc = 0.0;
  if (bundle == Bundle::Tangent) {
    FrameData fd = extract_frames(spec, u);
    const SmallTensor<double>& g = *fd.tensors.gT;
    for (std::size_t p = 0; p < x.size(); ++p)
      for (std::size_t q = 0; q < x.size(); ++q)
        acc += x[p] * g(static_cast<int>(p), static_cast<int>(q)) * x[q];
  } else {
    for (double v : x) acc += v * v;
  }
  return std::sqrt(std::max(acc, 0.0));
}

std::vector<double> column(const Mat<double>& m, int j) {
  std::vector<double> out(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = m[i][static_cast<std::size_t>(j)];
  return out;
}

double check_drift(const ImmersionSpec& spec, const PathSpec& path, Bundle bundle,
                   const Mat<double>& x0, const Mat<double>& x1) {
  PathPoint p0 = path_at(path, path.t0);
  PathPoint p1 = path_at(path, path.t1);
  double worst = 0.0;
  for (std::size_t j = 0; j < x0[0].size(); ++j) {
    double n0 = bundle_norm(spec, bundle, p0.u, column(x0, static_cast<int>(j)));
    double n1 = bundle_norm(spec, bundle, p1.u, column(x1, static_cast<int>(j)));
    if (n0 <= 0.0) continue;
    worst = std::max(worst, std::abs(n1 - n0) / n0);
  }
  if (worst > kDriftLimit)
    fail(Errc::StepTooCoarse, "transport drifted by more than 10 percent; raise the step count");
  return worst;
}

} // namespace

TransportResult transport_vector(const ImmersionSpec& spec, const PathSpec& path, Bundle bundle,
                                 const std::vector<double>& x0) {
  const int dim = bundle_dim(spec, bundle);
  if (static_cast<int>(x0.size()) != dim)
    fail(Errc::ShapeMismatch, "transported vector length does not match the bundle dimension");
  Mat<double> x(x0.size(), std::vector<double>(1));
  for (std::size_t i = 0; i < x0.size(); ++i) x[i][0] = x0[i];

  TransportResult res;
  Mat<double> start = x;
  Mat<double> fin = rk4_run(spec, path, bundle, x, [&](const Mat<double>& cur) {
    std::vector<double> row(cur.size());
    for (std::size_t i = 0; i < cur.size(); ++i) row[i] = cur[i][0];
    res.log.push_back(std::move(row));
  });
  res.final_components = column(fin, 0);
  res.norm_drift = check_drift(spec, path, bundle, start, fin);
  return res;
}

Mat<double> transport_matrix(const ImmersionSpec& spec, const PathSpec& path, Bundle bundle) {
  const int dim = bundle_dim(spec, bundle);
  Mat<double> x = mat_identity<double>(dim);
  Mat<double> fin = rk4_run(spec, path, bundle, x, [](const Mat<double>&) {});
  check_drift(spec, path, bundle, mat_identity<double>(dim), fin);
  return fin;
}

namespace {

double rotation_angle_2d(const Mat<double>& h, const Mat<double>& g) {
  double l11 = std::sqrt(g[0][0]);
  double l21 = g[1][0] / l11;
  double l22 = std::sqrt(std::max(g[1][1] - l21 * l21, 0.0));
  // components in the orthonormal frame: y = L^T x, so Ho = L^T H (L^T)^-1
  Mat<double> lt = {{l11, l21}, {0.0, l22}};
  Mat<double> lt_inv = {{1.0 / l11, -l21 / (l11 * l22)}, {0.0, 1.0 / l22}};
  Mat<double> ho = mat_mul(lt, mat_mul(h, lt_inv));
  return std::atan2(ho[1][0] - ho[0][1], ho[0][0] + ho[1][1]);
}

} // namespace

HolonomyReport holonomy_loop(const ImmersionSpec& spec, const PathSpec& path, Bundle bundle,
                             double tol) {
  (void)tol;
  PathPoint p0 = path_at(path, path.t0);
  PathPoint p1 = path_at(path, path.t1);
  Jet2 j0 = evaluate_jet2(spec, p0.u);
  Jet2 j1 = evaluate_jet2(spec, p1.u);
  for (std::size_t k = 0; k < j0.value.size(); ++k)
    if (std::abs(j0.value[k] - j1.value[k]) > kClosureTol)
      fail(Errc::NotClosed, "path endpoints do not meet in ambient space");

  HolonomyReport rep;
  rep.matrix = transport_matrix(spec, path, bundle);
  const int dim = static_cast<int>(rep.matrix.size());
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      rep.max_deviation_from_identity =
          std::max(rep.max_deviation_from_identity,
                   std::abs(rep.matrix[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] - (i == j ? 1.0 : 0.0)));
  if (bundle == Bundle::Tangent && spec.r() == 2) {
    FrameData fd = extract_frames(spec, p0.u);
    Mat<double> g = fd.tensors.gT_matrix();
    rep.rotation_angle = rotation_angle_2d(rep.matrix, g);
  }
  return rep;
}

RectHolonomy rect_holonomy(const ImmersionSpec& spec, const RectSpec& rect, double tol) {
  const int r = spec.r();
  if (static_cast<int>(rect.corner.size()) != r)
    fail(Errc::ShapeMismatch, "rectangle corner length does not match parameter count");
  if (rect.s_axis == rect.t_axis || rect.s_axis < 0 || rect.t_axis < 0 || rect.s_axis >= r ||
      rect.t_axis >= r)
    fail(Errc::InputError, "rectangle axes must be two distinct parameter axes");

  std::vector<double> c0 = rect.corner;
  std::vector<double> c1 = c0, c2 = c0, center = c0;
  c1[static_cast<std::size_t>(rect.s_axis)] += rect.eps;
  c2 = c1;
  c2[static_cast<std::size_t>(rect.t_axis)] += rect.delta;
  std::vector<double> c3 = c0;
  c3[static_cast<std::size_t>(rect.t_axis)] += rect.delta;
  center[static_cast<std::size_t>(rect.s_axis)] += 0.5 * rect.eps;
  center[static_cast<std::size_t>(rect.t_axis)] += 0.5 * rect.delta;

  RectHolonomy out;
  Mat<double> h = mat_identity<double>(r);
  for (const auto& [from, to] :
       {std::pair(c0, c1), std::pair(c1, c2), std::pair(c2, c3), std::pair(c3, c0)}) {
    PathSpec leg = make_segment(from, to, rect.steps_per_leg);
    h = mat_mul(transport_matrix(spec, leg, Bundle::Tangent), h);
  }
  out.measured = h;

  FrameData fd = extract_frames(spec, center);
  SmallTensor<double> curv = curvature::tangential_curvature(fd.tensors, tol);
  out.predicted = mat_identity<double>(r);
  for (int p = 0; p < r; ++p)
    for (int q = 0; q < r; ++q)
      out.predicted[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)] -=
          rect.eps * rect.delta * curv.at({p, q, rect.s_axis, rect.t_axis});

  if (r == 2) {
    Mat<double> g = extract_frames(spec, rect.corner).tensors.gT_matrix();
    out.measured_angle = rotation_angle_2d(out.measured, g);
    out.predicted_angle = rotation_angle_2d(out.predicted, extract_frames(spec, center).tensors.gT_matrix());
  }
  return out;
}

namespace {

int node_count(const GridSpec& grid) {
  int total = 1;
  for (int c : grid.counts) total *= c;
  return total;
}

std::vector<double> node_point(const GridSpec& grid, const std::vector<int>& idx) {
  std::vector<double> u(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    double span = grid.hi[k] - grid.lo[k];
    u[k] = grid.lo[k] + span * idx[k] / (grid.counts[k] - 1);
  }
  return u;
}

bool next_node(const GridSpec& grid, std::vector<int>& idx) {
  for (int k = static_cast<int>(idx.size()) - 1; k >= 0; --k) {
    if (++idx[static_cast<std::size_t>(k)] < grid.counts[static_cast<std::size_t>(k)]) return true;
    idx[static_cast<std::size_t>(k)] = 0;
  }
  return false;
}

int flat_index(const GridSpec& grid, const std::vector<int>& idx) {
  int f = 0;
  for (std::size_t k = 0; k < idx.size(); ++k) f = f * grid.counts[k] + idx[k];
  return f;
}

/// Transported values at every node, with the predecessor picked by `first`
/// (true: decrement the first nonzero axis; false: the last).
std::vector<std::vector<double>> route_transport(const ImmersionSpec& spec, const GridSpec& grid,
                                                 const std::vector<double>& xi0, bool first) {
  std::vector<std::vector<double>> values(static_cast<std::size_t>(node_count(grid)));
  std::vector<int> idx(grid.counts.size(), 0);
  do {
    int f = flat_index(grid, idx);
    bool origin = true;
    for (int v : idx)
      if (v != 0) origin = false;
    if (origin) {
      values[static_cast<std::size_t>(f)] = xi0;
      continue;
    }
    int axis = -1;
    if (first) {
      for (std::size_t k = 0; k < idx.size() && axis < 0; ++k)
        if (idx[k] > 0) axis = static_cast<int>(k);
    } else {
      for (int k = static_cast<int>(idx.size()) - 1; k >= 0 && axis < 0; --k)
        if (idx[static_cast<std::size_t>(k)] > 0) axis = k;
    }
    std::vector<int> prev = idx;
    --prev[static_cast<std::size_t>(axis)];
    PathSpec leg = make_segment(node_point(grid, prev), node_point(grid, idx), grid.steps_per_edge);
    TransportResult tr = transport_vector(spec, leg, Bundle::Normal,
                                          values[static_cast<std::size_t>(flat_index(grid, prev))]);
    values[static_cast<std::size_t>(f)] = tr.final_components;
  } while (next_node(grid, idx));
  return values;
}

Eigen::MatrixXd thin_q(const Eigen::MatrixXd& a) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  return Eigen::MatrixXd(qr.householderQ()) .leftCols(a.cols());
}

/// Largest principal angle between the column spans of two full-rank bases.
double max_principal_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd q1 = thin_q(a);
  Eigen::MatrixXd q2 = thin_q(b);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(q1.transpose() * q2);
  double smin = svd.singularValues()(svd.singularValues().size() - 1);
  smin = std::clamp(smin, -1.0, 1.0);
  return std::acos(smin);
}

} // namespace

ParallelReport parallel_variety(const ImmersionSpec& spec, const GridSpec& grid,
                                const std::vector<double>& xi0, double tol) {
  (void)tol;
  const int r = spec.r(), n = spec.n(), l = n - r;
  if (static_cast<int>(grid.lo.size()) != r || static_cast<int>(grid.hi.size()) != r ||
      static_cast<int>(grid.counts.size()) != r)
    fail(Errc::ShapeMismatch, "grid description does not match the parameter count");
  for (int c : grid.counts)
    if (c < 2) fail(Errc::InputError, "each grid axis needs at least 2 nodes");
  if (static_cast<int>(xi0.size()) != l)
    fail(Errc::ShapeMismatch, "seed vector length does not match the normal rank");

  // Flatness gate: the normal curvature has to vanish over the grid before
  // transported values can be path-independent.
  std::vector<int> idx(static_cast<std::size_t>(r), 0);
  do {
    FrameData fd = extract_frames(spec, node_point(grid, idx));
    const SmallTensor<double>& b = fd.tensors.b;
    const SmallTensor<double>& c = fd.tensors.c;
    double scale = std::max(1.0, b.max_abs() * c.max_abs());
    for (int a = 0; a < l; ++a)
      for (int b2 = 0; b2 < l; ++b2)
        for (int s = 0; s < r; ++s)
          for (int t = 0; t < r; ++t) {
            double acc = 0.0;
            for (int p = 0; p < r; ++p)
              acc += c(b2, p, s) * b(a, p, t) - c(b2, p, t) * b(a, p, s);
            if (std::abs(acc) > kFlatGate * scale)
              fail(Errc::NotFlat, "the normal connection is not flat over the grid");
          }
  } while (next_node(grid, idx));

  std::vector<std::vector<double>> xa = route_transport(spec, grid, xi0, false);
  std::vector<std::vector<double>> xb = route_transport(spec, grid, xi0, true);

  ParallelReport rep;
  for (std::size_t f = 0; f < xa.size(); ++f)
    for (int a = 0; a < l; ++a)
      rep.max_route_mismatch = std::max(
          rep.max_route_mismatch, std::abs(xa[f][static_cast<std::size_t>(a)] - xb[f][static_cast<std::size_t>(a)]));
  if (rep.max_route_mismatch > kRouteTol)
    fail(Errc::PathDependence, "staircase routes disagree; transported field is path-dependent");

  rep.points.resize(xa.size());
  idx.assign(static_cast<std::size_t>(r), 0);
  do {
    int f = flat_index(grid, idx);
    std::vector<double> u = node_point(grid, idx);
    FrameJets fr = extract_frame_jets(spec, u);
    const std::vector<double>& xi = xa[static_cast<std::size_t>(f)];

    std::vector<double> z = fr.base;
    for (int a = 0; a < l; ++a)
      for (int k = 0; k < n; ++k) z[static_cast<std::size_t>(k)] += xi[static_cast<std::size_t>(a)] * fr.normal[static_cast<std::size_t>(a)][static_cast<std::size_t>(k)].v;
    rep.points[static_cast<std::size_t>(f)] = std::move(z);

    // gamma^a_{b p} = N_a . d_p N_b from the frame jets
    std::vector<std::vector<std::vector<double>>> gamma(
        static_cast<std::size_t>(l),
        std::vector<std::vector<double>>(static_cast<std::size_t>(l),
                                         std::vector<double>(static_cast<std::size_t>(r), 0.0)));
    for (int a = 0; a < l; ++a)
      for (int b = 0; b < l; ++b)
        for (int p = 0; p < r; ++p) {
          double acc = 0.0;
          for (int k = 0; k < n; ++k)
            acc += fr.normal[static_cast<std::size_t>(a)][static_cast<std::size_t>(k)].v * fr.normal[static_cast<std::size_t>(b)][static_cast<std::size_t>(k)].g[static_cast<std::size_t>(p)];
          gamma[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)][static_cast<std::size_t>(p)] = acc;
        }

    // displaced tangent d_p z = A_p + (d_p xi^a) N_a + xi^a d_p N_a with the
    // parallel-transport derivative d_p xi^a = -gamma^a_{b p} xi^b
    Eigen::MatrixXd displaced(n, r), original(n, r);
    for (int p = 0; p < r; ++p) {
      for (int k = 0; k < n; ++k) {
        double dz = fr.tangent[static_cast<std::size_t>(p)][static_cast<std::size_t>(k)].v;
        for (int a = 0; a < l; ++a) {
          double dxi = 0.0;
          for (int b = 0; b < l; ++b) dxi -= gamma[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)][static_cast<std::size_t>(p)] * xi[static_cast<std::size_t>(b)];
          dz += dxi * fr.normal[static_cast<std::size_t>(a)][static_cast<std::size_t>(k)].v +
                xi[static_cast<std::size_t>(a)] * fr.normal[static_cast<std::size_t>(a)][static_cast<std::size_t>(k)].g[static_cast<std::size_t>(p)];
        }
        displaced(k, p) = dz;
        original(k, p) = fr.tangent[static_cast<std::size_t>(p)][static_cast<std::size_t>(k)].v;
      }
    }
    rep.max_angle = std::max(rep.max_angle, max_principal_angle(displaced, original));
  } while (next_node(grid, idx));

  rep.pass = rep.max_angle < kAngleTol;
  return rep;
}

namespace {

struct FieldEval {
  std::vector<double> xi; // l frame components
  Mat<double> dxi;        // l x r parameter derivatives
};

FieldEval eval_field(const ImmersionSpec& spec, const NormalField& field, const FrameJets& fr,
                     const std::vector<double>& u) {
  const int r = spec.r(), n = spec.n(), l = n - r;
  FieldEval out;
  out.xi.assign(static_cast<std::size_t>(l), 0.0);
  out.dxi = mat_zero<double>(l, r);
  std::vector<Taylor1> vars;
  vars.reserve(static_cast<std::size_t>(r));
  for (int i = 0; i < r; ++i) vars.push_back(Taylor1::var(r, i, u[static_cast<std::size_t>(i)]));

  if (field.kind == FieldKind::Components) {
    if (static_cast<int>(field.components.size()) != l)
      fail(Errc::ShapeMismatch, "field needs one component per normal direction");
    for (int a = 0; a < l; ++a) {
      Taylor1 j = eval_expr(field.components[static_cast<std::size_t>(a)], vars, r);
      out.xi[static_cast<std::size_t>(a)] = j.v;
      for (int s = 0; s < r; ++s) out.dxi[static_cast<std::size_t>(a)][static_cast<std::size_t>(s)] = j.g[static_cast<std::size_t>(s)];
    }
    return out;
  }
  if (field.kind == FieldKind::Ambient) {
    if (static_cast<int>(field.components.size()) != n)
      fail(Errc::ShapeMismatch, "an ambient field needs one component per ambient axis");
    std::vector<Taylor1> amb;
    amb.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) amb.push_back(eval_expr(field.components[static_cast<std::size_t>(k)], vars, r));
    for (int a = 0; a < l; ++a) {
      Taylor1 acc = Taylor1::constant(r, 0.0);
      for (int k = 0; k < n; ++k) acc = acc + fr.normal[static_cast<std::size_t>(a)][static_cast<std::size_t>(k)] * amb[static_cast<std::size_t>(k)];
      out.xi[static_cast<std::size_t>(a)] = acc.v;
      for (int s = 0; s < r; ++s) out.dxi[static_cast<std::size_t>(a)][static_cast<std::size_t>(s)] = acc.g[static_cast<std::size_t>(s)];
    }
    return out;
  }
  fail(Errc::DomainError, "a transported field is defined along a path, not across the patch");
}

Mat<double> frame_gamma(const FrameJets& fr, int l, int n, int p) {
  Mat<double> g = mat_zero<double>(l, l);
  for (int a = 0; a < l; ++a)
    for (int b = 0; b < l; ++b) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k)
        acc += fr.normal[static_cast<std::size_t>(a)][static_cast<std::size_t>(k)].v * fr.normal[static_cast<std::size_t>(b)][static_cast<std::size_t>(k)].g[static_cast<std::size_t>(p)];
      g[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = acc;
    }
  return g;
}

} // namespace

SubbundleReport parallel_subbundle_check(const ImmersionSpec& spec,
                                         const std::vector<NormalField>& fields,
                                         int samples_per_axis, double tol) {
  const int r = spec.r(), n = spec.n(), l = n - r;
  const int k_fields = static_cast<int>(fields.size());
  if (k_fields < 1 || k_fields > l)
    fail(Errc::ShapeMismatch, "the subbundle needs between 1 and codimension fields");
  if (samples_per_axis < 2) fail(Errc::InputError, "need at least 2 samples per axis");
  for (const NormalField& f : fields)
    if (f.kind == FieldKind::Transported)
      fail(Errc::DomainError, "a transported field is defined along a path, not across the patch");

  SubbundleReport rep;
  std::vector<int> idx(static_cast<std::size_t>(r), 0);
  bool more = true;
  while (more) {
    std::vector<double> u(static_cast<std::size_t>(r));
    for (int i = 0; i < r; ++i) {
      const auto& [lo, hi] = spec.domain[static_cast<std::size_t>(i)];
      u[static_cast<std::size_t>(i)] = lo + (hi - lo) * idx[static_cast<std::size_t>(i)] / (samples_per_axis - 1);
    }
    FrameJets fr = extract_frame_jets(spec, u);

    std::vector<FieldEval> evals;
    evals.reserve(fields.size());
    for (const NormalField& f : fields) evals.push_back(eval_field(spec, f, fr, u));

    Eigen::MatrixXd span(l, k_fields);
    for (int f = 0; f < k_fields; ++f)
      for (int a = 0; a < l; ++a) span(a, f) = evals[static_cast<std::size_t>(f)].xi[static_cast<std::size_t>(a)];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(span, Eigen::ComputeThinU);
    double smax = svd.singularValues()(0);
    if (svd.singularValues()(k_fields - 1) <= 1e-8 * std::max(1.0, smax))
      fail(Errc::RankDeficientField, "the fields are linearly dependent at a sample point");
    Eigen::MatrixXd q = svd.matrixU();

    for (int p = 0; p < r; ++p) {
      Mat<double> gamma = frame_gamma(fr, l, n, p);
      for (int f = 0; f < k_fields; ++f) {
        Eigen::VectorXd d(l);
        for (int a = 0; a < l; ++a) {
          double acc = evals[static_cast<std::size_t>(f)].dxi[static_cast<std::size_t>(a)][static_cast<std::size_t>(p)];
          for (int b = 0; b < l; ++b)
            acc += gamma[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] * evals[static_cast<std::size_t>(f)].xi[static_cast<std::size_t>(b)];
          d(a) = acc;
        }
        Eigen::VectorXd res = d - q * (q.transpose() * d);
        rep.max_residual = std::max(rep.max_residual, res.norm());
      }
    }
    ++rep.samples;

    more = false;
    for (int k = r - 1; k >= 0 && !more; --k) {
      if (++idx[static_cast<std::size_t>(k)] < samples_per_axis) more = true;
      else idx[static_cast<std::size_t>(k)] = 0;
    }
  }
  rep.parallel = rep.max_residual <= std::max(tol, 1e-9) * 100.0;
  return rep;
}

namespace {

/// One generator's tangent-plane tilt, measured analytically at every fiber
/// offset: the swept tangent is A_p + w d_p(xi^a N_a) next to the fiber
/// direction itself.
double generator_angle(const FrameJets& fr, const std::vector<double>& xi, const Mat<double>& dxi,
                       int r, int n, int l, const std::vector<double>& fiber) {
  std::vector<std::vector<double>> dw(
      static_cast<std::size_t>(r), std::vector<double>(static_cast<std::size_t>(n), 0.0));
  std::vector<double> w(static_cast<std::size_t>(n), 0.0);
  for (int k = 0; k < n; ++k) {
    double acc = 0.0;
    for (int a = 0; a < l; ++a) acc += xi[static_cast<std::size_t>(a)] * fr.normal[static_cast<std::size_t>(a)][static_cast<std::size_t>(k)].v;
    w[static_cast<std::size_t>(k)] = acc;
  }
  for (int p = 0; p < r; ++p)
    for (int k = 0; k < n; ++k) {
      double acc = 0.0;
      for (int a = 0; a < l; ++a)
        acc += dxi[static_cast<std::size_t>(a)][static_cast<std::size_t>(p)] * fr.normal[static_cast<std::size_t>(a)][static_cast<std::size_t>(k)].v +
               xi[static_cast<std::size_t>(a)] * fr.normal[static_cast<std::size_t>(a)][static_cast<std::size_t>(k)].g[static_cast<std::size_t>(p)];
      dw[static_cast<std::size_t>(p)][static_cast<std::size_t>(k)] = acc;
    }

  Eigen::MatrixXd base(n, r + 1);
  for (int p = 0; p < r; ++p)
    for (int k = 0; k < n; ++k) base(k, p) = fr.tangent[static_cast<std::size_t>(p)][static_cast<std::size_t>(k)].v;
  for (int k = 0; k < n; ++k) base(k, r) = w[static_cast<std::size_t>(k)];

  double worst = 0.0;
  for (double off : fiber) {
    Eigen::MatrixXd moved = base;
    for (int p = 0; p < r; ++p)
      for (int k = 0; k < n; ++k) moved(k, p) += off * dw[static_cast<std::size_t>(p)][static_cast<std::size_t>(k)];
    worst = std::max(worst, max_principal_angle(moved, base));
  }
  return worst;
}

} // namespace

SweepReport swept_tangent_constancy(const ImmersionSpec& spec, const NormalField& field,
                                    const SweepSpec& sw, double tol) {
  const int r = spec.r(), n = spec.n(), l = n - r;
  if (sw.fiber.empty()) fail(Errc::InputError, "sweep needs at least one fiber offset");
  SweepReport rep;

  if (field.kind == FieldKind::Transported) {
    if (r != 1)
      fail(Errc::DomainError,
           "a transported field is defined along a path; sweeps over more parameters need an "
           "explicit field");
    if (static_cast<int>(field.initial.size()) != l)
      fail(Errc::ShapeMismatch, "seed vector length does not match the normal rank");
    if (sw.nodes < 5) fail(Errc::InputError, "dense sweep needs at least 5 nodes");

    const auto& [lo, hi] = spec.domain[0];
    const double h = (hi - lo) / (sw.nodes - 1);
    // one dense sequential transport, then sampled generators with stencil
    // consistency as the parallelism measurement
    std::vector<std::vector<double>> xi(static_cast<std::size_t>(sw.nodes));
    xi[0] = field.initial;
    for (int i = 1; i < sw.nodes; ++i) {
      PathSpec leg = make_segment({lo + (i - 1) * h}, {lo + i * h}, 2);
      xi[static_cast<std::size_t>(i)] =
          transport_vector(spec, leg, Bundle::Normal, xi[static_cast<std::size_t>(i - 1)]).final_components;
    }

    int want = std::max(2, sw.generators);
    for (int g = 0; g < want; ++g) {
      int i = 2 + static_cast<int>((static_cast<long long>(g) * (sw.nodes - 5)) / std::max(1, want - 1));
      std::vector<double> u = {lo + i * h};
      FrameJets fr = extract_frame_jets(spec, u);

      Mat<double> dxi = mat_zero<double>(l, 1);
      Mat<double> gamma = frame_gamma(fr, l, n, 0);
      for (int a = 0; a < l; ++a) {
        double ode = 0.0;
        for (int b = 0; b < l; ++b) ode -= gamma[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] * xi[static_cast<std::size_t>(i)][static_cast<std::size_t>(b)];
        dxi[static_cast<std::size_t>(a)][0] = ode;
        // five-point stencil of the stored values measures how well the
        // transported field satisfies the parallelism equation
        double stencil = (xi[static_cast<std::size_t>(i - 2)][static_cast<std::size_t>(a)] - 8.0 * xi[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(a)] +
                          8.0 * xi[static_cast<std::size_t>(i + 1)][static_cast<std::size_t>(a)] - xi[static_cast<std::size_t>(i + 2)][static_cast<std::size_t>(a)]) /
                         (12.0 * h);
        rep.field_residual = std::max(rep.field_residual, std::abs(stencil - ode));
      }
      rep.max_angle = std::max(rep.max_angle,
                               generator_angle(fr, xi[static_cast<std::size_t>(i)], dxi, r, n, l, sw.fiber));
      ++rep.generators_sampled;
    }
    rep.field_parallel = rep.field_residual <= std::max(tol, 1e-8) * 100.0;
    return rep;
  }

  // analytic fields: sample a grid of generators across the domain
  int per_axis = std::max(2, static_cast<int>(std::llround(std::pow(
                                  static_cast<double>(std::max(2, sw.generators)), 1.0 / r))));
  std::vector<int> idx(static_cast<std::size_t>(r), 0);
  bool more = true;
  while (more) {
    std::vector<double> u(static_cast<std::size_t>(r));
    for (int i = 0; i < r; ++i) {
      const auto& [lo, hi] = spec.domain[static_cast<std::size_t>(i)];
      u[static_cast<std::size_t>(i)] = lo + (hi - lo) * idx[static_cast<std::size_t>(i)] / (per_axis - 1);
    }
    FrameJets fr = extract_frame_jets(spec, u);
    FieldEval ev = eval_field(spec, field, fr, u);

    for (int p = 0; p < r; ++p) {
      Mat<double> gamma = frame_gamma(fr, l, n, p);
      for (int a = 0; a < l; ++a) {
        double acc = ev.dxi[static_cast<std::size_t>(a)][static_cast<std::size_t>(p)];
        for (int b = 0; b < l; ++b) acc += gamma[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] * ev.xi[static_cast<std::size_t>(b)];
        rep.field_residual = std::max(rep.field_residual, std::abs(acc));
      }
    }
    rep.max_angle = std::max(rep.max_angle, generator_angle(fr, ev.xi, ev.dxi, r, n, l, sw.fiber));
    ++rep.generators_sampled;

    more = false;
    for (int k = r - 1; k >= 0 && !more; --k) {
      if (++idx[static_cast<std::size_t>(k)] < per_axis) more = true;
      else idx[static_cast<std::size_t>(k)] = 0;
    }
  }
  rep.field_parallel = rep.field_residual <= std::max(tol, 1e-8) * 100.0;
  return rep;
}

} // namespace transport
} // namespace focalframes

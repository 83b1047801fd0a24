#include "focalframes/immersion.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace focalframes {

namespace {

constexpr double kFrameThreshold = 1e-8;

std::string strip_comment(const std::string& line) {
  std::size_t hash = line.find('#');
  return hash == std::string::npos ? line : line.substr(0, hash);
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool valid_identifier(const std::string& s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return true;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  std::string last = trim(cur);
  if (!last.empty() || !out.empty()) out.push_back(last);
  return out;
}

std::vector<std::pair<double, double>> parse_domain(const std::string& text) {
  std::vector<std::pair<double, double>> out;
  const char* p = text.c_str();
  auto skip_ws = [&] {
    while (*p == ' ' || *p == '\t' || *p == '\r' || *p == '\n') ++p;
  };
  auto expect = [&](char c) {
    skip_ws();
    if (*p != c)
      fail(Errc::InputError, std::string("domain: expected '") + c + "'");
    ++p;
  };
  auto number = [&] {
    skip_ws();
    char* end = nullptr;
    double v = std::strtod(p, &end);
    if (end == p) fail(Errc::InputError, "domain: expected a number");
    p = end;
    return v;
  };
  skip_ws();
  while (*p) {
    expect('[');
    double lo = number();
    expect(',');
    double hi = number();
    expect(']');
    if (!(lo < hi)) fail(Errc::InputError, "domain: lower bound must be below upper bound");
    out.emplace_back(lo, hi);
    skip_ws();
    if (*p == ',') {
      ++p;
      skip_ws();
    }
  }
  if (out.empty()) fail(Errc::InputError, "domain: no intervals given");
  return out;
}

} // namespace

ImmersionSpec parse_immersion(const std::string& text) {
  std::string params_text, components_text, domain_text;
  bool have_params = false, have_components = false, have_domain = false;
  std::string* active = nullptr;

  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    std::string line = strip_comment(raw);
    std::string t = trim(line);
    auto section = [&](const char* label, std::string& dest, bool& have) -> bool {
      std::size_t len = std::string(label).size();
      if (t.rfind(label, 0) != 0) return false;
      if (have) fail(Errc::InputError, std::string("duplicate section '") + label + "'");
      have = true;
      dest = t.substr(len);
      active = &dest;
      return true;
    };
    if (section("params:", params_text, have_params)) continue;
    if (section("components:", components_text, have_components)) continue;
    if (section("domain:", domain_text, have_domain)) continue;
    if (t.empty()) continue;
    if (!active) fail(Errc::InputError, "content before any section label");
    *active += "\n" + line;
  }
  if (!have_params) fail(Errc::InputError, "missing 'params:' section");
  if (!have_components) fail(Errc::InputError, "missing 'components:' section");
  if (!have_domain) fail(Errc::InputError, "missing 'domain:' section");

  ImmersionSpec spec;
  for (const std::string& name : split_commas(params_text)) {
    if (!valid_identifier(name))
      fail(Errc::InputError, "bad parameter name '" + name + "'");
    spec.params.push_back(name);
  }
  if (spec.params.empty()) fail(Errc::InputError, "no parameters given");

  spec.components = parse_expression_list(components_text, spec.params);
  if (spec.n() <= spec.r())
    fail(Errc::InputError, "an immersed patch needs more components than parameters");

  spec.domain = parse_domain(domain_text);
  if (static_cast<int>(spec.domain.size()) != spec.r())
    fail(Errc::InputError, "domain interval count does not match parameter count");
  return spec;
}

ImmersionSpec make_immersion(const std::vector<std::string>& params,
                             const std::vector<std::string>& component_exprs,
                             const std::vector<std::pair<double, double>>& domain) {
  ImmersionSpec spec;
  spec.params = params;
  for (const std::string& s : component_exprs)
    spec.components.push_back(parse_expression(s, params));
  spec.domain = domain;
  if (spec.params.empty()) fail(Errc::InputError, "no parameters given");
  if (spec.n() <= spec.r())
    fail(Errc::InputError, "an immersed patch needs more components than parameters");
  if (spec.domain.size() != spec.params.size())
    fail(Errc::InputError, "domain interval count does not match parameter count");
  for (const auto& [lo, hi] : spec.domain)
    if (!(lo < hi)) fail(Errc::InputError, "domain: lower bound must be below upper bound");
  return spec;
}

namespace {

void check_point(const ImmersionSpec& spec, const std::vector<double>& u) {
  if (static_cast<int>(u.size()) != spec.r())
    fail(Errc::ShapeMismatch, "parameter point length does not match parameter count");
  constexpr double slack = 1e-9; // path endpoints may graze the boundary
  for (int i = 0; i < spec.r(); ++i) {
    const auto& [lo, hi] = spec.domain[static_cast<std::size_t>(i)];
    if (u[static_cast<std::size_t>(i)] < lo - slack || u[static_cast<std::size_t>(i)] > hi + slack)
      fail(Errc::DomainError,
           "parameter " + std::to_string(i) + " is outside the domain box");
  }
}

} // namespace

Jet2 evaluate_jet2(const ImmersionSpec& spec, const std::vector<double>& u) {
  check_point(spec, u);
  const int r = spec.r(), n = spec.n();
  std::vector<Taylor2> vars;
  vars.reserve(static_cast<std::size_t>(r));
  for (int i = 0; i < r; ++i) vars.push_back(Taylor2::var(r, i, u[static_cast<std::size_t>(i)]));

  Jet2 jet;
  jet.value.resize(static_cast<std::size_t>(n));
  jet.first.assign(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(r)));
  jet.second.assign(static_cast<std::size_t>(n),
                    mat_zero<double>(r, r));
  for (int k = 0; k < n; ++k) {
    Taylor2 t = eval_expr(spec.components[static_cast<std::size_t>(k)], vars, r);
    jet.value[static_cast<std::size_t>(k)] = t.v;
    for (int p = 0; p < r; ++p) {
      jet.first[static_cast<std::size_t>(k)][static_cast<std::size_t>(p)] = t.g[static_cast<std::size_t>(p)];
      for (int q = 0; q < r; ++q)
        jet.second[static_cast<std::size_t>(k)][static_cast<std::size_t>(p)][static_cast<std::size_t>(q)] = t.hess(p, q);
    }
  }
  return jet;
}

namespace {

Taylor1 dot(const std::vector<Taylor1>& a, const std::vector<Taylor1>& b, int m) {
  Taylor1 acc = Taylor1::constant(m, 0.0);
  for (std::size_t k = 0; k < a.size(); ++k) acc = acc + a[k] * b[k];
  return acc;
}

/// Inverse of a jet-valued symmetric matrix via d(G^-1) = -G^-1 dG G^-1.
std::vector<std::vector<Taylor1>> jet_mat_inverse(const std::vector<std::vector<Taylor1>>& g,
                                                  int m) {
  const int r = static_cast<int>(g.size());
  Mat<double> gv(static_cast<std::size_t>(r), std::vector<double>(static_cast<std::size_t>(r)));
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) gv[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = g[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].v;
  Mat<double> inv = mat_inverse(gv, 1e-13, Errc::RankDeficient);

  std::vector<std::vector<Taylor1>> out(
      static_cast<std::size_t>(r),
      std::vector<Taylor1>(static_cast<std::size_t>(r), Taylor1::constant(m, 0.0)));
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].v = inv[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  for (int s = 0; s < m; ++s) {
    // dG_s then -inv * dG_s * inv
    Mat<double> dg(static_cast<std::size_t>(r), std::vector<double>(static_cast<std::size_t>(r)));
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) dg[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = g[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].g[static_cast<std::size_t>(s)];
    Mat<double> tmp = mat_mul(inv, mat_mul(dg, inv));
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].g[static_cast<std::size_t>(s)] = -tmp[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return out;
}

} // namespace

FrameJets extract_frame_jets(const ImmersionSpec& spec, const std::vector<double>& u) {
  check_point(spec, u);
  const int r = spec.r(), n = spec.n(), l = n - r;
  Jet2 jet = evaluate_jet2(spec, u);

  // Jacobian rank gate before any normalization divides by small norms.
  Eigen::MatrixXd jac(n, r);
  for (int k = 0; k < n; ++k)
    for (int p = 0; p < r; ++p) jac(k, p) = jet.first[static_cast<std::size_t>(k)][static_cast<std::size_t>(p)];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
  double smax = svd.singularValues()(0);
  double smin = svd.singularValues()(r - 1);
  if (smin <= kFrameThreshold * std::max(1.0, smax))
    fail(Errc::RankDeficient, "the patch is rank-deficient at the evaluation point");

  FrameJets fr;
  fr.base = jet.value;

  // Tangent fields with their parameter gradients taken from the Hessian.
  fr.tangent.assign(static_cast<std::size_t>(r),
                    std::vector<Taylor1>(static_cast<std::size_t>(n), Taylor1::constant(r, 0.0)));
  for (int p = 0; p < r; ++p)
    for (int k = 0; k < n; ++k) {
      Taylor1& e = fr.tangent[static_cast<std::size_t>(p)][static_cast<std::size_t>(k)];
      e.v = jet.first[static_cast<std::size_t>(k)][static_cast<std::size_t>(p)];
      for (int s = 0; s < r; ++s) e.g[static_cast<std::size_t>(s)] = jet.second[static_cast<std::size_t>(k)][static_cast<std::size_t>(p)][static_cast<std::size_t>(s)];
    }

  std::vector<std::vector<Taylor1>> gj(
      static_cast<std::size_t>(r),
      std::vector<Taylor1>(static_cast<std::size_t>(r), Taylor1::constant(r, 0.0)));
  for (int p = 0; p < r; ++p)
    for (int q = 0; q < r; ++q) gj[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)] = dot(fr.tangent[static_cast<std::size_t>(p)], fr.tangent[static_cast<std::size_t>(q)], r);
  std::vector<std::vector<Taylor1>> ginv = jet_mat_inverse(gj, r);

  fr.gT = mat_zero<double>(r, r);
  fr.gInv = mat_zero<double>(r, r);
  for (int p = 0; p < r; ++p)
    for (int q = 0; q < r; ++q) {
      fr.gT[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)] = gj[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)].v;
      fr.gInv[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)] = ginv[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)].v;
    }

  // Orthonormal normal frame: ambient basis vectors, tangential part removed,
  // then Gram-Schmidt against accepted normals. Candidate order is fixed, so
  // the frame is deterministic.
  for (int k = 0; k < n && static_cast<int>(fr.normal.size()) < l; ++k) {
    std::vector<Taylor1> cand(static_cast<std::size_t>(n), Taylor1::constant(r, 0.0));
    cand[static_cast<std::size_t>(k)] = Taylor1::constant(r, 1.0);
    // remove sum_pq A_p ginv[p][q] (A_q . e_k); the dot is just component k
    for (int p = 0; p < r; ++p) {
      Taylor1 coef = Taylor1::constant(r, 0.0);
      for (int q = 0; q < r; ++q) coef = coef + ginv[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)] * fr.tangent[static_cast<std::size_t>(q)][static_cast<std::size_t>(k)];
      for (int j = 0; j < n; ++j) cand[static_cast<std::size_t>(j)] = cand[static_cast<std::size_t>(j)] - coef * fr.tangent[static_cast<std::size_t>(p)][static_cast<std::size_t>(j)];
    }
    for (const auto& prev : fr.normal) {
      Taylor1 coef = dot(cand, prev, r);
      for (int j = 0; j < n; ++j) cand[static_cast<std::size_t>(j)] = cand[static_cast<std::size_t>(j)] - coef * prev[static_cast<std::size_t>(j)];
    }
    Taylor1 n2 = dot(cand, cand, r);
    if (n2.v < kFrameThreshold * kFrameThreshold) continue;
    Taylor1 norm = sqrt(n2);
    for (int j = 0; j < n; ++j) cand[static_cast<std::size_t>(j)] = cand[static_cast<std::size_t>(j)] / norm;
    fr.normal.push_back(std::move(cand));
  }
  if (static_cast<int>(fr.normal.size()) != l)
    fail(Errc::RankDeficient, "could not complete an orthonormal normal frame");
  return fr;
}

FrameData extract_frames(const ImmersionSpec& spec, const std::vector<double>& u) {
  const int r = spec.r(), n = spec.n(), l = n - r;
  FrameJets fr = extract_frame_jets(spec, u);
  Jet2 jet = evaluate_jet2(spec, u);
  IndexRanges rg(n, r);

  FrameData out;
  out.base = fr.base;
  out.tangent = mat_zero<double>(r, n);
  for (int p = 0; p < r; ++p)
    for (int k = 0; k < n; ++k) out.tangent[static_cast<std::size_t>(p)][static_cast<std::size_t>(k)] = fr.tangent[static_cast<std::size_t>(p)][static_cast<std::size_t>(k)].v;
  out.normal = mat_zero<double>(l, n);
  for (int a = 0; a < l; ++a)
    for (int k = 0; k < n; ++k) out.normal[static_cast<std::size_t>(a)][static_cast<std::size_t>(k)] = fr.normal[static_cast<std::size_t>(a)][static_cast<std::size_t>(k)].v;

  FundamentalTensors<double> d = FundamentalTensors<double>::make_zero(rg, Ambient::Euclidean);
  for (int p = 0; p < r; ++p)
    for (int q = 0; q < r; ++q) (*d.gT)(p, q) = fr.gT[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)];
  for (int a = 0; a < l; ++a)
    for (int p = 0; p < r; ++p)
      for (int q = 0; q < r; ++q) {
        double acc = 0.0;
        for (int k = 0; k < n; ++k)
          acc += fr.normal[static_cast<std::size_t>(a)][static_cast<std::size_t>(k)].v * jet.second[static_cast<std::size_t>(k)][static_cast<std::size_t>(p)][static_cast<std::size_t>(q)];
        d.b(a, p, q) = acc;
      }
  // orthonormal normals: the shape operator is -g^{-1} b
  for (int a = 0; a < l; ++a)
    for (int p = 0; p < r; ++p)
      for (int q = 0; q < r; ++q) {
        double acc = 0.0;
        for (int s = 0; s < r; ++s) acc += fr.gInv[static_cast<std::size_t>(p)][static_cast<std::size_t>(s)] * d.b(a, s, q);
        d.c(a, p, q) = -acc;
      }
  out.tensors = std::move(d);

  out.Gamma = SmallTensor<double>::zeros(rg, {Axis::P, Axis::P, Axis::P});
  for (int p = 0; p < r; ++p)
    for (int q = 0; q < r; ++q)
      for (int s = 0; s < r; ++s) {
        double acc = 0.0;
        for (int t = 0; t < r; ++t) {
          double at_dot = 0.0;
          for (int k = 0; k < n; ++k)
            at_dot += fr.tangent[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)].v * jet.second[static_cast<std::size_t>(k)][static_cast<std::size_t>(q)][static_cast<std::size_t>(s)];
          acc += fr.gInv[static_cast<std::size_t>(p)][static_cast<std::size_t>(t)] * at_dot;
        }
        out.Gamma(p, q, s) = acc;
      }

  out.gammaN = SmallTensor<double>::zeros(rg, {Axis::A, Axis::A, Axis::P});
  for (int a = 0; a < l; ++a)
    for (int b = 0; b < l; ++b)
      for (int s = 0; s < r; ++s) {
        double acc = 0.0;
        for (int k = 0; k < n; ++k)
          acc += fr.normal[static_cast<std::size_t>(a)][static_cast<std::size_t>(k)].v * fr.normal[static_cast<std::size_t>(b)][static_cast<std::size_t>(k)].g[static_cast<std::size_t>(s)];
        out.gammaN(a, b, s) = acc;
      }
  return out;
}

} // namespace focalframes

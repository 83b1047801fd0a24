#include "focalframes/cli_app.hpp"

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "focalframes/curvature.hpp"
#include "focalframes/focal.hpp"
#include "focalframes/immersion.hpp"
#include "focalframes/transport.hpp"
#include "focalframes/variety.hpp"
#include "focalframes/version.hpp"

namespace focalframes {
namespace {

using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// scalar and tensor rendering

ordered_json scalar_json(const Rat& v) { return v.str(); }
ordered_json scalar_json(double v) { return v; }

template <class K>
ordered_json vec_json(const std::vector<K>& v) {
  ordered_json a = ordered_json::array();
  for (const K& x : v) a.push_back(scalar_json(x));
  return a;
}

template <class K>
ordered_json mat_json(const Mat<K>& m) {
  ordered_json a = ordered_json::array();
  for (const auto& row : m) a.push_back(vec_json(row));
  return a;
}

template <class K>
ordered_json slices_json(const SmallTensor<K>& t, int nslices, int r) {
  ordered_json a = ordered_json::array();
  for (int s = 0; s < nslices; ++s) {
    ordered_json rows = ordered_json::array();
    for (int p = 0; p < r; ++p) {
      ordered_json row = ordered_json::array();
      for (int q = 0; q < r; ++q) row.push_back(scalar_json(t(s, p, q)));
      rows.push_back(std::move(row));
    }
    a.push_back(std::move(rows));
  }
  return a;
}

template <class K>
ordered_json tensor2_json(const SmallTensor<K>& t, int d0, int d1) {
  ordered_json a = ordered_json::array();
  for (int i = 0; i < d0; ++i) {
    ordered_json row = ordered_json::array();
    for (int j = 0; j < d1; ++j) row.push_back(scalar_json(t(i, j)));
    a.push_back(std::move(row));
  }
  return a;
}

template <class K>
ordered_json tensor4_json(const SmallTensor<K>& t, int d0, int d1, int r) {
  ordered_json a = ordered_json::array();
  for (int i = 0; i < d0; ++i) {
    ordered_json bi = ordered_json::array();
    for (int j = 0; j < d1; ++j) {
      ordered_json bj = ordered_json::array();
      for (int s = 0; s < r; ++s) {
        ordered_json row = ordered_json::array();
        for (int u = 0; u < r; ++u) row.push_back(scalar_json(t(i, j, s, u)));
        bj.push_back(std::move(row));
      }
      bi.push_back(std::move(bj));
    }
    a.push_back(std::move(bi));
  }
  return a;
}

ordered_json poly_json(const MultiPoly<Rat>& p) {
  ordered_json a = ordered_json::array();
  for (const PolyRecord& rec : poly_records(p)) {
    ordered_json t;
    t["e"] = rec.exps;
    t["n"] = rec.num;
    t["d"] = rec.den;
    a.push_back(std::move(t));
  }
  return a;
}

ordered_json poly_json(const MultiPoly<double>& p) {
  ordered_json a = ordered_json::array();
  for (const auto& [e, c] : p.terms()) {
    ordered_json t;
    t["e"] = e;
    t["c"] = c;
    a.push_back(std::move(t));
  }
  return a;
}

template <class K>
ordered_json factors_json(const std::vector<focal::FocalFactor<K>>& fs) {
  ordered_json a = ordered_json::array();
  for (const auto& f : fs) {
    ordered_json j;
    j["degree"] = f.degree;
    j["multiplicity"] = f.multiplicity;
    if (f.degree == 1)
      j["linear"] = vec_json(f.linear);
    else
      j["quadratic"] = poly_json(f.quadratic);
    a.push_back(std::move(j));
  }
  return a;
}

template <class K>
ordered_json focal_report_json(const focal::FocalReport<K>& rep) {
  ordered_json j;
  j["vars"] = rep.var_names;
  j["degree"] = rep.degree;
  j["records"] = poly_json(rep.poly);
  if (rep.regular_witness) j["witness"] = vec_json(*rep.regular_witness);
  if (rep.lowered) j["lowered_records"] = poly_json(*rep.lowered);
  if (rep.factorization) j["factors"] = factors_json(*rep.factorization);
  return j;
}

ordered_json violations_json(const ValidationReport& rep) {
  ordered_json a = ordered_json::array();
  for (const Violation& v : rep.violations) {
    ordered_json j;
    j["invariant"] = v.invariant;
    j["detail"] = v.detail;
    a.push_back(std::move(j));
  }
  return a;
}

// ---------------------------------------------------------------------------
// input loading

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string digest_string(const std::string& bytes) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

std::string basename_of(const std::string& path) {
  std::size_t pos = path.find_last_of("/\\");
  return pos == std::string::npos ? path : path.substr(pos + 1);
}

int json_int(const ordered_json& o, const char* key) {
  if (!o.contains(key) || !o.at(key).is_number_integer())
    fail(Errc::InputError, std::string("missing or non-integer field: ") + key);
  return o.at(key).get<int>();
}

double json_num(const ordered_json& o, const char* key) {
  if (!o.contains(key) || !o.at(key).is_number())
    fail(Errc::InputError, std::string("missing or non-numeric field: ") + key);
  return o.at(key).get<double>();
}

std::string json_str(const ordered_json& o, const char* key) {
  if (!o.contains(key) || !o.at(key).is_string())
    fail(Errc::InputError, std::string("missing or non-string field: ") + key);
  return o.at(key).get<std::string>();
}

Ambient ambient_from(const std::string& s) {
  if (s == "projective") return Ambient::Projective;
  if (s == "affine") return Ambient::Affine;
  if (s == "euclidean") return Ambient::Euclidean;
  fail(Errc::InputError, "unknown ambient: " + s);
}

Rat rat_entry(const ordered_json& v) {
  if (v.is_string()) return Rat::from_string(v.get<std::string>());
  if (v.is_number_integer()) return Rat(static_cast<long>(v.get<long long>()));
  fail(Errc::InputError, "rational tensor entries must be integers or strings like \"3/2\"");
}

double float_entry(const ordered_json& v) {
  if (!v.is_number()) fail(Errc::InputError, "float tensor entries must be numbers");
  return v.get<double>();
}

template <class K>
K read_entry(const ordered_json& v);
template <>
Rat read_entry<Rat>(const ordered_json& v) {
  return rat_entry(v);
}
template <>
double read_entry<double>(const ordered_json& v) {
  return float_entry(v);
}

// Tensor fields take either a bare nested array or {"axes": [...], "data": [...]}
// where the axis names must spell out the documented nesting order; a mismatch
// is rejected so a silently transposed file cannot load.
const ordered_json& tensor_payload(const ordered_json& o, const char* key,
                                   std::initializer_list<const char*> axes) {
  if (!o.contains(key)) fail(Errc::InputError, std::string("missing array field: ") + key);
  const ordered_json& node = o.at(key);
  if (!node.is_object()) return node;
  if (!node.contains("axes") || !node.contains("data"))
    fail(Errc::InputError, std::string(key) + " as an object needs axes and data fields");
  std::string want;
  for (const char* ax : axes) want += std::string(want.empty() ? "" : ", ") + ax;
  const ordered_json& got = node.at("axes");
  bool ok = got.is_array() && got.size() == axes.size();
  if (ok) {
    std::size_t i = 0;
    for (const char* ax : axes) ok = ok && got[i++] == ax;
  }
  if (!ok) fail(Errc::InputError, std::string(key) + " axes must name [" + want + "] in that order");
  return node.at("data");
}

const ordered_json& expect_array(const ordered_json& o, const char* key, std::size_t len) {
  if (!o.contains(key) || !o.at(key).is_array())
    fail(Errc::InputError, std::string("missing array field: ") + key);
  const ordered_json& a = o.at(key);
  if (a.size() != len)
    fail(Errc::InputError, std::string("field ") + key + " must have " + std::to_string(len) +
                               " entries, found " + std::to_string(a.size()));
  return a;
}

template <class K>
void fill_slices(SmallTensor<K>& t, const ordered_json& doc, const char* key, int nslices,
                 int r, std::initializer_list<const char*> axes) {
  const ordered_json& a = tensor_payload(doc, key, axes);
  if (!a.is_array()) fail(Errc::InputError, std::string("missing array field: ") + key);
  if (a.size() != static_cast<std::size_t>(nslices))
    fail(Errc::InputError, std::string("field ") + key + " must have " + std::to_string(nslices) +
                               " entries, found " + std::to_string(a.size()));
  for (int s = 0; s < nslices; ++s) {
    const ordered_json& rows = a[static_cast<std::size_t>(s)];
    if (!rows.is_array() || rows.size() != static_cast<std::size_t>(r))
      fail(Errc::InputError, std::string(key) + " slices must be " + std::to_string(r) + "x" +
                                 std::to_string(r) + " matrices");
    for (int p = 0; p < r; ++p) {
      const ordered_json& row = rows[static_cast<std::size_t>(p)];
      if (!row.is_array() || row.size() != static_cast<std::size_t>(r))
        fail(Errc::InputError, std::string(key) + " slices must be " + std::to_string(r) + "x" +
                                   std::to_string(r) + " matrices");
      for (int q = 0; q < r; ++q)
        t.at({s, p, q}) = read_entry<K>(row[static_cast<std::size_t>(q)]);
    }
  }
}

template <class K>
void fill_square(SmallTensor<K>& t, const ordered_json& doc, const char* key, int d,
                 std::initializer_list<const char*> axes) {
  const ordered_json& rows = tensor_payload(doc, key, axes);
  if (!rows.is_array()) fail(Errc::InputError, std::string("missing array field: ") + key);
  if (rows.size() != static_cast<std::size_t>(d))
    fail(Errc::InputError, std::string("field ") + key + " must have " + std::to_string(d) +
                               " entries, found " + std::to_string(rows.size()));
  for (int p = 0; p < d; ++p) {
    const ordered_json& row = rows[static_cast<std::size_t>(p)];
    if (!row.is_array() || row.size() != static_cast<std::size_t>(d))
      fail(Errc::InputError, std::string(key) + " must be a " + std::to_string(d) + "x" +
                                 std::to_string(d) + " matrix");
    for (int q = 0; q < d; ++q) t.at({p, q}) = read_entry<K>(row[static_cast<std::size_t>(q)]);
  }
}

std::vector<double> doubles_from(const ordered_json& a, const char* what) {
  if (!a.is_array()) fail(Errc::InputError, std::string(what) + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : a) {
    if (!v.is_number()) fail(Errc::InputError, std::string(what) + " must be an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<int> ints_from(const ordered_json& a, const char* what) {
  if (!a.is_array()) fail(Errc::InputError, std::string(what) + " must be an array of integers");
  std::vector<int> out;
  for (const auto& v : a) {
    if (!v.is_number_integer())
      fail(Errc::InputError, std::string(what) + " must be an array of integers");
    out.push_back(v.get<int>());
  }
  return out;
}

struct Loaded {
  std::string kind;  // normalized | gauss | random | immersion
  bool exact = false;
  std::string scalars;  // rational | float, tensor kinds only
  std::string path;
  std::string digest;
  unsigned long long seed = 0;  // random kind only
  ordered_json raw;
  std::optional<FundamentalTensors<Rat>> fr;
  std::optional<FundamentalTensors<double>> fd;
  std::optional<DegenerateGaussTensors<Rat>> gr;
  std::optional<DegenerateGaussTensors<double>> gd;
  std::optional<ImmersionSpec> imm;
};

template <class K>
FundamentalTensors<K> load_normalized(const ordered_json& doc) {
  Ambient amb = ambient_from(json_str(doc, "ambient"));
  int n = json_int(doc, "n");
  int r = json_int(doc, "r");
  IndexRanges rg(n, r);
  FundamentalTensors<K> d = FundamentalTensors<K>::make_zero(rg, amb);
  fill_slices(d.b, doc, "b", rg.l, rg.r, {"a", "p", "q"});
  fill_slices(d.c, doc, "c", rg.l, rg.r, {"a", "p", "q"});
  if (doc.contains("l")) fill_square(d.lten, doc, "l", rg.r, {"p", "q"});
  if (amb == Ambient::Euclidean) {
    if (!doc.contains("gT") || !doc.contains("gN"))
      fail(Errc::InputError, "euclidean input needs both gT and gN");
    fill_square(*d.gT, doc, "gT", rg.r, {"p", "q"});
    fill_square(*d.gN, doc, "gN", rg.l, {"a", "b"});
  } else if (doc.contains("gT") || doc.contains("gN")) {
    fail(Errc::InputError, "metric blocks need a euclidean ambient");
  }
  return d;
}

template <class K>
DegenerateGaussTensors<K> load_gauss(const ordered_json& doc) {
  int n = json_int(doc, "n");
  int r = json_int(doc, "r");
  int bigN = json_int(doc, "N");
  IndexRanges rg(n, r, bigN);
  DegenerateGaussTensors<K> d = DegenerateGaussTensors<K>::make_zero(rg);
  fill_slices(d.bAlpha, doc, "b", bigN - n, rg.r, {"alpha", "p", "q"});
  fill_slices(d.cA, doc, "c", rg.l, rg.r, {"a", "p", "q"});
  return d;
}

ImmersionSpec load_immersion(const ordered_json& doc) {
  if (!doc.contains("immersion") || !doc.at("immersion").is_object())
    fail(Errc::InputError, "immersion input needs an \"immersion\" object");
  const ordered_json& im = doc.at("immersion");
  if (im.contains("text")) return parse_immersion(json_str(im, "text"));
  if (!im.contains("params") || !im.contains("components") || !im.contains("domain"))
    fail(Errc::InputError, "an immersion object needs text or params/components/domain");
  std::vector<std::string> params, comps;
  for (const auto& p : im.at("params")) {
    if (!p.is_string()) fail(Errc::InputError, "params must be strings");
    params.push_back(p.get<std::string>());
  }
  for (const auto& c : im.at("components")) {
    if (!c.is_string()) fail(Errc::InputError, "components must be strings");
    comps.push_back(c.get<std::string>());
  }
  std::vector<std::pair<double, double>> domain;
  for (const auto& box : im.at("domain")) {
    if (!box.is_array() || box.size() != 2 || !box[0].is_number() || !box[1].is_number())
      fail(Errc::InputError, "domain entries must be [lo, hi] pairs");
    domain.emplace_back(box[0].get<double>(), box[1].get<double>());
  }
  return make_immersion(params, comps, domain);
}

Loaded load_input(const std::string& path, unsigned long long seed) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::InputError, "cannot open input file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string bytes = buf.str();

  Loaded ld;
  ld.path = basename_of(path);
  ld.digest = digest_string(bytes);
  try {
    ld.raw = ordered_json::parse(bytes);
  } catch (const ordered_json::parse_error& e) {
    fail(Errc::InputError, std::string("input is not valid JSON: ") + e.what());
  }
  if (!ld.raw.is_object()) fail(Errc::InputError, "input must be a JSON object");
  ld.kind = json_str(ld.raw, "kind");
  ld.scalars = ld.raw.value("scalars", std::string("rational"));
  if (ld.scalars != "rational" && ld.scalars != "float")
    fail(Errc::InputError, "scalars must be \"rational\" or \"float\"");
  ld.exact = ld.scalars == "rational";

  if (ld.kind == "normalized") {
    if (ld.exact)
      ld.fr = load_normalized<Rat>(ld.raw);
    else
      ld.fd = load_normalized<double>(ld.raw);
  } else if (ld.kind == "gauss") {
    if (ld.exact)
      ld.gr = load_gauss<Rat>(ld.raw);
    else
      ld.gd = load_gauss<double>(ld.raw);
  } else if (ld.kind == "random") {
    Ambient amb = ambient_from(json_str(ld.raw, "ambient"));
    IndexRanges rg(json_int(ld.raw, "n"), json_int(ld.raw, "r"));
    ld.fr = random_instance(rg, amb, seed);
    ld.seed = seed;
    ld.exact = true;
    ld.scalars = "rational";
  } else if (ld.kind == "immersion") {
    ld.imm = load_immersion(ld.raw);
  } else {
    fail(Errc::InputError, "unknown input kind: " + ld.kind);
  }
  return ld;
}

// ---------------------------------------------------------------------------
// section plumbing

template <class F>
ordered_json guarded(F&& f) {
  try {
    ordered_json body = f();
    ordered_json out;
    out["status"] = "ok";
    for (auto& [k, v] : body.items()) out[k] = v;
    return out;
  } catch (const Error& e) {
    ordered_json out;
    out["status"] = "failed";
    ordered_json err;
    err["code"] = errc_name(e.code());
    err["message"] = e.what();
    out["error"] = std::move(err);
    return out;
  }
}

ordered_json skipped(const std::string& reason) {
  ordered_json out;
  out["status"] = "skipped";
  out["reason"] = reason;
  return out;
}

// ---------------------------------------------------------------------------
// sections over tensor data

template <class K>
ordered_json validation_body(const FundamentalTensors<K>& d, double tol) {
  ValidationReport rep = validate_normalized(d, tol);
  ordered_json j;
  j["pass"] = rep.pass;
  j["ambient"] = ambient_name(d.ambient);
  j["n"] = d.ranges.n;
  j["r"] = d.ranges.r;
  j["l"] = d.ranges.l;
  j["violations"] = violations_json(rep);
  return j;
}

template <class K>
ordered_json validation_body(const DegenerateGaussTensors<K>& d, double tol) {
  ValidationReport rep = validate_degenerate_gauss(d, tol);
  ordered_json j;
  j["pass"] = rep.pass;
  j["n"] = d.ranges.n;
  j["r"] = d.ranges.r;
  j["l"] = d.ranges.l;
  j["N"] = *d.ranges.bigN;
  j["violations"] = violations_json(rep);
  return j;
}

ordered_json validation_body_imm(const ImmersionSpec& spec, const std::vector<double>& at,
                                 double tol) {
  FrameData fd = extract_frames(spec, at);
  ValidationReport rep = validate_normalized(fd.tensors, tol);
  ordered_json j;
  j["pass"] = rep.pass;
  j["ambient"] = "euclidean";
  j["n"] = spec.n();
  j["r"] = spec.r();
  j["l"] = spec.n() - spec.r();
  j["at"] = at;
  j["violations"] = violations_json(rep);
  return j;
}

template <class K>
ordered_json classification_body(const FundamentalTensors<K>& d, double tol) {
  curvature::NormalizationClass<K> cls = curvature::classify_normalization(d, tol);
  ordered_json j;
  j["tag"] = curvature::normalization_name(cls.tag);
  if (cls.witness) j["witness"] = vec_json(*cls.witness);
  return j;
}

template <class K>
ordered_json curvature_body(const FundamentalTensors<K>& d, double tol) {
  const int r = d.ranges.r, l = d.ranges.l;
  SmallTensor<K> rt = curvature::tangential_curvature(d, tol);
  SmallTensor<K> rn = curvature::normal_curvature(d, tol);
  curvature::FlatnessReport fl = curvature::flatness_report(d, tol);
  ordered_json j;
  j["flat_tangential"] = fl.tangential_flat;
  j["flat_normal"] = fl.normal_flat;
  j["product_symmetry"] = fl.condition_product_symmetric;
  j["tangential"] = tensor4_json(rt, r, r, r);
  j["normal"] = tensor4_json(rn, l, l, r);
  try {
    auto [ric, ricN] = curvature::ricci_pair(d, tol);
    ordered_json rj;
    rj["tangential"] = tensor2_json(ric, r, r);
    rj["normal"] = tensor2_json(ricN, r, r);
    j["ricci"] = std::move(rj);
  } catch (const Error& e) {
    if (e.code() != Errc::WrongAmbient) throw;
  }
  if (d.ambient == Ambient::Euclidean) {
    SmallTensor<K> low = curvature::lowered_curvature(d, tol);
    j["lowered"] = tensor4_json(low, r, r, r);
    if (r == 2) {
      const SmallTensor<K>& g = *d.gT;
      K det = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
      if (!ScalarTraits<K>::is_zero(det, tol))
        j["sectional"] = scalar_json(low(0, 1, 0, 1) / det);
    }
  }
  return j;
}

template <class K>
ordered_json focal_body(const FundamentalTensors<K>& d, double tol) {
  focal::FocalReport<K> hs = focal::focus_hypersurface_poly(d, tol);
  ordered_json hsj;
  try {
    hs.factorization = focal::factor_linear(d, tol);
    hsj = focal_report_json(hs);
  } catch (const Error& e) {
    if (e.code() != Errc::NotFactorable && e.code() != Errc::EigenFailure) throw;
    hsj = focal_report_json(hs);
    ordered_json err;
    err["code"] = errc_name(e.code());
    err["message"] = e.what();
    hsj["factors_error"] = std::move(err);
  }
  ordered_json j;
  j["hypersurface"] = std::move(hsj);
  j["hypercone"] = focal_report_json(focal::focus_hypercone_poly(d, tol));
  if (d.ambient == Ambient::Euclidean) {
    focal::SliceIdentity<K> sl = focal::infinity_slice_identity(d, tol);
    ordered_json sj;
    sj["holds"] = sl.holds;
    j["slice_identity"] = std::move(sj);
  }
  return j;
}

template <class K>
ordered_json focal_body(const DegenerateGaussTensors<K>& d, double tol) {
  ordered_json j;
  j["hypersurface"] = focal_report_json(focal::focus_hypersurface_poly(d, tol));
  j["hypercone"] = focal_report_json(focal::focus_hypercone_poly(d, tol));
  j["dual_nondegenerate"] = focal::dual_nondegenerate(d, tol);
  return j;
}

// ---------------------------------------------------------------------------
// sections over immersions

std::vector<double> frames_point(const Loaded& ld, const ImmersionSpec& spec) {
  if (ld.raw.contains("frames") && ld.raw.at("frames").contains("at")) {
    std::vector<double> at = doubles_from(ld.raw.at("frames").at("at"), "frames.at");
    if (static_cast<int>(at.size()) != spec.r())
      fail(Errc::InputError, "frames.at length does not match the parameter count");
    return at;
  }
  std::vector<double> mid;
  for (const auto& [lo, hi] : spec.domain) mid.push_back(0.5 * (lo + hi));
  return mid;
}

ordered_json frames_body(const ImmersionSpec& spec, const std::vector<double>& at, double tol) {
  FrameData fd = extract_frames(spec, at);
  const int r = spec.r(), l = spec.n() - spec.r();
  ordered_json j;
  j["at"] = at;
  j["base"] = fd.base;
  j["tangent"] = mat_json(fd.tangent);
  j["normal"] = mat_json(fd.normal);
  j["gT"] = tensor2_json(*fd.tensors.gT, r, r);
  j["b"] = slices_json(fd.tensors.b, l, r);
  j["c"] = slices_json(fd.tensors.c, l, r);
  ordered_json gamma = ordered_json::array();
  for (int p = 0; p < r; ++p) {
    ordered_json bp = ordered_json::array();
    for (int q = 0; q < r; ++q) {
      ordered_json row = ordered_json::array();
      for (int s = 0; s < r; ++s) row.push_back(fd.Gamma(p, q, s));
      bp.push_back(std::move(row));
    }
    gamma.push_back(std::move(bp));
  }
  j["tangential_connection"] = std::move(gamma);
  ordered_json gn = ordered_json::array();
  for (int a = 0; a < l; ++a) {
    ordered_json ba = ordered_json::array();
    for (int b = 0; b < l; ++b) {
      ordered_json row = ordered_json::array();
      for (int s = 0; s < r; ++s) row.push_back(fd.gammaN(a, b, s));
      ba.push_back(std::move(row));
    }
    gn.push_back(std::move(ba));
  }
  j["normal_connection"] = std::move(gn);
  j["induced_pass"] = validate_normalized(fd.tensors, tol).pass;
  return j;
}

transport::PathSpec path_from(const ordered_json& blk, const ImmersionSpec& spec,
                              int steps_override) {
  if (!blk.contains("curve") || !blk.at("curve").is_array())
    fail(Errc::InputError, "a path block needs a curve array");
  transport::PathSpec ps;
  for (const auto& c : blk.at("curve")) {
    if (!c.is_string()) fail(Errc::InputError, "curve entries must be expression strings");
    ps.curve.push_back(parse_expression(c.get<std::string>(), {"t"}));
  }
  if (static_cast<int>(ps.curve.size()) != spec.r())
    fail(Errc::InputError, "curve component count does not match the parameter count");
  ps.t0 = json_num(blk, "t0");
  ps.t1 = json_num(blk, "t1");
  ps.steps = blk.value("steps", 400);
  if (steps_override > 0) ps.steps = steps_override;
  return ps;
}

transport::Bundle bundle_from(const ordered_json& blk) {
  std::string b = blk.value("bundle", std::string("tangent"));
  if (b == "tangent") return transport::Bundle::Tangent;
  if (b == "normal") return transport::Bundle::Normal;
  fail(Errc::InputError, "bundle must be \"tangent\" or \"normal\"");
}

transport::NormalField field_from(const ordered_json& f, const ImmersionSpec& spec) {
  std::string kind = json_str(f, "kind");
  transport::NormalField nf;
  if (kind == "components" || kind == "ambient") {
    nf.kind = kind == "components" ? transport::FieldKind::Components
                                   : transport::FieldKind::Ambient;
    const int want = kind == "components" ? spec.n() - spec.r() : spec.n();
    const ordered_json& comps = expect_array(f, "components", static_cast<std::size_t>(want));
    for (const auto& c : comps) {
      if (!c.is_string()) fail(Errc::InputError, "field components must be expression strings");
      nf.components.push_back(parse_expression(c.get<std::string>(), spec.params));
    }
  } else if (kind == "transported") {
    nf.kind = transport::FieldKind::Transported;
    if (!f.contains("initial"))
      fail(Errc::InputError, "a transported field needs initial components");
    nf.initial = doubles_from(f.at("initial"), "field.initial");
    if (static_cast<int>(nf.initial.size()) != spec.n() - spec.r())
      fail(Errc::InputError, "field.initial length does not match the normal rank");
  } else {
    fail(Errc::InputError, "field kind must be components, ambient, or transported");
  }
  return nf;
}

ordered_json transport_body(const Loaded& ld, const ImmersionSpec& spec, int steps_override) {
  const ordered_json& blk = ld.raw.at("transport");
  transport::PathSpec ps = path_from(blk, spec, steps_override);
  transport::Bundle bd = bundle_from(blk);
  if (!blk.contains("vector")) fail(Errc::InputError, "a transport block needs a start vector");
  std::vector<double> x0 = doubles_from(blk.at("vector"), "transport.vector");
  transport::TransportResult res = transport_vector(spec, ps, bd, x0);
  ordered_json j;
  j["bundle"] = blk.value("bundle", std::string("tangent"));
  j["t0"] = ps.t0;
  j["t1"] = ps.t1;
  j["steps"] = ps.steps;
  j["initial"] = x0;
  j["final"] = res.final_components;
  j["norm_drift"] = res.norm_drift;
  return j;
}

ordered_json holonomy_body(const Loaded& ld, const ImmersionSpec& spec, double tol,
                           int steps_override) {
  ordered_json j;
  if (ld.raw.contains("holonomy")) {
    const ordered_json& blk = ld.raw.at("holonomy");
    transport::PathSpec ps = path_from(blk, spec, steps_override);
    transport::Bundle bd = bundle_from(blk);
    transport::HolonomyReport hr = holonomy_loop(spec, ps, bd, tol);
    ordered_json lj;
    lj["bundle"] = blk.value("bundle", std::string("tangent"));
    lj["steps"] = ps.steps;
    lj["matrix"] = mat_json(hr.matrix);
    lj["rotation_angle"] = hr.rotation_angle;
    lj["max_deviation_from_identity"] = hr.max_deviation_from_identity;
    j["loop"] = std::move(lj);
  }
  if (ld.raw.contains("rect")) {
    const ordered_json& blk = ld.raw.at("rect");
    transport::RectSpec rs;
    if (!blk.contains("corner")) fail(Errc::InputError, "a rect block needs a corner");
    rs.corner = doubles_from(blk.at("corner"), "rect.corner");
    rs.s_axis = blk.value("s_axis", 0);
    rs.t_axis = blk.value("t_axis", 1);
    rs.eps = json_num(blk, "eps");
    rs.delta = json_num(blk, "delta");
    rs.steps_per_leg = blk.value("steps", 100);
    if (steps_override > 0) rs.steps_per_leg = steps_override;
    transport::RectHolonomy rh = rect_holonomy(spec, rs, tol);
    ordered_json rj;
    rj["eps"] = rs.eps;
    rj["delta"] = rs.delta;
    rj["steps_per_leg"] = rs.steps_per_leg;
    rj["measured"] = mat_json(rh.measured);
    rj["predicted"] = mat_json(rh.predicted);
    rj["measured_angle"] = rh.measured_angle;
    rj["predicted_angle"] = rh.predicted_angle;
    j["rectangle"] = std::move(rj);
  }
  if (j.empty()) fail(Errc::InputError, "no holonomy or rect block in the input");
  return j;
}

ordered_json parallel_body(const Loaded& ld, const ImmersionSpec& spec, double tol) {
  const ordered_json& blk = ld.raw.at("parallel");
  transport::GridSpec grid;
  if (!blk.contains("lo") || !blk.contains("hi") || !blk.contains("counts"))
    fail(Errc::InputError, "a parallel block needs lo, hi, and counts");
  grid.lo = doubles_from(blk.at("lo"), "parallel.lo");
  grid.hi = doubles_from(blk.at("hi"), "parallel.hi");
  grid.counts = ints_from(blk.at("counts"), "parallel.counts");
  grid.steps_per_edge = blk.value("steps_per_edge", 8);
  if (!blk.contains("seed_vector"))
    fail(Errc::InputError, "a parallel block needs a seed_vector");
  std::vector<double> xi0 = doubles_from(blk.at("seed_vector"), "parallel.seed_vector");
  transport::ParallelReport rep = parallel_variety(spec, grid, xi0, tol);
  ordered_json j;
  j["pass"] = rep.pass;
  j["max_route_mismatch"] = rep.max_route_mismatch;
  j["max_angle"] = rep.max_angle;
  ordered_json pts = ordered_json::array();
  for (const auto& p : rep.points) pts.push_back(p);
  j["points"] = std::move(pts);
  if (blk.contains("fields")) {
    std::vector<transport::NormalField> fields;
    for (const auto& f : blk.at("fields")) fields.push_back(field_from(f, spec));
    int spa = blk.value("samples_per_axis", 5);
    transport::SubbundleReport sub = parallel_subbundle_check(spec, fields, spa, tol);
    ordered_json sj;
    sj["parallel"] = sub.parallel;
    sj["max_residual"] = sub.max_residual;
    sj["samples"] = sub.samples;
    j["subbundle"] = std::move(sj);
  }
  return j;
}

ordered_json sweep_body(const Loaded& ld, const ImmersionSpec& spec, double tol) {
  const ordered_json& blk = ld.raw.at("sweep");
  if (!blk.contains("field") || !blk.at("field").is_object())
    fail(Errc::InputError, "a sweep block needs a field object");
  transport::NormalField field = field_from(blk.at("field"), spec);
  transport::SweepSpec sw;
  sw.nodes = blk.value("nodes", 2001);
  if (blk.contains("fiber")) sw.fiber = doubles_from(blk.at("fiber"), "sweep.fiber");
  sw.generators = blk.value("generators", 200);
  transport::SweepReport rep = swept_tangent_constancy(spec, field, sw, tol);
  ordered_json j;
  j["max_angle"] = rep.max_angle;
  j["field_parallel"] = rep.field_parallel;
  j["field_residual"] = rep.field_residual;
  j["generators_sampled"] = rep.generators_sampled;
  return j;
}

// ---------------------------------------------------------------------------
// command dispatch

const std::vector<std::string> kSectionOrder = {
    "validation", "classification", "curvature", "focal", "frames",
    "transport",  "holonomy",       "parallel",  "sweep"};

bool kind_has_normalized(const Loaded& ld) { return ld.fr || ld.fd; }
bool kind_has_gauss(const Loaded& ld) { return ld.gr || ld.gd; }

ordered_json run_section(const Loaded& ld, const std::string& name, double tol,
                         int steps_override) {
  if (name == "validation") {
    if (ld.fr) return guarded([&] { return validation_body(*ld.fr, tol); });
    if (ld.fd) return guarded([&] { return validation_body(*ld.fd, tol); });
    if (ld.gr) return guarded([&] { return validation_body(*ld.gr, tol); });
    if (ld.gd) return guarded([&] { return validation_body(*ld.gd, tol); });
    return guarded([&] { return validation_body_imm(*ld.imm, frames_point(ld, *ld.imm), tol); });
  }
  // Immersion inputs feed the tensor sections through the induced data at the
  // frames point; the point is recorded in the section so reruns are anchored.
  auto induced = [&](auto&& body) {
    return guarded([&] {
      std::vector<double> at = frames_point(ld, *ld.imm);
      FrameData fd = extract_frames(*ld.imm, at);
      ordered_json j;
      j["at"] = at;
      ordered_json inner = body(fd.tensors);
      for (auto& [k, v] : inner.items()) j[k] = std::move(v);
      return j;
    });
  };
  if (name == "classification") {
    if (ld.fr) return guarded([&] { return classification_body(*ld.fr, tol); });
    if (ld.fd) return guarded([&] { return classification_body(*ld.fd, tol); });
    return induced([&](const FundamentalTensors<double>& d) { return classification_body(d, tol); });
  }
  if (name == "curvature") {
    if (ld.fr) return guarded([&] { return curvature_body(*ld.fr, tol); });
    if (ld.fd) return guarded([&] { return curvature_body(*ld.fd, tol); });
    return induced([&](const FundamentalTensors<double>& d) { return curvature_body(d, tol); });
  }
  if (name == "focal") {
    if (ld.fr) return guarded([&] { return focal_body(*ld.fr, tol); });
    if (ld.fd) return guarded([&] { return focal_body(*ld.fd, tol); });
    if (ld.gr) return guarded([&] { return focal_body(*ld.gr, tol); });
    if (ld.gd) return guarded([&] { return focal_body(*ld.gd, tol); });
    return induced([&](const FundamentalTensors<double>& d) { return focal_body(d, tol); });
  }
  if (name == "frames")
    return guarded([&] { return frames_body(*ld.imm, frames_point(ld, *ld.imm), tol); });
  if (name == "transport")
    return guarded([&] { return transport_body(ld, *ld.imm, steps_override); });
  if (name == "holonomy")
    return guarded([&] { return holonomy_body(ld, *ld.imm, tol, steps_override); });
  if (name == "parallel") return guarded([&] { return parallel_body(ld, *ld.imm, tol); });
  return guarded([&] { return sweep_body(ld, *ld.imm, tol); });
}

// Which sections make sense for the loaded kind; the reason string feeds the
// skipped entries of report-all and the usage error of direct commands.
std::string inapplicable_reason(const Loaded& ld, const std::string& name) {
  if (name == "validation") return "";
  if (name == "classification" || name == "curvature")
    return (kind_has_normalized(ld) || ld.imm) ? "" : "needs normalized-variety tensor data";
  if (name == "focal")
    return (kind_has_normalized(ld) || kind_has_gauss(ld) || ld.imm) ? "" : "needs tensor data";
  // frames .. sweep
  if (!ld.imm) return "needs an immersion input";
  if (name == "frames") return "";
  if (name == "transport") return ld.raw.contains("transport") ? "" : "no transport block in the input";
  if (name == "holonomy")
    return (ld.raw.contains("holonomy") || ld.raw.contains("rect"))
               ? ""
               : "no holonomy or rect block in the input";
  if (name == "parallel") return ld.raw.contains("parallel") ? "" : "no parallel block in the input";
  return ld.raw.contains("sweep") ? "" : "no sweep block in the input";
}

std::string command_section(const std::string& cmd) {
  if (cmd == "validate") return "validation";
  if (cmd == "classify") return "classification";
  return cmd;  // curvature, focal, frames, transport, holonomy, parallel, sweep
}

ordered_json build_sections(const Loaded& ld, const std::string& cmd, double tol,
                            int steps_override) {
  ordered_json sections;
  if (cmd == "report-all") {
    bool invalid = false;
    for (const std::string& name : kSectionOrder) {
      std::string reason = inapplicable_reason(ld, name);
      if (reason.empty() && invalid && name != "validation") reason = "input failed validation";
      sections[name] = reason.empty() ? run_section(ld, name, tol, steps_override)
                                      : skipped(reason);
      if (name == "validation") {
        const ordered_json& v = sections[name];
        invalid = v.value("status", std::string()) == "failed" ||
                  (v.contains("pass") && !v.at("pass").get<bool>());
      }
    }
    return sections;
  }
  std::string name = command_section(cmd);
  std::string reason = inapplicable_reason(ld, name);
  if (!reason.empty())
    fail(Errc::UsageError, "the " + cmd + " command does not apply to this input: " + reason);
  sections[name] = run_section(ld, name, tol, steps_override);
  return sections;
}

int exit_code_for(const ordered_json& report) {
  int code = 0;
  for (const auto& [name, sec] : report.at("sections").items()) {
    if (sec.value("status", std::string()) == "failed") code = 2;
    if (name == "validation" && sec.value("status", std::string()) == "ok" &&
        sec.contains("pass") && !sec.at("pass").get<bool>())
      code = 2;
  }
  return code;
}

// ---------------------------------------------------------------------------
// markdown rendering

std::string md_scalar(const ordered_json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

bool is_scalar_array(const ordered_json& a) {
  for (const auto& v : a)
    if (v.is_array() || v.is_object()) return false;
  return true;
}

std::string monomial_str(const std::vector<unsigned>& e,
                         const std::vector<std::string>& vars) {
  std::string s;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (e[i] == 0) continue;
    if (!s.empty()) s += "*";
    s += i < vars.size() ? vars[i] : "x" + std::to_string(i);
    if (e[i] > 1) s += "^" + std::to_string(e[i]);
  }
  return s;
}

// One record of the serialized polynomial as "coeff*monomial" plus its sign.
std::pair<bool, std::string> term_str(const ordered_json& rec,
                                      const std::vector<std::string>& vars) {
  std::vector<unsigned> e = rec.at("e").get<std::vector<unsigned>>();
  std::string mono = monomial_str(e, vars);
  bool negative = false;
  std::string coeff;
  if (rec.contains("n")) {
    std::string num = rec.at("n").get<std::string>();
    std::string den = rec.at("d").get<std::string>();
    if (!num.empty() && num[0] == '-') {
      negative = true;
      num = num.substr(1);
    }
    coeff = den == "1" ? num : num + "/" + den;
  } else {
    double c = rec.at("c").get<double>();
    negative = c < 0;
    coeff = ordered_json(std::abs(c)).dump();
  }
  std::string body;
  if (mono.empty())
    body = coeff;
  else if (coeff == "1")
    body = mono;
  else
    body = coeff + "*" + mono;
  return {negative, body};
}

std::string poly_pretty(const ordered_json& records, const std::vector<std::string>& vars) {
  if (records.empty()) return "0";
  // Records are stored constant-term first; display leading term first.
  std::string out;
  for (auto it = records.rbegin(); it != records.rend(); ++it) {
    auto [neg, body] = term_str(*it, vars);
    if (out.empty())
      out = neg ? "-" + body : body;
    else
      out += (neg ? " - " : " + ") + body;
  }
  return out;
}

std::string factor_pretty(const ordered_json& f, const std::vector<std::string>& vars) {
  std::string inner;
  if (f.contains("linear")) {
    const ordered_json& lin = f.at("linear");
    for (std::size_t i = 0; i < lin.size(); ++i) {
      std::string c = md_scalar(lin[i]);
      if (c == "0") continue;
      bool neg = !c.empty() && c[0] == '-';
      if (neg) c = c.substr(1);
      std::string var = i < vars.size() ? vars[i] : "x" + std::to_string(i);
      std::string body = c == "1" ? var : c + "*" + var;
      if (inner.empty())
        inner = (neg ? "-" : "") + body;
      else
        inner += (neg ? " - " : " + ") + body;
    }
    if (inner.empty()) inner = "0";
  } else {
    inner = poly_pretty(f.at("quadratic"), vars);
  }
  int mult = f.at("multiplicity").get<int>();
  std::string out = "(" + inner + ")";
  if (mult > 1) out += "^" + std::to_string(mult);
  return out;
}

void md_value(std::ostream& os, const std::string& key, const ordered_json& v, int depth,
              const std::vector<std::string>& vars);

void md_object(std::ostream& os, const ordered_json& obj, int depth,
               std::vector<std::string> vars) {
  if (obj.contains("vars") && obj.at("vars").is_array())
    vars = obj.at("vars").get<std::vector<std::string>>();
  for (const auto& [k, v] : obj.items()) {
    if (k == "records" || k == "lowered_records") {
      os << std::string(static_cast<std::size_t>(2 * depth), ' ') << "- " << k << ": "
         << poly_pretty(v, vars) << "\n";
      continue;
    }
    if (k == "factors" && v.is_array()) {
      std::string prod;
      for (const auto& f : v) {
        if (!prod.empty()) prod += " * ";
        prod += factor_pretty(f, vars);
      }
      os << std::string(static_cast<std::size_t>(2 * depth), ' ') << "- factors: "
         << (prod.empty() ? "(none)" : prod) << "\n";
      continue;
    }
    if (k == "quadratic" && v.is_array()) {
      os << std::string(static_cast<std::size_t>(2 * depth), ' ') << "- quadratic: "
         << poly_pretty(v, vars) << "\n";
      continue;
    }
    md_value(os, k, v, depth, vars);
  }
}

void md_value(std::ostream& os, const std::string& key, const ordered_json& v, int depth,
              const std::vector<std::string>& vars) {
  std::string pad(static_cast<std::size_t>(2 * depth), ' ');
  if (v.is_object()) {
    os << pad << "- " << key << ":\n";
    md_object(os, v, depth + 1, vars);
    return;
  }
  if (v.is_array()) {
    if (is_scalar_array(v)) {
      os << pad << "- " << key << ": " << v.dump() << "\n";
      return;
    }
    os << pad << "- " << key << ":\n";
    std::size_t idx = 0;
    for (const auto& item : v) {
      if (item.is_array() && is_scalar_array(item)) {
        os << pad << "    " << item.dump() << "\n";
      } else if (item.is_object()) {
        os << pad << "  - [" << idx << "]\n";
        md_object(os, item, depth + 2, vars);
      } else {
        os << pad << "  - [" << idx << "]\n";
        std::size_t inner = 0;
        for (const auto& sub : item) md_value(os, std::to_string(inner++), sub, depth + 2, vars);
      }
      ++idx;
    }
    return;
  }
  os << pad << "- " << key << ": " << md_scalar(v) << "\n";
}

std::string render_md(const ordered_json& report) {
  std::ostringstream os;
  os << "# focalframes report\n\n";
  os << "- command: " << md_scalar(report.at("command")) << "\n";
  os << "- version: " << md_scalar(report.at("version")) << "\n";
  os << "- tolerance: " << md_scalar(report.at("tolerance")) << "\n";
  const ordered_json& in = report.at("input");
  os << "- input: " << md_scalar(in.at("path")) << " (" << md_scalar(in.at("kind")) << ", "
     << md_scalar(in.at("digest")) << ")\n";
  for (const auto& [name, sec] : report.at("sections").items()) {
    os << "\n## " << name << "\n\n";
    md_object(os, sec, 0, {});
  }
  return os.str();
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"calculus of normalized varieties: curvature, focal loci, induced transport"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::string input_path, output_path;
  std::string format = "json";
  double tol_flag = kDefaultTol;
  unsigned long long seed = 1;
  int steps = 0;

  auto* in_opt = app.add_option("-i,--input", input_path, "input description file (JSON)");
  app.add_option("-o,--output", output_path, "write the report here instead of stdout");
  app.add_option("--format", format, "report format")
      ->check(CLI::IsMember({"json", "md"}));
  auto* tol_opt = app.add_option("--tolerance", tol_flag, "comparison tolerance for float data");
  app.add_option("--seed", seed, "seed for generated instances");
  app.add_option("--steps", steps, "override integration step counts");

  static const std::vector<std::pair<const char*, const char*>> kCommands = {
      {"validate", "check the structural invariants of the input"},
      {"curvature", "curvature tensors and flatness flags of both connections"},
      {"focal", "focus hypersurface and hypercone polynomials"},
      {"classify", "normalization classification"},
      {"frames", "adapted frames and induced data of an immersed patch"},
      {"transport", "parallel transport of a vector along a path"},
      {"holonomy", "loop and rectangle holonomy of the induced connections"},
      {"parallel", "parallel displacement of the whole patch"},
      {"sweep", "tangent-plane constancy along a swept normal field"},
      {"report-all", "every applicable section in one report"},
  };
  for (const auto& [name, desc] : kCommands) app.add_subcommand(name, desc)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();

  double tol = kDefaultTol;
  if (const char* env = std::getenv("FOCALFRAMES_TOLERANCE")) {
    char* end = nullptr;
    double v = std::strtod(env, &end);
    if (end == env || *end != '\0' || !(v > 0.0)) {
      std::cerr << "invalid FOCALFRAMES_TOLERANCE value: " << env << "\n";
      return 1;
    }
    tol = v;
  }
  if (tol_opt->count() > 0) tol = tol_flag;
  if (!(tol > 0.0)) {
    std::cerr << "tolerance must be positive\n";
    return 1;
  }
  if (in_opt->count() == 0) {
    std::cerr << "an --input file is required\n";
    return 1;
  }

  auto t_start = std::chrono::steady_clock::now();
  int code = 0;
  try {
    Loaded ld = load_input(input_path, seed);

    ordered_json report;
    report["tool"] = "focalframes";
    report["version"] = kVersion;
    report["command"] = cmd;
    report["tolerance"] = tol;
    ordered_json in;
    in["path"] = ld.path;
    in["digest"] = ld.digest;
    in["kind"] = ld.kind;
    if (ld.kind != "immersion") in["scalars"] = ld.scalars;
    if (ld.kind == "random") in["seed"] = ld.seed;
    report["input"] = std::move(in);
    report["sections"] = build_sections(ld, cmd, tol, steps);

    code = exit_code_for(report);
    std::string text = format == "md" ? render_md(report) : report.dump(2) + "\n";
    if (output_path.empty()) {
      std::cout << text;
    } else {
      std::ofstream out(output_path, std::ios::binary);
      if (!out) fail(Errc::InputError, "cannot open output file: " + output_path);
      out << text;
    }
  } catch (const Error& e) {
    std::cerr << errc_name(e.code()) << ": " << e.what() << "\n";
    code = 1;
  }
  auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start)
                .count();
  std::fprintf(stderr, "wall_ms %.1f\n", ms);
  return code;
}

}  // namespace focalframes

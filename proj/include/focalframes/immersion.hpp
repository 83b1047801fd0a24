#ifndef FOCALFRAMES_IMMERSION_HPP
#define FOCALFRAMES_IMMERSION_HPP

#include <string>
#include <utility>
#include <vector>

#include "focalframes/expr.hpp"
#include "focalframes/linalg.hpp"
#include "focalframes/variety.hpp"

namespace focalframes {

/// A parametrized patch: n ambient components over r parameters with a box
/// domain. Always codimension >= 1.
struct ImmersionSpec {
  std::vector<std::string> params;
  std::vector<ExprPtr> components;
  std::vector<std::pair<double, double>> domain;

  int r() const { return static_cast<int>(params.size()); }
  int n() const { return static_cast<int>(components.size()); }
};

/// Parses the labeled text layout:
///
///   params: u, v
///   components:
///     cos(u), sin(u), v
///   domain: [0, 6.28], [-1, 1]
///
/// '#' starts a comment. Sections may appear in any order, each exactly once.
ImmersionSpec parse_immersion(const std::string& text);

ImmersionSpec make_immersion(const std::vector<std::string>& params,
                             const std::vector<std::string>& component_exprs,
                             const std::vector<std::pair<double, double>>& domain);

/// Value, Jacobian, and Hessians of the immersion at one parameter point.
struct Jet2 {
  std::vector<double> value;       // n
  Mat<double> first;               // n x r
  std::vector<Mat<double>> second; // n entries, each r x r
};

Jet2 evaluate_jet2(const ImmersionSpec& spec, const std::vector<double>& u);

/// Frame with first-order parameter dependence: tangent rows are the
/// coordinate fields, normal rows an orthonormal basis of the complement,
/// every ambient entry carrying its gradient in the parameters.
struct FrameJets {
  std::vector<double> base;                  // n
  std::vector<std::vector<Taylor1>> tangent; // r x n
  std::vector<std::vector<Taylor1>> normal;  // l x n
  Mat<double> gT;                            // r x r
  Mat<double> gInv;
};

FrameJets extract_frame_jets(const ImmersionSpec& spec, const std::vector<double>& u);

/// Frames plus the induced euclidean data and both connections at a point.
/// Gamma(p, q, s) is the tangential connection coefficient for transporting
/// the q-component along parameter s; gammaN(a, b, s) the normal one.
struct FrameData {
  std::vector<double> base;
  Mat<double> tangent; // r x n
  Mat<double> normal;  // l x n
  FundamentalTensors<double> tensors;
  SmallTensor<double> Gamma;
  SmallTensor<double> gammaN;
};

FrameData extract_frames(const ImmersionSpec& spec, const std::vector<double>& u);

} // namespace focalframes

#endif

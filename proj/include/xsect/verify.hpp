#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "xsect/parallel.hpp"
#include "xsect/quadrature.hpp"
#include "xsect/sections.hpp"
#include "xsect/shaping.hpp"

namespace xsect {

using Membership = std::function<bool(std::span<const double>)>;
using Sampler = std::function<RowVector(std::mt19937_64&)>;
/// Predicted orbit parameter of a point, used to widen scan windows; NaN if unknown.
using Predictor = std::function<double(std::span<const double>)>;
using ScalarField = std::function<double(std::span<const double>)>;

struct VerifyOptions {
  std::size_t samples = 10'000;
  std::uint64_t seed = 0;
  long long k_floor = 60;  // discrete scans cover at least [-k_floor, k_floor]
  double window = 5.0;     // continuous scans cover t* +- window
  double step = 1e-3;      // continuous grid step
  bool keep_samples = false;
  Execution exec = Execution::Parallel;
};

struct TilingFailure {
  std::size_t index = 0;
  RowVector point;
  std::string diagnostic;
};

struct SampleRecord {
  RowVector point;
  double multiplicity = 0.0;  // hit count, or the integral for Calderon checks
  double parameter = 0.0;     // solved parameter, NaN if none
};

struct TilingReport {
  std::string check;  // "discrete", "continuous" or "calderon"
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  long long k_min = 0, k_max = 0;  // widest discrete scan actually used
  double window = 0.0, step = 0.0;
  std::map<long long, std::size_t> histogram;  // multiplicity -> sample count
  std::vector<TilingFailure> failures;
  double max_deviation = 0.0;  // Calderon checks: max |integral - 1|
  std::vector<SampleRecord> records;

  bool pass() const { return failures.empty(); }
};

/// Gaussian sampler off the section's null set.
Sampler gaussian_sampler(const CrossSection& s);
/// Plain standard Gaussian in R^n.
Sampler gaussian_sampler(std::size_t n);

/// Counts #{k : xi A^k in S} for sampled xi by repeated multiplication with
/// A and A^{-1}; PASS iff every count is 1. Points the membership test
/// rejects as exceptional count as misses.
TilingReport check_discrete_tiling(const Membership& member, const Matrix& a, const Sampler& sampler,
                                   const VerifyOptions& opts, const Predictor& predict = {});
TilingReport check_discrete_tiling(const CrossSection& s, const VerifyOptions& opts);
TilingReport check_discrete_tiling(const ShapedSection& s, const VerifyOptions& opts);

/// Uniqueness in t: counts section crossings of xi exp(tB) on a grid of the
/// window around the closed-form time, refining sign changes by bisection.
TilingReport check_continuous_tiling(const CrossSection& s, const VerifyOptions& opts);
/// Crossing times of the orbit of gamma with S inside [lo, hi].
std::vector<double> continuous_hits(const CrossSection& s, std::span<const double> gamma, double lo,
                                    double hi, double step);

/// The discrete section T = {gamma exp(tB) : gamma in S, 0 <= t < 1} for
/// A = exp(B) derived from a continuous section S.
bool derived_contains(const CrossSection& s, std::span<const double> gamma);
Matrix derived_action(const CrossSection& s);
/// Discrete tiling check of T under exp(B).
TilingReport check_derived_tiling(const CrossSection& s, const VerifyOptions& opts);
/// Lebesgue measure of {t : xi exp(tB) in T} by adaptive quadrature.
/// Throws QuadratureDivergence when it differs from the closed form 1.
double calderon_integral(const CrossSection& s, std::span<const double> xi);
TilingReport check_calderon(const CrossSection& s, const VerifyOptions& opts);

/// Signed Jacobian of (t, x) -> x exp(tJ) at a point x of S (Jordan
/// coordinates), with parameters t followed by the coordinates of x that S
/// leaves free, in increasing order.
struct JacobianSample {
  double closed_form = 0.0;
  double finite_difference = 0.0;
};
JacobianSample jacobian_at(const CrossSection& s, double t, std::span<const double> x);
/// Max relative deviation between closed form and central differences.
double jacobian_check(const CrossSection& s, std::size_t samples, std::uint64_t seed);
double jacobian_check(const Matrix& b, ContinuousCase expected, std::size_t samples, std::uint64_t seed);

struct OrbitIntegral {
  double value = 0.0;
  double error = 0.0;
  long long evaluations = 0;
};

/// Integral of f over R^n computed along orbits of the continuous action:
/// over the section parameters and t, weighted by |Jacobian| |det P|.
/// Needs n <= 4. Throws QuadratureBudgetError when the budget runs out.
OrbitIntegral orbit_integral(const ScalarField& f, const CrossSection& s,
                             const QuadratureOptions& opts = {.abs_tol = 1e-10, .rel_tol = 1e-5},
                             Execution exec = Execution::Parallel);

}  // namespace xsect

#include "xsect/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "xsect/error.hpp"

namespace xsect {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr long long kMaxScan = 100'000;

// Exceptional or out-of-range points are never members.
template <class F>
bool safe_member(F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ExceptionalPoint || e.code() == ErrorCode::Overflow) return false;
    throw;
  }
}

double safe_predict(const Predictor& predict, std::span<const double> x) {
  if (!predict) return kNaN;
  try {
    return predict(x);
  } catch (const Error&) {
    return kNaN;
  }
}

struct Outcome {
  RowVector point;
  long long count = 0;
  long long lo = 0, hi = 0;
  double parameter = kNaN;
  double value = 0.0;
  std::string diagnostic;  // empty on success
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

TilingReport merge(std::string check, const std::vector<Outcome>& outcomes, const VerifyOptions& opts) {
  TilingReport r;
  r.check = std::move(check);
  r.samples = outcomes.size();
  r.seed = opts.seed;
  r.k_min = -opts.k_floor;
  r.k_max = opts.k_floor;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const Outcome& o = outcomes[i];
    r.histogram[o.count] += 1;
    r.k_min = std::min(r.k_min, o.lo);
    r.k_max = std::max(r.k_max, o.hi);
    if (!o.diagnostic.empty()) r.failures.push_back({i, o.point, o.diagnostic});
    if (opts.keep_samples) {
      r.records.push_back({o.point, r.check == "calderon" ? o.value : static_cast<double>(o.count),
                           o.parameter});
    }
  }
  return r;
}

std::size_t missing_coordinate(const CrossSection& s) {
  return s.kind == SectionKind::ContinuousReal ? s.offset() : s.offset() + 1;
}

void require_continuous(const CrossSection& s) {
  if (s.mode() != Mode::Continuous) throw Error(ErrorCode::InvalidArgument, "needs a continuous section");
}

}  // namespace

Sampler gaussian_sampler(const CrossSection& s) {
  return [s](std::mt19937_64& rng) { return sample_ambient_point(s, rng); };
}

Sampler gaussian_sampler(std::size_t n) {
  return [n](std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    RowVector x(n);
    for (auto& v : x) v = g(rng);
    return x;
  };
}

namespace {

using CoordinateMap = std::function<RowVector(std::span<const double>)>;

// Scans the orbit of each sample in the coordinates given by `to_scan`, where
// `a` and `member` act; reports keep the sampled point.
TilingReport discrete_scan(const Membership& member, const Matrix& a, const Sampler& sampler,
                           const VerifyOptions& opts, const Predictor& predict, const CoordinateMap& to_scan) {
  const Matrix ainv = inverse(a);
  const auto outcomes = map_samples<Outcome>(
      opts.samples, opts.seed,
      [&](std::size_t, std::mt19937_64& rng) {
        Outcome o;
        o.point = sampler(rng);
        o.parameter = safe_predict(predict, o.point);
        o.lo = -opts.k_floor;
        o.hi = opts.k_floor;
        if (std::isfinite(o.parameter)) {
          if (std::abs(o.parameter) > static_cast<double>(kMaxScan)) {
            o.diagnostic = "predicted parameter " + fmt(o.parameter) + " beyond the scan limit";
            return o;
          }
          o.lo = std::min(o.lo, static_cast<long long>(std::floor(o.parameter)) - 2);
          o.hi = std::max(o.hi, static_cast<long long>(std::ceil(o.parameter)) + 2);
        }
        long long hit = 0;
        const RowVector start = to_scan ? to_scan(o.point) : o.point;
        auto scan = [&](const Matrix& m, long long from, long long to, long long dir) {
          RowVector x = start;
          if (from != 0) x = x * m;
          for (long long k = from; dir > 0 ? k <= to : k >= to; k += dir) {
            if (!std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); })) break;
            if (safe_member([&] { return member(x); })) {
              ++o.count;
              hit = k;
            }
            x = x * m;
          }
        };
        scan(a, 0, o.hi, 1);
        scan(ainv, -1, o.lo, -1);
        if (o.count != 1) {
          o.diagnostic = "multiplicity " + std::to_string(o.count) + " over k in [" +
                         std::to_string(o.lo) + ", " + std::to_string(o.hi) + "]";
        } else if (std::isfinite(o.parameter) && static_cast<double>(hit) != o.parameter) {
          o.diagnostic = "hit at k = " + std::to_string(hit) + " but solver predicts " + fmt(o.parameter);
        }
        return o;
      },
      opts.exec);
  return merge("discrete", outcomes, opts);
}

// Jordan coordinates keep the blocks apart: scanning the ambient orbit of a
// conjugated section mixes |lambda|^k rounding errors from contracting blocks
// into the witness block once k reaches a few dozen.
CoordinateMap jordan_map(const CrossSection& s) {
  return [&s](std::span<const double> x) { return s.form.to_jordan(x); };
}

}  // namespace

TilingReport check_discrete_tiling(const Membership& member, const Matrix& a, const Sampler& sampler,
                                   const VerifyOptions& opts, const Predictor& predict) {
  return discrete_scan(member, a, sampler, opts, predict, {});
}

TilingReport check_discrete_tiling(const CrossSection& s, const VerifyOptions& opts) {
  if (s.mode() != Mode::Discrete) throw Error(ErrorCode::InvalidArgument, "needs a discrete section");
  return discrete_scan([&s](std::span<const double> y) { return contains_jordan(s, y); }, s.form.assembled(),
                       gaussian_sampler(s), opts,
                       [&s](std::span<const double> x) { return solve_orbit(s, x).parameter; }, jordan_map(s));
}

TilingReport check_discrete_tiling(const ShapedSection& s, const VerifyOptions& opts) {
  const auto member = [&s](std::span<const double> y) {
    if (in_null_set_jordan(s.base, y)) return false;
    const double p = orbit_parameter_jordan(s.base, y);
    if (!std::isfinite(p)) return false;
    for (const double k : {p, p - 1, p + 1}) {
      const RowVector rep = act_jordan(s.base, y, k);
      if (!contains_jordan(s.base, rep)) continue;
      const int piece = s.shells.index_of(rep);
      return piece <= s.max_piece() && k == -static_cast<double>(s.shift(piece));
    }
    return false;
  };
  return discrete_scan(member, s.base.form.assembled(), gaussian_sampler(s.base), opts,
                       [&s](std::span<const double> x) { return shaped_solve_orbit(s, x).parameter; },
                       jordan_map(s.base));
}

std::vector<double> continuous_hits(const CrossSection& s, std::span<const double> gamma, double lo,
                                    double hi, double step) {
  require_continuous(s);
  const JordanBlock& b = s.block();
  const std::size_t o = s.offset();
  const RowVector y = s.form.to_jordan(gamma);
  const std::span<const double> yb(y.data() + o, b.size());
  RowVector buf(b.size());
  // Signed distance to the equality constraint, along the witness block only.
  auto g = [&](double t) {
    flow_block(b, yb, t, buf);
    return s.kind == SectionKind::ContinuousReal ? std::abs(buf[0]) - 1.0 : buf[1];
  };
  std::vector<double> hits;
  const auto steps = static_cast<long long>(std::ceil((hi - lo) / step));
  double t0 = lo, g0 = g(lo);
  for (long long i = 1; i <= steps; ++i) {
    const double t1 = std::min(hi, lo + static_cast<double>(i) * step);
    const double g1 = g(t1);
    if ((g0 <= 0) != (g1 <= 0)) {
      double a = t0, c = t1, ga = g0;
      for (int it = 0; it < 80 && c - a > 0; ++it) {
        const double m = 0.5 * (a + c), gm = g(m);
        if ((ga <= 0) == (gm <= 0)) {
          a = m;
          ga = gm;
        } else {
          c = m;
        }
      }
      const double root = 0.5 * (a + c);
      RowVector z = flow(s.form, y, root);
      // Snap onto the equality before testing the inequalities.
      if (s.kind == SectionKind::ContinuousReal) z[o] = z[o] < 0 ? -1.0 : 1.0;
      else z[o + 1] = 0.0;
      if (safe_member([&] { return contains_jordan(s, z); })) hits.push_back(root);
    }
    t0 = t1;
    g0 = g1;
  }
  return hits;
}

TilingReport check_continuous_tiling(const CrossSection& s, const VerifyOptions& opts) {
  require_continuous(s);
  const Sampler sampler = gaussian_sampler(s);
  const auto outcomes = map_samples<Outcome>(
      opts.samples, opts.seed,
      [&](std::size_t, std::mt19937_64& rng) {
        Outcome o;
        o.point = sampler(rng);
        try {
          o.parameter = solve_orbit(s, o.point).parameter;
        } catch (const Error& e) {
          o.diagnostic = std::string("solve failed: ") + e.what();
          return o;
        }
        const auto hits =
            continuous_hits(s, o.point, o.parameter - opts.window, o.parameter + opts.window, opts.step);
        o.count = static_cast<long long>(hits.size());
        if (hits.size() != 1) {
          o.diagnostic = std::to_string(hits.size()) + " crossings within +-" + fmt(opts.window) +
                         " of t = " + fmt(o.parameter);
        } else if (std::abs(hits[0] - o.parameter) > 1e-6 * std::max(1.0, std::abs(o.parameter))) {
          o.diagnostic = "crossing at t = " + fmt(hits[0]) + " but solver gives " + fmt(o.parameter);
        }
        return o;
      },
      opts.exec);
  auto r = merge("continuous", outcomes, opts);
  r.k_min = r.k_max = 0;
  r.window = opts.window;
  r.step = opts.step;
  return r;
}

bool derived_contains(const CrossSection& s, std::span<const double> gamma) {
  require_continuous(s);
  const double tau = solve_orbit(s, gamma).parameter;
  return tau > -1.0 && tau <= 0.0;
}

Matrix derived_action(const CrossSection& s) {
  require_continuous(s);
  return one_parameter_power(s.form, 1.0);
}

TilingReport check_derived_tiling(const CrossSection& s, const VerifyOptions& opts) {
  require_continuous(s);
  // xi A^k lies in T exactly when k is in [tau, tau + 1).
  return check_discrete_tiling([&s](std::span<const double> x) { return derived_contains(s, x); },
                               derived_action(s), gaussian_sampler(s), opts,
                               [&s](std::span<const double> x) {
                                 return std::ceil(solve_orbit(s, x).parameter);
                               });
}

double calderon_integral(const CrossSection& s, std::span<const double> xi) {
  require_continuous(s);
  const double tau = solve_orbit(s, xi).parameter;
  const RowVector y = s.form.to_jordan(xi);
  const auto chi = [&](double t) {
    const RowVector z = s.form.from_jordan(flow(s.form, y, t));
    return safe_member([&] { return derived_contains(s, z); }) ? 1.0 : 0.0;
  };
  // The hit set is [tau, tau + 1); integrate over a window that contains it.
  const double lo = std::floor(tau) - 2.0, hi = std::floor(tau) + 3.0;
  // Panels narrower than the hit set, so no panel can hide both of its ends.
  const QuadratureOptions q{.abs_tol = 1e-9, .rel_tol = 0.0, .max_panels = 4000,
                            .max_evaluations = 10'000'000, .discontinuous = true,
                            .initial_panels = 20};
  const auto r = integrate(chi, lo, hi, q);
  if (std::abs(r.value - 1.0) > 1e-6) {
    throw Error(ErrorCode::QuadratureDivergence,
                "quadrature gives " + fmt(r.value) + " for a hit set of length 1 (error estimate " +
                    fmt(r.error) + ")");
  }
  return r.value;
}

TilingReport check_calderon(const CrossSection& s, const VerifyOptions& opts) {
  require_continuous(s);
  const Sampler sampler = gaussian_sampler(s);
  const auto outcomes = map_samples<Outcome>(
      opts.samples, opts.seed,
      [&](std::size_t, std::mt19937_64& rng) {
        Outcome o;
        o.point = sampler(rng);
        try {
          o.parameter = solve_orbit(s, o.point).parameter;
          o.value = calderon_integral(s, o.point);
          o.count = std::llround(o.value);
        } catch (const Error& e) {
          o.value = kNaN;
          o.diagnostic = std::string(to_string(e.code())) + ": " + e.what();
        }
        return o;
      },
      opts.exec);
  auto r = merge("calderon", outcomes, opts);
  r.k_min = r.k_max = 0;
  for (const auto& o : outcomes)
    if (std::isfinite(o.value)) r.max_deviation = std::max(r.max_deviation, std::abs(o.value - 1.0));
  return r;
}

namespace {

double closed_jacobian(const CrossSection& s, double t, std::span<const double> x) {
  const std::size_t o = s.offset(), m = missing_coordinate(s);
  const double sign = m % 2 == 0 ? 1.0 : -1.0;
  const double growth = std::exp(t * s.action.trace());  // det exp(tB)
  double lead = 0.0;  // (x J)_m
  switch (s.kind) {
    case SectionKind::ContinuousReal: lead = s.block().re * x[o]; break;
    case SectionKind::ContinuousComplex: lead = s.beta * x[o]; break;
    case SectionKind::ContinuousZeroNilpotent: lead = x[o]; break;
    case SectionKind::ContinuousImaginaryNilpotent: lead = s.beta * x[o]; break;
    default: throw Error(ErrorCode::InvalidArgument, "needs a continuous section");
  }
  return sign * lead * growth;
}

ContinuousCase case_of(SectionKind k) {
  switch (k) {
    case SectionKind::ContinuousReal: return ContinuousCase::RealNonzero;
    case SectionKind::ContinuousComplex: return ContinuousCase::ComplexNonzero;
    case SectionKind::ContinuousZeroNilpotent: return ContinuousCase::ZeroNilpotent;
    case SectionKind::ContinuousImaginaryNilpotent: return ContinuousCase::ImaginaryNilpotent;
    default: return ContinuousCase::None;
  }
}

}  // namespace

JacobianSample jacobian_at(const CrossSection& s, double t, std::span<const double> x) {
  require_continuous(s);
  const std::size_t n = s.dim(), m = missing_coordinate(s);
  constexpr double h = 1e-5;
  Matrix d(n);
  auto put = [&](std::size_t row, const RowVector& plus, const RowVector& minus) {
    for (std::size_t j = 0; j < n; ++j) d(row, j) = (plus[j] - minus[j]) / (2.0 * h);
  };
  put(0, flow(s.form, x, t + h), flow(s.form, x, t - h));
  std::size_t row = 1;
  RowVector xp(x.begin(), x.end()), xm = xp;
  for (std::size_t c = 0; c < n; ++c) {
    if (c == m) continue;
    xp[c] += h;
    xm[c] -= h;
    put(row++, flow(s.form, xp, t), flow(s.form, xm, t));
    xp[c] = xm[c] = x[c];
  }
  return {closed_jacobian(s, t, x), determinant(d)};
}

double jacobian_check(const CrossSection& s, std::size_t samples, std::uint64_t seed) {
  require_continuous(s);
  double worst = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    auto rng = sample_rng(seed, i);
    const double t = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
    const RowVector x = s.form.to_jordan(sample_section_point(s, rng, 2.0));
    const auto j = jacobian_at(s, t, x);
    worst = std::max(worst, std::abs(j.closed_form - j.finite_difference) / std::abs(j.closed_form));
  }
  return worst;
}

double jacobian_check(const Matrix& b, ContinuousCase expected, std::size_t samples, std::uint64_t seed) {
  const auto s = build_continuous_section(b);
  if (case_of(s.kind) != expected) {
    throw Error(ErrorCode::InvalidArgument, "generator falls under " + std::string(to_string(case_of(s.kind))) +
                                                ", not " + std::string(to_string(expected)));
  }
  return jacobian_check(s, samples, seed);
}

OrbitIntegral orbit_integral(const ScalarField& f, const CrossSection& s, const QuadratureOptions& opts,
                             Execution exec) {
  require_continuous(s);
  const std::size_t n = s.dim(), o = s.offset(), m = missing_coordinate(s);
  if (n > 4) throw Error(ErrorCode::DimensionTooHigh, "orbit integration supports n <= 4");
  const double inf = std::numeric_limits<double>::infinity();
  const double det_p = std::abs(determinant(s.form.conjugator));
  const bool real = s.kind == SectionKind::ContinuousReal;

  // Integration order, outermost first; kTime marks t. In the real case t
  // goes outermost: with t fixed the remaining integrals are Gaussian-like,
  // whereas t innermost leaves an |y|^{-tr/alpha} tail in the outer variables.
  constexpr std::size_t kTime = static_cast<std::size_t>(-1);
  std::vector<std::size_t> order;
  if (real) order.push_back(kTime);
  for (std::size_t c = 0; c < n; ++c)
    if (c != m && !(real && c == o)) order.push_back(c);
  if (!real) order.push_back(kTime);

  auto bounds = [&](std::size_t c, const RowVector& x) -> std::pair<double, double> {
    if (c == o && s.kind == SectionKind::ContinuousComplex) return {1.0, s.upper};
    if (c == o && s.kind == SectionKind::ContinuousImaginaryNilpotent) return {0.0, inf};
    if (c == o + 2 && s.kind == SectionKind::ContinuousImaginaryNilpotent) return {0.0, s.upper * x[o]};
    return {-inf, inf};
  };

  // Orbit points beyond floating range contribute nothing: f must vanish at infinity.
  auto integrand = [&](double t, const RowVector& x) {
    const RowVector y = s.form.from_jordan(flow(s.form, x, t));
    for (double v : y)
      if (!std::isfinite(v)) return 0.0;
    const double fv = f(y);
    if (fv == 0.0) return 0.0;
    const double w = std::abs(closed_jacobian(s, t, x));
    if (w == 0.0 || !std::isfinite(w)) return 0.0;
    return fv * w * det_p;
  };

  QuadratureBudget budget(opts.max_evaluations);
  std::function<QuadratureResult(std::size_t, double, RowVector, Execution)> level =
      [&](std::size_t i, double t, RowVector x, Execution ex) -> QuadratureResult {
    const std::size_t c = order[i];
    const bool last = i + 1 == order.size();
    if (c == kTime) {
      const auto inner = [&, x](double tv) {
        return last ? integrand(tv, x) : level(i + 1, tv, x, Execution::Serial).value;
      };
      return integrate(inner, -inf, inf, opts, budget, ex);
    }
    const auto inner = [&, x, c, t](double v) {
      RowVector xi = x;
      xi[c] = v;
      return last ? integrand(t, xi) : level(i + 1, t, std::move(xi), Execution::Serial).value;
    };
    const auto [lo, hi] = bounds(c, x);
    // The weight |s| has a kink at 0 in the zero-nilpotent case.
    if (c == o && s.kind == SectionKind::ContinuousZeroNilpotent) {
      const auto a = integrate(inner, -inf, 0.0, opts, budget, ex);
      const auto b = integrate(inner, 0.0, inf, opts, budget, ex);
      return {a.value + b.value, a.error + b.error, a.converged && b.converged};
    }
    return integrate(inner, lo, hi, opts, budget, ex);
  };

  OrbitIntegral out;
  bool converged = true;
  for (double sgn : real ? std::vector<double>{1.0, -1.0} : std::vector<double>{0.0}) {
    RowVector x(n, 0.0);
    if (real) x[o] = sgn;
    const auto r = level(0, 0.0, x, exec);
    out.value += r.value;
    out.error += r.error;
    converged = converged && r.converged;
  }
  out.evaluations = budget.used();
  if (budget.exhausted() && !converged) throw QuadratureBudgetError(out.value, out.error, out.evaluations);
  return out;
}

}  // namespace xsect

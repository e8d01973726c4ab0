#include "xsect/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <vector>

namespace xsect {
namespace {

// Kronrod abscissae on [0, 1]; odd indices are the 7-point Gauss nodes.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double lo, hi, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

// Node positions of a panel: center first, then pairs (c - h x, c + h x),
// then the two endpoints.
std::array<double, 17> nodes(double lo, double hi) {
  const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
  std::array<double, 17> x{};
  x[15] = lo;
  x[16] = hi;
  x[0] = c;
  for (int j = 0; j < 7; ++j) {
    x[1 + 2 * j] = c - h * kXgk[j];
    x[2 + 2 * j] = c + h * kXgk[j];
  }
  return x;
}

Panel combine(double lo, double hi, const double* fv, bool jumps) {
  const double h = 0.5 * (hi - lo);
  const double fc = fv[0];
  double resg = fc * kWg[3], resk = fc * kWgk[7], resabs = std::abs(resk);
  for (int j = 0; j < 7; ++j) {
    const double f1 = fv[1 + 2 * j], f2 = fv[2 + 2 * j];
    resk += kWgk[j] * (f1 + f2);
    resabs += kWgk[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
  }
  const double mean = 0.5 * resk;
  double resasc = kWgk[7] * std::abs(fc - mean);
  for (int j = 0; j < 7; ++j)
    resasc += kWgk[j] * (std::abs(fv[1 + 2 * j] - mean) + std::abs(fv[2 + 2 * j] - mean));
  const double ah = std::abs(h);
  resasc *= ah;
  resabs *= ah;
  double err = std::abs((resk - resg) * h);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
  if (jumps) {
    const auto [mn, mx] = std::minmax_element(fv, fv + 17);
    err = std::max(err, (*mx - *mn) * (hi - lo));
  }
  return {lo, hi, resk * h, err};
}

// Integrand on a finite u-interval after removing infinite bounds.
struct Mapped {
  const std::function<double(double)>& f;
  double a, b;
  bool lower_inf, upper_inf;

  double operator()(double u) const {
    double x, w;
    if (lower_inf && upper_inf) {
      const double d = 1.0 - u * u;
      x = u / d;
      w = (1.0 + u * u) / (d * d);
    } else if (upper_inf) {
      x = a + u / (1.0 - u);
      w = 1.0 / ((1.0 - u) * (1.0 - u));
    } else if (lower_inf) {
      x = b - u / (1.0 - u);
      w = 1.0 / ((1.0 - u) * (1.0 - u));
    } else {
      x = u;
      w = 1.0;
    }
    const double v = f(x);
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "integrand is not finite");
    return v == 0.0 ? 0.0 : v * w;
  }
};

void evaluate(const Mapped& g, const double* x, double* out, int count, Execution exec) {
  if (exec == Execution::Serial) {
    for (int i = 0; i < count; ++i) out[i] = g(x[i]);
    return;
  }
  const int threads = thread_hint() > 0 ? thread_hint() : omp_get_max_threads();
  bool failed = false;
  std::string message;
#pragma omp parallel for schedule(static) num_threads(threads)
  for (int i = 0; i < count; ++i) {
    try {
      out[i] = g(x[i]);
    } catch (const std::exception& e) {
#pragma omp critical(xsect_quadrature)
      {
        failed = true;
        message = e.what();
      }
    }
  }
  if (failed) throw Error(ErrorCode::InvalidArgument, message);
}

}  // namespace

QuadratureBudgetError::QuadratureBudgetError(double est, double err, long long evals)
    : Error(ErrorCode::BudgetExceeded,
            [&] {
              std::ostringstream os;
              os.precision(17);
              os << "quadrature budget exhausted after " << evals
                 << " evaluations; partial estimate " << est << " +- " << err;
              return os.str();
            }()),
      estimate(est),
      error_bound(err),
      evaluations(evals) {}

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& opts, QuadratureBudget& budget, Execution exec) {
  if (std::isnan(a) || std::isnan(b)) throw Error(ErrorCode::InvalidArgument, "NaN integration bound");
  if (a == b) return {};
  if (a > b) {
    auto r = integrate(f, b, a, opts, budget, exec);
    r.value = -r.value;
    return r;
  }
  const Mapped g{f, a, b, std::isinf(a), std::isinf(b)};
  double ulo = a, uhi = b;
  if (g.lower_inf && g.upper_inf) {
    ulo = -1.0;
    uhi = 1.0;
  } else if (g.lower_inf || g.upper_inf) {
    ulo = 0.0;
    uhi = 1.0;
  }
  const bool jumps = opts.discontinuous && std::isfinite(a) && std::isfinite(b);
  const std::size_t per = jumps ? 17 : 15;

  // Evaluates the panels [cuts[i], cuts[i+1]) in one batch.
  auto batch = [&](const std::vector<double>& cuts) {
    const std::size_t count = cuts.size() - 1;
    std::vector<double> x(count * per), fv(x.size());
    for (std::size_t i = 0; i < count; ++i) {
      const auto xi = nodes(cuts[i], cuts[i + 1]);
      std::copy(xi.begin(), xi.begin() + static_cast<std::ptrdiff_t>(per), x.begin() + static_cast<std::ptrdiff_t>(i * per));
    }
    evaluate(g, x.data(), fv.data(), static_cast<int>(x.size()), exec);
    budget.spend(static_cast<long long>(x.size()));
    std::vector<Panel> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(combine(cuts[i], cuts[i + 1], fv.data() + i * per, jumps));
    return out;
  };

  std::priority_queue<Panel> open;
  std::vector<Panel> frozen;  // too narrow to split further
  double value = 0.0, error = 0.0;
  {
    const int first = std::max(1, opts.initial_panels);
    std::vector<double> cuts;
    for (int i = 0; i <= first; ++i) cuts.push_back(i == first ? uhi : ulo + (uhi - ulo) * i / first);
    for (const Panel& p : batch(cuts)) {
      value += p.value;
      error += p.error;
      open.push(p);
    }
  }
  int panels = static_cast<int>(open.size());
  bool converged = true;
  while (!open.empty() && error > std::max(opts.abs_tol, opts.rel_tol * std::abs(value))) {
    if (panels >= opts.max_panels || budget.exhausted()) {
      converged = false;
      break;
    }
    const Panel p = open.top();
    open.pop();
    const double mid = 0.5 * (p.lo + p.hi);
    if (!(mid > p.lo && mid < p.hi) || p.hi - p.lo <= 1e-15 * std::max(1.0, std::abs(mid))) {
      frozen.push_back(p);
      continue;
    }
    const auto halves = batch({p.lo, mid, p.hi});
    value += halves[0].value + halves[1].value - p.value;
    error += halves[0].error + halves[1].error - p.error;
    open.push(halves[0]);
    open.push(halves[1]);
    ++panels;
  }
  // Re-add in a fixed order to shed the running-sum drift.
  value = error = 0.0;
  for (; !open.empty(); open.pop()) {
    value += open.top().value;
    error += open.top().error;
  }
  for (const auto& p : frozen) {
    value += p.value;
    error += p.error;
  }
  return {value, error, converged && error <= std::max(opts.abs_tol, opts.rel_tol * std::abs(value))};
}

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& opts) {
  QuadratureBudget budget(opts.max_evaluations);
  const auto r = integrate(f, a, b, opts, budget);
  if (budget.exhausted() && !r.converged) throw QuadratureBudgetError(r.value, r.error, budget.used());
  return r;
}

}  // namespace xsect

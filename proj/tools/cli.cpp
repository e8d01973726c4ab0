#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <ostream>
#include <stdexcept>

#include "CLI11.hpp"
#include "xsect/error.hpp"
#include "xsect/json_io.hpp"

namespace xsect::cli {
namespace {

struct Flags {
  std::string matrix, generator, lattice, section, region, mode, target, out, dump;
  std::optional<long long> order;
  std::optional<std::size_t> pieces, samples;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::size_t grid = 200;
  double extent = 4.0;
  std::vector<double> point;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::NoSection:
    case ErrorCode::NoWavelet:
    case ErrorCode::DetOne:
    case ErrorCode::MixedModuli: return kNonexistence;
    default: return kFailure;
  }
}

/// Flag access that records everything it reads in the manifest.
class Context {
 public:
  Context(std::string command, const Flags& f) : f_(f) { manifest_.command = std::move(command); }

  const Flags& flags() const { return f_; }
  RunManifest& manifest() { return manifest_; }

  Json load(const std::string& spec, const std::string& name) {
    if (spec.empty()) throw UsageError("--" + name + " is required");
    const bool inline_json = spec.front() == '[' || spec.front() == '{';
    const std::string bytes = inline_json ? spec : read_file(spec);
    manifest_.add_input(name, bytes);
    return parse_json(bytes);
  }

  Matrix action() {
    if (!f_.generator.empty()) return matrix_from_json(load(f_.generator, "generator"));
    if (f_.matrix.empty()) throw UsageError("--matrix (or --generator) is required");
    return matrix_from_json(load(f_.matrix, "matrix"));
  }

  Mode mode() {
    if (f_.mode.empty()) throw UsageError("--mode continuous|discrete is required");
    manifest_.options["mode"] = f_.mode;
    return f_.mode == "continuous" ? Mode::Continuous : Mode::Discrete;
  }

  double tol(double fallback) {
    const double t = f_.tol.value_or(fallback);
    manifest_.tolerances["tol"] = t;
    return t;
  }

  std::uint64_t seed() {
    if (!f_.seed) throw UsageError("--seed is required for sampled commands");
    manifest_.seed = *f_.seed;
    return *f_.seed;
  }

  std::size_t samples(std::size_t fallback) {
    const std::size_t n = f_.samples.value_or(fallback);
    manifest_.options["samples"] = n;
    return n;
  }

  std::string target(const std::string& fallback) {
    const std::string t = f_.target.empty() ? fallback : f_.target;
    if (!t.empty()) manifest_.options["target"] = t;
    return t;
  }

  /// With `tol_builds` false, --tol belongs to the command's own check and
  /// the section is built at the default tolerance.
  CrossSection section(bool tol_builds = true) {
    if (!f_.section.empty()) {
      const Json j = load(f_.section, "section");
      return section_from_json(j.contains("result") ? j.at("result") : j);
    }
    const Mode m = mode();
    const Matrix a = action();
    const double t = tol_builds ? tol(kDefaultTol) : kDefaultTol;
    return m == Mode::Continuous ? build_continuous_section(a, t) : build_discrete_section(a, t);
  }

  Lattice lattice(std::size_t n) {
    if (f_.lattice.empty()) {
      manifest_.options["lattice"] = "integer";
      return Lattice::integer(n);
    }
    return lattice_from_json(load(f_.lattice, "lattice"));
  }

  RegionPtr region() {
    if (f_.region.empty()) throw UsageError("--region is required");
    const Json j = load(f_.region, "region");
    return region_from_json(j.contains("result") && j.at("result").contains("region") ? j.at("result").at("region")
                                                                                      : j);
  }

  RowVector point(std::size_t n) {
    if (f_.point.size() != n) {
      throw UsageError("expected a point with " + std::to_string(n) + " coordinates, got " +
                       std::to_string(f_.point.size()));
    }
    manifest_.options["point"] = f_.point;
    return f_.point;
  }

 private:
  const Flags& f_;
  RunManifest manifest_;
};

using PointFn = std::function<std::pair<bool, double>(std::span<const double>)>;

/// Grid of cell centres over [-extent, extent]^n, one CSV row per point.
void export_grid(const std::string& path, std::size_t n, double extent, std::size_t grid, const PointFn& f) {
  if (n > 3) throw Error(ErrorCode::DimensionTooHigh, "grid export needs n <= 3");
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::Io, "cannot write " + path);
  for (std::size_t i = 0; i < n; ++i) os << 'x' << i + 1 << ',';
  os << "member,parameter\n";
  if (!(extent > 0.0) || grid == 0) return;
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= grid;
  RowVector x(n);
  const double h = 2.0 * extent / static_cast<double>(grid);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t r = idx;
    for (std::size_t i = n; i-- > 0;) {
      x[i] = -extent + (static_cast<double>(r % grid) + 0.5) * h;
      r /= grid;
    }
    const auto [member, parameter] = f(x);
    for (double v : x) os << format_number(v) << ',';
    os << (member ? 1 : 0) << ',' << (std::isfinite(parameter) ? format_number(parameter) : "nan") << '\n';
  }
}

PointFn section_probe(const CrossSection& s) {
  return [s](std::span<const double> x) -> std::pair<bool, double> {
    try {
      const auto sol = solve_orbit(s, x);
      return {contains(s, x), sol.parameter};
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ExceptionalPoint || e.code() == ErrorCode::Overflow) return {false, NAN};
      throw;
    }
  };
}

PointFn shaped_probe(const ShapedSection& s) {
  return [s](std::span<const double> x) -> std::pair<bool, double> {
    try {
      const auto sol = shaped_solve_orbit(s, x);
      return {shaped_contains(s, x), sol.parameter};
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ExceptionalPoint || e.code() == ErrorCode::Overflow) return {false, NAN};
      throw;
    }
  };
}

void maybe_dump(Context& c, std::size_t n, double extent, const PointFn& f) {
  const auto& fl = c.flags();
  if (fl.dump.empty()) return;
  c.manifest().options["grid"] = fl.grid;
  c.manifest().options["extent"] = extent;
  export_grid(fl.dump, n, extent, fl.grid, f);
}

Json solution_json(const OrbitSolution& sol) {
  return {{"parameter", sol.parameter}, {"representative", sol.representative}};
}

ShapeTarget shape_target(const std::string& t) {
  if (t == "finite") return ShapeTarget::FiniteMeasure;
  if (t == "bounded") return ShapeTarget::Bounded;
  throw UsageError("--target must be finite or bounded for shaping, got " + t);
}

ShapedSection shape(const CrossSection& s, ShapeTarget t) {
  return t == ShapeTarget::FiniteMeasure ? to_finite_measure(s) : to_bounded(s);
}

// Each handler returns the result object and the exit code.
using Outcome = std::pair<Json, int>;

Outcome cmd_classify(Context& c) {
  const Mode m = c.mode();
  const Matrix a = c.action();
  const double tol = c.tol(kDefaultTol);
  if (m == Mode::Continuous) return {verdict_to_json(classify_continuous(a, tol)), kSuccess};
  Json j = verdict_to_json(classify_discrete(a, tol));
  const bool unitary = is_similar_to_unitary(a, tol);
  j["similar_to_unitary"] = unitary;
  j["order_infinity_wavelet"] = !unitary;
  return {j, kSuccess};
}

Outcome cmd_build(Context& c) {
  const CrossSection s = c.section();
  maybe_dump(c, s.dim(), c.flags().extent, section_probe(s));
  return {section_to_json(s), kSuccess};
}

Outcome cmd_shape(Context& c) {
  const CrossSection s = c.section();
  if (s.mode() != Mode::Discrete) throw UsageError("shaping needs a discrete section");
  const ShapedSection shaped = shape(s, shape_target(c.target("")));
  const std::size_t n = c.samples(100'000);
  const auto est = estimate_measure(shaped, n, c.seed());
  Json j = shaped_to_json(shaped);
  j["measure"] = {{"estimate", est.estimate}, {"bound", est.bound}, {"samples", est.samples}};
  maybe_dump(c, s.dim(), c.flags().extent, shaped_probe(shaped));
  return {j, kSuccess};
}

Outcome cmd_solve(Context& c) {
  const CrossSection s = c.section();
  const RowVector x = c.point(s.dim());
  const std::string t = c.target("");
  Json j{{"point", x}};
  if (t.empty()) {
    const auto sol = solve_orbit(s, x);
    j["solution"] = solution_json(sol);
    j["in_section"] = contains(s, sol.representative);
  } else {
    const ShapedSection shaped = shape(s, shape_target(t));
    const auto sol = shaped_solve_orbit(shaped, x);
    j["solution"] = solution_json(sol);
    j["in_section"] = shaped_contains(shaped, sol.representative);
  }
  return {j, kSuccess};
}

Outcome cmd_verify(Context& c) {
  const CrossSection s = c.section(false);
  const std::string t = c.target("tiling");
  VerifyOptions o;
  o.samples = c.samples(10'000);
  o.seed = c.seed();
  const bool continuous = s.mode() == Mode::Continuous;
  auto need_continuous = [&] {
    if (!continuous) throw UsageError("--target " + t + " needs a continuous section");
  };
  TilingReport r;
  if (t == "tiling") {
    r = continuous ? check_continuous_tiling(s, o) : check_discrete_tiling(s, o);
  } else if (t == "finite" || t == "bounded") {
    if (continuous) throw UsageError("shaping needs a discrete section");
    r = check_discrete_tiling(shape(s, shape_target(t)), o);
  } else if (t == "calderon") {
    need_continuous();
    r = check_calderon(s, o);
  } else if (t == "derived") {
    need_continuous();
    r = check_derived_tiling(s, o);
  } else if (t == "jacobian") {
    need_continuous();
    const double tol = c.tol(1e-6);
    const double worst = jacobian_check(s, o.samples, o.seed);
    const bool pass = worst <= tol;
    return {{{"check", "jacobian"}, {"pass", pass}, {"samples", o.samples}, {"seed", o.seed},
             {"max_relative_error", worst}},
            pass ? kSuccess : kCheckFailed};
  } else {
    throw UsageError("--target must be tiling, finite, bounded, calderon, derived or jacobian");
  }
  return {report_to_json(r), r.pass() ? kSuccess : kCheckFailed};
}

Outcome cmd_integrate(Context& c) {
  const CrossSection s = c.section(false);
  if (s.mode() != Mode::Continuous) throw UsageError("integrate needs a continuous section");
  const std::string t = c.target("gaussian");
  if (t != "gaussian") throw UsageError("--target must be gaussian");
  const double rel = c.tol(1e-5);
  const auto field = [](std::span<const double> x) {
    double r = 0.0;
    for (double v : x) r += v * v;
    return std::exp(-0.5 * r);
  };
  QuadratureOptions q;
  q.abs_tol = 1e-10;
  q.rel_tol = rel;
  const auto res = orbit_integral(field, s, q);
  const double exact = std::pow(2.0 * std::numbers::pi, 0.5 * static_cast<double>(s.dim()));
  const double err = std::abs(res.value - exact) / exact;
  return {{{"field", "gaussian"},
           {"value", res.value},
           {"error_estimate", res.error},
           {"evaluations", res.evaluations},
           {"exact", exact},
           {"relative_error", err}},
          kSuccess};
}

Outcome cmd_wavelet_check(Context& c) {
  const Matrix a = c.action();
  const Lattice lattice = c.lattice(a.size());
  const RegionPtr k = c.region();
  WaveletCheckOptions o;
  o.samples = c.samples(10'000);
  o.seed = c.seed();
  std::optional<long long> order;
  if (c.flags().order) {
    order = *c.flags().order;
    c.manifest().options["order"] = *order;
  } else {
    o.min_translates = static_cast<long long>(c.flags().pieces.value_or(1));
    c.manifest().options["min_translates"] = o.min_translates;
  }
  const auto r = is_multiwavelet_set(*k, a, lattice, order, o);
  // A bounded region is drawn over its own reach, so an empty one has no rows.
  maybe_dump(c, k->dim(), std::isfinite(k->reach()) ? k->reach() : c.flags().extent,
             [&](std::span<const double> x) -> std::pair<bool, double> { return {k->contains(x), NAN}; });
  Json j = report_to_json(r);
  j["order"] = order ? Json(*order) : Json("infinity");
  return {j, r.pass() ? kSuccess : kCheckFailed};
}

Outcome cmd_wavelet_partition(Context& c) {
  const RegionPtr k = c.region();
  const Lattice lattice = c.lattice(k->dim());
  const auto& f = c.flags();
  if (f.order.has_value() == f.pieces.has_value()) throw UsageError("give exactly one of --order and --pieces");
  SelectorOptions so;
  so.seed = c.seed();
  std::vector<RegionPtr> parts;
  if (f.order) {
    if (*f.order < 1) throw UsageError("--order must be positive");
    c.manifest().options["order"] = *f.order;
    parts = partition_multiwavelet_set(k, lattice, static_cast<std::size_t>(*f.order), so);
  } else {
    c.manifest().options["pieces"] = *f.pieces;
    parts = partition_order_infinity(k, lattice, *f.pieces, so);
  }
  // Each piece must meet every dual coset exactly once; sample xi in Y.
  const std::size_t n = c.samples(1000);
  Json pieces = Json::array();
  bool all = true;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto counts = map_samples<long long>(
        n, so.seed + 1000 + i,
        [&](std::size_t, std::mt19937_64& rng) {
          std::uniform_real_distribution<double> u(0.0, 1.0);
          std::vector<double> coeff(lattice.dim());
          for (auto& v : coeff) v = u(rng);
          const RowVector xi = coeff * lattice.dual();
          return translation_count(*parts[i], lattice, xi).count;
        },
        Execution::Parallel);
    std::size_t bad = 0;
    for (long long v : counts) bad += v != 1;
    all = all && bad == 0;
    pieces.push_back({{"region", parts[i]->to_json()}, {"count_one_failures", bad}});
  }
  return {{{"pieces", pieces}, {"samples", n}, {"pass", all}}, all ? kSuccess : kCheckFailed};
}

Outcome cmd_wavelet_dimfn(Context& c) {
  const RegionPtr w = c.region();
  const std::size_t n = w->dim();
  Json values = Json::array();
  auto value = [&](const RowVector& xi) {
    const auto d = dimension_function(*w, xi);
    return Json{{"point", xi}, {"value", d.count}, {"truncated", d.truncated}};
  };
  if (!c.flags().point.empty()) {
    values.push_back(value(c.point(n)));
  } else {
    const std::size_t count = c.samples(100);
    const auto pts = map_samples<RowVector>(count, c.seed(),
                                            [&](std::size_t, std::mt19937_64& rng) {
                                              std::normal_distribution<double> g(0.0, 1.0);
                                              RowVector x(n);
                                              for (auto& v : x) v = g(rng);
                                              return x;
                                            },
                                            Execution::Serial);
    for (const auto& p : pts) values.push_back(value(p));
  }
  return {{{"values", values}}, kSuccess};
}

Outcome cmd_wavelet_build_inf(Context& c) {
  const Matrix a = c.action();
  const Lattice lattice = c.lattice(a.size());
  const std::size_t certify = c.flags().pieces.value_or(10);
  c.manifest().options["pieces"] = certify;
  const auto set = build_order_infinity_set(a, lattice, certify);
  Json certs = Json::array();
  for (const auto& cert : set.certificates) {
    certs.push_back({{"piece", cert.piece}, {"power", cert.power}, {"lattice_coords", cert.lattice_coords},
                     {"translate", cert.translate}});
  }
  maybe_dump(c, a.size(), c.flags().extent, [&](std::span<const double> x) -> std::pair<bool, double> {
    return {set.region->contains(x), NAN};
  });
  return {{{"region", set.region->to_json()},
           {"construction", set.construction},
           {"section", section_to_json(set.base)},
           {"certificates", certs},
           {"search_radius", set.search_radius}},
          kSuccess};
}

const CLI::Validator kPositive(
    [](std::string& v) -> std::string {
      try {
        if (std::stod(v) > 0.0) return {};
      } catch (const std::exception&) {
      }
      return "must be positive, got " + v;
    },
    "POSITIVE");

void add_common(CLI::App* app, Flags& f) {
  app->add_option("--matrix", f.matrix, "matrix A (or generator B) as a JSON file or inline JSON");
  app->add_option("--generator", f.generator, "generator B of exp(tB), JSON file or inline");
  app->add_option("--lattice", f.lattice, "lattice basis, rows are generators (default: integer lattice)");
  app->add_option("--section", f.section, "section JSON written by `build`");
  app->add_option("--region", f.region, "region JSON");
  app->add_option("--mode", f.mode, "continuous or discrete")->check(CLI::IsMember({"continuous", "discrete"}));
  app->add_option("--target", f.target, "shaping target or check to run");
  app->add_option("--order", f.order, "multi-wavelet order L");
  app->add_option("--pieces", f.pieces, "number of pieces or certificates")->check(kPositive);
  app->add_option("--samples", f.samples, "number of samples")->check(kPositive);
  app->add_option("--seed", f.seed, "random seed");
  app->add_option("--tol", f.tol, "tolerance")->check(kPositive);
  app->add_option("--out", f.out, "write the JSON result to this file");
  app->add_option("--dump", f.dump, "write grid samples as CSV");
  app->add_option("--grid", f.grid, "grid points per axis for --dump")->check(kPositive);
  app->add_option("--extent", f.extent, "half-width of the --dump grid")->check(kPositive);
}

void write_output(const Flags& f, const std::string& text, std::ostream& out) {
  if (f.out.empty()) {
    out << text;
    return;
  }
  std::ofstream os(f.out);
  if (!os) throw Error(ErrorCode::Io, "cannot write " + f.out);
  os << text;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cross-sections of matrix actions and multi-wavelet sets", "xsect"};
  app.require_subcommand(1);
  Flags f;
  using Handler = Outcome (*)(Context&);
  std::vector<std::pair<CLI::App*, std::pair<std::string, Handler>>> commands;
  auto add = [&](CLI::App* parent, const std::string& name, const std::string& help, Handler h,
                 const std::string& full, bool point = false) {
    CLI::App* sub = parent->add_subcommand(name, help);
    add_common(sub, f);
    if (point) sub->add_option("point", f.point, "point coordinates");
    commands.push_back({sub, {full, h}});
  };
  add(&app, "classify", "existence verdicts for a matrix or generator", cmd_classify, "classify");
  add(&app, "build", "construct a cross-section", cmd_build, "build");
  add(&app, "shape", "finite-measure or bounded section", cmd_shape, "shape");
  add(&app, "solve", "orbit parameter and representative of a point", cmd_solve, "solve", true);
  add(&app, "verify", "sampled tiling, Calderon and Jacobian checks", cmd_verify, "verify");
  add(&app, "integrate", "integral of a Gaussian through the orbit decomposition", cmd_integrate, "integrate");
  CLI::App* wavelet = app.add_subcommand("wavelet", "multi-wavelet sets");
  wavelet->require_subcommand(1);
  add(wavelet, "check", "check both tiling equations", cmd_wavelet_check, "wavelet check");
  add(wavelet, "partition", "split a set into translation-count-one pieces", cmd_wavelet_partition,
      "wavelet partition");
  add(wavelet, "dimfn", "dimension function", cmd_wavelet_dimfn, "wavelet dimfn", true);
  add(wavelet, "build-inf", "order-infinity construction", cmd_wavelet_build_inf, "wavelet build-inf");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    out << dump_json(Json{{"error", {{"code", "Usage"}, {"message", e.what()}}}}) << '\n';
    return kFailure;
  }

  for (auto& [sub, entry] : commands) {
    if (!sub->parsed()) continue;
    Context c(entry.first, f);
    try {
      auto [result, code] = entry.second(c);
      write_output(f, dump_json(Json{{"manifest", c.manifest().to_json()}, {"result", result}}) + "\n", out);
      return code;
    } catch (const UsageError& e) {
      err << e.what() << '\n';
      out << dump_json(Json{{"error", {{"code", "Usage"}, {"message", e.what()}}}}) << '\n';
      return kFailure;
    } catch (const Error& e) {
      err << to_string(e.code()) << ": " << e.what() << '\n';
      out << dump_json(Json{{"manifest", c.manifest().to_json()},
                            {"error", {{"code", std::string(to_string(e.code()))}, {"message", e.what()}}}})
          << '\n';
      return exit_code(e.code());
    } catch (const std::exception& e) {
      err << e.what() << '\n';
      out << dump_json(Json{{"error", {{"code", "Internal"}, {"message", e.what()}}}}) << '\n';
      return kFailure;
    }
  }
  return kFailure;
}

}  // namespace xsect::cli

#include "xsect/json_io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "xsect/error.hpp"

namespace xsect {
namespace {

void write_json(std::ostringstream& os, const Json& j, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(indent * depth), ' ');
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << '{' << nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ',' << nl;
        first = false;
        os << pad << Json(it.key()).dump() << (indent > 0 ? ": " : ":");
        write_json(os, it.value(), indent, depth + 1);
      }
      os << nl << close << '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool flat = true;
      for (const auto& v : j) flat = flat && !v.is_structured();
      os << '[';
      bool first = true;
      for (const auto& v : j) {
        if (!first) os << (flat ? ", " : ",");
        first = false;
        if (!flat) os << nl << pad;
        write_json(os, v, indent, depth + 1);
      }
      if (!flat) os << nl << close;
      os << ']';
      return;
    }
    case Json::value_t::number_float: os << format_number(j.get<double>()); return;
    default: os << j.dump(); return;
  }
}

std::vector<double> numbers(const Json& j, const char* what) {
  if (!j.is_array()) throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw Error(ErrorCode::InvalidArgument, std::string(what) + " must contain numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw Error(ErrorCode::InvalidArgument, std::string("missing field \"") + key + "\"");
  return j.at(key);
}

Mode mode_from_string(const std::string& s) {
  if (s == "continuous") return Mode::Continuous;
  if (s == "discrete") return Mode::Discrete;
  throw Error(ErrorCode::InvalidArgument, "mode must be continuous or discrete, got " + s);
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::string format_number(double x) {
  if (!std::isfinite(x)) return "null";
  if (x == 0.0) x = 0.0;  // no "-0"
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string dump_json(const Json& j, int indent) {
  std::ostringstream os;
  write_json(os, j, indent, 0);
  return os.str();
}

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed JSON: ") + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Matrix matrix_from_json(const Json& j) {
  const Json& rows = j.is_object() ? field(j, "matrix") : j;
  if (!rows.is_array() || rows.empty()) throw Error(ErrorCode::InvalidArgument, "matrix must be a non-empty array of rows");
  std::vector<std::vector<double>> r;
  for (const auto& row : rows) r.push_back(numbers(row, "matrix row"));
  for (const auto& row : r)
    if (row.size() != r.size()) throw Error(ErrorCode::InvalidArgument, "matrix must be square");
  return Matrix::from_rows(r);
}

Json matrix_to_json(const Matrix& m) { return m.rows(); }

Lattice lattice_from_json(const Json& j) {
  return Lattice(matrix_from_json(j.is_object() ? field(j, "basis") : j));
}

Json verdict_to_json(const ContinuousVerdict& v) {
  Json j{{"mode", "continuous"}, {"exists", v.exists}, {"case", std::string(to_string(v.kind))}};
  if (v.exists) j["witness_block"] = v.witness_block;
  return j;
}

Json verdict_to_json(const DiscreteVerdict& v) {
  Json j{{"mode", "discrete"},
         {"exists", v.exists},
         {"finite_measure", v.finite_measure},
         {"bounded", v.bounded},
         {"case", std::string(to_string(v.kind))},
         {"det_modulus", v.det_modulus}};
  if (v.exists) j["witness_block"] = v.witness_block;
  return j;
}

Json section_to_json(const CrossSection& s) {
  const auto& b = s.block();
  return {{"kind", std::string(to_string(s.kind))},
          {"mode", std::string(to_string(s.mode()))},
          {"action", matrix_to_json(s.action)},
          {"block", {{"index", s.block_index}, {"offset", b.offset}, {"re", b.re}, {"im", b.im}, {"chain", b.chain}}},
          {"orientation", s.orientation},
          {"log_rate", s.log_rate},
          {"beta", s.beta},
          {"upper", s.upper},
          {"tol", s.tol},
          {"conjugator", matrix_to_json(s.form.conjugator)},
          {"set", s.describe()},
          {"null_set", s.null_set()}};
}

CrossSection section_from_json(const Json& j) {
  const Json& body = j.contains("section") ? j.at("section") : j;
  const Mode mode = mode_from_string(lower(field(body, "mode").get<std::string>()));
  const Matrix action = matrix_from_json(field(body, "action"));
  const double tol = body.contains("tol") ? body.at("tol").get<double>() : kDefaultTol;
  CrossSection s = mode == Mode::Continuous ? build_continuous_section(action, tol) : build_discrete_section(action, tol);
  if (body.contains("kind") && body.at("kind").get<std::string>() != to_string(s.kind)) {
    throw Error(ErrorCode::InvalidArgument, "section kind " + body.at("kind").get<std::string>() +
                                                " does not match the rebuilt " + std::string(to_string(s.kind)));
  }
  return s;
}

Json shaped_to_json(const ShapedSection& s, int pieces) {
  Json list = Json::array();
  for (int k = 1; k <= std::min(pieces, s.max_piece()); ++k) {
    const Box box = s.shifted_piece_box(k);
    list.push_back({{"piece", k},
                    {"shift", s.shift(k)},
                    {"weight", s.weight(k)},
                    {"measure", s.piece_measure(k)},
                    {"radius", s.piece_radius(k)},
                    {"box", {{"lo", box.lo}, {"hi", box.hi}}}});
  }
  return {{"target", s.target == ShapeTarget::FiniteMeasure ? "finite" : "bounded"},
          {"section", section_to_json(s.base)},
          {"det_modulus", s.delta},
          {"shell_dim", s.shells.dim()},
          {"pieces", list}};
}

ShapedSection shaped_from_json(const Json& j) {
  const std::string target = field(j, "target").get<std::string>();
  const CrossSection base = section_from_json(field(j, "section"));
  if (target == "finite") return to_finite_measure(base);
  if (target == "bounded") return to_bounded(base);
  throw Error(ErrorCode::InvalidArgument, "target must be finite or bounded, got " + target);
}

Json report_to_json(const TilingReport& r, std::size_t max_failures) {
  Json hist = Json::object();
  for (const auto& [k, n] : r.histogram) hist[std::to_string(k)] = n;
  Json fails = Json::array();
  for (std::size_t i = 0; i < std::min(max_failures, r.failures.size()); ++i) {
    const auto& f = r.failures[i];
    fails.push_back({{"index", f.index}, {"point", f.point}, {"diagnostic", f.diagnostic}});
  }
  Json j{{"check", r.check},
         {"pass", r.pass()},
         {"samples", r.samples},
         {"seed", r.seed},
         {"failure_count", r.failures.size()},
         {"failures", fails},
         {"histogram", hist}};
  if (r.check == "discrete" || r.check == "derived" || r.check == "multiwavelet") {
    j["k_range"] = {r.k_min, r.k_max};
  }
  if (r.check == "continuous") {
    j["window"] = r.window;
    j["step"] = r.step;
  }
  if (r.check == "multiwavelet") j["radius"] = r.window;
  if (r.check == "calderon") j["max_deviation"] = r.max_deviation;
  return j;
}

RegionPtr region_from_json(const Json& j) {
  const std::string kind = field(j, "kind").get<std::string>();
  if (kind == "boxes") {
    std::vector<Box> boxes;
    for (const auto& b : field(j, "boxes")) boxes.push_back({numbers(field(b, "lo"), "lo"), numbers(field(b, "hi"), "hi")});
    if (boxes.empty()) return empty_region(field(j, "dim").get<std::size_t>());
    if (j.contains("dim") && j.at("dim").get<std::size_t>() != boxes.front().lo.size())
      throw Error(ErrorCode::InvalidArgument, "box dimension disagrees with \"dim\"");
    return box_union(std::move(boxes));
  }
  if (kind == "cell") {
    return lattice_cell(lattice_from_json(field(j, "lattice")), field(j, "m").get<std::vector<long long>>());
  }
  if (kind == "intersection") return intersect(region_from_json(field(j, "a")), region_from_json(field(j, "b")));
  if (kind == "difference") return subtract(region_from_json(field(j, "a")), region_from_json(field(j, "b")));
  if (kind == "union") return unite(region_from_json(field(j, "a")), region_from_json(field(j, "b")));
  if (kind == "saturation") {
    return saturate(region_from_json(field(j, "of")), lattice_from_json(field(j, "lattice")),
                    field(j, "radius").get<double>());
  }
  if (kind == "selector") {
    const double r = field(j, "radius").get<double>();
    return coset_selector(region_from_json(field(j, "of")), lattice_from_json(field(j, "lattice")),
                          SelectorOptions{.radius = r, .max_radius = r});
  }
  if (kind == "section") {
    Json body{{"mode", lower(field(j, "mode").get<std::string>())}, {"action", field(j, "action")}};
    if (j.contains("section_kind")) body["kind"] = j.at("section_kind");
    return section_region(section_from_json(body));
  }
  if (kind == "slabs") {
    const CrossSection base = build_discrete_section(matrix_from_json(field(j, "action")));
    return slab_region(base, field(j, "powers").get<std::vector<long long>>(), field(j, "extent").get<double>());
  }
  throw Error(ErrorCode::InvalidArgument, "unknown region kind " + kind);
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex_digest(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(bytes)));
  return buf;
}

Json RunManifest::to_json() const {
  Json j{{"command", command}, {"inputs", inputs}, {"options", options},
         {"tolerances", tolerances}, {"version", version}};
  j["seed"] = seed ? Json(*seed) : Json(nullptr);
  return j;
}

}  // namespace xsect

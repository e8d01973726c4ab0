#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "xsect/classify.hpp"
#include "xsect/sections.hpp"
#include "xsect/shaping.hpp"
#include "xsect/verify.hpp"
#include "xsect/wavelet.hpp"

namespace xsect {

using Json = nlohmann::json;

inline constexpr std::string_view kVersion = "0.1.0";

/// Floating values as %.17g; NaN and infinities become null.
std::string format_number(double x);
/// Deterministic pretty printer: keys sorted, floats at 17 significant digits.
std::string dump_json(const Json& j, int indent = 2);

Json parse_json(std::string_view text);
std::string read_file(const std::string& path);

/// Accepts [[...], ...] or {"matrix": [[...], ...]}.
Matrix matrix_from_json(const Json& j);
Json matrix_to_json(const Matrix& m);
/// Accepts [[...], ...] (rows are generators) or {"basis": [[...], ...]}.
Lattice lattice_from_json(const Json& j);

Json verdict_to_json(const ContinuousVerdict& v);
Json verdict_to_json(const DiscreteVerdict& v);

Json section_to_json(const CrossSection& s);
/// Rebuilds the section from {"mode", "action"}; a "kind" field must agree.
CrossSection section_from_json(const Json& j);
/// Shaped sections list their first `pieces` pieces.
Json shaped_to_json(const ShapedSection& s, int pieces = 8);
/// {"target": "finite" | "bounded", "section": {...}} as written by shaped_to_json.
ShapedSection shaped_from_json(const Json& j);

Json report_to_json(const TilingReport& r, std::size_t max_failures = 20);

/// Inverse of Region::to_json.
RegionPtr region_from_json(const Json& j);

std::uint64_t fnv1a(std::string_view bytes);
std::string hex_digest(std::string_view bytes);

/// Everything that determines a command's output.
struct RunManifest {
  std::string command;
  std::map<std::string, std::string> inputs;  // name -> FNV-1a digest of the bytes
  std::optional<std::uint64_t> seed;
  std::map<std::string, double> tolerances;
  Json options = Json::object();  // remaining flags that shape the output
  std::string version{kVersion};

  void add_input(const std::string& name, std::string_view bytes) { inputs[name] = hex_digest(bytes); }
  Json to_json() const;
};

}  // namespace xsect

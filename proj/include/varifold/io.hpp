#pragma once

// JSON documents for varifolds and subspaces, CSV tables, run manifests.
// Needs nlohmann/json on the include path.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "varifold/conic.hpp"
#include "varifold/geometry.hpp"
#include "varifold/tomography.hpp"
#include "varifold/variation.hpp"
#include "varifold/varifold.hpp"

namespace varifold::io {

using json = nlohmann::json;

/// Round-trip exact; negative zero prints as 0.
inline std::string format_double(double x) {
  if (x == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw InvalidInput("failed writing '" + path + "'");
}

inline json parse_json(const std::string& text, const std::string& origin = "input") {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidInput(origin + ": malformed JSON (" + e.what() + ")");
  }
}

// ---------------------------------------------------------------------------
// vectors and numbers

inline json vec_to_json(const Vec& x) {
  json a = json::array();
  for (Eigen::Index i = 0; i < x.size(); ++i) a.push_back(x[i]);
  return a;
}

inline double number_from_json(const json& j, const std::string& what) {
  if (!j.is_number()) throw InvalidInput(what + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw InvalidInput(what + ": must be finite");
  return v;
}

inline Vec vec_from_json(const json& j, int n, const std::string& what) {
  if (!j.is_array()) throw InvalidInput(what + ": expected an array of numbers");
  if (n >= 0 && static_cast<int>(j.size()) != n) {
    throw InvalidInput(what + ": expected " + std::to_string(n) + " coordinates, got " + std::to_string(j.size()));
  }
  Vec x(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) x[static_cast<Eigen::Index>(i)] = number_from_json(j[i], what);
  return x;
}

inline const json& field(const json& j, const char* key, const std::string& what) {
  if (!j.is_object() || !j.contains(key)) throw InvalidInput(what + ": missing field '" + key + "'");
  return j.at(key);
}

/// Comma-separated numbers, e.g. "0.5,0.25" or "[0,1]".
inline std::vector<double> parse_number_list(std::string text, const std::string& what) {
  text.erase(std::remove_if(text.begin(), text.end(), [](char c) { return c == '[' || c == ']' || c == ' '; }),
             text.end());
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) throw InvalidInput(what + ": empty list entry");
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::logic_error&) {
      throw InvalidInput(what + ": '" + item + "' is not a number");
    }
    if (used != item.size() || !std::isfinite(v)) throw InvalidInput(what + ": '" + item + "' is not a finite number");
    out.push_back(v);
  }
  if (out.empty()) throw InvalidInput(what + ": empty list");
  return out;
}

// ---------------------------------------------------------------------------
// varifold documents

struct VarifoldDocument {
  DiscreteVarifold discrete;
  std::optional<ConicVarifold> conic;
};

inline ConicVarifold conic_from_json(const json& j, int n) {
  std::vector<ConicAtom> atoms;
  if (j.contains("atoms")) {
    const json& arr = j.at("atoms");
    if (!arr.is_array()) throw InvalidInput("conic.atoms: expected an array");
    for (const auto& a : arr) {
      atoms.push_back({vec_from_json(field(a, "dir", "conic atom"), n, "conic atom dir"),
                       number_from_json(field(a, "mass", "conic atom"), "conic atom mass")});
    }
  }
  std::optional<SphereDensity> density;
  if (j.contains("density") && !j.at("density").is_null()) {
    const json& d = j.at("density");
    const json& g = field(d, "grid", "conic.density");
    if (!g.is_string()) throw InvalidInput("conic.density.grid: expected a string");
    const json& vals = field(d, "values", "conic.density");
    if (!vals.is_array()) throw InvalidInput("conic.density.values: expected an array");
    std::vector<double> v;
    for (const auto& x : vals) v.push_back(number_from_json(x, "conic.density value"));
    density.emplace(g.get<std::string>(), std::move(v));
  }
  return ConicVarifold(n, std::move(atoms), std::move(density));
}

inline VarifoldDocument document_from_json(const json& j) {
  if (!j.is_object()) throw InvalidInput("varifold document: expected a JSON object");
  const json& nd = field(j, "ambient_dim", "varifold document");
  if (!nd.is_number_integer() || nd.get<int>() < 1) {
    throw InvalidInput("varifold document: ambient_dim must be a positive integer");
  }
  const int n = nd.get<int>();
  VarifoldDocument doc{DiscreteVarifold(n), std::nullopt};
  if (j.contains("segments")) {
    const json& arr = j.at("segments");
    if (!arr.is_array()) throw InvalidInput("segments: expected an array");
    for (const auto& s : arr) {
      doc.discrete.add(SegmentPiece(vec_from_json(field(s, "a", "segment"), n, "segment a"),
                                    vec_from_json(field(s, "b", "segment"), n, "segment b"),
                                    number_from_json(field(s, "weight", "segment"), "segment weight")));
    }
  }
  if (j.contains("rays")) {
    const json& arr = j.at("rays");
    if (!arr.is_array()) throw InvalidInput("rays: expected an array");
    for (const auto& r : arr) {
      doc.discrete.add(RayPiece(vec_from_json(field(r, "origin", "ray"), n, "ray origin"),
                                vec_from_json(field(r, "direction", "ray"), n, "ray direction"),
                                number_from_json(field(r, "weight", "ray"), "ray weight")));
    }
  }
  if (j.contains("conic") && !j.at("conic").is_null()) doc.conic = conic_from_json(j.at("conic"), n);
  return doc;
}

inline VarifoldDocument read_document(const std::string& path) {
  return document_from_json(parse_json(read_text(path), path));
}

/// Pieces sorted lexicographically by coordinates, then weight.
inline DiscreteVarifold canonical_order(DiscreteVarifold V) {
  std::sort(V.segments.begin(), V.segments.end(), [](const SegmentPiece& x, const SegmentPiece& y) {
    if (lex_less(x.a, y.a)) return true;
    if (lex_less(y.a, x.a)) return false;
    if (lex_less(x.b, y.b)) return true;
    if (lex_less(y.b, x.b)) return false;
    return x.weight < y.weight;
  });
  std::sort(V.rays.begin(), V.rays.end(), [](const RayPiece& x, const RayPiece& y) {
    if (lex_less(x.origin, y.origin)) return true;
    if (lex_less(y.origin, x.origin)) return false;
    if (lex_less(x.direction, y.direction)) return true;
    if (lex_less(y.direction, x.direction)) return false;
    return x.weight < y.weight;
  });
  return V;
}

inline json conic_to_json(const ConicVarifold& C) {
  std::vector<ConicAtom> atoms = C.atoms();
  std::sort(atoms.begin(), atoms.end(), [](const ConicAtom& a, const ConicAtom& b) { return lex_less(a.direction, b.direction); });
  json j;
  j["atoms"] = json::array();
  for (const auto& a : atoms) j["atoms"].push_back({{"dir", vec_to_json(a.direction)}, {"mass", a.mass}});
  if (const auto& d = C.density()) j["density"] = {{"grid", d->grid()}, {"values", d->values()}};
  return j;
}

inline json to_json(const DiscreteVarifold& V, const ConicVarifold* conic = nullptr) {
  const DiscreteVarifold c = canonical_order(V);
  json j;
  j["ambient_dim"] = V.ambient_dim;
  j["segments"] = json::array();
  for (const auto& s : c.segments) {
    j["segments"].push_back({{"a", vec_to_json(s.a)}, {"b", vec_to_json(s.b)}, {"weight", s.weight}});
  }
  j["rays"] = json::array();
  for (const auto& r : c.rays) {
    j["rays"].push_back({{"origin", vec_to_json(r.origin)}, {"direction", vec_to_json(r.direction)}, {"weight", r.weight}});
  }
  if (conic) j["conic"] = conic_to_json(*conic);
  return j;
}

inline json to_json(const ConicVarifold& C) {
  json j = to_json(DiscreteVarifold(C.ambient_dim()), &C);
  return j;
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// subspaces: {"ambient_dim": n, "basis": [[..], ..]} or a bare list of basis vectors

inline Subspace subspace_from_json(const json& j) {
  const json* basis = &j;
  int n = -1;
  if (j.is_object()) {
    basis = &field(j, "basis", "subspace");
    const json& nd = field(j, "ambient_dim", "subspace");
    if (!nd.is_number_integer()) throw InvalidInput("subspace: ambient_dim must be an integer");
    n = nd.get<int>();
  }
  if (!basis->is_array() || basis->empty()) throw InvalidInput("subspace: basis must be a non-empty array");
  std::vector<Vec> b;
  for (const auto& v : *basis) {
    b.push_back(vec_from_json(v, n, "subspace basis vector"));
    n = static_cast<int>(b.back().size());
  }
  return Subspace(n, std::move(b));
}

inline json subspace_to_json(const Subspace& P) {
  json b = json::array();
  for (int i = 0; i < P.dim(); ++i) b.push_back(vec_to_json(P.basis_vector(i)));
  return {{"ambient_dim", P.ambient_dim()}, {"basis", b}};
}

// ---------------------------------------------------------------------------
// CSV

inline std::string csv_row(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_double(values[i]);
  }
  return out + "\n";
}

inline std::string coordinate_header(const std::string& prefix, int n) {
  std::string out;
  for (int i = 1; i <= n; ++i) out += (i > 1 ? "," : "") + prefix + std::to_string(i);
  return out;
}

/// x1..xn, omega1..omegan, mass
inline std::string atoms_csv(const std::vector<VariationAtom>& atoms, int n) {
  std::vector<VariationAtom> sorted = atoms;
  std::sort(sorted.begin(), sorted.end(), [](const VariationAtom& a, const VariationAtom& b) {
    if (lex_less(a.location, b.location)) return true;
    if (lex_less(b.location, a.location)) return false;
    return lex_less(a.omega, b.omega);
  });
  std::string out = coordinate_header("x", n) + "," + coordinate_header("omega", n) + ",mass\n";
  for (const auto& a : sorted) {
    std::vector<double> row(a.location.data(), a.location.data() + a.location.size());
    row.insert(row.end(), a.omega.data(), a.omega.data() + a.omega.size());
    row.push_back(a.mass);
    out += csv_row(row);
  }
  return out;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell.erase(0, cell.find_first_not_of(" \t\r"));
    cell.erase(cell.find_last_not_of(" \t\r") + 1);
    out.push_back(cell);
  }
  return out;
}

/// v1..vn, xi1..xin, s, t, band_mass
inline std::string measurements_csv(const std::vector<BandRow>& rows) {
  if (rows.empty()) return "";
  const int n = static_cast<int>(rows.front().v.size());
  std::string out = coordinate_header("v", n) + "," + coordinate_header("xi", n) + ",s,t,band_mass\n";
  for (const auto& r : rows) {
    std::vector<double> row(r.v.data(), r.v.data() + n);
    row.insert(row.end(), r.xi.data(), r.xi.data() + n);
    row.push_back(r.s);
    row.push_back(r.t);
    row.push_back(r.band_mass);
    out += csv_row(row);
  }
  return out;
}

inline std::vector<BandRow> measurements_from_csv(const std::string& text, const std::string& origin = "measurements") {
  std::stringstream ss(text);
  std::string line;
  if (!std::getline(ss, line)) throw InvalidInput(origin + ": empty file");
  const auto header = split_csv_line(line);
  const int cols = static_cast<int>(header.size());
  if (cols < 7 || (cols - 3) % 2 != 0 || header[cols - 3] != "s" || header[cols - 2] != "t" ||
      header[cols - 1] != "band_mass") {
    throw InvalidInput(origin + ": header must be v1..vn,xi1..xin,s,t,band_mass");
  }
  const int n = (cols - 3) / 2;
  std::vector<BandRow> rows;
  int lineno = 1;
  while (std::getline(ss, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    if (static_cast<int>(cells.size()) != cols) {
      throw InvalidInput(origin + ": line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                         " columns, expected " + std::to_string(cols));
    }
    std::vector<double> v;
    for (const auto& c : cells) {
      std::size_t used = 0;
      double x = 0.0;
      try {
        x = std::stod(c, &used);
      } catch (const std::logic_error&) {
        used = 0;
      }
      if (used != c.size() || c.empty() || !std::isfinite(x)) {
        throw InvalidInput(origin + ": line " + std::to_string(lineno) + ": '" + c + "' is not a finite number");
      }
      v.push_back(x);
    }
    rows.push_back({Eigen::Map<Vec>(v.data(), n), Eigen::Map<Vec>(v.data() + n, n), v[2 * n], v[2 * n + 1],
                    v[2 * n + 2]});
  }
  if (rows.empty()) throw InvalidInput(origin + ": no data rows");
  return rows;
}

// ---------------------------------------------------------------------------
// run manifest

struct RunManifest {
  std::string command;
  std::vector<std::string> inputs;
  std::map<std::string, std::string> parameters;
  std::vector<std::string> outputs;
  std::string tool_version;

  json to_json() const {
    return {{"command", command},
            {"inputs", inputs},
            {"parameters", parameters},
            {"outputs", outputs},
            {"tool_version", tool_version}};
  }
};

}  // namespace varifold::io

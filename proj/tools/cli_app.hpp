#pragma once

// varifold-lab command-line front end. `run` is separate from main() so the
// test suite can drive it in-process.

#include <filesystem>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "varifold/io.hpp"
#include "varifold/varifold_lab.hpp"

namespace varifold::cli {

namespace fs = std::filesystem;
using io::json;

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

namespace detail {

/// Collects outputs of one run. Without an output directory a single
/// output goes to stdout; with one, files and a manifest are written.
class Emitter {
 public:
  Emitter(std::string command, std::optional<std::string> dir, std::ostream& out)
      : dir_(std::move(dir)), out_(out) {
    manifest_.command = std::move(command);
    manifest_.tool_version = kVersion;
  }

  io::RunManifest& manifest() { return manifest_; }
  bool to_files() const { return dir_.has_value(); }

  void emit(const std::string& name, const std::string& text) {
    if (!dir_) {
      out_ << text;
      return;
    }
    fs::create_directories(*dir_);
    const std::string path = (fs::path(*dir_) / name).string();
    io::write_text(path, text);
    manifest_.outputs.push_back(path);
  }

  void finish() {
    if (!dir_) return;
    const std::string path = (fs::path(*dir_) / (manifest_.command + "_manifest.json")).string();
    io::write_text(path, io::dump(manifest_.to_json()));
    for (const auto& p : manifest_.outputs) out_ << p << "\n";
    out_ << path << "\n";
  }

 private:
  std::optional<std::string> dir_;
  std::ostream& out_;
  io::RunManifest manifest_;
};

inline Vec parse_point(const std::string& text, const std::string& what) {
  const auto v = io::parse_number_list(text, what);
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace detail

inline int run(const std::vector<std::string>& args, Streams io_streams) {
  std::ostream& out = io_streams.out;
  std::ostream& err = io_streams.err;

  CLI::App app{"Computational calculus for 1-dimensional varifolds", "varifold-lab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  std::optional<std::string> out_dir;

  auto add_out_dir = [&](CLI::App* sub) {
    sub->add_option("--out-dir", out_dir, "Write outputs and a run manifest into this directory");
  };

  // check-stationary
  std::string input;
  double tol = 1e-10;
  auto* cs = app.add_subcommand("check-stationary", "Max vertex residual and residual table (CSV)");
  cs->add_option("varifold", input, "Varifold JSON")->required();
  cs->add_option("--tol", tol, "Stationarity tolerance")->check(CLI::PositiveNumber);
  add_out_dir(cs);

  // project
  std::string subspace_path;
  bool mapping = false;
  auto* pj = app.add_subcommand("project", "Mapping or weighted projection onto a subspace (JSON)");
  pj->add_option("varifold", input, "Varifold JSON")->required();
  pj->add_option("--subspace", subspace_path, "Subspace JSON (basis)")->required();
  auto* fw = pj->add_flag("--weighted", "Weighted projection (default)");
  auto* fm = pj->add_flag("--mapping", mapping, "Mapping projection");
  fw->excludes(fm);
  add_out_dir(pj);

  // surgery
  std::string center_text;
  double radius = 0.0;
  auto* sg = app.add_subcommand("surgery", "Cut-and-paste at a ball: combined JSON and boundary-atom CSV");
  sg->add_option("varifold", input, "Varifold JSON")->required();
  sg->add_option("--center", center_text, "Ball center, comma separated")->required();
  sg->add_option("--radius", radius, "Ball radius")->required()->check(CLI::PositiveNumber);
  add_out_dir(sg);

  // reconstruct
  int normals = -1;
  std::string report_path, emit_path, from_path;
  auto* rc = app.add_subcommand("reconstruct", "Forward-then-inverse tomography of a conic varifold");
  rc->add_option("conic", input, "Conic varifold JSON (ground truth)");
  rc->add_option("--normals", normals, "Number of hemisphere normals (default 2n+1)")->check(CLI::PositiveNumber);
  rc->add_option("--report", report_path, "Per-atom error CSV path");
  rc->add_option("--emit-measurements", emit_path, "Write the band-mass table used as input");
  rc->add_option("--from-measurements", from_path, "Reconstruct from a band-mass CSV instead of a forward run");
  add_out_dir(rc);

  // counterexample
  int directions = 360;
  auto* ce = app.add_subcommand("counterexample", "Half-line multiplicities of the counterexample pair (CSV)");
  ce->add_option("--directions", directions, "Number of directions")->check(CLI::PositiveNumber);
  add_out_dir(ce);

  // blowup
  std::string point_text, lambdas_text;
  double battery_radius = 1.0;
  auto* bu = app.add_subcommand("blowup", "Tangent cone and weak-* diagnostics at a point");
  bu->add_option("varifold", input, "Varifold JSON")->required();
  bu->add_option("--point", point_text, "Point, comma separated")->required();
  bu->add_option("--lambdas", lambdas_text, "Strictly decreasing scales, comma separated")->required();
  bu->add_option("--battery-radius", battery_radius, "Test battery radius")->check(CLI::PositiveNumber);
  add_out_dir(bu);

  // fixture
  int k = 1, fixture_dim = 2;
  long seed = 0;
  auto* fx = app.add_subcommand("fixture", "Generated fixtures");
  fx->require_subcommand(1);
  auto* dl = fx->add_subcommand("dense-lines", "First k lines through lattice points: varifold JSON and growth table");
  dl->add_option("--k", k, "Number of lines")->required()->check(CLI::PositiveNumber);
  dl->add_option("--seed", seed, "Direction sequence offset");
  dl->add_option("--dim", fixture_dim, "Ambient dimension (2 or 3)");
  add_out_dir(dl);

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "UsageError: " << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    if (cs->parsed()) {
      detail::Emitter em("check-stationary", out_dir, out);
      em.manifest().inputs = {input};
      em.manifest().parameters["tol"] = io::format_double(tol);
      const auto doc = io::read_document(input);
      const auto report = is_stationary(doc.discrete, tol);
      std::string text = "max_residual," + io::format_double(report.max_residual) + "\n";
      text += std::string("stationary,") + (report.stationary ? "true" : "false") + "\n";
      text += io::atoms_csv(vertex_residuals(doc.discrete, tol), doc.discrete.ambient_dim);
      em.emit("residuals.csv", text);
      em.finish();
      return 0;
    }
    if (pj->parsed()) {
      detail::Emitter em("project", out_dir, out);
      em.manifest().inputs = {input, subspace_path};
      em.manifest().parameters["mode"] = mapping ? "mapping" : "weighted";
      const auto doc = io::read_document(input);
      const Subspace P = io::subspace_from_json(io::parse_json(io::read_text(subspace_path), subspace_path));
      const DiscreteVarifold image = mapping ? mapping_projection(doc.discrete, P) : weighted_projection(doc.discrete, P);
      std::optional<ConicVarifold> cone;
      if (doc.conic) {
        if (mapping) throw InvalidInput("project: conic parts support the weighted projection only");
        cone = weighted_projection_conic(*doc.conic, P);
      }
      em.emit("projected.json", io::dump(io::to_json(image, cone ? &*cone : nullptr)));
      em.finish();
      return 0;
    }
    if (sg->parsed()) {
      if (!out_dir) out_dir = ".";
      detail::Emitter em("surgery", out_dir, out);
      em.manifest().inputs = {input};
      em.manifest().parameters["center"] = center_text;
      em.manifest().parameters["radius"] = io::format_double(radius);
      const auto doc = io::read_document(input);
      const Vec y = detail::parse_point(center_text, "--center");
      require_dim(y, doc.discrete.ambient_dim, "--center");
      const SurgeryResult res = cut_and_paste(doc.discrete, y, radius);
      em.emit("surgery_combined.json", io::dump(io::to_json(res.combined)));
      em.emit("surgery_boundary_atoms.csv", io::atoms_csv(res.boundary_atoms, doc.discrete.ambient_dim));
      em.finish();
      return 0;
    }
    if (rc->parsed()) {
      if (!out_dir) out_dir = ".";
      detail::Emitter em("reconstruct", out_dir, out);
      ConicReconstruction rec;
      std::optional<ConicVarifold> truth;
      if (!from_path.empty()) {
        if (!input.empty()) throw InvalidInput("reconstruct: give either a conic JSON or --from-measurements");
        em.manifest().inputs = {from_path};
        rec = reconstruct_conic_from_table(io::measurements_from_csv(io::read_text(from_path), from_path));
      } else {
        if (input.empty()) throw InvalidInput("reconstruct: a conic varifold JSON is required");
        em.manifest().inputs = {input};
        const auto doc = io::read_document(input);
        if (!doc.conic) throw InvalidInput("reconstruct: input has no 'conic' section");
        if (doc.conic->density()) throw InvalidInput("reconstruct: only atomic conic varifolds are supported");
        truth = doc.conic;
        const int n = truth->ambient_dim();
        const auto vs = normal_battery(n, normals);
        em.manifest().parameters["normals"] = std::to_string(vs.size());
        const auto oracle = forward_oracle(*truth);
        if (!emit_path.empty()) {
          io::write_text(emit_path, io::measurements_csv(measurement_table(oracle, vs)));
          em.manifest().outputs.push_back(emit_path);
        }
        rec = reconstruct_conic(oracle, vs);
      }
      em.emit("reconstruction.json", io::dump(io::to_json(rec.cone)));
      if (truth) {
        const int n = truth->ambient_dim();
        std::string table = "index," + io::coordinate_header("z", n) + "," + io::coordinate_header("zhat", n) +
                            ",mass,mass_hat,position_error,mass_error\n";
        std::vector<ConicAtom> atoms = truth->atoms();
        std::sort(atoms.begin(), atoms.end(),
                  [](const ConicAtom& a, const ConicAtom& b) { return lex_less(a.direction, b.direction); });
        double worst = 0.0;
        for (std::size_t i = 0; i < atoms.size(); ++i) {
          const ConicAtom* best = nullptr;
          double dist = std::numeric_limits<double>::infinity();
          for (const auto& r : rec.cone.atoms()) {
            const double d = angular_distance(r.direction, atoms[i].direction);
            if (d < dist) dist = d, best = &r;
          }
          const Vec zhat = best ? best->direction : Vec::Constant(n, std::numeric_limits<double>::quiet_NaN());
          const double mhat = best ? best->mass : 0.0;
          const double merr = std::abs(mhat - atoms[i].mass);
          worst = std::max({worst, dist, merr});
          std::vector<double> row{static_cast<double>(i)};
          row.insert(row.end(), atoms[i].direction.data(), atoms[i].direction.data() + n);
          row.insert(row.end(), zhat.data(), zhat.data() + n);
          row.insert(row.end(), {atoms[i].mass, mhat, dist, merr});
          table += io::csv_row(row);
        }
        if (rec.cone.atoms().size() != atoms.size()) {
          err << "warning: recovered " << rec.cone.atoms().size() << " atoms, expected " << atoms.size() << "\n";
        }
        if (!report_path.empty()) {
          io::write_text(report_path, table);
          em.manifest().outputs.push_back(report_path);
        } else {
          em.emit("reconstruction_errors.csv", table);
        }
        em.manifest().parameters["max_error"] = io::format_double(worst);
      }
      em.finish();
      return 0;
    }
    if (ce->parsed()) {
      detail::Emitter em("counterexample", out_dir, out);
      em.manifest().parameters["directions"] = std::to_string(directions);
      const auto [v1, v2] = counterexample_pair();
      std::string text = "angle,m_V1,m_V2,diff\n";
      for (int i = 0; i < directions; ++i) {
        const double a = 2.0 * std::numbers::pi * i / directions;
        Vec u(2);
        u << std::cos(a), std::sin(a);
        const double m1 = halfline_multiplicity(v1, u);
        const double m2 = halfline_multiplicity(v2, u);
        text += io::csv_row({a, m1, m2, m1 - m2});
      }
      em.emit("counterexample.csv", text);
      em.finish();
      return 0;
    }
    if (bu->parsed()) {
      if (!out_dir) out_dir = ".";
      detail::Emitter em("blowup", out_dir, out);
      em.manifest().inputs = {input};
      em.manifest().parameters["point"] = point_text;
      em.manifest().parameters["lambdas"] = lambdas_text;
      em.manifest().parameters["battery_radius"] = io::format_double(battery_radius);
      const auto doc = io::read_document(input);
      const Vec x = detail::parse_point(point_text, "--point");
      require_dim(x, doc.discrete.ambient_dim, "--point");
      const auto lambdas = io::parse_number_list(lambdas_text, "--lambdas");
      const TangentEstimate est = tangent_estimate(doc.discrete, x, lambdas, battery_radius);
      em.emit("blowup_cone.json", io::dump(io::to_json(est.cone)));
      std::string table = "lambda,weak_star_distance\n";
      for (const auto& [l, d] : est.diagnostics) table += io::csv_row({l, d});
      em.emit("blowup_diagnostics.csv", table);
      em.finish();
      return 0;
    }
    if (dl->parsed()) {
      if (!out_dir) out_dir = ".";
      detail::Emitter em("fixture", out_dir, out);
      em.manifest().parameters["fixture"] = "dense-lines";
      em.manifest().parameters["k"] = std::to_string(k);
      em.manifest().parameters["seed"] = std::to_string(seed);
      em.manifest().parameters["dim"] = std::to_string(fixture_dim);
      em.emit("dense_lines.json", io::dump(io::to_json(dense_lines_fixture(fixture_dim, k, seed))));
      std::string table = "k,projection_mass,cap_mass\n";
      for (const auto& r : dense_lines_growth(fixture_dim, k, seed)) {
        table += std::to_string(r.k) + "," + io::format_double(r.projection_mass) + "," +
                 io::format_double(r.cap_mass) + "\n";
      }
      em.emit("dense_lines_growth.csv", table);
      em.finish();
      return 0;
    }
  } catch (const Error& e) {
    err << e.name() << ": " << e.what() << "\n";
    return e.is_domain_error() ? 1 : 2;
  } catch (const fs::filesystem_error& e) {
    err << "IOError: " << e.what() << "\n";
    return 2;
  }
  err << app.help();
  return 2;
}

}  // namespace varifold::cli

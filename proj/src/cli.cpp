// Copyright eddylab contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "eddylab/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>

#include "eddylab/document.hpp"
#include "eddylab/errors.hpp"
#include "eddylab/harness.hpp"

namespace eddylab::cli {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// Maps the library's exception types onto exit codes.
int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ModelInvalidError& e) {
    err << "model invalid: " << e.what() << '\n';
    return kModelInvalid;
  } catch (const SolverError& e) {
    err << "solver failure: " << e.what() << " (step " << e.step() << ", relative residual "
        << e.residual() << ")\n";
    return kSolverFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

void print_summary(const StudyReport& r, std::ostream& out) {
  std::size_t passed = 0;
  for (const auto& c : r.checks) passed += c.pass ? 1 : 0;
  out << r.study_kind << ": " << (r.pass() ? "PASS" : "FAIL") << " (" << passed << "/"
      << r.checks.size() << " checks)\n";
  for (const auto& c : r.checks) {
    if (!c.pass) {
      out << "  failed " << c.name << ": " << c.value << ' ' << c.relation << ' ' << c.threshold;
      if (c.relation == "in") out << ".." << c.upper;
      out << '\n';
    }
  }
}

double parse_value(const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw std::invalid_argument("cannot parse value '" + text + "'");
  return v;
}

}  // namespace

void write_report(const StudyReport& report, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream os(out_dir / "report.json");
    os << report.to_json(true).dump(2) << '\n';
    if (!os) throw std::runtime_error("cannot write " + (out_dir / "report.json").string());
  }
  for (const auto& [name, table] : report.tables) {
    std::ofstream os(out_dir / (name + ".csv"));
    table.write_csv(os);
  }
}

int cmd_check(const std::string& path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto doc = load_document(path);
    const auto sc = instantiate(doc);
    const auto& g = sc.grid;
    out << "cells " << g.cells()[0] << 'x' << g.cells()[1] << 'x' << g.cells()[2] << ", h "
        << g.spacing() << '\n';
    out << "E dofs " << g.e_count() << ", H dofs " << g.h_count() << ", total " << g.size() << '\n';
    out << "source edges " << sc.source.pattern.size() << '\n';
    std::vector<double> s_values = doc.study.s_values;
    s_values.push_back(0.0);
    const auto family = make_family(sc.materials);
    const double c = uniform_family_bound(family, s_values, doc.study.rho, g);
    out << "rho " << doc.study.rho << ", c " << c << '\n';
    return kPass;
  });
}

int cmd_run(const std::string& path, const std::string& study,
            const std::filesystem::path& out_dir, std::optional<std::uint64_t> seed,
            std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    auto doc = load_document(path);
    if (seed) doc.study.seed = *seed;
    const auto sc = instantiate(doc);
    const auto report = run_study(study, sc, doc.study);
    write_report(report, out_dir);
    print_summary(report, out);
    return report.pass() ? kPass : kChecksFailed;
  });
}

int cmd_sweep(const std::string& path, const std::string& axis,
              const std::vector<std::string>& values, const std::filesystem::path& out_dir,
              std::optional<std::string> study, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (axis != "rho" && axis != "tau" && axis != "grid") {
      throw std::invalid_argument("sweep axis must be rho, tau or grid");
    }
    std::vector<double> parsed;
    for (const auto& v : values) {
      if (!v.empty()) parsed.push_back(parse_value(v));
    }
    if (parsed.empty()) throw std::invalid_argument("sweep needs at least one value");
    const auto base = load_document(path);
    const std::string kind = study.value_or(base.study_kind);

    std::vector<StudyReport> reports;
    for (double v : parsed) {
      ScenarioDocument doc = base;
      if (axis == "rho") {
        if (!(v > 0.0)) throw std::invalid_argument("rho values must be positive");
        doc.study.rho = v;
      } else if (axis == "tau") {
        const double steps = doc.study.T / v;
        if (!(v > 0.0) || std::abs(steps - std::round(steps)) > 1e-9 * steps) {
          throw std::invalid_argument("tau " + short_fmt(v) + " does not divide T");
        }
        doc.study.tau = v;
      } else {
        if (v < 1.0 || v != std::floor(v)) {
          throw std::invalid_argument("grid values are integer refinement factors >= 1");
        }
        doc = refine(base, static_cast<int>(v));
      }
      const auto sc = instantiate(doc);
      auto report = run_study(kind, sc, doc.study);
      write_report(report, out_dir / (axis + "_" + short_fmt(v)));
      out << axis << ' ' << short_fmt(v) << ": ";
      print_summary(report, out);
      reports.push_back(std::move(report));
    }

    std::set<std::string> keys;
    for (const auto& r : reports) {
      for (const auto& [k, value] : r.measured) keys.insert(k);
    }
    std::filesystem::create_directories(out_dir);
    std::ofstream os(out_dir / "sweep.csv");
    os << axis << ",pass";
    for (const auto& k : keys) os << ',' << k;
    os << '\n';
    bool all = true;
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const auto& r = reports[i];
      all = all && r.pass();
      os << fmt(parsed[i]) << ',' << (r.pass() ? 1 : 0);
      for (const auto& k : keys) {
        const auto it = r.measured.find(k);
        os << ',';
        if (it != r.measured.end()) os << fmt(it->second);
      }
      os << '\n';
    }
    return all ? kPass : kChecksFailed;
  });
}

int main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Verification studies for the eddy-current limit of Maxwell's equations."};
  app.name("eddylab");
  app.require_subcommand(1);

  std::string file;
  std::string study;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::string axis;
  std::vector<std::string> values;
  std::string sweep_study;

  auto* check = app.add_subcommand("check", "Validate a scenario document and print DOF counts");
  check->add_option("file", file, "Scenario document")->required();

  auto* run = app.add_subcommand("run", "Run one study and write report.json and CSV tables");
  run->add_option("file", file, "Scenario document")->required();
  run->add_option("--study", study, "Study name")->required()->check(CLI::IsMember(study_names()));
  run->add_option("--out", out_dir, "Output directory")->required();
  auto* seed_opt = run->add_option("--seed", seed, "Override the document seed");

  auto* sweep = app.add_subcommand("sweep", "Run the document's study for each value of one axis");
  sweep->add_option("file", file, "Scenario document")->required();
  sweep->add_option("--axis", axis, "rho, tau or grid")
      ->required()
      ->check(CLI::IsMember({"rho", "tau", "grid"}));
  sweep->add_option("--values", values, "Comma-separated values")->required()->delimiter(',');
  sweep->add_option("--out", out_dir, "Output directory")->required();
  auto* sweep_study_opt =
      sweep->add_option("--study", sweep_study, "Study name (default: the document's)")
          ->check(CLI::IsMember(study_names()));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kPass : kUsage;
  }

  if (check->parsed()) return cmd_check(file, out, err);
  if (run->parsed()) {
    return cmd_run(file, study, out_dir,
                   seed_opt->count() ? std::optional<std::uint64_t>(seed) : std::nullopt, out, err);
  }
  return cmd_sweep(file, axis, values, out_dir,
                   sweep_study_opt->count() ? std::optional<std::string>(sweep_study) : std::nullopt,
                   out, err);
}

}  // namespace eddylab::cli

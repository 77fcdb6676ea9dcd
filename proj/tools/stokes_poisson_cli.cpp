#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "stokes/json_io.hpp"
#include "stokes/verify.hpp"

namespace {

using namespace stokes;
using json_io::Json;

// "RE,IM" or a bare real part.
Cplx parse_kappa(const std::string& text) {
  const auto parse_double = [](const std::string& s) {
    size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw ValidationError("--kappa: cannot parse '" + s + "'");
    }
    require(used == s.size(), "--kappa: cannot parse '" + s + "'");
    return v;
  };
  const size_t comma = text.find(',');
  if (comma == std::string::npos) return Cplx(parse_double(text), 0.0);
  return Cplx(parse_double(text.substr(0, comma)),
              parse_double(text.substr(comma + 1)));
}

void emit(const std::string& output, const Json& doc) {
  if (output.empty()) {
    std::cout << json_io::dump(doc);
    require(static_cast<bool>(std::cout), "output: write to stdout failed");
  } else {
    json_io::write_file(output, doc);
  }
}

Json run_stokes(const std::string& input,
                const monodromy::IntegratorConfig& cfg) {
  const Json in = json_io::read_file(input);
  const Mat v = json_io::mat_from(json_io::field(in, "V"), "V");
  const so::DeformationPoint dp = json_io::point_from(in);
  return json_io::stokes_result_json(monodromy::compute_stokes(v, dp, cfg));
}

Json run_bracket(const std::string& input, Cplx kappa) {
  const Json in = json_io::read_file(input);
  const StokesMatrix s = json_io::stokes_from(json_io::field(in, "S"), "S");
  return json_io::bracket_table_json(bracket::bracket_table(s, kappa));
}

Json run_braid(const std::string& input) {
  const Json in = json_io::read_file(input);
  const StokesMatrix s = json_io::stokes_from(json_io::field(in, "S"), "S");
  const bracket::BraidWord w =
      json_io::braid_word_from(json_io::field(in, "word"));
  for (const bracket::BraidLetter& l : w)
    require(l.gen <= s.n() - 2, "word: generator out of range for this n");
  const StokesMatrix moved = bracket::braid_apply(s, w);
  Json out = json_io::document("braid-result");
  out["n"] = s.n();
  Json word = Json::array();
  for (const bracket::BraidLetter& l : w)
    word.push_back({{"generator", l.gen}, {"inverse", l.inverse}});
  out["word"] = std::move(word);
  out["S"] = json_io::stokes_json(s);
  out["result"] = json_io::stokes_json(moved);
  return out;
}

Json run_casimirs(const std::string& input) {
  const Json in = json_io::read_file(input);
  const StokesMatrix s = json_io::stokes_from(json_io::field(in, "S"), "S");
  Json out = json_io::document("casimirs");
  out["n"] = s.n();
  out["coefficients"] = json_io::cplx_list_json(bracket::casimirs(s));
  if (s.n() == 4) {
    const auto [c1, c2] = bracket::casimirs_n4_explicit(s);
    out["c1"] = json_io::cplx_json(c1);
    out["c2"] = json_io::cplx_json(c2);
  }
  return out;
}

Json run_flow(const std::string& input,
              const monodromy::IntegratorConfig& cfg) {
  const Json in = json_io::read_file(input);
  const Mat v = json_io::mat_from(json_io::field(in, "V"), "V");
  const flows::DeformationPath path =
      json_io::path_from(json_io::field(in, "path"));
  return json_io::conservation_report_json(
      flows::conservation_report(v, path, cfg));
}

Json run_verify(const std::string& suite, std::uint64_t seed,
                const monodromy::IntegratorConfig& cfg, bool& all_passed) {
  const int workers = verify::worker_cap_from_env();
  const auto reports = verify::run_suites(suite, seed, cfg, workers);
  Json out = json_io::document("verify-report");
  out["suite"] = suite;
  out["seed"] = seed;
  out["workers"] = workers;
  all_passed = true;
  Json suites = Json::array();
  for (const verify::SuiteReport& r : reports) {
    Json sj;
    sj["suite"] = r.suite;
    sj["passed"] = r.passed();
    double worst = 0.0;
    Json checks = Json::array();
    for (const verify::Check& c : r.checks) {
      checks.push_back({{"name", c.name},
                        {"passed", c.passed},
                        {"residual", c.residual},
                        {"bound", c.bound}});
      worst = std::max(worst, c.residual);
    }
    sj["max_residual"] = worst;
    sj["checks"] = std::move(checks);
    suites.push_back(std::move(sj));
    all_passed = all_passed && r.passed();
  }
  out["passed"] = all_passed;
  out["suites"] = std::move(suites);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Stokes matrices, their quadratic Poisson bracket, and isomonodromic "
      "flows for skew-symmetric two-pole systems"};
  app.require_subcommand(1);

  monodromy::IntegratorConfig cfg;
  std::string input, output, suite = "all";
  std::string kappa_text;
  std::uint64_t seed = 42;

  const auto add_io = [&](CLI::App* cmd) {
    cmd->add_option("--input", input, "Input JSON document")->required();
    cmd->add_option("--output", output, "Output path (default: stdout)");
  };
  const auto add_numerics = [&](CLI::App* cmd) {
    cmd->add_option("--rel-tol", cfg.rel_tol, "ODE relative tolerance");
    cmd->add_option("--abs-tol", cfg.abs_tol, "ODE absolute tolerance");
    cmd->add_option("--radius", cfg.matching_radius,
                    "Asymptotic matching radius (0 = automatic)");
    cmd->add_option("--order", cfg.asymptotic_order,
                    "Series depth of the asymptotic initializer (1 or 2)");
  };

  CLI::App* stokes_cmd = app.add_subcommand(
      "stokes", "Stokes matrix of dY/dz = (U + V/z)Y from V, u, psi");
  add_io(stokes_cmd);
  add_numerics(stokes_cmd);

  CLI::App* bracket_cmd = app.add_subcommand(
      "bracket", "Quadratic Poisson brackets of all coordinate pairs of S");
  add_io(bracket_cmd);
  bracket_cmd->add_option(
      "--kappa", kappa_text,
      "Coupling constant as RE,IM (default 0,pi/2: the Stokes-side table)");

  CLI::App* braid_cmd =
      app.add_subcommand("braid", "Apply a braid word to S");
  add_io(braid_cmd);

  CLI::App* casimirs_cmd = app.add_subcommand(
      "casimirs", "Characteristic-polynomial Casimirs of S^{-1}S^T");
  add_io(casimirs_cmd);

  CLI::App* flow_cmd = app.add_subcommand(
      "flow", "Transport V isomonodromically and report Stokes drift");
  add_io(flow_cmd);
  add_numerics(flow_cmd);

  CLI::App* verify_cmd = app.add_subcommand(
      "verify", "Run a verification suite and report residuals");
  verify_cmd->add_option("--suite", suite,
                         "algebraic | monodromy | pushforward | all");
  verify_cmd->add_option("--seed", seed, "Seed for the random generators");
  verify_cmd->add_option("--output", output, "Output path (default: stdout)");
  add_numerics(verify_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (app.got_subcommand(stokes_cmd)) {
      emit(output, run_stokes(input, cfg));
    } else if (app.got_subcommand(bracket_cmd)) {
      const Cplx kappa = kappa_text.empty() ? Cplx(0.0, 0.5 * kPi)
                                            : parse_kappa(kappa_text);
      emit(output, run_bracket(input, kappa));
    } else if (app.got_subcommand(braid_cmd)) {
      emit(output, run_braid(input));
    } else if (app.got_subcommand(casimirs_cmd)) {
      emit(output, run_casimirs(input));
    } else if (app.got_subcommand(flow_cmd)) {
      emit(output, run_flow(input, cfg));
    } else {
      bool all_passed = false;
      emit(output, run_verify(suite, seed, cfg, all_passed));
      if (!all_passed) {
        std::cerr << "verify: at least one check failed its bound\n";
        return 3;
      }
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DegenerateInputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const monodromy::PathError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const AccuracyError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

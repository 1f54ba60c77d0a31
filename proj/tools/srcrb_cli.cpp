// srcrb command-line driver.
//
// Exit codes: 0 success, 1 configuration or input error, 2 a bound check or
// certification failed.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "srcrb/errors.hpp"
#include "srcrb/minorant.hpp"
#include "srcrb/moments.hpp"
#include "srcrb/sweeps.hpp"
#include "srcrb/torus.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kViolation = 2;

// Accepts inline JSON or a path to a JSON file.
nlohmann::json read_json_arg(const std::string& arg) {
  const auto first = arg.find_first_not_of(" \t\n");
  std::string text;
  if (first != std::string::npos && (arg[first] == '{' || arg[first] == '[')) {
    text = arg;
  } else {
    std::ifstream in(arg);
    if (!in) throw srcrb::ConfigurationError("cannot read '" + arg + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw srcrb::ConfigurationError("invalid JSON in '" + arg + "': " + e.what());
  }
}

// [1, 2.5, [re, im], {"re": .., "im": ..}, ...]
srcrb::moments::WeightVector parse_weights(const nlohmann::json& doc) {
  if (!doc.is_array()) throw srcrb::ConfigurationError("weights must be a JSON array");
  std::vector<srcrb::moments::Complex> values;
  for (const auto& w : doc) {
    if (w.is_number()) {
      values.emplace_back(w.get<double>(), 0.0);
    } else if (w.is_array() && w.size() == 2 && w[0].is_number() && w[1].is_number()) {
      values.emplace_back(w[0].get<double>(), w[1].get<double>());
    } else if (w.is_object() && w.contains("re") && w.contains("im")) {
      values.emplace_back(w["re"].get<double>(), w["im"].get<double>());
    } else {
      throw srcrb::ConfigurationError("weight entries must be numbers, [re, im] pairs or {re, im} objects");
    }
  }
  return srcrb::moments::WeightVector(std::move(values));
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw srcrb::IoError("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw srcrb::IoError("write to '" + path + "' failed");
}

int run_sweep_cmd(const std::string& config_path, double bandlimit, const std::string& plot_path, int workers) {
  auto config = srcrb::sweeps::load_config(config_path);
  if (bandlimit > 0.0) config.bandlimit = bandlimit;
  if (workers > 0) config.workers = workers;
  config.validate();

  std::vector<std::filesystem::path> outputs;
  std::filesystem::path svg, summary;
  if (!config.output_path.empty()) {
    const std::filesystem::path base(config.output_path);
    svg = plot_path.empty() ? std::filesystem::path(base).replace_extension(".svg") : std::filesystem::path(plot_path);
    summary = std::filesystem::path(base).replace_extension(".summary.json");
    outputs = {base, svg, summary};
  } else if (!plot_path.empty()) {
    svg = plot_path;
    outputs = {svg};
  }
  for (const auto& out : outputs) {
    std::error_code ec;
    if (std::filesystem::equivalent(out, config_path, ec)) {
      throw srcrb::ConfigurationError("output '" + out.string() + "' would overwrite the config file");
    }
  }

  for (const auto& out : outputs) {
    if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
  }
  const auto result = srcrb::sweeps::run_sweep(config);
  write_output(config.output_path, srcrb::sweeps::to_csv(result));
  if (!svg.empty()) srcrb::sweeps::emit_plot(result, svg.string());
  if (!summary.empty()) {
    write_output(summary.string(), srcrb::sweeps::summary_json(config, result).dump(2) + "\n");
    std::size_t skipped = 0;
    for (const auto& r : result.rows) skipped += r.skipped ? 1 : 0;
    std::cerr << "sweep: " << result.rows.size() << " rows (" << skipped << " skipped) -> " << config.output_path
              << ", " << svg.string() << ", " << summary.string() << "\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conditioning of multivariate super-resolution: Fisher information, block Vandermonde "
               "bounds and the radial minorant"};
  app.require_subcommand(1);

  auto* sweep = app.add_subcommand("sweep", "Run a separation/node-count sweep from a JSON config");
  std::string config_path, plot_path;
  double sweep_n = 0.0;
  int workers = 0;
  sweep->add_option("--config", config_path, "Sweep configuration (JSON)")->required();
  sweep->add_option("--bandlimit", sweep_n, "Override the configured bandlimit (e.g. 40)");
  sweep->add_option("--plot", plot_path, "SVG output path (default: CSV path with .svg)");
  sweep->add_option("--workers", workers, "Worker threads (default: config or hardware)");

  auto* bound = app.add_subcommand("bound-check", "Random instances at sep = q_tau / n against the bound");
  int b_dim = 1, b_trials = 20;
  double b_tau = 0.21;
  std::vector<double> b_n{10, 20, 40};
  std::uint64_t b_seed = 1;
  std::string b_out;
  bound->add_option("--dim", b_dim, "Dimension (1-3)")->required();
  bound->add_option("--tau", b_tau, "Dilation parameter tau > 0")->required();
  bound->add_option("--n", b_n, "Bandlimits")->expected(1, -1);
  bound->add_option("--trials", b_trials, "Trials per bandlimit");
  bound->add_option("--seed", b_seed, "Base seed");
  bound->add_option("--workers", workers, "Worker threads");
  bound->add_option("--out", b_out, "JSON report path (default stdout)");

  auto* minor = app.add_subcommand("minorant", "Certify or tabulate the admissible function");
  int m_dim = 2, m_grid = 1000, m_points = 1001;
  double m_tau = 0.1, m_bound_n = 0.0, m_rmax = -1.0;
  bool m_certify = false;
  std::string m_profile, m_out;
  minor->add_option("--dim", m_dim, "Dimension (1-3)")->required();
  minor->add_option("--tau", m_tau, "tau >= 0")->required();
  auto* certify_flag = minor->add_flag("--certify", m_certify, "Run the admissibility and derivative checks");
  auto* profile_opt = minor->add_option("--profile", m_profile, "phi | phi_hat | autocorrelation | psi | psi_hat");
  certify_flag->excludes(profile_opt);
  minor->add_option("--grid", m_grid, "Radial grid resolution for --certify");
  minor->add_option("--points", m_points, "Samples for --profile");
  minor->add_option("--rmax", m_rmax, "Upper end of the --profile range");
  minor->add_option("--bound", m_bound_n, "Also report the lower bound at this bandlimit");
  minor->add_option("--out", m_out, "Output path (default stdout)");

  auto* fim = app.add_subcommand("fim", "Fisher information summary for given nodes and weights");
  std::string f_nodes, f_weights;
  double f_n = 10.0, f_delta = 1.0;
  fim->add_option("--nodes", f_nodes, "Node set JSON {\"dim\", \"points\"} (inline or path)")->required();
  fim->add_option("--weights", f_weights, "Weights JSON array (inline or path); default all ones");
  fim->add_option("--n", f_n, "Bandlimit")->required();
  fim->add_option("--delta", f_delta, "Noise level delta > 0");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*sweep) return run_sweep_cmd(config_path, sweep_n, plot_path, workers);

    if (*bound) {
      const auto report = srcrb::sweeps::run_bound_campaign(b_dim, b_tau, b_n, b_trials, b_seed, workers);
      write_output(b_out, srcrb::sweeps::to_json(report).dump(2) + "\n");
      return report.passed() ? kOk : kViolation;
    }

    if (*minor) {
      const srcrb::minorant::MinorantModel model(m_dim, m_tau);
      if (!m_profile.empty()) {
        write_output(m_out, srcrb::minorant::radial_profile_csv(model, m_profile, m_points, m_rmax));
        return kOk;
      }
      nlohmann::json doc{{"dim", m_dim}, {"tau", m_tau}, {"support_radius", model.support_radius()},
                         {"phi_radius", model.phi_radius()}, {"bessel_zero", model.bessel_zero()}};
      bool ok = true;
      if (m_certify) {
        const auto cert = srcrb::minorant::certify_admissibility(model, m_grid);
        doc["admissibility"] = srcrb::minorant::to_json(cert);
        ok = ok && cert.passed();
        if (m_tau > 0.0) {
          const auto deriv = srcrb::minorant::radial_derivative_check(model);
          doc["derivatives"] = srcrb::minorant::to_json(deriv);
          ok = ok && deriv.passed();
        }
      }
      if (m_bound_n > 0.0) doc["bound"] = srcrb::minorant::to_json(srcrb::minorant::prop_bound(model, m_bound_n));
      write_output(m_out, doc.dump(2) + "\n");
      return ok ? kOk : kViolation;
    }

    if (*fim) {
      const auto nodes = srcrb::torus::node_set_from_json(read_json_arg(f_nodes));
      const auto weights = f_weights.empty() ? srcrb::moments::WeightVector::ones(nodes.size())
                                             : parse_weights(read_json_arg(f_weights));
      const srcrb::moments::FrequencyIndexSet indices(nodes.dim(), f_n);
      const auto info = srcrb::moments::fisher_information(nodes, weights, f_delta, indices);
      std::cout << srcrb::moments::fim_record(info).dump(2) << "\n";
      return kOk;
    }
  } catch (const srcrb::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  }
  return kOk;
}

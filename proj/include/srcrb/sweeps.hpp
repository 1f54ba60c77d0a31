#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace srcrb::sweeps {

enum class Generator { hex, grid, random };

std::string to_string(Generator g);
Generator generator_from_string(const std::string& name);

/// JSON keys match the member names. `workers` (0 = hardware concurrency)
/// and `record_runtime` are optional.
struct SweepConfig {
  int dim = 2;
  double bandlimit = 20.0;
  std::vector<double> separation_grid;  // values of sep * n
  std::vector<int> count_grid;
  Generator generator = Generator::hex;
  std::vector<std::uint64_t> seeds{0};
  double tau = 0.1;
  std::string output_path;
  int workers = 0;
  // Wall-clock times vary between runs; they are written to the CSV only when
  // requested so that the default output is reproducible byte for byte.
  bool record_runtime = false;

  /// Throws ConfigurationError on empty grids, n <= 0, unsupported shapes or
  /// |I| < (d+1) max(count).
  void validate() const;
};

SweepConfig config_from_json(const nlohmann::json& doc);
SweepConfig load_config(const std::string& path);
nlohmann::json to_json(const SweepConfig& config);

struct SweepRow {
  double nominal_sep_n = 0.0;
  double measured_sep = 0.0;  // NaN when undefined (single node) or skipped
  int count = 0;
  double sigma_min = 0.0;
  double proxy = 0.0;
  double bound = 0.0;         // NaN when sep * n < q_tau or tau = 0
  double runtime_ms = 0.0;
  bool skipped = false;
  std::string skip_reason;    // not part of the CSV
  std::uint64_t seed = 0;     // not part of the CSV
};

struct SweepResult {
  int dim = 0;
  double bandlimit = 0.0;
  std::vector<SweepRow> rows;  // ordered by (separation, count, seed) grid index
};

/// Same CSV fields (NaN == NaN); skip reasons and seeds are ignored.
bool same_csv_fields(const SweepResult& a, const SweepResult& b);

/// Runs every (separation, count, seed) cell on a bounded worker pool.
/// Generator failures mark the row skipped; the sweep itself never aborts.
SweepResult run_sweep(const SweepConfig& config);

inline constexpr const char* kCsvHeader = "nominal_sep_n,measured_sep,count,sigma_min,proxy,bound,runtime_ms";

std::string to_csv(const SweepResult& result);
SweepResult parse_csv(const std::string& text, int dim = 0, double bandlimit = 0.0);
void emit_csv(const SweepResult& result, const std::string& path);

/// Heatmap (x: sep * n, y: node count, colour: log10 proxy averaged over
/// seeds) or, when there is a single count, a line plot. Static SVG.
std::string to_svg(const SweepResult& result);
void emit_plot(const SweepResult& result, const std::string& path);

/// Per-cell details including skip reasons.
nlohmann::json summary_json(const SweepConfig& config, const SweepResult& result);

struct CampaignLevel {
  double n = 0.0;
  int trials = 0;
  int passed = 0;
  double bound = 0.0;              // B(n)
  double min_ratio = 0.0;          // min over trials of sigma_min^2 / B(n)
  double min_scaled_sigma = 0.0;   // min over trials of sigma_min^2 / n^d
  double max_scaled_sigma = 0.0;
};

struct CampaignReport {
  int dim = 0;
  double tau = 0.0;
  std::uint64_t seed = 0;
  std::vector<CampaignLevel> levels;
  double envelope = 0.0;  // min over n of min_scaled_sigma
  std::vector<nlohmann::json> violations;
  bool passed() const noexcept { return violations.empty(); }
};

/// Random node sets at separation exactly q_tau / n; checks
/// sigma_min^2(G) >= B(n) on every instance.
CampaignReport run_bound_campaign(int dim, double tau, const std::vector<double>& n_grid, int trials,
                                  std::uint64_t seed, int workers = 0);

nlohmann::json to_json(const CampaignReport& report);

}  // namespace srcrb::sweeps

#include "srcrb/sweeps.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "srcrb/errors.hpp"
#include "srcrb/minorant.hpp"
#include "srcrb/moments.hpp"
#include "srcrb/torus.hpp"

namespace srcrb::sweeps {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int resolve_workers(int requested, std::size_t jobs) {
  int w = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  w = std::max(1, w);
  return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(w), std::max<std::size_t>(jobs, 1)));
}

// Runs body(i) for i in [0, jobs) on `workers` threads. body must not throw.
void parallel_for(std::size_t jobs, int workers, const std::function<void(std::size_t)>& body) {
  const int w = resolve_workers(workers, jobs);
  if (w == 1) {
    for (std::size_t i = 0; i < jobs; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(w));
  for (int t = 0; t < w; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < jobs; i = next++) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

// `count` points of the cubic grid with the given spacing, filled in
// lexicographic order inside the smallest cube that holds them.
torus::NodeSet grid_patch(int dim, double spacing, int count) {
  int side = 1;
  while (std::pow(side, dim) < count) ++side;
  if (side * spacing > 1.0 + 1e-12) {
    throw InfeasibleError("grid generator: " + std::to_string(count) + " points at spacing " +
                          std::to_string(spacing) + " do not fit on the torus");
  }
  std::vector<torus::Point> pts;
  std::vector<int> idx(dim, 0);
  for (int c = 0; c < count; ++c) {
    torus::Point p(dim);
    for (int s = 0; s < dim; ++s) p[s] = 0.25 + spacing * idx[s];
    pts.push_back(std::move(p));
    for (int s = dim - 1; s >= 0; --s) {
      if (++idx[s] < side) break;
      idx[s] = 0;
    }
  }
  return torus::NodeSet(dim, std::move(pts));
}

std::string format_number(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

double parse_number(const std::string& field) {
  if (field.empty()) return kNaN;
  try {
    std::size_t used = 0;
    const double v = std::stod(field, &used);
    if (used != field.size()) throw ConfigurationError("trailing characters in CSV field '" + field + "'");
    return v;
  } catch (const std::logic_error&) {
    throw ConfigurationError("unparsable CSV field '" + field + "'");
  }
}

bool same_value(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace

std::string to_string(Generator g) {
  switch (g) {
    case Generator::hex: return "hex";
    case Generator::grid: return "grid";
    case Generator::random: return "random";
  }
  return "unknown";
}

Generator generator_from_string(const std::string& name) {
  if (name == "hex") return Generator::hex;
  if (name == "grid") return Generator::grid;
  if (name == "random") return Generator::random;
  throw ConfigurationError("unknown generator '" + name + "' (expected hex, grid or random)");
}

void SweepConfig::validate() const {
  if (dim < 1 || dim > 3) throw ConfigurationError("sweep: dim must be 1, 2 or 3");
  if (!(bandlimit > 0.0) || !std::isfinite(bandlimit)) throw ConfigurationError("sweep: bandlimit must be > 0");
  if (separation_grid.empty()) throw ConfigurationError("sweep: separation_grid is empty");
  if (count_grid.empty()) throw ConfigurationError("sweep: count_grid is empty");
  if (seeds.empty()) throw ConfigurationError("sweep: seeds is empty");
  for (double s : separation_grid) {
    if (!(s > 0.0) || !std::isfinite(s)) throw ConfigurationError("sweep: separation values must be > 0");
  }
  for (int c : count_grid) {
    if (c < 1) throw ConfigurationError("sweep: node counts must be >= 1");
  }
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw ConfigurationError("sweep: tau must be >= 0");
  if (workers < 0) throw ConfigurationError("sweep: workers must be >= 0");
  if (generator == Generator::hex && dim != 2) throw ConfigurationError("sweep: hex generator requires dim 2");
  const int max_count = *std::max_element(count_grid.begin(), count_grid.end());
  std::size_t rows = 0;
  try {
    rows = moments::FrequencyIndexSet(dim, bandlimit).size();
  } catch (const Error& e) {
    throw ConfigurationError(std::string("sweep: ") + e.what());
  }
  if (rows < static_cast<std::size_t>(dim + 1) * static_cast<std::size_t>(max_count)) {
    throw ConfigurationError("sweep: |I| = " + std::to_string(rows) + " < (d+1) * max count = " +
                             std::to_string((dim + 1) * max_count));
  }
}

SweepConfig config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigurationError("sweep config must be a JSON object");
  static const std::vector<std::string> known{"dim",   "bandlimit",   "separation_grid", "count_grid",
                                              "generator", "seeds",   "tau",             "output_path",
                                              "workers",   "record_runtime"};
  for (const auto& item : doc.items()) {
    if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
      throw ConfigurationError("sweep config: unknown key '" + item.key() + "'");
    }
  }
  for (const char* key : {"dim", "bandlimit", "separation_grid", "count_grid", "generator"}) {
    if (!doc.contains(key)) throw ConfigurationError(std::string("sweep config: missing key '") + key + "'");
  }
  SweepConfig c;
  try {
    c.dim = doc.at("dim").get<int>();
    c.bandlimit = doc.at("bandlimit").get<double>();
    c.separation_grid = doc.at("separation_grid").get<std::vector<double>>();
    c.count_grid = doc.at("count_grid").get<std::vector<int>>();
    c.generator = generator_from_string(doc.at("generator").get<std::string>());
    if (doc.contains("seeds")) c.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
    if (doc.contains("tau")) c.tau = doc.at("tau").get<double>();
    if (doc.contains("output_path")) c.output_path = doc.at("output_path").get<std::string>();
    if (doc.contains("workers")) c.workers = doc.at("workers").get<int>();
    if (doc.contains("record_runtime")) c.record_runtime = doc.at("record_runtime").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError(std::string("sweep config: ") + e.what());
  }
  c.validate();
  return c;
}

SweepConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot read sweep config '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError("sweep config '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(doc);
}

nlohmann::json to_json(const SweepConfig& c) {
  return {{"dim", c.dim},
          {"bandlimit", c.bandlimit},
          {"separation_grid", c.separation_grid},
          {"count_grid", c.count_grid},
          {"generator", to_string(c.generator)},
          {"seeds", c.seeds},
          {"tau", c.tau},
          {"output_path", c.output_path},
          {"workers", c.workers},
          {"record_runtime", c.record_runtime}};
}

bool same_csv_fields(const SweepResult& a, const SweepResult& b) {
  if (a.rows.size() != b.rows.size()) return false;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const auto& x = a.rows[i];
    const auto& y = b.rows[i];
    if (!same_value(x.nominal_sep_n, y.nominal_sep_n) || !same_value(x.measured_sep, y.measured_sep) ||
        x.count != y.count || !same_value(x.sigma_min, y.sigma_min) || !same_value(x.proxy, y.proxy) ||
        !same_value(x.bound, y.bound) || !same_value(x.runtime_ms, y.runtime_ms) || x.skipped != y.skipped) {
      return false;
    }
  }
  return true;
}

SweepResult run_sweep(const SweepConfig& config) {
  config.validate();
  const int d = config.dim;
  const double n = config.bandlimit;
  const moments::FrequencyIndexSet indices(d, n);
  std::optional<minorant::MinorantModel> model;
  if (config.tau > 0.0) model.emplace(d, config.tau);

  const std::size_t n_sep = config.separation_grid.size();
  const std::size_t n_count = config.count_grid.size();
  const std::size_t n_seed = config.seeds.size();
  SweepResult result;
  result.dim = d;
  result.bandlimit = n;
  result.rows.resize(n_sep * n_count * n_seed);

  parallel_for(result.rows.size(), config.workers, [&](std::size_t cell) {
    const std::size_t i_seed = cell % n_seed;
    const std::size_t i_count = (cell / n_seed) % n_count;
    const std::size_t i_sep = cell / (n_seed * n_count);
    SweepRow& row = result.rows[cell];
    row.nominal_sep_n = config.separation_grid[i_sep];
    row.count = config.count_grid[i_count];
    row.seed = config.seeds[i_seed];
    row.measured_sep = kNaN;
    row.sigma_min = kNaN;
    row.proxy = kNaN;
    row.bound = kNaN;
    const auto start = std::chrono::steady_clock::now();
    try {
      const double spacing = row.nominal_sep_n / n;
      const torus::NodeSet nodes = [&] {
        switch (config.generator) {
          case Generator::hex: return torus::gen_hex_lattice(spacing, row.count);
          case Generator::grid: return grid_patch(d, spacing, row.count);
          case Generator::random: break;
        }
        return torus::gen_random_separated(d, spacing, row.count, row.seed, true);
      }();
      if (nodes.size() >= 2) row.measured_sep = nodes.separation();
      row.sigma_min = moments::sigma_min(moments::block_jacobian(nodes, indices).matrix);
      row.proxy = row.sigma_min > 0.0 ? n / row.sigma_min : std::numeric_limits<double>::infinity();
      if (model && (nodes.size() < 2 || row.measured_sep * n >= model->support_radius() * (1.0 - 1e-12))) {
        row.bound = minorant::prop_bound(*model, n).bound;
      }
    } catch (const std::exception& e) {
      row.skipped = true;
      row.skip_reason = e.what();
      row.measured_sep = row.sigma_min = row.proxy = row.bound = kNaN;
    }
    const auto stop = std::chrono::steady_clock::now();
    row.runtime_ms = config.record_runtime ? std::chrono::duration<double, std::milli>(stop - start).count() : 0.0;
  });
  return result;
}

std::string to_csv(const SweepResult& result) {
  std::ostringstream out;
  out << kCsvHeader << '\n';
  for (const auto& r : result.rows) {
    out << format_number(r.nominal_sep_n) << ',' << format_number(r.measured_sep) << ',' << r.count << ','
        << format_number(r.sigma_min) << ',' << format_number(r.proxy) << ',' << format_number(r.bound) << ','
        << format_number(r.runtime_ms) << '\n';
  }
  return out.str();
}

SweepResult parse_csv(const std::string& text, int dim, double bandlimit) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw ConfigurationError("sweep CSV: missing or unexpected header");
  }
  SweepResult result;
  result.dim = dim;
  result.bandlimit = bandlimit;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 7) throw ConfigurationError("sweep CSV: expected 7 fields in '" + line + "'");
    SweepRow r;
    r.nominal_sep_n = parse_number(fields[0]);
    r.measured_sep = parse_number(fields[1]);
    r.count = static_cast<int>(parse_number(fields[2]));
    r.sigma_min = parse_number(fields[3]);
    r.proxy = parse_number(fields[4]);
    r.bound = parse_number(fields[5]);
    r.runtime_ms = parse_number(fields[6]);
    r.skipped = std::isnan(r.sigma_min);
    result.rows.push_back(std::move(r));
  }
  return result;
}

void emit_csv(const SweepResult& result, const std::string& path) { write_file(path, to_csv(result)); }

namespace {

// viridis-like ramp, t in [0, 1]
std::string ramp(double t) {
  static const double anchors[5][3] = {
      {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
  t = std::clamp(t, 0.0, 1.0) * 4.0;
  const int i = std::min(3, static_cast<int>(t));
  const double f = t - i;
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x",
                static_cast<int>(std::lround(anchors[i][0] + f * (anchors[i + 1][0] - anchors[i][0]))),
                static_cast<int>(std::lround(anchors[i][1] + f * (anchors[i + 1][1] - anchors[i][1]))),
                static_cast<int>(std::lround(anchors[i][2] + f * (anchors[i + 1][2] - anchors[i][2]))));
  return buf;
}

std::string fmt(double v, int digits = 3) {
  std::ostringstream out;
  out.precision(digits);
  out << v;
  return out.str();
}

}  // namespace

std::string to_svg(const SweepResult& result) {
  // mean log10 proxy per (separation, count) over seeds
  std::vector<double> seps;
  std::vector<int> counts;
  for (const auto& r : result.rows) {
    if (std::find(seps.begin(), seps.end(), r.nominal_sep_n) == seps.end()) seps.push_back(r.nominal_sep_n);
    if (std::find(counts.begin(), counts.end(), r.count) == counts.end()) counts.push_back(r.count);
  }
  std::sort(seps.begin(), seps.end());
  std::sort(counts.begin(), counts.end());
  std::map<std::pair<double, int>, std::pair<double, int>> acc;
  for (const auto& r : result.rows) {
    if (r.skipped || !(r.proxy > 0.0) || !std::isfinite(r.proxy)) continue;
    auto& a = acc[{r.nominal_sep_n, r.count}];
    a.first += std::log10(r.proxy);
    a.second += 1;
  }
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& [key, a] : acc) {
    const double v = a.first / a.second;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(hi > lo)) hi = lo + 1.0;

  const double width = 720, height = 480, left = 70, right = 110, top = 40, bottom = 60;
  const double plot_w = width - left - right, plot_h = height - top - bottom;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">log10 condition proxy, d="
      << result.dim << ", n=" << fmt(result.bandlimit) << "</text>\n";

  if (seps.empty()) {
    svg << "<text x=\"" << width / 2 << "\" y=\"" << height / 2 << "\" text-anchor=\"middle\">no data</text>\n";
  } else if (counts.size() == 1) {
    // line plot against sep * n
    const double x0 = seps.front(), x1 = seps.size() > 1 ? seps.back() : seps.front() + 1.0;
    auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * plot_w; };
    auto py = [&](double y) { return top + (hi - y) / (hi - lo) * plot_h; };
    svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\"" << plot_h
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    std::ostringstream path;
    for (double s : seps) {
      const auto it = acc.find({s, counts.front()});
      if (it == acc.end()) continue;
      const double v = it->second.first / it->second.second;
      path << fmt(px(s), 6) << ',' << fmt(py(v), 6) << ' ';
      svg << "<circle cx=\"" << fmt(px(s), 6) << "\" cy=\"" << fmt(py(v), 6) << "\" r=\"3\" fill=\"#3b528b\"/>\n";
    }
    svg << "<polyline points=\"" << path.str() << "\" fill=\"none\" stroke=\"#3b528b\" stroke-width=\"1.5\"/>\n";
    for (int i = 0; i <= 4; ++i) {
      const double yv = lo + (hi - lo) * i / 4.0;
      svg << "<text x=\"" << left - 6 << "\" y=\"" << fmt(py(yv), 6) << "\" text-anchor=\"end\">" << fmt(yv)
          << "</text>\n";
      const double xv = x0 + (x1 - x0) * i / 4.0;
      svg << "<text x=\"" << fmt(px(xv), 6) << "\" y=\"" << top + plot_h + 16 << "\" text-anchor=\"middle\">"
          << fmt(xv) << "</text>\n";
    }
    svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 20
        << "\" text-anchor=\"middle\">sep * n (" << counts.front() << " nodes)</text>\n";
  } else {
    const double cw = plot_w / seps.size(), ch = plot_h / counts.size();
    for (std::size_t i = 0; i < seps.size(); ++i) {
      for (std::size_t j = 0; j < counts.size(); ++j) {
        const auto it = acc.find({seps[i], counts[j]});
        const std::string color = it == acc.end() ? "#cccccc" : ramp((it->second.first / it->second.second - lo) / (hi - lo));
        svg << "<rect class=\"cell\" x=\"" << fmt(left + i * cw, 6) << "\" y=\"" << fmt(top + (counts.size() - 1 - j) * ch, 6)
            << "\" width=\"" << fmt(cw, 6) << "\" height=\"" << fmt(ch, 6) << "\" fill=\"" << color << "\"/>\n";
      }
    }
    const std::size_t xstep = std::max<std::size_t>(1, seps.size() / 10);
    for (std::size_t i = 0; i < seps.size(); i += xstep) {
      svg << "<text x=\"" << fmt(left + (i + 0.5) * cw, 6) << "\" y=\"" << top + plot_h + 16
          << "\" text-anchor=\"middle\">" << fmt(seps[i]) << "</text>\n";
    }
    const std::size_t ystep = std::max<std::size_t>(1, counts.size() / 10);
    for (std::size_t j = 0; j < counts.size(); j += ystep) {
      svg << "<text x=\"" << left - 6 << "\" y=\"" << fmt(top + (counts.size() - 0.5 - j) * ch + 4, 6)
          << "\" text-anchor=\"end\">" << counts[j] << "</text>\n";
    }
    svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 20 << "\" text-anchor=\"middle\">sep * n</text>\n";
    svg << "<text x=\"18\" y=\"" << top + plot_h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
        << top + plot_h / 2 << ")\">node count</text>\n";
    // colour bar
    const double bx = width - right + 30, bw = 18;
    for (int k = 0; k < 50; ++k) {
      svg << "<rect x=\"" << bx << "\" y=\"" << fmt(top + plot_h * (49 - k) / 50.0, 6) << "\" width=\"" << bw
          << "\" height=\"" << fmt(plot_h / 50.0 + 0.5, 6) << "\" fill=\"" << ramp(k / 49.0) << "\"/>\n";
    }
    svg << "<text x=\"" << bx + bw + 4 << "\" y=\"" << top + 8 << "\">" << fmt(hi) << "</text>\n";
    svg << "<text x=\"" << bx + bw + 4 << "\" y=\"" << top + plot_h << "\">" << fmt(lo) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void emit_plot(const SweepResult& result, const std::string& path) { write_file(path, to_svg(result)); }

nlohmann::json summary_json(const SweepConfig& config, const SweepResult& result) {
  nlohmann::json cells = nlohmann::json::array();
  std::size_t skipped = 0;
  for (const auto& r : result.rows) {
    nlohmann::json cell{{"nominal_sep_n", r.nominal_sep_n}, {"count", r.count}, {"seed", r.seed},
                        {"skipped", r.skipped}};
    if (r.skipped) {
      cell["reason"] = r.skip_reason;
      ++skipped;
    }
    cells.push_back(std::move(cell));
  }
  return {{"config", to_json(config)}, {"rows", result.rows.size()}, {"skipped", skipped}, {"cells", cells}};
}

// ---------------------------------------------------------------------------

CampaignReport run_bound_campaign(int dim, double tau, const std::vector<double>& n_grid, int trials,
                                  std::uint64_t seed, int workers) {
  if (!(tau > 0.0)) throw PreconditionError("bound campaign: tau must be > 0");
  if (n_grid.empty()) throw ConfigurationError("bound campaign: n grid is empty");
  if (trials < 1) throw ConfigurationError("bound campaign: trials must be >= 1");
  for (double n : n_grid) {
    if (!(n > 0.0) || !std::isfinite(n)) throw ConfigurationError("bound campaign: n must be > 0");
  }
  const minorant::MinorantModel model(dim, tau);
  CampaignReport report;
  report.dim = dim;
  report.tau = tau;
  report.seed = seed;

  struct Outcome {
    double sigma_sq = 0.0;
    nlohmann::json nodes;
    std::string error;
  };

  report.envelope = std::numeric_limits<double>::infinity();
  for (std::size_t level = 0; level < n_grid.size(); ++level) {
    const double n = n_grid[level];
    const moments::FrequencyIndexSet indices(dim, n);
    const double sep = model.support_radius() / n;
    const double bound = minorant::prop_bound(model, n).bound;
    // cap the node count by the overdeterminedness requirement and a loose
    // packing estimate so rejection sampling terminates quickly
    const double ball = minorant::sphere_area(dim - 1) * std::pow(0.5 * sep, dim) / dim;
    const int cap = static_cast<int>(std::max(
        2.0, std::min({8.0, std::floor(indices.size() / (dim + 1.0)), std::floor(0.5 / ball)})));

    std::vector<Outcome> outcomes(static_cast<std::size_t>(trials));
    parallel_for(outcomes.size(), workers, [&](std::size_t t) {
      std::seed_seq seq{seed, static_cast<std::uint64_t>(level), static_cast<std::uint64_t>(t)};
      std::mt19937_64 rng(seq);
      int count = std::uniform_int_distribution<int>(2, cap)(rng);
      const std::uint64_t gen_seed = rng();
      while (true) {
        try {
          const auto nodes = torus::gen_random_separated(dim, sep, count, gen_seed, true);
          const double s = moments::sigma_min(moments::block_jacobian(nodes, indices).matrix);
          outcomes[t].sigma_sq = s * s;
          outcomes[t].nodes = torus::to_json(nodes);
          return;
        } catch (const InfeasibleError&) {
          if (count <= 2) {
            outcomes[t].error = "could not place two points";
            return;
          }
          --count;
        } catch (const std::exception& e) {
          outcomes[t].error = e.what();
          return;
        }
      }
    });

    CampaignLevel lv;
    lv.n = n;
    lv.trials = trials;
    lv.bound = bound;
    lv.min_ratio = std::numeric_limits<double>::infinity();
    lv.min_scaled_sigma = std::numeric_limits<double>::infinity();
    const double nd = std::pow(n, dim);
    for (std::size_t t = 0; t < outcomes.size(); ++t) {
      const auto& o = outcomes[t];
      if (!o.error.empty()) {
        report.violations.push_back({{"n", n}, {"trial", t}, {"error", o.error}});
        continue;
      }
      // relative slack for rounding in the eigensolver
      const bool ok = o.sigma_sq >= bound * (1.0 - 1e-9);
      if (ok) {
        ++lv.passed;
      } else {
        report.violations.push_back(
            {{"n", n}, {"trial", t}, {"sigma_min_sq", o.sigma_sq}, {"bound", bound}, {"nodes", o.nodes}});
      }
      lv.min_ratio = std::min(lv.min_ratio, o.sigma_sq / bound);
      lv.min_scaled_sigma = std::min(lv.min_scaled_sigma, o.sigma_sq / nd);
      lv.max_scaled_sigma = std::max(lv.max_scaled_sigma, o.sigma_sq / nd);
    }
    report.envelope = std::min(report.envelope, lv.min_scaled_sigma);
    report.levels.push_back(lv);
  }
  return report;
}

nlohmann::json to_json(const CampaignReport& r) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& lv : r.levels) {
    levels.push_back({{"n", lv.n},
                      {"trials", lv.trials},
                      {"passed", lv.passed},
                      {"bound", lv.bound},
                      {"min_ratio_sigma_sq_over_bound", lv.min_ratio},
                      {"min_sigma_sq_over_n_d", lv.min_scaled_sigma},
                      {"max_sigma_sq_over_n_d", lv.max_scaled_sigma}});
  }
  return {{"dim", r.dim},
          {"tau", r.tau},
          {"seed", r.seed},
          {"passed", r.passed()},
          {"envelope_sigma_sq_over_n_d", r.envelope},
          {"levels", levels},
          {"violations", r.violations}};
}

}  // namespace srcrb::sweeps

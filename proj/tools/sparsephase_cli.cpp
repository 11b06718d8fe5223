// sparsephase: phantom generation, forward data, retrieval runs, sweeps and metrics.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "sparsephase/sparsephase.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace sparsephase;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- small helpers --------------------------------------------------------

void write_pgm(const fs::path& path, std::size_t w, std::size_t h, const std::vector<std::uint8_t>& pixels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << "P5\n" << w << ' ' << h << "\n255\n";
  out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  if (!out) throw DataError("failed writing " + path.string());
}

/// Phase wrapped to [-pi, pi), mapped affinely onto [0, 255].
std::vector<std::uint8_t> phase_preview(const ComplexField& f) {
  std::vector<std::uint8_t> px(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double phi = wrap_phase(std::arg(f[i]));
    px[i] = static_cast<std::uint8_t>(std::lround(255.0 * (phi + std::numbers::pi) / (2.0 * std::numbers::pi)));
  }
  return px;
}

/// round(255 * (|G| / max|G|)^0.25), with the DC sample moved to the centre.
std::vector<std::uint8_t> magnitude_preview(const MagnitudeData& m) {
  const std::size_t w = m.width();
  const std::size_t h = m.height();
  double peak = 0.0;
  for (double v : m.data()) peak = std::max(peak, v);
  std::vector<std::uint8_t> px(m.size(), 0);
  if (peak == 0.0) return px;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double v = m((x + w / 2) % w, (y + h / 2) % h) / peak;
      px[y * w + x] = static_cast<std::uint8_t>(std::lround(255.0 * std::pow(v, 0.25)));
    }
  }
  return px;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw DataError("failed writing " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw DataError("cannot create output directory " + dir.string());
}

ComplexField load_complex(const fs::path& path) {
  auto file = read_field_file(path);
  if (auto* c = std::get_if<ComplexField>(&file)) return std::move(*c);
  const auto& r = std::get<RealGrid>(file);
  ComplexField out(r.width(), r.height());
  for (std::size_t i = 0; i < r.size(); ++i) out[i] = r[i];
  return out;
}

MagnitudeData load_magnitude(const fs::path& path) {
  auto file = read_field_file(path);
  if (!std::holds_alternative<RealGrid>(file)) throw DataError(path.string() + ": magnitude file must hold real samples");
  try {
    return make_magnitude(std::get<RealGrid>(file));
  } catch (const std::invalid_argument& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

SupportMask load_mask(const fs::path& path) {
  auto file = read_field_file(path);
  if (!std::holds_alternative<RealGrid>(file)) throw DataError(path.string() + ": support file must hold real samples");
  try {
    return SupportMask::from_real(std::get<RealGrid>(file));
  } catch (const std::invalid_argument& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

DeltaRule parse_delta(const std::string& text) {
  if (text == "median") return DeltaRule::median();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !(v > 0.0) || !std::isfinite(v)) {
    throw UsageError("--delta expects 'median' or a positive number, got '" + text + "'");
  }
  return DeltaRule::fixed(v);
}

json delta_json(const DeltaRule& d) {
  if (d.kind == DeltaRule::Kind::MedianInSupport) return "median";
  return d.value;
}

PhantomKind parse_kind(const std::string& k) {
  if (k == "binary") return PhantomKind::BinaryPhase;
  if (k == "gray") return PhantomKind::GrayPhase;
  throw UsageError("--kind expects binary or gray");
}

const char* kind_name(PhantomKind k) { return k == PhantomKind::BinaryPhase ? "binary" : "gray"; }

json phantom_json(const PhantomSpec& s) {
  return json{{"kind", kind_name(s.kind)},          {"size", s.image_size},  {"support", s.support_size},
              {"step", s.phase_step},               {"range", s.phase_range}, {"pattern_seed", s.pattern_seed}};
}

json config_json(Algorithm alg, const RetrievalConfig& c, int truncate_iterations) {
  const auto& p = c.penalty;
  return json{{"algorithm", to_string(alg)},
              {"iterations", c.n_iterations},
              {"beta", c.beta},
              {"seed", c.seed},
              {"truncate_iterations", truncate_iterations},
              {"penalty",
               {{"kind", to_string(p.kind)},
                {"ntv", p.n_inner_steps},
                {"eps", p.epsilon},
                {"delta", delta_json(p.delta_rule)},
                {"ls_alpha", p.ls_alpha},
                {"ls_shrink", p.ls_shrink},
                {"t_init", p.t_init}}}};
}

json metrics_json(const TwinMetrics& m, double threshold) {
  return json{{"c_up", m.c_up}, {"c_twin", m.c_twin}, {"twin_present", m.twin_present}, {"twin_threshold", threshold}};
}

std::optional<SupportSchedule> truncation_schedule(const SupportMask& mask, int iterations) {
  if (iterations <= 0) return std::nullopt;
  try {
    return SupportSchedule{triangular_truncation(mask), iterations};
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--truncate: ") + e.what());
  }
}

json run_json(const RunReport& r, Algorithm alg, const RetrievalConfig& cfg, int truncate_iterations,
              const SupportMask& mask, const ComplexField* truth, double threshold) {
  json j;
  j["config"] = config_json(alg, cfg, truncate_iterations);
  j["seed"] = r.seed;
  j["final_tv"] = tv_value(r.final_field, mask);
  j["final_penalty"] = r.penalty_trace.back();
  j["final_fourier_residual"] = r.fourier_residual_trace.back();
  if (truth != nullptr) {
    j["twin_metrics"] = metrics_json(twin_correlations(r.final_field, *truth, mask, threshold), threshold);
    j["phase_rmse"] = phase_rmse(r.final_field, *truth, mask);
    j["best_phase_rmse"] = best_phase_rmse(r.final_field, *truth, mask);
  } else {
    j["twin_metrics"] = nullptr;
  }
  j["penalty_trace"] = r.penalty_trace;
  j["fourier_residual_trace"] = r.fourier_residual_trace;
  j["wall_time_s"] = r.wall_time;
  return j;
}

// ---- retrieval flags shared by retrieve and sweep ------------------------

struct RetrievalFlags {
  std::string alg = "hio-tv";
  int iters = 500;
  double beta = 0.9;
  int ntv = 30;
  double eps = 1e-8;
  std::string delta = "median";
  int truncate = 0;
  double twin_threshold = kDefaultTwinThreshold;
};

RetrievalConfig make_config(const RetrievalFlags& f, std::uint64_t seed) {
  RetrievalConfig c;
  c.beta = f.beta;
  c.n_iterations = f.iters;
  c.seed = seed;
  c.penalty.n_inner_steps = f.ntv;
  c.penalty.epsilon = f.eps;
  c.penalty.delta_rule = parse_delta(f.delta);
  return c;
}

// ---- phantom --------------------------------------------------------------

struct PhantomArgs {
  std::string kind = "binary";
  std::size_t size = 128;
  std::size_t support = 60;
  double step = 2.0 * std::numbers::pi / 3.0;
  double range = 5.0 * std::numbers::pi / 6.0;
  std::uint64_t seed = 1;
  std::string out;
};

PhantomSpec phantom_spec(const PhantomArgs& a) {
  PhantomSpec s;
  s.kind = parse_kind(a.kind);
  s.image_size = a.size;
  s.support_size = a.support;
  s.phase_step = a.step;
  s.phase_range = a.range;
  s.pattern_seed = a.seed;
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return s;
}

int cmd_phantom(const PhantomArgs& a) {
  const auto spec = phantom_spec(a);
  const fs::path dir(a.out);
  ensure_dir(dir);
  const auto truth = make_phantom(spec);
  const auto mask = make_support(spec.image_size, spec.support_size);
  write_field_file(truth, dir / "truth.prf");
  write_field_file(mask.to_real(), dir / "support.prf");
  write_pgm(dir / "phase.pgm", truth.width(), truth.height(), phase_preview(truth));
  write_json(dir / "phantom.json", json{{"phantom", phantom_json(spec)}, {"truth_tv", tv_value(truth, mask)}});
  return kExitOk;
}

// ---- forward --------------------------------------------------------------

int cmd_forward(const std::string& in, const std::string& out) {
  const auto field = load_complex(in);
  const fs::path dir(out);
  ensure_dir(dir);
  const auto mag = synthesize_magnitude(field);
  write_field_file(mag, dir / "magnitude.prf");
  write_pgm(dir / "magnitude.pgm", mag.width(), mag.height(), magnitude_preview(mag));
  return kExitOk;
}

// ---- retrieve -------------------------------------------------------------

struct RetrieveArgs {
  RetrievalFlags flags;
  std::string magnitude;
  std::string support;
  std::string truth;
  std::uint64_t seed = 0;
  std::string out;
  bool ntv_given = false;
};

int cmd_retrieve(const RetrieveArgs& a) {
  const Algorithm alg = [&] {
    try {
      return parse_algorithm(a.flags.alg);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }();
  if (alg == Algorithm::Hio && a.ntv_given) {
    std::cerr << "warning: --ntv is ignored for --alg hio (no sparsity step)\n";
  }
  auto cfg = config_for(alg, make_config(a.flags, a.seed), a.seed);
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  const auto mag = load_magnitude(a.magnitude);
  const auto mask = load_mask(a.support);
  require_same_shape(mask, mag, "retrieve");
  std::optional<ComplexField> truth;
  if (!a.truth.empty()) {
    truth = load_complex(a.truth);
    require_same_shape(*truth, mag, "retrieve");
  }
  const auto schedule = truncation_schedule(mask, a.flags.truncate);

  const fs::path dir(a.out);
  ensure_dir(dir);
  const auto report = run_algorithm(alg, mag, mask, cfg, schedule);
  write_field_file(report.final_field, dir / "field.prf");
  write_pgm(dir / "phase.pgm", report.final_field.width(), report.final_field.height(),
            phase_preview(report.final_field));
  json j = run_json(report, alg, cfg, a.flags.truncate, mask, truth ? &*truth : nullptr, a.flags.twin_threshold);
  j["inputs"] = {{"magnitude", a.magnitude}, {"support", a.support}, {"truth", a.truth.empty() ? json() : json(a.truth)}};
  write_json(dir / "report.json", j);
  return kExitOk;
}

// ---- sweep ----------------------------------------------------------------

struct SweepConfig {
  PhantomSpec phantom;
  RetrievalFlags retrieval;
  std::vector<Algorithm> algorithms;
  std::vector<std::uint64_t> seeds;
  std::string output_dir;
};

template <class T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  return obj.at(key).get<T>();
}

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> known, const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
      throw UsageError("sweep config: unknown key '" + key + "' in " + where);
    }
  }
}

SweepConfig parse_sweep_config(const json& j) {
  if (!j.is_object()) throw UsageError("sweep config must be a JSON object");
  reject_unknown_keys(j, {"phantom", "retrieval", "algorithms", "seeds", "output_dir", "truncate_iterations", "twin_threshold"},
                      "top level");
  SweepConfig c;
  try {
    const json ph = j.value("phantom", json::object());
    reject_unknown_keys(ph, {"kind", "size", "support", "step", "range", "pattern_seed"}, "phantom");
    PhantomArgs pa;
    pa.kind = get_or<std::string>(ph, "kind", pa.kind);
    pa.size = get_or<std::size_t>(ph, "size", pa.size);
    pa.support = get_or<std::size_t>(ph, "support", pa.support);
    pa.step = get_or<double>(ph, "step", pa.step);
    pa.range = get_or<double>(ph, "range", pa.range);
    pa.seed = get_or<std::uint64_t>(ph, "pattern_seed", pa.seed);
    c.phantom = phantom_spec(pa);

    const json rt = j.value("retrieval", json::object());
    reject_unknown_keys(rt, {"iterations", "beta", "ntv", "eps", "delta"}, "retrieval");
    auto& f = c.retrieval;
    f.iters = get_or<int>(rt, "iterations", f.iters);
    f.beta = get_or<double>(rt, "beta", f.beta);
    f.ntv = get_or<int>(rt, "ntv", f.ntv);
    f.eps = get_or<double>(rt, "eps", f.eps);
    if (rt.contains("delta")) f.delta = rt.at("delta").is_number() ? rt.at("delta").dump() : rt.at("delta").get<std::string>();
    f.truncate = get_or<int>(j, "truncate_iterations", 0);
    f.twin_threshold = get_or<double>(j, "twin_threshold", kDefaultTwinThreshold);

    for (const auto& name : j.value("algorithms", std::vector<std::string>{"hio", "hio-tv"})) {
      c.algorithms.push_back(parse_algorithm(name));
    }
    c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    c.output_dir = get_or<std::string>(j, "output_dir", "");
  } catch (const json::exception& e) {
    throw UsageError(std::string("sweep config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("sweep config: ") + e.what());
  }
  if (c.seeds.empty()) throw UsageError("sweep config: seeds must not be empty");
  if (std::set<std::uint64_t>(c.seeds.begin(), c.seeds.end()).size() != c.seeds.size()) {
    throw UsageError("sweep config: seeds must be distinct");
  }
  if (c.algorithms.empty()) throw UsageError("sweep config: algorithms must not be empty");
  if (std::set<Algorithm>(c.algorithms.begin(), c.algorithms.end()).size() != c.algorithms.size()) {
    throw UsageError("sweep config: algorithms must be distinct");
  }
  try {
    make_config(c.retrieval, 0).validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("sweep config: ") + e.what());
  }
  return c;
}

int cmd_sweep(const std::string& config_path, const std::string& out_override, unsigned jobs) {
  std::ifstream in(config_path);
  if (!in) throw DataError("cannot read sweep config " + config_path);
  json raw;
  try {
    raw = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(config_path + ": " + e.what());
  }
  const auto cfg = parse_sweep_config(raw);
  const fs::path dir = out_override.empty() ? fs::path(cfg.output_dir) : fs::path(out_override);
  if (dir.empty()) throw UsageError("sweep: no output directory (set output_dir or pass --out)");
  ensure_dir(dir);

  const auto truth = make_phantom(cfg.phantom);
  const auto mask = make_support(cfg.phantom.image_size, cfg.phantom.support_size);
  const auto mag = synthesize_magnitude(truth);
  write_field_file(truth, dir / "truth.prf");
  write_field_file(mask.to_real(), dir / "support.prf");
  write_field_file(mag, dir / "magnitude.prf");
  const auto schedule = truncation_schedule(mask, cfg.retrieval.truncate);
  const auto base = make_config(cfg.retrieval, 0);

  std::vector<SweepCell> cells;
  for (auto alg : cfg.algorithms) {
    for (auto seed : cfg.seeds) cells.push_back({alg, seed});
  }
  const auto outcomes = run_cells(cells, mag, mask, base, schedule, jobs);

  const double threshold = cfg.retrieval.twin_threshold;
  json aggregate;
  aggregate["config"] = {{"phantom", phantom_json(cfg.phantom)},
                         {"retrieval",
                          {{"iterations", base.n_iterations},
                           {"beta", base.beta},
                           {"ntv", base.penalty.n_inner_steps},
                           {"eps", base.penalty.epsilon},
                           {"delta", delta_json(base.penalty.delta_rule)},
                           {"ls_alpha", base.penalty.ls_alpha},
                           {"ls_shrink", base.penalty.ls_shrink},
                           {"t_init", base.penalty.t_init}}},
                         {"truncate_iterations", cfg.retrieval.truncate},
                         {"twin_threshold", threshold},
                         {"algorithms", json::array()},
                         {"seeds", cfg.seeds}};
  for (auto alg : cfg.algorithms) aggregate["config"]["algorithms"].push_back(to_string(alg));
  aggregate["truth_tv"] = tv_value(truth, mask);
  aggregate["jobs"] = jobs;

  bool any_numerical = false;
  bool any_failed = false;
  json per_alg = json::object();
  for (auto alg : cfg.algorithms) {
    std::vector<RunReport> done;
    std::vector<double> rmse;
    json failures = json::array();
    for (const auto& o : outcomes) {
      if (o.cell.algorithm != alg) continue;
      const std::string name = std::string(to_string(alg)) + "_seed" + std::to_string(o.cell.seed);
      if (!o.report) {
        any_failed = true;
        any_numerical = any_numerical || o.numerical_failure;
        failures.push_back({{"seed", o.cell.seed}, {"error", o.error}, {"numerical", o.numerical_failure}});
        continue;
      }
      const fs::path run_dir = dir / "runs" / name;
      ensure_dir(run_dir);
      auto r = *o.report;
      r.twin_metrics = twin_correlations(r.final_field, truth, mask, threshold);
      write_field_file(r.final_field, run_dir / "field.prf");
      write_json(run_dir / "report.json",
                 run_json(r, alg, config_for(alg, base, o.cell.seed), cfg.retrieval.truncate, mask, &truth, threshold));
      rmse.push_back(best_phase_rmse(r.final_field, truth, mask));
      done.push_back(std::move(r));
    }
    json entry;
    entry["completed"] = done.size();
    entry["failed"] = failures;
    if (!done.empty()) {
      const auto stats = run_statistics(done, truth, mask, threshold);
      const auto [rm, rs] = mean_and_std(rmse);
      entry["tv_mean"] = stats.tv_mean;
      entry["tv_std"] = stats.tv_std;
      entry["penalty_mean"] = stats.penalty_mean;
      entry["penalty_std"] = stats.penalty_std;
      entry["twin_count"] = stats.twin_count;
      entry["twin_fraction"] = stats.twin_fraction;
      entry["twin_absent_fraction"] = 1.0 - stats.twin_fraction;
      entry["best_phase_rmse_mean"] = rm;
      entry["best_phase_rmse_std"] = rs;
      json rows = json::array();
      for (std::size_t i = 0; i < stats.rows.size(); ++i) {
        const auto& row = stats.rows[i];
        rows.push_back({{"seed", row.seed},
                        {"final_tv", row.final_tv},
                        {"final_penalty", row.final_penalty},
                        {"c_up", row.twin.c_up},
                        {"c_twin", row.twin.c_twin},
                        {"twin_present", row.twin.twin_present},
                        {"best_phase_rmse", rmse[i]}});
      }
      entry["runs"] = rows;
    }
    per_alg[std::string(to_string(alg))] = entry;
  }
  aggregate["results"] = per_alg;
  write_json(dir / "aggregate.json", aggregate);

  if (any_numerical) return kExitNumerical;
  return any_failed ? kExitData : kExitOk;
}

// ---- metrics --------------------------------------------------------------

int cmd_metrics(const std::string& recon_path, const std::string& truth_path, const std::string& support_path,
                double threshold, const std::string& delta_text) {
  const auto delta_rule = parse_delta(delta_text);
  const auto recon = load_complex(recon_path);
  const auto truth = load_complex(truth_path);
  const auto mask = load_mask(support_path);
  require_same_shape(recon, truth, "metrics");
  require_same_shape(mask, truth, "metrics");
  const double delta = delta_rule.kind == DeltaRule::Kind::Fixed ? delta_rule.value : select_delta(recon, mask);
  const auto m = twin_correlations(recon, truth, mask, threshold);
  json j = metrics_json(m, threshold);
  j["phase_rmse"] = phase_rmse(recon, truth, mask);
  j["best_phase_rmse"] = best_phase_rmse(recon, truth, mask);
  j["tv"] = tv_value(recon, mask);
  j["huber"] = huber_value(recon, delta, mask);
  j["huber_delta"] = delta;
  std::cout << j.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparsity-assisted HIO phase retrieval"};
  app.require_subcommand(1);

  PhantomArgs ph;
  auto* phantom = app.add_subcommand("phantom", "Generate a phantom, its support and a phase preview");
  phantom->add_option("--kind", ph.kind, "binary or gray")->check(CLI::IsMember({"binary", "gray"}));
  phantom->add_option("--size", ph.size, "Image size in pixels (square, even)");
  phantom->add_option("--support", ph.support, "Support size in pixels (square, even, < size/2)");
  phantom->add_option("--step", ph.step, "Phase step of the binary phantom (radians)");
  phantom->add_option("--range", ph.range, "Phase range of the gray phantom (radians)");
  phantom->add_option("--seed", ph.seed, "Pattern seed");
  phantom->add_option("--out", ph.out, "Output directory")->required();

  std::string fwd_in, fwd_out;
  auto* forward = app.add_subcommand("forward", "Compute Fourier magnitude data and its display preview");
  forward->add_option("--in", fwd_in, "Field file (PRF1)")->required();
  forward->add_option("--out", fwd_out, "Output directory")->required();

  RetrieveArgs rt;
  auto* retrieve = app.add_subcommand("retrieve", "Run one retrieval");
  retrieve->add_option("--magnitude", rt.magnitude, "Magnitude data (PRF1 real)")->required();
  retrieve->add_option("--support", rt.support, "Support mask (PRF1 real, 0/1)")->required();
  retrieve->add_option("--truth", rt.truth, "Ground truth field for metrics (optional)");
  retrieve->add_option("--alg", rt.flags.alg, "hio, hio-tv or hio-huber");
  retrieve->add_option("--iters", rt.flags.iters, "Outer iterations");
  retrieve->add_option("--beta", rt.flags.beta, "HIO feedback parameter");
  auto* ntv_opt = retrieve->add_option("--ntv", rt.flags.ntv, "Descent steps per outer iteration");
  retrieve->add_option("--eps", rt.flags.eps, "Relative TV smoothing");
  retrieve->add_option("--delta", rt.flags.delta, "Huber delta: median or a positive value");
  retrieve->add_option("--truncate", rt.flags.truncate, "Use a triangular support for the first N iterations");
  retrieve->add_option("--twin-threshold", rt.flags.twin_threshold, "Twin-present threshold");
  retrieve->add_option("--seed", rt.seed, "Initial phase seed");
  retrieve->add_option("--out", rt.out, "Output directory")->required();

  std::string sweep_config, sweep_out;
  unsigned jobs = 1;
  auto* sweep = app.add_subcommand("sweep", "Run every (algorithm, seed) cell of a sweep config");
  sweep->add_option("--config", sweep_config, "Sweep config (JSON)")->required();
  sweep->add_option("--out", sweep_out, "Output directory (overrides output_dir)");
  sweep->add_option("--jobs", jobs, "Concurrent runs")->check(CLI::PositiveNumber);

  std::string m_recon, m_truth, m_support, m_delta = "median";
  double m_threshold = kDefaultTwinThreshold;
  auto* metrics = app.add_subcommand("metrics", "Twin metrics, phase RMSE and penalties of a reconstruction");
  metrics->add_option("--recon", m_recon, "Reconstruction (PRF1)")->required();
  metrics->add_option("--truth", m_truth, "Ground truth (PRF1)")->required();
  metrics->add_option("--support", m_support, "Support mask (PRF1)")->required();
  metrics->add_option("--twin-threshold", m_threshold, "Twin-present threshold");
  metrics->add_option("--delta", m_delta, "Huber delta: median or a positive value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*phantom) return cmd_phantom(ph);
    if (*forward) return cmd_forward(fwd_in, fwd_out);
    if (*retrieve) {
      rt.ntv_given = ntv_opt->count() > 0;
      return cmd_retrieve(rt);
    }
    if (*sweep) return cmd_sweep(sweep_config, sweep_out, jobs);
    if (*metrics) return cmd_metrics(m_recon, m_truth, m_support, m_threshold, m_delta);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NonFiniteError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const ShapeError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

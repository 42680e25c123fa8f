#include "minorproc/cli.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"

namespace minorproc::cli {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& path, const std::string& msg) { throw std::invalid_argument(path + ": " + msg); }

long as_integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) bad(path, "expected an integer");
  return v.get<long>();
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) bad(path, "expected a number");
  return v.get<double>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) bad(path, "expected a string");
  return v.get<std::string>();
}

int as_int(const json& v, const std::string& path) {
  const long x = as_integer(v, path);
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) bad(path, "integer out of range");
  return static_cast<int>(x);
}

template <class F>
auto wrap(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    const std::string what = e.what();
    if (what.rfind(path, 0) == 0) throw;
    bad(path, what);
  }
}

std::string dashed(std::string s) {
  std::replace(s.begin(), s.end(), '_', '-');
  return s;
}

bool is_bulk_kind(ExperimentKind k) {
  return k == ExperimentKind::wigner_bulk_hist || k == ExperimentKind::wigner_bulk_mean_profile ||
         k == ExperimentKind::wishart_bulk || k == ExperimentKind::band_decay || k == ExperimentKind::beadchain_kstep;
}

bool is_gap_kind(ExperimentKind k) { return k == ExperimentKind::gap_law_wigner || k == ExperimentKind::gap_law_wishart; }

bool is_wishart_kind(ExperimentKind k) {
  ExperimentConfig c;
  c.kind = k;
  return c.is_wishart();
}

bool uses_pairs_kind(ExperimentKind k) {
  ExperimentConfig c;
  c.kind = k;
  return c.uses_pairs();
}

bool has_side(ExperimentKind k) { return uses_pairs_kind(k) || is_gap_kind(k); }

bool has_process(ExperimentKind k) { return !is_gap_kind(k) && k != ExperimentKind::band_decay; }

std::string kind_description(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::wigner_bulk_mean_profile: return "mean |Omega| versus offset in the Wigner bulk";
    case ExperimentKind::wigner_bulk_hist: return "bulk overlap histograms, Wigner minors vs the sine law";
    case ExperimentKind::wigner_edge: return "soft-edge overlaps N^{1/3} Omega_ij vs the Airy law";
    case ExperimentKind::wishart_soft_edge: return "Wishart soft-edge overlaps vs the c_q-scaled Airy law";
    case ExperimentKind::wishart_hard_edge: return "hard-edge overlaps (T = N + alpha) vs the Bessel law";
    case ExperimentKind::wishart_bulk: return "Wishart bulk overlaps vs the sine law";
    case ExperimentKind::gap_law_wigner: return "extreme-eigenvalue gap of Wigner minors vs the Gamma law";
    case ExperimentKind::gap_law_wishart: return "scaled extreme-eigenvalue increments of Wishart minors";
    case ExperimentKind::band_decay: return "tail mass of Omega outside a band of width k";
    case ExperimentKind::beadchain_kstep: return "K-step overlaps of nested minors vs the bead chain";
  }
  return "";
}

std::vector<long> parse_offsets(const std::string& s) {
  std::vector<long> out;
  std::stringstream ss(s);
  std::string item;
  auto to_long = [&](const std::string& t) {
    long v = 0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size()) bad("offsets", "cannot parse '" + t + "'");
    return v;
  };
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto dots = item.find("..");
    if (dots != std::string::npos) {
      const long a = to_long(item.substr(0, dots)), b = to_long(item.substr(dots + 2));
      if (b < a) bad("offsets", "empty range '" + item + "'");
      for (long k = a; k <= b; ++k) out.push_back(k);
    } else {
      out.push_back(to_long(item));
    }
  }
  return out;
}

std::vector<std::pair<int, int>> parse_pairs(const std::string& s) {
  std::vector<std::pair<int, int>> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos) bad("pairs", "expected i:j, got '" + item + "'");
    try {
      std::size_t p1 = 0, p2 = 0;
      const std::string a = item.substr(0, colon), b = item.substr(colon + 1);
      const int i = std::stoi(a, &p1), j = std::stoi(b, &p2);
      if (p1 != a.size() || p2 != b.size()) throw std::invalid_argument("trailing characters");
      out.emplace_back(i, j);
    } catch (const std::logic_error&) {
      bad("pairs", "expected i:j, got '" + item + "'");
    }
  }
  return out;
}

struct OptionalNumber {
  double value = 0.0;
};

}  // namespace

ExperimentConfig config_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) bad(path, "expected an object");
  ExperimentConfig c;
  for (const auto& [key, v] : j.items()) {
    const std::string p = path + "." + key;
    if (key == "kind") {
      c.kind = wrap(p, [&] { return parse_experiment_kind(as_string(v, p)); });
    } else if (key == "beta") {
      c.beta = as_int(v, p);
    } else if (key == "entry_law") {
      c.entry_law = wrap(p, [&] { return parse_entry_law(as_string(v, p)); });
    } else if (key == "N") {
      c.N = as_int(v, p);
    } else if (key == "T") {
      if (!v.is_null()) c.T = as_int(v, p);
    } else if (key == "E") {
      if (!v.is_null()) c.E = as_number(v, p);
    } else if (key == "q") {
      if (!v.is_null()) c.q = as_number(v, p);
    } else if (key == "alpha") {
      c.alpha = as_int(v, p);
    } else if (key == "side") {
      c.side = wrap(p, [&] { return parse_edge_side(as_string(v, p)); });
    } else if (key == "offsets") {
      if (!v.is_array()) bad(p, "expected an array of integers");
      c.offsets.clear();
      for (std::size_t i = 0; i < v.size(); ++i) c.offsets.push_back(as_integer(v[i], p + "[" + std::to_string(i) + "]"));
    } else if (key == "pairs") {
      if (!v.is_array()) bad(p, "expected an array of [i, j] pairs");
      c.pairs.clear();
      for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string pi = p + "[" + std::to_string(i) + "]";
        if (!v[i].is_array() || v[i].size() != 2) bad(pi, "expected [i, j]");
        c.pairs.emplace_back(as_int(v[i][0], pi + "[0]"), as_int(v[i][1], pi + "[1]"));
      }
    } else if (key == "reference_index") {
      if (!v.is_null()) c.reference_index = as_int(v, p);
    } else if (key == "steps") {
      c.steps = as_int(v, p);
    } else if (key == "replicas") {
      c.replicas = as_integer(v, p);
    } else if (key == "seed") {
      if (!v.is_number_unsigned()) bad(p, "expected a nonnegative integer");
      c.seed = v.get<std::uint64_t>();
    } else if (key == "max_bins") {
      c.max_bins = as_int(v, p);
    } else if (key == "window") {
      if (!v.is_null()) c.window = as_int(v, p);
    } else if (key == "n_approx") {
      if (!v.is_null()) c.n_approx = as_int(v, p);
    } else if (key == "verbatim_wishart_level") {
      if (!v.is_boolean()) bad(p, "expected a boolean");
      c.verbatim_wishart_level = v.get<bool>();
    } else {
      bad(p, "unknown key");
    }
  }
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["kind"] = to_string(c.kind);
  j["beta"] = c.beta;
  j["entry_law"] = to_string(c.entry_law);
  j["N"] = c.N;
  j["T"] = c.T ? json(*c.T) : json(nullptr);
  j["E"] = c.E ? json(*c.E) : json(nullptr);
  j["q"] = c.q ? json(*c.q) : json(nullptr);
  j["alpha"] = c.alpha;
  j["side"] = to_string(c.side);
  j["offsets"] = c.offsets;
  json pairs = json::array();
  for (auto [a, b] : c.pairs) pairs.push_back({a, b});
  j["pairs"] = pairs;
  j["reference_index"] = c.reference_index ? json(*c.reference_index) : json(nullptr);
  j["steps"] = c.steps;
  j["replicas"] = c.replicas;
  j["seed"] = c.seed;
  j["max_bins"] = c.max_bins;
  j["window"] = c.window ? json(*c.window) : json(nullptr);
  j["n_approx"] = c.n_approx ? json(*c.n_approx) : json(nullptr);
  j["verbatim_wishart_level"] = c.verbatim_wishart_level;
  return j;
}

ExperimentConfig parse_config_file(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw std::invalid_argument("config file '" + file + "' cannot be opened");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config file '" + file + "': " + e.what());
  }
  return config_from_json(j);
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string result_csv(const ExperimentResult& r) {
  std::string out = "experiment,offset,bin_left,bin_right,density_empirical,density_theoretical\n";
  const std::string kind = to_string(r.config.kind);
  for (const auto& e : r.entries) {
    const Histogram& h = e.histogram;
    for (std::size_t b = 0; b < h.bins(); ++b) {
      out += kind;
      out += ',';
      out += e.label;
      out += ',';
      out += format_double(h.edges[b]);
      out += ',';
      out += format_double(h.edges[b + 1]);
      out += ',';
      out += format_double(b < h.empirical.size() ? h.empirical[b] : 0.0);
      out += ',';
      out += format_double(b < h.theoretical.size() ? h.theoretical[b] : 0.0);
      out += '\n';
    }
  }
  return out;
}

namespace {

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json moments_json(const Moments& m) {
  return {{"count", m.count}, {"mean", number_or_null(m.mean)}, {"variance", number_or_null(m.variance)}};
}

}  // namespace

json result_json(const ExperimentResult& r) {
  json j;
  j["artifact_version"] = artifact_version;
  j["experiment"] = to_string(r.config.kind);
  j["config"] = config_to_json(r.config);
  json entries = json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"label", e.label},
                       {"offset", e.offset},
                       {"ks", number_or_null(e.ks)},
                       {"empirical", moments_json(e.empirical)},
                       {"theoretical", moments_json(e.theoretical)},
                       {"bins", e.histogram.bins()},
                       {"top_bin_mass", number_or_null(e.top_bin_mass)},
                       {"clipped_empirical", e.clipped_empirical},
                       {"clipped_theoretical", e.clipped_theoretical}});
  }
  j["entries"] = entries;
  json summary = json::object();
  for (const auto& [k, v] : r.summary) summary[k] = number_or_null(v);
  j["summary"] = summary;
  j["replicas"] = r.replicas;
  j["failures"] = {{"empirical", r.empirical_failures},
                   {"theoretical", r.theoretical_failures},
                   {"replicas", r.failed_replicas},
                   {"incomplete", r.incomplete_replicas},
                   {"rate", r.failure_rate()},
                   {"within_budget", r.within_failure_budget()}};
  return j;
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

json manifest_json(const RunManifest& m) {
  json j;
  j["artifact_version"] = artifact_version;
  j["experiment"] = to_string(m.config.kind);
  j["seed"] = m.config.seed;
  j["config"] = config_to_json(m.config);
  j["config_file"] = m.config_file.empty() ? json(nullptr) : json(m.config_file);
  j["overrides"] = m.overrides;
  j["workers"] = m.workers;
  j["wall_seconds"] = m.wall_seconds;
  j["digests"] = m.digests;
  j["command_line"] = m.command_line;
  return j;
}

std::vector<std::string> emit(const ExperimentResult& r, const EmitOptions& options, RunManifest& manifest) {
  namespace fs = std::filesystem;
  fs::create_directories(options.directory);
  const std::string prefix = options.prefix.empty() ? to_string(r.config.kind) : options.prefix;
  std::vector<std::string> written;
  auto write = [&](const std::string& name, const std::string& text) {
    const fs::path p = fs::path(options.directory) / name;
    std::ofstream out(p, std::ios::binary);
    out << text;
    out.close();
    if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
    written.push_back(p.string());
    return p;
  };
  if (options.csv) {
    const std::string text = result_csv(r);
    write(prefix + ".csv", text);
    manifest.digests[prefix + ".csv"] = sha256_hex(text);
  }
  if (options.json) {
    const std::string text = dump_json(result_json(r));
    write(prefix + ".json", text);
    manifest.digests[prefix + ".json"] = sha256_hex(text);
  }
  manifest.config = r.config;
  write(prefix + ".manifest.json", dump_json(manifest_json(manifest)));
  return written;
}

int run(int argc, const char* const* argv) {
  CLI::App app{"Minor-process experiments: empirical minors against limiting overlap laws"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(artifact_version));

  // flag values shared by all subcommands; only one subcommand is parsed per run
  struct Flags {
    int beta = 1, N = 100, T = 0, alpha = 1, reference_index = 0, steps = 1, max_bins = 400, window = 0,
        n_approx = 0, workers = 0;
    long replicas = 1000;
    std::uint64_t seed = 0;
    double E = 0.0, q = 0.0;
    std::string side = "right", entry_law = "gaussian", offsets, pairs, config, out_dir = ".", prefix;
    bool verbatim = false, quiet = false, no_csv = false, no_json = false;
  } f;

  struct Sub {
    ExperimentKind kind;
    CLI::App* app;
    std::map<std::string, CLI::Option*> opts;  // config key -> option
  };
  std::vector<Sub> subs;
  for (ExperimentKind k : all_experiment_kinds()) {
    Sub s{k, app.add_subcommand(dashed(to_string(k)), kind_description(k)), {}};
    CLI::App* a = s.app;
    if (k == ExperimentKind::wigner_bulk_hist) a->alias("wigner-bulk");
    s.opts["seed"] = a->add_option("--seed", f.seed, "root seed (replica r uses stream (seed, r)); required here or in --config");
    s.opts["replicas"] = a->add_option("--replicas,-R", f.replicas, "Monte Carlo replicas");
    s.opts["N"] = a->add_option("--N,-N", f.N, "matrix size");
    s.opts["beta"] = a->add_option("--beta", f.beta, "1 (real) or 2 (complex)");
    s.opts["entry_law"] = a->add_option("--entry-law", f.entry_law, "gaussian, rademacher or uniform");
    if (is_bulk_kind(k)) s.opts["E"] = a->add_option("--E,-E", f.E, "bulk energy");
    if (is_wishart_kind(k)) {
      s.opts["q"] = a->add_option("--q", f.q, "aspect ratio N/T");
      s.opts["T"] = a->add_option("--T", f.T, "sample count (overrides q)");
    }
    if (k == ExperimentKind::wishart_hard_edge) s.opts["alpha"] = a->add_option("--alpha", f.alpha, "T - N");
    if (has_side(k)) s.opts["side"] = a->add_option("--side", f.side, "left or right edge");
    if (uses_pairs_kind(k)) {
      s.opts["pairs"] = a->add_option("--pairs", f.pairs, "edge label pairs, e.g. 1:2,2:3");
    } else if (!is_gap_kind(k)) {
      s.opts["offsets"] = a->add_option("--offsets", f.offsets, "offsets, e.g. -1,0,1,2 or -8..8")->allow_extra_args(false);
    }
    if (is_bulk_kind(k) && k != ExperimentKind::band_decay && k != ExperimentKind::beadchain_kstep)
      s.opts["reference_index"] = a->add_option("--reference-index,-i", f.reference_index, "1-based after index");
    if (k == ExperimentKind::wishart_hard_edge)
      s.opts["reference_index"] = a->add_option("--reference-index,-i", f.reference_index, "1-based after index (root label)");
    if (k == ExperimentKind::beadchain_kstep) s.opts["steps"] = a->add_option("--steps,-K", f.steps, "chain steps K");
    if (k == ExperimentKind::wishart_bulk)
      s.opts["verbatim_wishart_level"] = a->add_flag("--verbatim-wishart-level", f.verbatim, "use the level as stated, without the 1/q unit-density factor");
    if (has_process(k)) {
      s.opts["window"] = a->add_option("--window", f.window, "limit-process window");
      s.opts["n_approx"] = a->add_option("--n-approx", f.n_approx, "approximant size of the limit sampler");
    }
    s.opts["max_bins"] = a->add_option("--bins", f.max_bins, "maximum histogram bins");
    a->add_option("--config", f.config, "JSON config file; flags override it");
    a->add_option("--out-dir,-o", f.out_dir, "output directory");
    a->add_option("--prefix", f.prefix, "output file prefix (default: experiment kind)");
    a->add_option("--workers,-j", f.workers, "worker threads (default: MINORPROC_WORKERS or 1)");
    a->add_flag("--quiet", f.quiet, "no progress counter");
    a->add_flag("--no-csv", f.no_csv, "skip the CSV output");
    a->add_flag("--no-json", f.no_json, "skip the JSON summary");
    subs.push_back(std::move(s));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  const Sub* chosen = nullptr;
  for (const auto& s : subs)
    if (s.app->parsed()) chosen = &s;
  if (!chosen) return 1;

  RunManifest manifest;
  for (int i = 0; i < argc; ++i) manifest.command_line.emplace_back(argv[i]);
  try {
    ExperimentConfig c;
    json file_keys = json::object();
    if (!f.config.empty()) {
      manifest.config_file = f.config;
      std::ifstream in(f.config);
      if (!in) throw std::invalid_argument("config file '" + f.config + "' cannot be opened");
      try {
        file_keys = json::parse(in);
      } catch (const json::parse_error& e) {
        throw std::invalid_argument("config file '" + f.config + "': " + e.what());
      }
      c = config_from_json(file_keys);
      if (file_keys.contains("kind") && c.kind != chosen->kind) manifest.overrides.push_back("kind");
    }
    c.kind = chosen->kind;
    auto given = [&](const std::string& key) {
      const auto it = chosen->opts.find(key);
      if (it == chosen->opts.end() || it->second->count() == 0) return false;
      if (file_keys.is_object() && file_keys.contains(key)) manifest.overrides.push_back(key);
      return true;
    };
    if (given("seed"))
      c.seed = f.seed;
    else if (!(file_keys.is_object() && file_keys.contains("seed")))
      throw std::invalid_argument("seed: required (--seed or the config file)");
    if (given("replicas")) c.replicas = f.replicas;
    if (given("N")) c.N = f.N;
    if (given("beta")) c.beta = f.beta;
    if (given("entry_law")) c.entry_law = parse_entry_law(f.entry_law);
    if (given("E")) c.E = f.E;
    if (given("q")) c.q = f.q;
    if (given("T")) c.T = f.T;
    if (given("alpha")) c.alpha = f.alpha;
    if (given("side")) c.side = parse_edge_side(f.side);
    if (given("pairs")) c.pairs = parse_pairs(f.pairs);
    if (given("offsets")) c.offsets = parse_offsets(f.offsets);
    if (given("reference_index")) c.reference_index = f.reference_index;
    if (given("steps")) c.steps = f.steps;
    if (given("verbatim_wishart_level")) c.verbatim_wishart_level = f.verbatim;
    if (given("window")) c.window = f.window;
    if (given("n_approx")) c.n_approx = f.n_approx;
    if (given("max_bins")) c.max_bins = f.max_bins;
    c.fill_defaults();
    c.validate();

    RunOptions ro;
    ro.workers = resolve_workers(f.workers);
    manifest.workers = ro.workers;
    if (!f.quiet) {
      ro.progress = [](long done, long total) {
        std::cerr << "\rreplicas " << done << "/" << total << std::flush;
        if (done == total) std::cerr << "\n";
      };
    }
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentResult r = run_experiment(c, ro);
    manifest.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    EmitOptions eo;
    eo.directory = f.out_dir;
    eo.prefix = f.prefix;
    eo.csv = !f.no_csv;
    eo.json = !f.no_json;
    const auto files = emit(r, eo, manifest);
    if (!f.quiet)
      for (const auto& p : files) std::cerr << "wrote " << p << "\n";
    if (!r.within_failure_budget()) {
      std::cerr << "error: " << r.failed_replicas << " of " << r.replicas
                << " replicas failed (budget 0.1%)\n";
      return 3;
    }
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace minorproc::cli

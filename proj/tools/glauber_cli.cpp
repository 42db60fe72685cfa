#include <omp.h>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "glauber/analysis.hpp"
#include "glauber/dynamics.hpp"
#include "glauber/error.hpp"
#include "glauber/oracle.hpp"
#include "glauber/oracle_exact.hpp"
#include "glauber/rng.hpp"
#include "glauber/treecalc.hpp"
#include "json.hpp"

#ifndef GLAUBER_VERSION
#define GLAUBER_VERSION "0.0.0"
#endif

using namespace glauber;
using json = nlohmann::ordered_json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Exit status for check failures, kept apart from errors thrown inside.
struct CheckFailed {
  int code;
};

struct Globals {
  std::uint64_t seed = 1;
  int threads = 0;
  std::string json_out;
  bool no_timings = false;
};

struct Manifest {
  std::string command;
  const CLI::App* app = nullptr;
  std::optional<std::uint64_t> graph_hash;
  json timings = json::object();
  json warnings = json::array();

  json to_json(const Globals& g) const {
    json flags = json::object();
    for (const CLI::App* a = app; a != nullptr; a = a->get_parent()) {
      for (const CLI::Option* opt : a->get_options()) {
        if (opt->get_name() == "--help" || opt->get_name() == "-h") continue;
        std::string name = opt->get_name();
        while (!name.empty() && name.front() == '-') name.erase(name.begin());
        if (flags.contains(name)) continue;
        if (opt->count() > 0) {
          const auto& results = opt->results();
          if (results.size() == 1) {
            flags[name] = results.front();
          } else {
            flags[name] = results;
          }
        } else if (!opt->get_default_str().empty()) {
          flags[name] = opt->get_default_str();
        }
      }
    }
    json m;
    m["command"] = command;
    m["flags"] = flags;
    m["seed"] = g.seed;
    if (graph_hash) {
      std::ostringstream hex;
      hex << std::hex << *graph_hash;
      m["graph_hash"] = hex.str();
    }
    m["tool_version"] = GLAUBER_VERSION;
    m["rng"] = Rng::kTag;
    if (!g.no_timings) m["timings"] = timings;
    if (!warnings.empty()) m["warnings"] = warnings;
    return m;
  }
};

void emit(const Globals& g, const Manifest& manifest, json body) {
  json out;
  out["manifest"] = manifest.to_json(g);
  for (auto& [k, v] : body.items()) out[k] = v;
  const std::string text = out.dump(2) + "\n";
  if (g.json_out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(g.json_out);
    if (!f) throw Error(ErrorKind::kInvalidParameter, "cannot write " + g.json_out);
    f << text;
  }
}

Graph load_graph(const std::string& path, Manifest& manifest) {
  const auto t0 = Clock::now();
  Graph g = read_edge_list_file(path);
  manifest.graph_hash = g.hash();
  manifest.timings["read_graph"] = seconds_since(t0);
  return g;
}

Pinning parse_pins(const std::vector<std::string>& specs, int sites) {
  Pinning p = Pinning::none(sites);
  for (const std::string& s : specs) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::kParseError, "pin must look like site=spin: " + s);
    try {
      const int site = std::stoi(s.substr(0, eq));
      const int spin = std::stoi(s.substr(eq + 1));
      if (site < 0 || site >= sites) throw Error(ErrorKind::kInvalidParameter, "pinned site out of range: " + s);
      p.pin(site, spin);
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::kParseError, "bad pin: " + s);
    }
  }
  return p;
}

std::string spin_string(const Configuration& c) {
  std::string s(c.spins.size(), '0');
  for (std::size_t i = 0; i < c.spins.size(); ++i) s[i] = c.spins[i] ? '1' : '0';
  return s;
}

json distribution_json(const DiscreteDistribution& d) {
  json out;
  out["domain"] = d.domain() == SiteDomain::kEdges ? "edges" : "vertices";
  out["sites"] = d.num_sites();
  out["Z"] = d.partition_function();
  out["log_Z"] = d.log_partition_function();
  json outcomes = json::array();
  for (std::size_t i = 0; i < d.size(); ++i) {
    outcomes.push_back({{"spins", spin_string(d.outcome(i))}, {"p", d.probability(i)}});
  }
  out["outcomes"] = outcomes;
  return out;
}

std::vector<std::uint8_t> parse_spins(const std::string& s) {
  std::vector<std::uint8_t> spins(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '0' && s[i] != '1') throw Error(ErrorKind::kParseError, "spin strings hold only 0 and 1");
    spins[i] = s[i] == '1';
  }
  return spins;
}

json read_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::kParseError, "cannot open " + path);
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParseError, path + ": " + e.what());
  }
}

// A distribution file from `oracle dist`, or a samples file from `sample`.
DiscreteDistribution load_distribution(const std::string& path) {
  const json j = read_json(path);
  if (j.contains("outcomes")) {
    const SiteDomain dom = j.at("domain") == "edges" ? SiteDomain::kEdges : SiteDomain::kVertices;
    DiscreteDistribution d(dom, j.at("sites").get<int>());
    for (const auto& o : j.at("outcomes")) d.push_back(parse_spins(o.at("spins")), o.at("p").get<double>());
    return d;
  }
  if (j.contains("samples")) {
    const auto& samples = j.at("samples");
    if (samples.empty()) throw Error(ErrorKind::kParseError, path + " holds no samples");
    const std::string dom = j.value("domain", "vertices");
    const int sites = static_cast<int>(samples.front().get<std::string>().size());
    ConfigurationCounter counter(dom == "edges" ? SiteDomain::kEdges : SiteDomain::kVertices, sites);
    for (const auto& s : samples) counter.add(parse_spins(s.get<std::string>()));
    return counter.to_distribution();
  }
  throw Error(ErrorKind::kParseError, path + " is neither a distribution nor a samples file");
}

struct ModelFlags {
  std::string model = "hardcore";
  std::string param = "1";

  ModelSpec spec() const {
    double p;
    try {
      p = std::stod(param);
    } catch (const std::logic_error&) {
      p = parse_rational(param).get_d();
    }
    if (param.find('/') != std::string::npos) p = parse_rational(param).get_d();
    return ModelSpec(parse_model_kind(model), p);
  }
};

void add_model_flags(CLI::App* cmd, ModelFlags& f) {
  cmd->add_option("--model", f.model, "hardcore | ising | matchings")->capture_default_str();
  cmd->add_option("--param", f.param, "lambda, beta or gamma (decimal or a/b)")->capture_default_str();
}

double fit_exponent(const std::vector<double>& n, const std::vector<double>& t) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double k = static_cast<double>(n.size());
  for (std::size_t i = 0; i < n.size(); ++i) {
    const double x = std::log(n[i]), y = std::log(t[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kEnumerationOverflow:
    case ErrorKind::kComponentTooComplex:
      return 3;
    case ErrorKind::kNumericFailure:
      return 1;
    default:
      return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Glauber dynamics sampling, verification and exact-oracle toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals globals;
  app.add_option("--seed", globals.seed, "random seed")->capture_default_str();
  app.add_option("--threads", globals.threads, "OpenMP threads (0: runtime default)")->capture_default_str();
  app.add_option("--json-out", globals.json_out, "write the JSON report here instead of stdout");
  app.add_flag("--no-timings", globals.no_timings, "omit wall-clock timings from manifests");

  Manifest manifest;
  std::function<void()> action;

  // gen
  int gen_n = 0;
  double gen_d = 2.0;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "generate G(n, d/n) as an edge list");
  gen->add_option("--n", gen_n, "number of vertices")->required();
  gen->add_option("--d", gen_d, "average degree")->capture_default_str();
  gen->add_option("--out", gen_out, "edge-list file (stdout when omitted)");
  gen->callback([&] {
    action = [&] {
      const auto t0 = Clock::now();
      const Graph g = generate_gnp(gen_n, gen_d, globals.seed);
      manifest.timings["generate"] = seconds_since(t0);
      manifest.graph_hash = g.hash();
      if (gen_out.empty()) {
        write_edge_list(std::cout, g);
      } else {
        write_edge_list_file(gen_out, g);
      }
      if (!globals.json_out.empty()) emit(globals, manifest, {{"n", g.num_vertices()}, {"m", g.num_edges()}});
    };
  });

  // sample
  std::string graph_path;
  ModelFlags mf;
  std::optional<double> sample_D;
  double theta = 1.0, eps = 0.01;
  std::optional<std::int64_t> T_override;
  std::int64_t runs = 1;
  std::string out_format = "json";
  auto* samp = app.add_subcommand("sample", "run the sampler");
  samp->add_option("--graph", graph_path, "edge-list file")->required();
  add_model_flags(samp, mf);
  samp->add_option("--D", sample_D, "degree threshold (default 20 max(1, d))");
  samp->add_option("--theta", theta)->capture_default_str();
  samp->add_option("--eps", eps)->capture_default_str();
  samp->add_option("--T", T_override, "number of main-loop steps (overrides theta/eps)");
  samp->add_option("--runs", runs)->capture_default_str();
  samp->add_option("--out", out_format, "json | spins")->capture_default_str()->check(CLI::IsMember({"json", "spins"}));
  samp->callback([&] {
    action = [&] {
      const Graph g = load_graph(graph_path, manifest);
      const ModelSpec m = mf.spec();
      if (runs < 1) throw Error(ErrorKind::kInvalidParameter, "--runs must be >= 1");
      const double n = g.num_vertices();
      const double avg_degree = n > 0 ? 2.0 * g.num_edges() / n : 0.0;
      const double D = sample_D.value_or(default_degree_threshold(avg_degree));
      const Schedule sched = make_schedule(std::max<std::int64_t>(1, g.num_vertices()), theta, eps, T_override);
      if (sched.clamped) manifest.warnings.push_back("T clamped to 1");
      std::vector<Configuration> out;
      SampleTimings timings;
      const auto t0 = Clock::now();
      if (runs == 1) {
        out.push_back(sample(g, m, D, sched, globals.seed, &timings));
        manifest.timings["main_loop"] = timings.main_loop_seconds;
        manifest.timings["finalize"] = timings.finalize_seconds;
      } else {
        out = sample_runs(g, m, D, sched.steps, globals.seed, runs);
      }
      manifest.timings["sample"] = seconds_since(t0);
      if (out_format == "spins") {
        for (std::size_t r = 0; r < out.size(); ++r) {
          if (r > 0) std::cout << '\n';
          for (auto s : out[r].spins) std::cout << static_cast<int>(s) << '\n';
        }
        if (!globals.json_out.empty()) emit(globals, manifest, {{"steps", sched.steps}});
        return;
      }
      json samples = json::array();
      for (const auto& c : out) samples.push_back(spin_string(c));
      emit(globals, manifest,
           {{"domain", m.domain() == SiteDomain::kEdges ? "edges" : "vertices"},
            {"schedule", {{"theta", sched.theta}, {"eps", sched.eps}, {"T", sched.steps},
                          {"overridden", sched.overridden}, {"clamped", sched.clamped}}},
            {"D", D},
            {"samples", samples}});
    };
  });

  // verify
  double verify_d = 2.0;
  VerifyConfig vcfg;
  std::optional<double> vD, vM;
  auto* ver = app.add_subcommand("verify", "check the random-graph properties the sampler relies on");
  ver->add_option("--graph", graph_path, "edge-list file")->required();
  ver->add_option("--d", verify_d, "average degree parameter")->capture_default_str();
  ver->add_option("--eps", vcfg.eps)->capture_default_str();
  ver->add_option("--delta", vcfg.delta)->capture_default_str();
  ver->add_option("--D", vD, "degree threshold (default 20 max(1, d))");
  ver->add_option("--ell", vcfg.ell, "tree-excess budget of high-degree components")->capture_default_str();
  ver->add_option("--M", vM, "degree-sum constant (default max{10d, 50(1 + log d)})");
  ver->add_option("--set-cap", vcfg.set_cap, "per-root enumeration cap for connected sets")->capture_default_str();
  ver->callback([&] {
    action = [&] {
      const Graph g = load_graph(graph_path, manifest);
      vcfg.D = vD;
      vcfg.M = vM;
      const auto t0 = Clock::now();
      const auto report = verify_graph(g, verify_d, vcfg);
      manifest.timings["verify"] = seconds_since(t0);
      json checks = json::array();
      for (const auto& c : report.checks) {
        json stats = json::object();
        for (const auto& [k, v] : c.stats) stats[k] = v;
        json jc = {{"name", c.name}, {"status", to_string(c.status)}, {"stats", stats}};
        if (c.witness_vertex) jc["witness_vertex"] = *c.witness_vertex;
        if (!c.witness_set.empty()) jc["witness_set"] = c.witness_set;
        if (!c.detail.empty()) jc["detail"] = c.detail;
        checks.push_back(jc);
      }
      emit(globals, manifest, {{"overall", to_string(report.overall)}, {"checks", checks}});
      if (report.overall == CheckStatus::kFail) throw CheckFailed{1};
      if (report.overall == CheckStatus::kInconclusive) throw CheckFailed{2};
    };
  });

  // analyze
  auto* ana = app.add_subcommand("analyze", "tree, influence and contraction diagnostics");
  ana->require_subcommand(1);

  double an_d = 2.0, an_eps = 1.0;
  std::optional<int> len_cap, good_radius;
  std::int64_t count_cap = 1'000'000;
  std::vector<int> an_vertices;
  auto* br = ana->add_subcommand("branching", "per-vertex branching values and level series");
  br->add_option("--graph", graph_path)->required();
  br->add_option("--d", an_d)->capture_default_str();
  br->add_option("--eps", an_eps)->capture_default_str();
  br->add_option("--len-cap", len_cap, "path length cap (default ceil(4 log n / log d))");
  br->add_option("--radius", good_radius, "level-series radius (default floor((log log n)^2) - 1)");
  br->add_option("--count-cap", count_cap)->capture_default_str();
  br->add_option("--vertices", an_vertices, "vertices to analyse (default all)")->delimiter(',');
  br->callback([&] {
    action = [&] {
      const Graph g = load_graph(graph_path, manifest);
      const int n = g.num_vertices();
      const int cap = len_cap.value_or(default_len_cap(std::max(n, 2), an_d));
      const int radius = good_radius.value_or(default_good_radius(n));
      std::vector<int> vs = an_vertices;
      if (vs.empty())
        for (int v = 0; v < n; ++v) vs.push_back(v);
      for (int v : vs)
        if (v < 0 || v >= n) throw Error(ErrorKind::kInvalidParameter, "vertex out of range");
      const auto t0 = Clock::now();
      json rows = json::array();
      bool overflow = false;
      for (int v : vs) {
        json row = {{"vertex", v}};
        try {
          const auto b = branching_value(g, v, an_d, cap, count_cap);
          row["S"] = b.value;
          row["paths"] = b.paths;
          if (b.tail_bound.infinite) {
            row["tail_bound"] = "unbounded";
          } else {
            row["tail_bound"] = b.tail_bound.value;
          }
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::kEnumerationOverflow) throw;
          row["S"] = nullptr;
          row["error"] = e.what();
          overflow = true;
        }
        const auto good = epsilon_good_check(g, v, an_d, an_eps, radius);
        row["S_hat"] = good.value;
        row["good"] = good.good;
        rows.push_back(row);
      }
      manifest.timings["branching"] = seconds_since(t0);
      emit(globals, manifest, {{"len_cap", cap}, {"radius", radius}, {"vertices", rows}});
      if (overflow) throw CheckFailed{3};
    };
  });

  int saw_root = 0, saw_depth = 10;
  auto* sw = ana->add_subcommand("sawtree", "self-avoiding-walk tree statistics");
  sw->add_option("--graph", graph_path)->required();
  sw->add_option("--root", saw_root)->capture_default_str();
  sw->add_option("--depth", saw_depth)->capture_default_str();
  sw->callback([&] {
    action = [&] {
      const Graph g = load_graph(graph_path, manifest);
      const auto t0 = Clock::now();
      const SawTree t = saw_tree(g, saw_root, saw_depth);
      manifest.timings["sawtree"] = seconds_since(t0);
      emit(globals, manifest,
           {{"root", saw_root}, {"size", t.size()}, {"depth", t.max_depth()},
            {"terminals", t.terminal_count()}, {"truncated", t.truncated}});
    };
  });

  std::vector<std::string> pins;
  auto* inf = ana->add_subcommand("influence", "influence matrix and its top eigenvalue");
  inf->add_option("--graph", graph_path)->required();
  add_model_flags(inf, mf);
  inf->add_option("--pin", pins, "site=spin (repeatable)");
  inf->callback([&] {
    action = [&] {
      const Graph g = load_graph(graph_path, manifest);
      const ModelSpec m = mf.spec();
      const Pinning p = parse_pins(pins, site_count(g, m));
      const auto t0 = Clock::now();
      const auto im = influence_matrix(g, m, p);
      const auto rep = lambda1_report(im.entries);
      manifest.timings["influence"] = seconds_since(t0);
      json index = json::array(), rows = json::array();
      for (const auto& [site, spin] : im.index) index.push_back({site, spin});
      for (int i = 0; i < im.dimension(); ++i) {
        json row = json::array();
        for (int j = 0; j < im.dimension(); ++j) row.push_back(im.entries(i, j));
        rows.push_back(row);
      }
      emit(globals, manifest,
           {{"index", index}, {"matrix", rows}, {"lambda1", rep.lambda1},
            {"max_abs_row_sum", im.max_abs_row_sum()}, {"max_imag", rep.max_imag}});
    };
  });

  std::int64_t budget = 100000;
  std::vector<int> scan_sites;
  auto* spec = ana->add_subcommand("spectral", "scan conditionings for the largest influence eigenvalue");
  spec->add_option("--graph", graph_path)->required();
  add_model_flags(spec, mf);
  spec->add_option("--budget", budget)->capture_default_str();
  spec->add_option("--sites", scan_sites, "sites to scan (default all)")->delimiter(',');
  spec->callback([&] {
    action = [&] {
      const Graph g = load_graph(graph_path, manifest);
      const ModelSpec m = mf.spec();
      std::vector<int> sites = scan_sites;
      if (sites.empty())
        for (int s = 0; s < site_count(g, m); ++s) sites.push_back(s);
      const auto t0 = Clock::now();
      const auto scan = spectral_independence_scan(g, m, sites, budget, globals.seed);
      manifest.timings["spectral"] = seconds_since(t0);
      json worst = json::array();
      for (auto s : scan.worst.spins) worst.push_back(static_cast<int>(s));
      emit(globals, manifest,
           {{"eta_observed", scan.eta}, {"max_row_sum", scan.max_row_sum},
            {"conditionings", scan.conditionings}, {"exhaustive", scan.exhaustive}, {"worst_pinning", worst}});
    };
  });

  std::int64_t trials = 10000;
  int k_max = 10;
  bool allow_outside = false;
  auto* con = ana->add_subcommand("contraction", "numeric check of the tree-recursion contraction");
  add_model_flags(con, mf);
  con->add_option("--d", an_d)->capture_default_str();
  con->add_option("--trials", trials)->capture_default_str();
  con->add_option("--kmax", k_max, "largest number of children per trial")->capture_default_str();
  con->add_flag("--allow-outside", allow_outside, "run even outside the uniqueness regime");
  con->callback([&] {
    action = [&] {
      const ModelSpec m = mf.spec();
      const auto ctx = make_contraction_context(m.kind, an_d, m.parameter, allow_outside);
      const auto t0 = Clock::now();
      const auto r = contraction_check(ctx, trials, k_max, globals.seed);
      manifest.timings["contraction"] = seconds_since(t0);
      emit(globals, manifest,
           {{"chi", ctx.chi}, {"a", ctx.a}, {"max_statistic", r.max_statistic}, {"worst_k", r.worst_k},
            {"pass", r.pass}});
      if (!r.pass) throw CheckFailed{1};
    };
  });

  // oracle
  auto* ora = app.add_subcommand("oracle", "exact enumeration on small instances");
  ora->require_subcommand(1);
  auto add_oracle_flags = [&](CLI::App* cmd) {
    cmd->add_option("--graph", graph_path)->required();
    add_model_flags(cmd, mf);
    cmd->add_option("--pin", pins, "site=spin (repeatable)");
  };

  auto* oz = ora->add_subcommand("z", "partition function");
  add_oracle_flags(oz);
  oz->callback([&] {
    action = [&] {
      const Graph g = load_graph(graph_path, manifest);
      const ModelSpec m = mf.spec();
      const Pinning p = parse_pins(pins, site_count(g, m));
      const auto d = exact_distribution(g, m, p);
      json body = {{"Z", d.partition_function()}, {"log_Z", d.log_partition_function()}};
      if (p.free_count() <= kOracleExactFreeSites) {
        body["Z_exact"] = exact_partition_function(g, m.kind, parse_rational(mf.param), p).get_str();
      }
      emit(globals, manifest, body);
    };
  });

  std::optional<int> site;
  auto* om = ora->add_subcommand("marginal", "P(site = 1 | pins)");
  add_oracle_flags(om);
  om->add_option("--site", site, "one site (default all)");
  om->callback([&] {
    action = [&] {
      const Graph g = load_graph(graph_path, manifest);
      const ModelSpec m = mf.spec();
      const Pinning p = parse_pins(pins, site_count(g, m));
      const auto all = exact_marginals(g, m, p);
      json body;
      if (site) {
        if (*site < 0 || *site >= static_cast<int>(all.size())) throw Error(ErrorKind::kInvalidParameter, "site out of range");
        body["site"] = *site;
        body["marginal"] = all[*site];
      } else {
        body["marginals"] = all;
      }
      if (p.free_count() <= kOracleExactFreeSites) {
        const auto ex = exact_summary(g, m.kind, parse_rational(mf.param), p);
        if (site) {
          body["marginal_exact"] = ex.marginals[*site].get_str();
        } else {
          json exact = json::array();
          for (const auto& q : ex.marginals) exact.push_back(q.get_str());
          body["marginals_exact"] = exact;
        }
      }
      emit(globals, manifest, body);
    };
  });

  auto* od = ora->add_subcommand("dist", "full conditional distribution");
  add_oracle_flags(od);
  od->callback([&] {
    action = [&] {
      const Graph g = load_graph(graph_path, manifest);
      const ModelSpec m = mf.spec();
      const Pinning p = parse_pins(pins, site_count(g, m));
      emit(globals, manifest, distribution_json(exact_distribution(g, m, p)));
    };
  });

  std::string tv_a, tv_b, tv_samples;
  auto* otv = ora->add_subcommand("tv", "total variation distance");
  otv->add_option("--a", tv_a, "distribution or samples JSON");
  otv->add_option("--b", tv_b, "distribution or samples JSON");
  otv->add_option("--samples", tv_samples, "samples JSON compared against the oracle for --graph/--model/--param");
  otv->add_option("--graph", graph_path);
  add_model_flags(otv, mf);
  otv->callback([&] {
    action = [&] {
      double tv;
      if (!tv_samples.empty()) {
        if (graph_path.empty()) throw Error(ErrorKind::kInvalidParameter, "--samples needs --graph");
        const Graph g = load_graph(graph_path, manifest);
        const ModelSpec m = mf.spec();
        tv = tv_distance(load_distribution(tv_samples), exact_distribution(g, m, Pinning::none(site_count(g, m))));
      } else {
        if (tv_a.empty() || tv_b.empty()) throw Error(ErrorKind::kInvalidParameter, "give --a and --b, or --samples");
        tv = tv_distance(load_distribution(tv_a), load_distribution(tv_b));
      }
      emit(globals, manifest, {{"tv", tv}});
    };
  });

  // bench
  std::vector<int> ladder{100000, 200000, 400000};
  double bench_d = 2.0, bench_theta = 0.1, bench_eps = 0.1;
  ModelFlags bench_model{"hardcore", "0.5"};
  auto* bench = app.add_subcommand("bench", "time the sampler over a size ladder");
  bench->add_option("--ladder", ladder, "graph sizes")->delimiter(',')->capture_default_str();
  bench->add_option("--d", bench_d)->capture_default_str();
  bench->add_option("--theta", bench_theta)->capture_default_str();
  bench->add_option("--eps", bench_eps)->capture_default_str();
  add_model_flags(bench, bench_model);
  bench->callback([&] {
    action = [&] {
      const ModelSpec m = bench_model.spec();
      json rungs = json::array();
      std::vector<double> ns, ts;
      for (std::size_t i = 0; i < ladder.size(); ++i) {
        const std::uint64_t seed = globals.seed + i;
        const auto g0 = Clock::now();
        const Graph g = generate_gnp(ladder[i], bench_d, seed);
        const double gen_time = seconds_since(g0);
        const Schedule sched = make_schedule(ladder[i], bench_theta, bench_eps);
        SampleTimings tm;
        const auto s0 = Clock::now();
        const Configuration c = sample(g, m, default_degree_threshold(bench_d), sched, seed, &tm);
        const double total = seconds_since(s0);
        std::uint64_t digest = 1469598103934665603ULL;
        for (auto s : c.spins) digest = (digest ^ s) * 1099511628211ULL;
        std::ostringstream hex;
        hex << std::hex << digest;
        json rung = {{"n", ladder[i]}, {"m", g.num_edges()}, {"T", sched.steps}, {"seed", seed},
                     {"sample_digest", hex.str()}};
        if (!globals.no_timings) {
          rung["generate_seconds"] = gen_time;
          rung["main_loop_seconds"] = tm.main_loop_seconds;
          rung["finalize_seconds"] = tm.finalize_seconds;
          rung["total_seconds"] = total;
        }
        rungs.push_back(rung);
        ns.push_back(ladder[i]);
        ts.push_back(total);
      }
      json body = {{"rungs", rungs}};
      if (!globals.no_timings && ladder.size() >= 2) {
        body["fitted_exponent"] = fit_exponent(ns, ts);
        json ratios = json::array();
        for (std::size_t i = 1; i < ts.size(); ++i) ratios.push_back(ts[i] / ts[i - 1]);
        body["ratios"] = ratios;
      }
      emit(globals, manifest, body);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  // The deepest selected subcommand supplies the manifest flags.
  const CLI::App* leaf = &app;
  std::string command;
  while (true) {
    const auto subs = leaf->get_subcommands();
    if (subs.empty()) break;
    leaf = subs.front();
    command += (command.empty() ? "" : " ") + leaf->get_name();
  }
  manifest.command = command;
  manifest.app = leaf;
  if (globals.threads > 0) omp_set_num_threads(globals.threads);

  try {
    if (action) action();
  } catch (const CheckFailed& f) {
    return f.code;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

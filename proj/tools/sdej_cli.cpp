// Command-line front end for the sdejump shared library. Talks to the
// core exclusively through the C API in sdej.h; every run writes a
// summary JSON and echoes its fully resolved configuration into the
// output directory so reruns are exact.

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "sdej.h"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CommonOptions {
  std::string model;
  std::vector<std::string> params;  // key=value
  std::string out_dir = ".";
  std::vector<std::string> formats = {"json"};
  std::string config_file;
};

[[noreturn]] void die(const std::string& message);

std::string strip_quotes(std::string s) {
  while (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    s = s.substr(1, s.size() - 2);
  }
  return s;
}

// Expands "--config FILE" into explicit flags. The file holds flat
// key=value lines (as written to resolved.cfg); flags given on the
// command line take precedence, so keys already present are skipped.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::string file;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) file = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) file = args[i].substr(9);
  }
  if (file.empty()) return args;

  std::ifstream in(file);
  if (!in) die("cannot read config file " + file);
  std::set<std::string> given;
  for (const auto& a : args) {
    if (a.rfind("--", 0) == 0) given.insert(a.substr(0, a.find('=')));
  }
  std::vector<std::string> out = args;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line[0] == '[') continue;
    const auto pos = line.find('=');
    if (pos == std::string::npos) die("bad config line: " + line);
    const std::string flag = "--" + line.substr(0, pos);
    if (flag == "--config" || given.count(flag) > 0) continue;
    // Vector options are written as space-separated quoted tokens.
    std::stringstream values(line.substr(pos + 1));
    std::string token;
    while (values >> token) {
      token = strip_quotes(token);
      if (token.empty() || token == "{}") continue;  // empty-vector default
      // Multi-value defaults are echoed as [a,b,...].
      if (token.size() >= 2 && token.front() == '[' && token.back() == ']') {
        std::stringstream inner(token.substr(1, token.size() - 2));
        std::string item;
        while (std::getline(inner, item, ',')) {
          if (item.empty()) continue;
          out.push_back(flag);
          out.push_back(item);
        }
        continue;
      }
      out.push_back(flag);
      out.push_back(token);
    }
  }
  return out;
}

json params_to_json(const std::vector<std::string>& params) {
  json j = json::object();
  for (const auto& kv : params) {
    const auto pos = kv.find('=');
    if (pos == std::string::npos) {
      throw CLI::ValidationError("--param", "expected key=value, got '" + kv + "'");
    }
    j[kv.substr(0, pos)] = std::stod(kv.substr(pos + 1));
  }
  return j;
}

json parse_vector(const std::string& text, const std::string& flag) {
  json j = json::array();
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      j.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw CLI::ValidationError(flag, "expected comma-separated numbers, got '" + text + "'");
    }
  }
  if (j.empty()) throw CLI::ValidationError(flag, "empty vector");
  return j;
}

// "linear:3", "xlog:0.01" or "linear_gamma:40".
json parse_modulus(const std::string& text) {
  const auto pos = text.find(':');
  if (pos == std::string::npos) {
    throw CLI::ValidationError("--modulus", "expected kind:param, got '" + text + "'");
  }
  return {{"kind", text.substr(0, pos)}, {"param", std::stod(text.substr(pos + 1))}};
}

class ApiString {
 public:
  ~ApiString() { sdej_string_free(ptr); }
  char* ptr = nullptr;
  std::string str() const { return ptr ? std::string(ptr) : std::string(); }
};

[[noreturn]] void die(const std::string& message) {
  std::cerr << "error: " << message << "\n";
  std::exit(1);
}

void check_status(sdej_status status) {
  if (status != SDEJ_OK) die(sdej_last_error());
}

sdej_model* open_model(const CommonOptions& common) {
  sdej_model* model = nullptr;
  check_status(
      sdej_model_create(common.model.c_str(), params_to_json(common.params).dump().c_str(),
                        &model));
  return model;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) die("cannot write to " + path.string());
  out << content;
  if (!out.good()) die("write failed for " + path.string());
}

void prepare_out_dir(const CommonOptions& common, CLI::App* cmd) {
  std::error_code ec;
  fs::create_directories(common.out_dir, ec);
  if (ec) die("cannot create output directory " + common.out_dir);
  // Echo of the fully resolved configuration (defaults expanded).
  write_file(fs::path(common.out_dir) / "resolved.cfg", cmd->config_to_str(true, false));
}

void add_common(CLI::App* cmd, CommonOptions& common) {
  cmd->option_defaults()->always_capture_default();
  cmd->add_option("--config", common.config_file,
                  "flat key=value config file; flags override");
  cmd->add_option("--model", common.model, "registry model name")->required();
  cmd->add_option("--param", common.params, "model parameter as key=value (repeatable)");
  cmd->add_option("--out", common.out_dir, "output directory");
  cmd->add_option("--format", common.formats, "output formats: json, csv")
      ->delimiter(',')
      ->check(CLI::IsMember({"json", "csv"}));
}

bool wants(const CommonOptions& common, const std::string& format) {
  return std::find(common.formats.begin(), common.formats.end(), format) !=
         common.formats.end();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sdejump: jump-diffusion SDE simulation and hypothesis checking"};
  app.require_subcommand(1);

  // --- simulate ---
  auto* simulate = app.add_subcommand("simulate", "integrate one path and write it as CSV");
  CommonOptions sim_common;
  sim_common.formats = {"json", "csv"};
  std::string sim_x0 = "1";
  double sim_horizon = 1.0, sim_radius = 1e6;
  int sim_steps = 1000;
  std::uint64_t sim_seed = 0;
  add_common(simulate, sim_common);
  simulate->add_option("--x0", sim_x0, "initial value, comma-separated");
  simulate->add_option("--horizon,--T", sim_horizon, "time horizon");
  simulate->add_option("--n-steps", sim_steps, "base grid step count");
  simulate->add_option("--seed", sim_seed, "RNG seed");
  simulate->add_option("--explosion-radius", sim_radius, "freeze radius");

  // --- check ---
  auto* check = app.add_subcommand("check", "evaluate hypothesis residuals on a sample grid");
  CommonOptions check_common;
  std::vector<std::string> conditions;
  double check_radius = 10.0, check_K = 2.0, check_lambda = 4.0, check_p = 3.0;
  std::size_t check_points = 1000, check_pairs = 1000;
  std::string check_modulus;
  std::uint64_t check_seed = 0;
  add_common(check, check_common);
  check->add_option("--conditions", conditions, "condition ids, e.g. C9,C5,C8,LIN")
      ->delimiter(',')
      ->required();
  check->add_option("--radius", check_radius, "grid ball radius");
  check->add_option("--n-points", check_points, "low-discrepancy point count");
  check->add_option("--n-pairs", check_pairs, "low-discrepancy pair count");
  check->add_option("--modulus", check_modulus, "modulus as kind:param, e.g. linear:3");
  check->add_option("--K", check_K, "C10 weight constant");
  check->add_option("--lambda", check_lambda, "C8 ellipticity bound");
  check->add_option("--p", check_p, "C7 growth exponent");
  check->add_option("--seed", check_seed, "accepted for config uniformity (grid is deterministic)");

  // --- experiment ---
  auto* experiment = app.add_subcommand("experiment", "Monte Carlo theorem checks");
  experiment->require_subcommand(1);

  struct ExperimentOptions {
    CommonOptions common;
    std::string x0 = "1", y0;
    std::vector<std::string> ys;
    double t = 1.0, t1 = 0.5, eps_dist = 0.5, delta = 0.0, K = 2.0, r = 0.5, s = 0.0, p = 2.0;
    double eps = 1e-6, hit_radius = 0.5, radius = 1e6, conf_delta = 1e-4;
    std::string modulus, gamma;
    std::size_t n_paths = 1000;
    int n_steps = 1000, n_threads = 0;
    std::uint64_t seed = 0;
  };
  std::map<std::string, ExperimentOptions> exp_opts;

  const auto add_mc = [](CLI::App* cmd, ExperimentOptions& o) {
    cmd->add_option("--n-paths", o.n_paths, "Monte Carlo path count");
    cmd->add_option("--n-steps", o.n_steps, "base grid step count");
    cmd->add_option("--seed", o.seed, "RNG seed");
    cmd->add_option("--n-threads", o.n_threads, "worker threads (0 = auto)");
    cmd->add_option("--explosion-radius", o.radius, "freeze radius");
  };

  auto& cont = exp_opts["continuity"];
  auto* continuity = experiment->add_subcommand("continuity", "coupled-pair exceedance ladder");
  add_common(continuity, cont.common);
  continuity->add_option("--x0", cont.x0, "base initial value");
  continuity->add_option("--y", cont.ys, "ladder initial value (repeatable)")->required();
  continuity->add_option("--t", cont.t, "time horizon");
  continuity->add_option("--eps-dist", cont.eps_dist, "exceedance threshold");
  continuity->add_option("--delta", cont.delta, "test-function delta (0 = |x-y| per rung)");
  continuity->add_option("--modulus", cont.modulus, "modulus as kind:param");
  add_mc(continuity, cont);

  auto& nonc = exp_opts["nonconfluence"];
  auto* nonconfluence =
      experiment->add_subcommand("nonconfluence", "min coupled distance and Gronwall bound");
  add_common(nonconfluence, nonc.common);
  nonconfluence->add_option("--x0", nonc.x0)->required();
  nonconfluence->add_option("--y0", nonc.y0)->required();
  nonconfluence->add_option("--T", nonc.t, "time horizon");
  nonconfluence->add_option("--K", nonc.K, "confluence constant K");
  nonconfluence->add_option("--gamma", nonc.gamma, "gamma modulus as kind:param");
  nonconfluence->add_option("--delta", nonc.conf_delta, "test-function delta");
  add_mc(nonconfluence, nonc);

  auto& mom = exp_opts["moments"];
  auto* moments = experiment->add_subcommand("moments", "maximal-process moment estimate");
  add_common(moments, mom.common);
  moments->add_option("--x0", mom.x0);
  moments->add_option("--p", mom.p, "moment exponent in [2,4)");
  moments->add_option("--t", mom.t, "time horizon");
  add_mc(moments, mom);

  auto& gir = exp_opts["girsanov"];
  auto* girsanov = experiment->add_subcommand("girsanov", "bridge steering and density check");
  add_common(girsanov, gir.common);
  girsanov->add_option("--x0", gir.x0);
  girsanov->add_option("--y0", gir.y0, "bridge target")->required();
  girsanov->add_option("--t1", gir.t1, "bridge start time");
  girsanov->add_option("--T", gir.t, "terminal time");
  girsanov->add_option("--eps", gir.eps, "truncation parameter");
  girsanov->add_option("--hit-radius", gir.hit_radius, "endpoint hit radius");
  girsanov->add_option("--p", gir.p, "moment exponent for the endpoint bound");
  add_mc(girsanov, gir);

  auto& irr = exp_opts["irreducibility"];
  auto* irreducibility =
      experiment->add_subcommand("irreducibility", "hitting evidence for open balls");
  add_common(irreducibility, irr.common);
  irreducibility->add_option("--x0", irr.x0);
  irreducibility->add_option("--y0", irr.y0, "ball center")->required();
  irreducibility->add_option("--r", irr.r, "ball radius");
  irreducibility->add_option("--s", irr.s, "start time");
  irreducibility->add_option("--t", irr.t, "end time");
  add_mc(irreducibility, irr);

  try {
    std::vector<std::string> args =
        expand_config(std::vector<std::string>(argv + 1, argv + argc));
    // CLI11 consumes arguments in reverse order.
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (simulate->parsed()) {
      prepare_out_dir(sim_common, simulate);
      sdej_model* model = open_model(sim_common);
      json cfg = {{"x0", parse_vector(sim_x0, "--x0")},
                  {"horizon", sim_horizon},
                  {"n_steps", sim_steps},
                  {"seed", sim_seed},
                  {"explosion_radius", sim_radius}};
      ApiString csv, summary;
      check_status(sdej_simulate(model, cfg.dump().c_str(), &csv.ptr, &summary.ptr));
      sdej_model_destroy(model);
      if (wants(sim_common, "csv")) {
        write_file(fs::path(sim_common.out_dir) / "path.csv", csv.str());
      }
      write_file(fs::path(sim_common.out_dir) / "summary.json",
                 json::parse(summary.str()).dump(2) + "\n");
      std::cout << summary.str() << "\n";
      return 0;
    }

    if (check->parsed()) {
      prepare_out_dir(check_common, check);
      sdej_model* model = open_model(check_common);
      json cfg = {{"conditions", conditions}, {"radius", check_radius},
                  {"n_points", check_points}, {"n_pairs", check_pairs},
                  {"K", check_K},             {"lambda", check_lambda},
                  {"p", check_p}};
      if (!check_modulus.empty()) cfg["modulus"] = parse_modulus(check_modulus);
      ApiString reports;
      check_status(sdej_check(model, cfg.dump().c_str(), &reports.ptr));
      sdej_model_destroy(model);
      const json parsed = json::parse(reports.str());
      bool violation = false;
      for (const auto& report : parsed) {
        const std::string id = report["condition_id"].get<std::string>();
        write_file(fs::path(check_common.out_dir) / (id + ".json"), report.dump(2) + "\n");
        if (!report["satisfied"].get<bool>()) violation = true;
        // Infinite residuals serialize as null in JSON.
        const double residual = report["max_residual"].is_number()
                                    ? report["max_residual"].get<double>()
                                    : std::numeric_limits<double>::infinity();
        std::cout << id << ": "
                  << (report["satisfied"].get<bool>() ? "satisfied" : "VIOLATED")
                  << " (max_residual=" << residual << ")\n";
      }
      write_file(fs::path(check_common.out_dir) / "summary.json", parsed.dump(2) + "\n");
      return violation ? 2 : 0;
    }

    for (auto& [kind, o] : exp_opts) {
      CLI::App* cmd = experiment->get_subcommand(kind);
      if (!cmd->parsed()) continue;
      prepare_out_dir(o.common, cmd);
      sdej_model* model = open_model(o.common);
      json cfg = {{"x0", parse_vector(o.x0, "--x0")}, {"n_paths", o.n_paths},
                  {"n_steps", o.n_steps},             {"seed", o.seed},
                  {"n_threads", o.n_threads},         {"explosion_radius", o.radius}};
      if (kind == "continuity") {
        json ys = json::array();
        for (const auto& y : o.ys) ys.push_back(parse_vector(y, "--y"));
        cfg["ys"] = ys;
        cfg["t"] = o.t;
        cfg["eps_dist"] = o.eps_dist;
        if (o.delta > 0.0) cfg["delta"] = o.delta;
        if (!o.modulus.empty()) cfg["modulus"] = parse_modulus(o.modulus);
      } else if (kind == "nonconfluence") {
        cfg["y0"] = parse_vector(o.y0, "--y0");
        cfg["T"] = o.t;
        cfg["K"] = o.K;
        cfg["delta"] = o.conf_delta;
        if (!o.gamma.empty()) cfg["gamma"] = parse_modulus(o.gamma);
      } else if (kind == "moments") {
        cfg["p"] = o.p;
        cfg["t"] = o.t;
      } else if (kind == "girsanov") {
        cfg["y0"] = parse_vector(o.y0, "--y0");
        cfg["t1"] = o.t1;
        cfg["T"] = o.t;
        cfg["eps"] = o.eps;
        cfg["hit_radius"] = o.hit_radius;
        cfg["p"] = o.p;
      } else if (kind == "irreducibility") {
        cfg["y0"] = parse_vector(o.y0, "--y0");
        cfg["r"] = o.r;
        cfg["s"] = o.s;
        cfg["t"] = o.t;
      }
      ApiString summary;
      check_status(sdej_experiment(model, kind.c_str(), cfg.dump().c_str(), &summary.ptr));
      sdej_model_destroy(model);
      write_file(fs::path(o.common.out_dir) / "summary.json",
                 json::parse(summary.str()).dump(2) + "\n");
      std::cout << summary.str() << "\n";
      return 0;
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    die(e.what());
  }
  return 1;
}

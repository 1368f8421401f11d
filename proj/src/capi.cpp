#include "sdej.h"

#include <cstring>
#include <json.hpp>
#include <string>

#include "sdej/conditions.hpp"
#include "sdej/engine.hpp"
#include "sdej/experiments.hpp"
#include "sdej/registry.hpp"

using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

thread_local std::string g_last_error = "no error";

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

sdej_status fail(sdej_status code, const std::string& message) {
  g_last_error = message;
  return code;
}

template <typename Fn>
sdej_status guarded(Fn&& fn) {
  try {
    fn();
    return SDEJ_OK;
  } catch (const sdej::numeric_error& e) {
    return fail(SDEJ_ERR_NUMERIC, e.what());
  } catch (const json::exception& e) {
    return fail(SDEJ_ERR_INVALID, std::string("invalid JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    return fail(SDEJ_ERR_INVALID, e.what());
  } catch (const std::exception& e) {
    return fail(SDEJ_ERR_INTERNAL, e.what());
  }
}

json parse_or_empty(const char* text) {
  if (text == nullptr || *text == '\0') return json::object();
  return json::parse(text);
}

Eigen::VectorXd to_vector(const json& j, const char* field) {
  if (!j.is_array() || j.empty()) {
    throw std::invalid_argument(std::string(field) + " must be a nonempty array of numbers");
  }
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

json from_vector(const Eigen::VectorXd& v) {
  json j = json::array();
  for (int i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

sdej::ModulusSpec parse_modulus(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const double param = j.at("param").get<double>();
  if (kind == "linear") return sdej::ModulusSpec::linear(param);
  if (kind == "xlog") return sdej::ModulusSpec::xlog(param);
  if (kind == "linear_gamma") return sdej::ModulusSpec::linear_gamma(param);
  throw std::invalid_argument("unknown modulus kind '" + kind +
                              "'; known: linear xlog linear_gamma");
}

sdej::McConfig parse_mc(const json& j) {
  sdej::McConfig mc;
  mc.n_paths = j.value("n_paths", std::size_t{1000});
  mc.n_steps = j.value("n_steps", 1000);
  mc.seed = j.value("seed", std::uint64_t{0});
  mc.n_threads = j.value("n_threads", 0);
  mc.explosion_radius = j.value("explosion_radius", 1e6);
  return mc;
}

json summary_to_json(const sdej::ExperimentSummary& summary) {
  json estimates = json::object();
  for (const auto& [name, est] : summary.estimates) {
    estimates[name] = {{"value", est.value}, {"std_error", est.std_error}};
  }
  json bounds = json::array();
  for (const auto& b : summary.bound_comparisons) {
    bounds.push_back({{"name", b.name},
                      {"empirical", b.empirical},
                      {"bound", b.bound},
                      {"satisfied", b.satisfied}});
  }
  return {{"schema_version", kSchemaVersion},
          {"experiment_id", summary.experiment_id},
          {"estimates", estimates},
          {"bound_comparisons", bounds},
          {"n_paths", summary.n_paths},
          {"seed", summary.seed}};
}

json report_to_json(const sdej::ConditionReport& report) {
  json witness = {{"t", report.witness.time}, {"x", from_vector(report.witness.x)}};
  if (report.witness.y) witness["y"] = from_vector(*report.witness.y);
  return {{"schema_version", kSchemaVersion},
          {"condition_id", report.condition_id},
          {"max_residual", report.max_residual},
          {"witness", witness},
          {"satisfied", report.satisfied},
          {"grid_size", report.grid_size}};
}

}  // namespace

struct sdej_model {
  sdej::CoefficientSet coefficients;
};

extern "C" {

const char* sdej_version(void) { return "0.1.0"; }

const char* sdej_last_error(void) { return g_last_error.c_str(); }

void sdej_string_free(char* s) { delete[] s; }

sdej_status sdej_registry_names(char** json_out) {
  if (json_out == nullptr) return fail(SDEJ_ERR_INVALID, "json_out must not be NULL");
  return guarded([&] { *json_out = dup_string(json(sdej::registry_names()).dump()); });
}

sdej_status sdej_model_create(const char* name, const char* params_json, sdej_model** out) {
  if (name == nullptr || out == nullptr) {
    return fail(SDEJ_ERR_INVALID, "name and out must not be NULL");
  }
  return guarded([&] {
    std::map<std::string, double> params;
    const json parsed = parse_or_empty(params_json);
    for (const auto& [key, value] : parsed.items()) {
      params[key] = value.get<double>();
    }
    *out = new sdej_model{sdej::make_model(name, params)};
  });
}

void sdej_model_destroy(sdej_model* model) { delete model; }

sdej_status sdej_simulate(const sdej_model* model, const char* config_json, char** csv_out,
                          char** summary_json) {
  if (model == nullptr) return fail(SDEJ_ERR_INVALID, "model must not be NULL");
  return guarded([&] {
    const json cfg = parse_or_empty(config_json);
    sdej::SimConfig sim;
    sim.x0 = to_vector(cfg.at("x0"), "x0");
    sim.horizon = cfg.value("horizon", 1.0);
    sim.step_count = cfg.value("n_steps", 1000);
    sim.seed = cfg.value("seed", std::uint64_t{0});
    sim.explosion_radius = cfg.value("explosion_radius", 1e6);

    const sdej::NoiseRealization noise =
        sdej::make_noise(model->coefficients.measure, sim.horizon, sim.step_count,
                         model->coefficients.dim_noise, sim.seed, 0);
    const sdej::PathRecord record = sdej::simulate_path(model->coefficients, sim, noise);

    if (csv_out != nullptr) *csv_out = dup_string(record.to_csv());
    if (summary_json != nullptr) {
      json summary = {{"schema_version", kSchemaVersion},
                      {"model", model->coefficients.name},
                      {"horizon", sim.horizon},
                      {"n_steps", sim.step_count},
                      {"seed", sim.seed},
                      {"n_grid_points", record.times.size()},
                      {"n_jumps", noise.jump_events.size()},
                      {"exploded", record.exploded},
                      {"endpoint", from_vector(record.states.back())}};
      if (record.exploded) summary["explosion_time"] = record.explosion_time;
      *summary_json = dup_string(summary.dump());
    }
  });
}

sdej_status sdej_check(const sdej_model* model, const char* config_json, char** report_json) {
  if (model == nullptr || report_json == nullptr) {
    return fail(SDEJ_ERR_INVALID, "model and report_json must not be NULL");
  }
  return guarded([&] {
    const json cfg = parse_or_empty(config_json);
    if (!cfg.contains("conditions") || !cfg["conditions"].is_array() ||
        cfg["conditions"].empty()) {
      throw std::invalid_argument("config requires a nonempty 'conditions' array");
    }
    sdej::ConditionParams params;
    if (cfg.contains("modulus")) params.modulus = parse_modulus(cfg["modulus"]);
    params.K = cfg.value("K", 2.0);
    params.lambda = cfg.value("lambda", 4.0);
    params.p = cfg.value("p", 3.0);

    const double radius = cfg.value("radius", 10.0);
    const std::size_t n_points = cfg.value("n_points", std::size_t{1000});
    const std::size_t n_pairs = cfg.value("n_pairs", std::size_t{1000});
    const sdej::SampleGrid grid =
        sdej::SampleGrid::make(model->coefficients.dim_state, radius, n_points, n_pairs,
                               cfg.value("adversarial", true));

    json reports = json::array();
    for (const auto& id : cfg["conditions"]) {
      reports.push_back(report_to_json(sdej::check_condition(
          id.get<std::string>(), model->coefficients, params, grid)));
    }
    *report_json = dup_string(reports.dump());
  });
}

sdej_status sdej_experiment(const sdej_model* model, const char* kind, const char* config_json,
                            char** summary_json) {
  if (model == nullptr || kind == nullptr || summary_json == nullptr) {
    return fail(SDEJ_ERR_INVALID, "model, kind and summary_json must not be NULL");
  }
  return guarded([&] {
    const json cfg = parse_or_empty(config_json);
    const std::string which = kind;
    sdej::ExperimentSummary summary;

    if (which == "continuity") {
      sdej::ContinuityConfig c;
      c.x = to_vector(cfg.at("x0"), "x0");
      for (const auto& y : cfg.at("ys")) c.ys.push_back(to_vector(y, "ys[i]"));
      c.t = cfg.value("t", 1.0);
      c.eps_dist = cfg.value("eps_dist", 0.5);
      c.delta = cfg.value("delta", 0.0);
      if (cfg.contains("modulus")) c.modulus = parse_modulus(cfg["modulus"]);
      c.mc = parse_mc(cfg);
      summary = sdej::run_continuity(model->coefficients, c);
    } else if (which == "nonconfluence") {
      sdej::NonconfluenceConfig c;
      c.x0 = to_vector(cfg.at("x0"), "x0");
      c.y0 = to_vector(cfg.at("y0"), "y0");
      c.T = cfg.value("T", 1.0);
      c.K = cfg.value("K", 2.0);
      if (cfg.contains("gamma")) c.gamma = parse_modulus(cfg["gamma"]);
      c.delta = cfg.value("delta", 1e-4);
      c.mc = parse_mc(cfg);
      summary = sdej::run_nonconfluence(model->coefficients, c);
    } else if (which == "moments") {
      sdej::MomentsConfig c;
      c.x0 = to_vector(cfg.at("x0"), "x0");
      c.p = cfg.value("p", 2.0);
      c.t = cfg.value("t", 1.0);
      c.mc = parse_mc(cfg);
      summary = sdej::run_moments(model->coefficients, c);
    } else if (which == "girsanov") {
      sdej::GirsanovConfig c;
      c.x0 = to_vector(cfg.at("x0"), "x0");
      c.spec.y0 = to_vector(cfg.at("y0"), "y0");
      c.spec.t1 = cfg.value("t1", 0.5);
      c.spec.T = cfg.value("T", 1.0);
      c.spec.eps = cfg.value("eps", 1e-6);
      c.spec.hit_radius = cfg.value("hit_radius", 0.5);
      c.spec.p = cfg.value("p", 2.0);
      c.mc = parse_mc(cfg);
      summary = sdej::run_girsanov_bridge(model->coefficients, c);
    } else if (which == "irreducibility") {
      sdej::IrreducibilityConfig c;
      c.x0 = to_vector(cfg.at("x0"), "x0");
      c.y0 = to_vector(cfg.at("y0"), "y0");
      c.r = cfg.value("r", 0.5);
      c.s = cfg.value("s", 0.0);
      c.t = cfg.value("t", 1.0);
      c.mc = parse_mc(cfg);
      summary = sdej::run_irreducibility(model->coefficients, c);
    } else {
      throw std::invalid_argument(
          "unknown experiment '" + which +
          "'; known: continuity nonconfluence moments girsanov irreducibility");
    }
    *summary_json = dup_string(summary_to_json(summary).dump());
  });
}

}  // extern "C"

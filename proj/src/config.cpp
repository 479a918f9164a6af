#include "ssdp/config.hpp"

#include <json.hpp>

namespace ssdp {

using nlohmann::ordered_json;

const char* to_string(ClockMode m) {
  return m == ClockMode::Simulated ? "simulated" : "real";
}

ClockMode clock_mode_from_string(const std::string& s) {
  if (s == "simulated") return ClockMode::Simulated;
  if (s == "real") return ClockMode::Real;
  throw InvalidInputError("unknown clock mode: " + s);
}

void Config::validate() const {
  if (tau < -1.0) throw InvalidInputError("tau must be >= -1");
  if (b < 1) throw InvalidInputError("b must be >= 1");
  if (k < 1) throw InvalidInputError("k must be >= 1");
  if (w < 0.0) throw InvalidInputError("w must be >= 0");
  if (lambda_es < 0.0 || lambda_es > 1.0) {
    throw InvalidInputError("lambda_es must be in [0, 1]");
  }
  if (lambda_ds < 0.0 || lambda_ds > 1.0) {
    throw InvalidInputError("lambda_ds must be in [0, 1]");
  }
  if (t_star < 1) throw InvalidInputError("t_star must be >= 1");
  if (t_max_s <= 0.0) throw InvalidInputError("t_max_s must be positive");
  if (r_max < 1) throw InvalidInputError("r_max must be >= 1");
  if (p < 0.0 || p > 1.0) throw InvalidInputError("p must be in [0, 1]");
  if (max_depth < 1) throw InvalidInputError("max_depth must be >= 1");
}

std::string config_to_json(const Config& c) {
  ordered_json j;
  j["tau"] = c.tau;
  j["b"] = c.b;
  j["k"] = c.k;
  j["w"] = c.w;
  j["lambda_es"] = c.lambda_es;
  j["lambda_ds"] = c.lambda_ds;
  j["t_star"] = c.t_star;
  j["t_max_s"] = c.t_max_s;
  j["r_max"] = c.r_max;
  j["p"] = c.p;
  j["merge_mode"] = to_string(c.merge_mode);
  j["seed"] = c.seed;
  j["clock_mode"] = to_string(c.clock_mode);
  j["max_depth"] = c.max_depth;
  return j.dump();
}

namespace {

template <typename T>
void read_field(const ordered_json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

Config config_from_json(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("config: expected a JSON object");
  Config c;
  try {
    read_field(j, "tau", c.tau);
    read_field(j, "b", c.b);
    read_field(j, "k", c.k);
    read_field(j, "w", c.w);
    read_field(j, "lambda_es", c.lambda_es);
    read_field(j, "lambda_ds", c.lambda_ds);
    read_field(j, "t_star", c.t_star);
    read_field(j, "t_max_s", c.t_max_s);
    read_field(j, "r_max", c.r_max);
    read_field(j, "p", c.p);
    read_field(j, "seed", c.seed);
    read_field(j, "max_depth", c.max_depth);
    if (j.contains("merge_mode")) {
      c.merge_mode = merge_mode_from_string(j.at("merge_mode").get<std::string>());
    }
    if (j.contains("clock_mode")) {
      c.clock_mode = clock_mode_from_string(j.at("clock_mode").get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace ssdp

#pragma once

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "hcnas/error.hpp"
#include "hcnas/latency.hpp"
#include "hcnas/objective.hpp"
#include "hcnas/optimizer.hpp"
#include "hcnas/space.hpp"

namespace hcnas {

using Json = nlohmann::json;

inline Json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Input, "cannot open " + path);
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorKind::Parse, "invalid JSON in " + path);
  return j;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Input, "cannot write " + path);
  out << text;
}

// ---- SpaceSpec ----

inline Json space_to_json(const SpaceSpec& spec) {
  Json configs = Json::array();
  for (const auto& cfg : spec.configs) {
    Json attrs = Json::object();
    for (const auto& [key, value] : cfg.attrs) attrs[key] = value;
    configs.push_back({{"id", cfg.id}, {"attrs", attrs}});
  }
  return {{"version", 1},
          {"stages", spec.num_stages},
          {"max_depth", spec.max_depth},
          {"min_depth", spec.min_depth},
          {"configs", configs}};
}

inline SpaceSpec space_from_json(const Json& j) {
  try {
    SpaceSpec spec;
    spec.num_stages = j.at("stages").get<Index>();
    spec.max_depth = j.at("max_depth").get<Index>();
    spec.min_depth = j.value("min_depth", Index(2));
    for (const auto& item : j.at("configs")) {
      ConfigLabel cfg;
      cfg.id = item.at("id").get<int>();
      if (item.contains("attrs"))
        for (const auto& [key, value] : item.at("attrs").items())
          cfg.attrs[key] = value.get<double>();
      spec.configs.push_back(cfg);
    }
    check_spec(spec);
    return spec;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("space spec: ") + e.what());
  }
}

inline SpaceSpec load_space(const std::string& path) {
  return space_from_json(parse_json_file(path));
}

// ---- LatencyTable ----

template <class Scalar = double>
Json table_to_json(const LatencyTable<Scalar>& table, const SpaceSpec& spec) {
  check_table(table, spec);
  Json t = Json::array();
  for (Index s = 0; s < spec.num_stages; ++s) {
    Json stage = Json::array();
    for (Index b = 0; b < spec.max_depth; ++b) {
      Json block = Json::array();
      for (Index c = 0; c < spec.num_configs(); ++c)
        block.push_back(table.t(spec.alpha_row(s, b), c));
      stage.push_back(block);
    }
    t.push_back(stage);
  }
  return {{"version", 1}, {"device", table.device_name}, {"t", t}};
}

template <class Scalar = double>
LatencyTable<Scalar> table_from_json(const Json& j, const SpaceSpec& spec) {
  LatencyTable<Scalar> table;
  try {
    table.device_name = j.value("device", std::string("unknown"));
    const Json& t = j.at("t");
    if (static_cast<Index>(t.size()) != spec.num_stages)
      throw Error(ErrorKind::ShapeMismatch,
                  "latency table stage count does not match the space spec");
    table.t.resize(spec.num_alpha_rows(), spec.num_configs());
    for (Index s = 0; s < spec.num_stages; ++s) {
      const Json& stage = t.at(static_cast<std::size_t>(s));
      if (static_cast<Index>(stage.size()) != spec.max_depth)
        throw Error(ErrorKind::ShapeMismatch,
                    "latency table depth count does not match the space spec");
      for (Index b = 0; b < spec.max_depth; ++b) {
        const Json& block = stage.at(static_cast<std::size_t>(b));
        if (static_cast<Index>(block.size()) != spec.num_configs())
          throw Error(ErrorKind::ShapeMismatch,
                      "latency table config count does not match the space spec");
        for (Index c = 0; c < spec.num_configs(); ++c) {
          const double value = block.at(static_cast<std::size_t>(c)).get<double>();
          if (value < 0.0)
            throw Error(ErrorKind::Invariant,
                        "latency table entries must be nonnegative");
          table.t(spec.alpha_row(s, b), c) = static_cast<Scalar>(value);
        }
      }
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("latency table: ") + e.what());
  }
  check_table(table, spec);
  return table;
}

template <class Scalar = double>
LatencyTable<Scalar> load_table(const std::string& path, const SpaceSpec& spec) {
  return table_from_json<Scalar>(parse_json_file(path), spec);
}

// ---- ObjectiveSpec ----

inline ObjectiveKind objective_kind_from_string(const std::string& s) {
  if (s == "toy_quadratic") return ObjectiveKind::ToyQuadratic;
  if (s == "linear_surrogate") return ObjectiveKind::LinearSurrogate;
  if (s == "noisy_surrogate") return ObjectiveKind::NoisySurrogate;
  throw Error(ErrorKind::Parse, "unknown objective kind: " + s);
}

inline std::string objective_kind_to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::ToyQuadratic:
      return "toy_quadratic";
    case ObjectiveKind::LinearSurrogate:
      return "linear_surrogate";
    case ObjectiveKind::NoisySurrogate:
    default:
      return "noisy_surrogate";
  }
}

template <class Scalar = double>
Json objective_to_json(const ObjectiveSpec<Scalar>& obj, const SpaceSpec& spec) {
  check_objective(obj, spec);
  Json ua = Json::array();
  for (Index s = 0; s < spec.num_stages; ++s) {
    Json stage = Json::array();
    for (Index b = 0; b < spec.max_depth; ++b) {
      Json block = Json::array();
      for (Index c = 0; c < spec.num_configs(); ++c)
        block.push_back(obj.u_alpha(spec.alpha_row(s, b), c));
      stage.push_back(block);
    }
    ua.push_back(stage);
  }
  Json ub = Json::array();
  for (Index s = 0; s < spec.num_stages; ++s) {
    Json stage = Json::array();
    for (Index b = 0; b < spec.max_depth; ++b) stage.push_back(obj.u_beta(s, b));
    ub.push_back(stage);
  }
  return {{"version", 1},
          {"kind", objective_kind_to_string(obj.kind)},
          {"u_alpha", ua},
          {"u_beta", ub},
          {"noise_sd", obj.noise_sd},
          {"batch_size", obj.batch_size}};
}

template <class Scalar = double>
ObjectiveSpec<Scalar> objective_from_json(const Json& j, const SpaceSpec& spec) {
  ObjectiveSpec<Scalar> obj;
  try {
    obj.kind = objective_kind_from_string(j.at("kind").get<std::string>());
    obj.noise_sd = static_cast<Scalar>(j.value("noise_sd", 0.0));
    obj.batch_size = j.value("batch_size", 64);
    obj.u_alpha.resize(spec.num_alpha_rows(), spec.num_configs());
    obj.u_beta.resize(spec.num_stages, spec.max_depth);
    const Json& ua = j.at("u_alpha");
    const Json& ub = j.at("u_beta");
    for (Index s = 0; s < spec.num_stages; ++s)
      for (Index b = 0; b < spec.max_depth; ++b) {
        for (Index c = 0; c < spec.num_configs(); ++c)
          obj.u_alpha(spec.alpha_row(s, b), c) = static_cast<Scalar>(
              ua.at(static_cast<std::size_t>(s)).at(static_cast<std::size_t>(b))
                  .at(static_cast<std::size_t>(c)).get<double>());
        obj.u_beta(s, b) = static_cast<Scalar>(
            ub.at(static_cast<std::size_t>(s)).at(static_cast<std::size_t>(b))
                .get<double>());
      }
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("objective spec: ") + e.what());
  }
  check_objective(obj, spec);
  return obj;
}

template <class Scalar = double>
ObjectiveSpec<Scalar> load_objective(const std::string& path,
                                     const SpaceSpec& spec) {
  return objective_from_json<Scalar>(parse_json_file(path), spec);
}

// ---- ArchParams ----

template <class Scalar = double>
Json params_to_json(const ArchParams<Scalar>& p, const SpaceSpec& spec) {
  Json alpha = Json::array();
  for (Index s = 0; s < spec.num_stages; ++s) {
    Json stage = Json::array();
    for (Index b = 0; b < spec.max_depth; ++b) {
      Json block = Json::array();
      for (Index c = 0; c < spec.num_configs(); ++c)
        block.push_back(p.alpha(spec.alpha_row(s, b), c));
      stage.push_back(block);
    }
    alpha.push_back(stage);
  }
  Json beta = Json::array();
  for (Index s = 0; s < spec.num_stages; ++s) {
    Json stage = Json::array();
    for (Index b = 0; b < spec.max_depth; ++b) stage.push_back(p.beta(s, b));
    beta.push_back(stage);
  }
  return {{"version", 1}, {"alpha", alpha}, {"beta", beta}};
}

template <class Scalar = double>
ArchParams<Scalar> params_from_json(const Json& j, const SpaceSpec& spec) {
  ArchParams<Scalar> p;
  try {
    p.alpha.resize(spec.num_alpha_rows(), spec.num_configs());
    p.beta.resize(spec.num_stages, spec.max_depth);
    const Json& alpha = j.at("alpha");
    const Json& beta = j.at("beta");
    for (Index s = 0; s < spec.num_stages; ++s)
      for (Index b = 0; b < spec.max_depth; ++b) {
        for (Index c = 0; c < spec.num_configs(); ++c)
          p.alpha(spec.alpha_row(s, b), c) = static_cast<Scalar>(
              alpha.at(static_cast<std::size_t>(s)).at(static_cast<std::size_t>(b))
                  .at(static_cast<std::size_t>(c)).get<double>());
        p.beta(s, b) = static_cast<Scalar>(
            beta.at(static_cast<std::size_t>(s)).at(static_cast<std::size_t>(b))
                .get<double>());
      }
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("arch params: ") + e.what());
  }
  return p;
}

// ---- DiscreteArch ----

inline Json arch_to_json(const DiscreteArch& arch) {
  Json depth = Json::array();
  for (int d : arch.depth) depth.push_back(d);
  Json config = Json::array();
  for (const auto& stage : arch.config) {
    Json row = Json::array();
    for (int c : stage) row.push_back(c);
    config.push_back(row);
  }
  return {{"depth", depth}, {"config", config}};
}

inline DiscreteArch arch_from_json(const Json& j) {
  try {
    DiscreteArch arch;
    for (const auto& d : j.at("depth")) arch.depth.push_back(d.get<int>());
    for (const auto& stage : j.at("config")) {
      std::vector<int> row;
      for (const auto& c : stage) row.push_back(c.get<int>());
      arch.config.push_back(row);
    }
    return arch;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("discrete arch: ") + e.what());
  }
}

// ---- traces ----

// Fixed %.17g formatting keeps re-runs byte-identical.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <class Scalar>
std::string trace_to_csv(const SearchTrace<Scalar>& trace) {
  std::ostringstream out;
  out << "iter,block,objective,latency_ms,fw_gap,step_size\n";
  for (const TraceRow& row : trace.rows) {
    const char* block = row.block == 'a' ? "alpha"
                        : row.block == 'b' ? "beta"
                                           : "gd";
    out << row.iter << ',' << block << ',' << format_double(row.objective)
        << ',' << format_double(row.latency_ms) << ','
        << format_double(row.fw_gap) << ',' << format_double(row.step_size)
        << '\n';
  }
  return out.str();
}

}  // namespace hcnas

#include "pixyz/model.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "pixyz/errors.hpp"

namespace pixyz {

using nlohmann::json;

std::string_view to_string(SweepParam p) noexcept {
  switch (p) {
    case SweepParam::Jx: return "Jx";
    case SweepParam::Jy: return "Jy";
    case SweepParam::Jz: return "Jz";
    case SweepParam::gamma: return "gamma";
    case SweepParam::Gamma: return "Gamma";
  }
  return "Jy";
}

SweepParam sweep_param_from_string(std::string_view name) {
  for (auto p : {SweepParam::Jx, SweepParam::Jy, SweepParam::Jz, SweepParam::gamma, SweepParam::Gamma}) {
    if (to_string(p) == name) return p;
  }
  throw ConfigError("invalid value for key: sweep.param ('" + std::string(name) + "')");
}

const std::vector<std::string>& known_observables() {
  static const std::vector<std::string> names = {"Sxx", "Syy", "Mz", "entropy", "purity", "Bc_x", "Bc_y", "chi_av"};
  return names;
}

std::vector<std::string> validate(const ModelParams& p) {
  std::vector<std::string> errors;
  for (auto [name, v] : {std::pair{"Jx", p.Jx}, {"Jy", p.Jy}, {"Jz", p.Jz}, {"gamma", p.gamma}, {"Gamma", p.Gamma}}) {
    if (!std::isfinite(v)) errors.push_back(std::string(name) + " must be finite");
  }
  if (p.N < 2) errors.emplace_back("N ≥ 2 required");
  if (p.gamma < 0.0) errors.emplace_back("gamma ≥ 0 required");
  if (p.Gamma < 0.0) errors.emplace_back("Gamma ≥ 0 required");
  if (!(p.gamma + p.Gamma > 0.0)) errors.emplace_back("no dissipation");
  return errors;
}

std::vector<std::string> validate(const SweepSpec& s) {
  std::vector<std::string> errors;
  if (s.points < 1) errors.emplace_back("sweep.points ≥ 1 required");
  if (s.points > 1 && !(s.lo < s.hi)) errors.emplace_back("sweep.lo < sweep.hi required");
  for (int n : s.Ns) {
    if (n < 2) {
      errors.emplace_back("sweep.Ns entries must be ≥ 2");
      break;
    }
  }
  const auto& known = known_observables();
  for (const auto& o : s.observables) {
    if (std::find(known.begin(), known.end(), o) == known.end()) errors.push_back("unknown observable: " + o);
  }
  return errors;
}

void require_valid(const ModelParams& params) {
  const auto errors = validate(params);
  if (errors.empty()) return;
  std::string msg = "invalid model parameters:";
  for (const auto& e : errors) msg += " " + e + ";";
  throw ConfigError(msg);
}

double rate_scale(const ModelParams& p) noexcept { return p.Gamma > 0.0 ? p.gamma + p.Gamma : p.gamma; }

double get(const ModelParams& p, SweepParam which) noexcept {
  switch (which) {
    case SweepParam::Jx: return p.Jx;
    case SweepParam::Jy: return p.Jy;
    case SweepParam::Jz: return p.Jz;
    case SweepParam::gamma: return p.gamma;
    case SweepParam::Gamma: return p.Gamma;
  }
  return p.Jy;
}

ModelParams with(ModelParams p, SweepParam which, double value) noexcept {
  switch (which) {
    case SweepParam::Jx: p.Jx = value; break;
    case SweepParam::Jy: p.Jy = value; break;
    case SweepParam::Jz: p.Jz = value; break;
    case SweepParam::gamma: p.gamma = value; break;
    case SweepParam::Gamma: p.Gamma = value; break;
  }
  return p;
}

double sweep_value(const SweepSpec& s, int i) noexcept {
  if (s.points == 1) return s.lo;
  if (i == s.points - 1) return s.hi;
  return s.lo + (s.hi - s.lo) * static_cast<double>(i) / static_cast<double>(s.points - 1);
}

namespace {

double number(const json& doc, const char* key, const std::string& path) {
  const auto it = doc.find(key);
  if (it == doc.end()) throw ConfigError("missing key: " + path);
  if (!it->is_number()) throw ConfigError("invalid value for key: " + path + " (expected a number)");
  return it->get<double>();
}

int integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ConfigError("invalid value for key: " + path + " (expected an integer)");
  return v.get<int>();
}

void reject_unknown(const json& doc, std::initializer_list<std::string_view> allowed, const std::string& prefix) {
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
      throw ConfigError("unknown key: " + prefix + it.key());
    }
  }
}

}  // namespace

Config parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config root must be an object");
  reject_unknown(doc, {"Jx", "Jy", "Jz", "gamma", "Gamma", "N", "sweep"}, "");

  Config cfg;
  auto& p = cfg.params;
  p.Jx = number(doc, "Jx", "Jx");
  p.Jy = number(doc, "Jy", "Jy");
  p.Jz = number(doc, "Jz", "Jz");
  p.gamma = number(doc, "gamma", "gamma");
  p.Gamma = number(doc, "Gamma", "Gamma");
  if (!doc.contains("N")) throw ConfigError("missing key: N");
  p.N = integer(doc["N"], "N");

  auto& s = cfg.sweep;
  s.Ns = {p.N};
  s.observables = known_observables();
  if (const auto it = doc.find("sweep"); it != doc.end()) {
    const json& sw = *it;
    if (!sw.is_object()) throw ConfigError("invalid value for key: sweep (expected an object)");
    reject_unknown(sw, {"param", "lo", "hi", "points", "Ns", "observables", "output"}, "sweep.");
    if (sw.contains("param")) {
      if (!sw["param"].is_string()) throw ConfigError("invalid value for key: sweep.param");
      s.param = sweep_param_from_string(sw["param"].get<std::string>());
    }
    if (sw.contains("lo")) s.lo = number(sw, "lo", "sweep.lo");
    if (sw.contains("hi")) s.hi = number(sw, "hi", "sweep.hi");
    if (sw.contains("points")) s.points = integer(sw["points"], "sweep.points");
    if (sw.contains("Ns")) {
      if (!sw["Ns"].is_array()) throw ConfigError("invalid value for key: sweep.Ns (expected an array)");
      s.Ns.clear();
      for (const auto& v : sw["Ns"]) s.Ns.push_back(integer(v, "sweep.Ns"));
    }
    if (sw.contains("observables")) {
      if (!sw["observables"].is_array()) throw ConfigError("invalid value for key: sweep.observables");
      s.observables.clear();
      for (const auto& v : sw["observables"]) {
        if (!v.is_string()) throw ConfigError("invalid value for key: sweep.observables");
        s.observables.push_back(v.get<std::string>());
      }
    }
    if (sw.contains("output")) {
      if (!sw["output"].is_string()) throw ConfigError("invalid value for key: sweep.output");
      s.output = sw["output"].get<std::string>();
    }
  }

  if (const auto errors = validate(p); !errors.empty()) throw ConfigError("invalid model parameters: " + errors.front());
  if (const auto errors = validate(s); !errors.empty()) throw ConfigError("invalid sweep: " + errors.front());
  return cfg;
}

std::string serialize_config(const Config& cfg) {
  const auto& p = cfg.params;
  const auto& s = cfg.sweep;
  json doc = {{"Jx", p.Jx}, {"Jy", p.Jy}, {"Jz", p.Jz}, {"gamma", p.gamma}, {"Gamma", p.Gamma}, {"N", p.N}};
  doc["sweep"] = {{"param", std::string(to_string(s.param))},
                  {"lo", s.lo},
                  {"hi", s.hi},
                  {"points", s.points},
                  {"Ns", s.Ns},
                  {"observables", s.observables},
                  {"output", s.output}};
  return doc.dump(2);
}

}  // namespace pixyz

#pragma once

// Model parameters of the all-to-all dissipative XYZ model
//
//   H = [Jx (Sx)^2 + Jy (Sy)^2 + Jz (Sz)^2] / (2 (N - 1)),   S^a = sum_i sigma^a_i
//   d rho/dt = -i[H, rho] + gamma sum_i D[sigma^-_i] rho + Gamma/(N-1) D[S^-] rho
//
// plus the sweep description consumed by the harness and the CLI. Rates and
// couplings are stored raw; normalization happens only when reporting.

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pixyz {

struct ModelParams {
  double Jx = 0.6;
  double Jy = 1.0;
  double Jz = 1.0;
  double gamma = 1.0;  // local spin-flip rate
  double Gamma = 0.0;  // collective emission rate
  int N = 10;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

enum class SweepParam { Jx, Jy, Jz, gamma, Gamma };

std::string_view to_string(SweepParam p) noexcept;
/// Throws ConfigError for unknown names.
SweepParam sweep_param_from_string(std::string_view name);

struct SweepSpec {
  SweepParam param = SweepParam::Jy;
  double lo = 0.75;
  double hi = 1.75;
  int points = 100;
  std::vector<int> Ns;
  std::string output;
  std::vector<std::string> observables;

  friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

/// Names accepted in SweepSpec::observables.
const std::vector<std::string>& known_observables();

/// Violated invariants as human-readable messages; empty when valid.
std::vector<std::string> validate(const ModelParams& params);
std::vector<std::string> validate(const SweepSpec& spec);

/// Throws ConfigError listing every violation.
void require_valid(const ModelParams& params);

/// Rate used to make couplings dimensionless: gamma + Gamma when Gamma > 0,
/// gamma otherwise.
double rate_scale(const ModelParams& params) noexcept;

/// Value of the swept parameter / copy with it replaced.
double get(const ModelParams& params, SweepParam p) noexcept;
ModelParams with(ModelParams params, SweepParam p, double value) noexcept;

/// Grid value i of the sweep (uniform, endpoints included).
double sweep_value(const SweepSpec& spec, int i) noexcept;

struct Config {
  ModelParams params;
  SweepSpec sweep;
};

/// Parses the JSON config document
///   {"Jx":..,"Jy":..,"Jz":..,"gamma":..,"Gamma":..,"N":..,
///    "sweep":{"param":"Jy","lo":..,"hi":..,"points":..,"Ns":[..],
///             "observables":[..],"output":".."}}
/// The six model keys are mandatory; "sweep" and each of its keys are
/// optional. Unknown keys are rejected. Throws ConfigError naming the key.
Config parse_config(std::string_view text);

/// Inverse of parse_config (all keys written).
std::string serialize_config(const Config& config);

}  // namespace pixyz

#pragma once

#include <cstdint>
#include <string>

#include "activeuwb/bench.hpp"
#include "activeuwb/train.hpp"

namespace activeuwb {

/// Everything the CLI reads from a config file. Missing keys keep their
/// defaults; unknown keys are rejected so that typos do not pass silently.
struct AppConfig {
  std::uint64_t seed = 1;
  SimConfig sim{};
  double alpha = 10.0;
  AnnulusDomain domain{};
  double eq_side = 0.35;  // m
  TrainConfig train{};
  BenchConfig bench{};
  PathParams paths{};
  GeometricGains heuristic_gains{};
  unsigned workers = 1;

  BenchContext bench_context() const;
  void validate() const;
};

AppConfig load_config(const std::string& path);
AppConfig parse_config(const std::string& json_text);
/// Pretty-printed JSON holding every field.
std::string dump_config(const AppConfig& cfg);

}  // namespace activeuwb

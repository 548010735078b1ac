#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "testkg/en50549.hpp"
#include "testkg/errors.hpp"
#include "testkg/rdf.hpp"
#include "testkg/trace.hpp"
#include "testkg/vocab.hpp"

// Synthetic measurement traces for the conformance sequences. Real bench
// waveforms are not redistributable at desk scale, so fixtures are generated:
// piecewise-constant per-unit levels scaled to the nominal, optional additive
// noise, optional collapse to zero after a disconnection instant.
//
// Noise is drawn from a seeded mt19937_64 directly (raw bits mapped to
// [0,1)), not from <random> distributions, so the same seed yields the same
// bytes on every platform. Uniform noise on [-a, a] with a = stddev * sqrt(3)
// has the requested standard deviation.

namespace testkg::synth {

/// Phenomenon IRI used for breaker-state channels in fixtures. Deliberately
/// minted under the data namespace: breaker state is a documentation gap in
/// the source setups, not part of the published vocabulary.
inline std::string breaker_phenomenon() {
  return std::string(rdf::ns::data_base) + "phenomenon/BreakerState";
}

namespace detail {

inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Generates the target channel for a sequence spec: AC_VRMS in volts for
/// the voltage range test, AC_P in watts for power reduction. Samples sit at
/// k / sampleRate for k in [0, totalDwell * sampleRate). From disconnectAt
/// onward the signal is exactly zero.
inline trace::MeasurementTrace generate_synthetic_trace(
    const en50549::TestSequenceSpec& spec, double sample_rate, double noise,
    std::optional<double> disconnect_at = std::nullopt, std::uint64_t seed = 42) {
  en50549::validate_spec(spec);
  if (!std::isfinite(sample_rate) || sample_rate <= 0)
    throw Error(Errc::InvalidSpec, "sample rate must be positive");
  if (!std::isfinite(noise) || noise < 0)
    throw Error(Errc::InvalidSpec, "noise must be non-negative");
  bool nor = spec.kind == en50549::SequenceKind::NormalOperatingRange;
  double nominal = nor ? spec.un : spec.pn;
  if (!std::isfinite(nominal) || nominal <= 0)
    throw Error(Errc::InvalidSpec, nor ? "spec has no nominal voltage"
                                       : "spec has no nominal power");

  std::vector<double> cumulative;
  double total = 0;
  for (const auto& level : spec.levels) {
    total += level.dwell;
    cumulative.push_back(total);
  }
  auto samples = static_cast<std::size_t>(std::llround(total * sample_rate));

  trace::MeasurementTrace tr;
  if (nor)
    tr.channels = {{"AC_VRMS", vocab::annot("Voltage"), "V"}};
  else
    tr.channels = {{"AC_P", vocab::annot("ActivePower"), "W"}};

  std::mt19937_64 rng(seed);
  double amplitude = noise * std::sqrt(3.0);
  for (std::size_t k = 0; k < samples; ++k) {
    double t = static_cast<double>(k) / sample_rate;
    double e = noise > 0 ? (2.0 * detail::uniform01(rng) - 1.0) * amplitude : 0.0;
    double value = 0;
    if (!disconnect_at || t < *disconnect_at) {
      std::size_t level = 0;
      while (level + 1 < cumulative.size() && t >= cumulative[level] - 1e-9) ++level;
      value = (spec.levels[level].setpoint + e) * nominal;
    }
    tr.times.push_back(t);
    tr.rows.push_back({value});
  }
  return tr;
}

/// Appends a breaker-state channel: 1 while connected, 0 from disconnectAt
/// onward. Gives fixtures an explicit connectivity signal.
inline trace::MeasurementTrace with_breaker_channel(
    trace::MeasurementTrace tr, std::optional<double> disconnect_at = std::nullopt,
    const std::string& name = "Breaker") {
  if (tr.channel_index(name))
    throw Error(Errc::InvalidConfiguration, "trace already has a '" + name + "' channel");
  tr.channels.push_back({name, breaker_phenomenon(), "state"});
  for (std::size_t k = 0; k < tr.rows.size(); ++k)
    tr.rows[k].push_back(disconnect_at && tr.times[k] >= *disconnect_at ? 0.0 : 1.0);
  return tr;
}

}  // namespace testkg::synth

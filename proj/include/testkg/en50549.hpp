#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "testkg/errors.hpp"
#include "testkg/numfmt.hpp"
#include "testkg/rdf.hpp"
#include "testkg/trace.hpp"
#include "testkg/vocab.hpp"

// Conformance sequence evaluation for two EN 50549-10 style tests:
//
//   NormalOperatingRange  voltage held at 0.85 / 1.00 / 1.10 Un, 600 s each;
//                         the unit must stay connected throughout.
//   ActivePowerReduction  power setpoints 0.9 down to 0.1 pu in 0.1 steps,
//                         then 0.3 / 0.6 / 1.0 pu, 120 s each; per-level
//                         1-minute averages must track the setpoints.
//
// The evaluator reconstructs the applied setpoint sequence from the measured
// trace (step detection on the per-unit signal), matches segments to the
// specified levels in order, and scores each level by the windowed mean at
// the segment end. Connectivity comes from an explicit breaker channel when
// one exists; otherwise it is inferred from active power staying above 2% Pn
// and the verdict notes that the signal was inferred.

namespace testkg::en50549 {

enum class SequenceKind { NormalOperatingRange, ActivePowerReduction };

inline const char* kind_name(SequenceKind k) {
  return k == SequenceKind::NormalOperatingRange ? "NormalOperatingRange"
                                                 : "ActivePowerReduction";
}

inline std::optional<SequenceKind> kind_from_text(std::string_view text) {
  std::string lower;
  for (char c : text) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "nor" || lower == "normaloperatingrange")
    return SequenceKind::NormalOperatingRange;
  if (lower == "apr" || lower == "activepowerreduction")
    return SequenceKind::ActivePowerReduction;
  return std::nullopt;
}

struct LevelSpec {
  double setpoint = 0;  // per-unit fraction of the nominal
  double dwell = 0;     // seconds

  friend bool operator==(const LevelSpec&, const LevelSpec&) = default;
};

struct TestSequenceSpec {
  SequenceKind kind = SequenceKind::NormalOperatingRange;
  double un = 0;  // nominal voltage, volts (target nominal for NOR)
  double pn = 0;  // nominal power, watts (target nominal for APR)
  std::vector<LevelSpec> levels;
  double averaging_window = 60;    // seconds, anchored at each segment end
  double instantaneous_window = 1; // seconds, sensor-side aggregation metadata
  // Acceptance band around each setpoint, per unit. Placeholder default;
  // the applicable standard edition defines the real value.
  double tolerance = 0.05;

  friend bool operator==(const TestSequenceSpec&, const TestSequenceSpec&) = default;
};

inline void validate_spec(const TestSequenceSpec& spec) {
  if (spec.levels.empty()) throw Error(Errc::InvalidSpec, "spec has no levels");
  double min_dwell = spec.levels.front().dwell;
  for (const auto& level : spec.levels) {
    if (!std::isfinite(level.setpoint) || level.setpoint <= 0 || level.setpoint > 1.5)
      throw Error(Errc::InvalidSpec, "setpoint " + numfmt::format_double(level.setpoint) +
                                         " outside (0, 1.5]");
    if (!std::isfinite(level.dwell) || level.dwell <= 0)
      throw Error(Errc::InvalidSpec, "dwell must be positive");
    min_dwell = std::min(min_dwell, level.dwell);
  }
  if (!std::isfinite(spec.averaging_window) || spec.averaging_window <= 0 ||
      spec.averaging_window > min_dwell)
    throw Error(Errc::InvalidSpec, "averaging window must be positive and at most the "
                                   "shortest dwell");
  if (!std::isfinite(spec.instantaneous_window) || spec.instantaneous_window <= 0)
    throw Error(Errc::InvalidSpec, "instantaneous window must be positive");
  if (!std::isfinite(spec.tolerance) || spec.tolerance <= 0)
    throw Error(Errc::InvalidSpec, "tolerance must be positive");
}

/// Voltage operating range sequence: 0.85 / 1.00 / 1.10 Un, 600 s dwells.
inline TestSequenceSpec nor_spec(double un) {
  if (!std::isfinite(un) || un <= 0)
    throw Error(Errc::InvalidNominal, "nominal voltage must be positive");
  TestSequenceSpec spec;
  spec.kind = SequenceKind::NormalOperatingRange;
  spec.un = un;
  spec.levels = {{0.85, 600}, {1.00, 600}, {1.10, 600}};
  return spec;
}

/// Active power reduction sequence: 0.9 down to 0.1 pu in 0.1 steps, then
/// back up through 0.3 and 0.6 to 1.0 pu, 120 s dwells.
inline TestSequenceSpec apr_spec(double pn) {
  if (!std::isfinite(pn) || pn <= 0)
    throw Error(Errc::InvalidNominal, "nominal power must be positive");
  TestSequenceSpec spec;
  spec.kind = SequenceKind::ActivePowerReduction;
  spec.pn = pn;
  for (double sp : {0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1, 0.3, 0.6, 1.0})
    spec.levels.push_back({sp, 120});
  return spec;
}

// ---------------------------------------------------------------------------
// Step detection
// ---------------------------------------------------------------------------

struct StepSegment {
  double level = 0;       // median of the segment's samples
  double start_time = 0;  // seconds
  double duration = 0;    // seconds, end minus start sample time
  std::size_t first_index = 0;
  std::size_t last_index = 0;

  friend bool operator==(const StepSegment&, const StepSegment&) = default;
};

namespace detail {

inline double multiset_median(const std::multiset<double>& ms) {
  std::size_t n = ms.size();
  auto lo = std::next(ms.begin(), (n - 1) / 2);
  auto hi = std::next(ms.begin(), n / 2);
  return (*lo + *hi) / 2.0;
}

}  // namespace detail

/// Greedy segmentation: each segment is the longest prefix run whose samples
/// all stay within +/- deadband of the running median. Runs spanning less
/// than minDwell are treated as transitions and assigned to no segment.
inline std::vector<StepSegment> detect_steps(const std::vector<double>& times,
                                             const std::vector<double>& values,
                                             double min_dwell, double deadband) {
  if (times.size() != values.size())
    throw Error(Errc::ArityMismatch, "times and values differ in length");
  if (times.size() < 2) throw Error(Errc::EmptySeries, "need at least 2 samples");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1]))
      throw Error(Errc::NonMonotoneTimestamps, "series must be strictly time-ordered");
  if (!(min_dwell >= 0) || !(deadband >= 0))
    throw Error(Errc::InvalidSpec, "minDwell and deadband must be non-negative");

  std::vector<StepSegment> segments;
  std::size_t n = times.size();
  std::size_t i = 0;
  while (i < n) {
    std::multiset<double> window{values[i]};
    std::size_t j = i + 1;
    while (j < n) {
      window.insert(values[j]);
      double median = detail::multiset_median(window);
      if (*window.rbegin() - median > deadband || median - *window.begin() > deadband) {
        window.erase(window.find(values[j]));
        break;
      }
      ++j;
    }
    double duration = times[j - 1] - times[i];
    if (j - i >= 2 && duration > 0 && duration >= min_dwell)
      segments.push_back(StepSegment{detail::multiset_median(window), times[i], duration,
                                     i, j - 1});
    i = j;
  }
  return segments;
}

// ---------------------------------------------------------------------------
// Windowed mean
// ---------------------------------------------------------------------------

/// Arithmetic mean of the samples falling in [anchor - window, anchor].
/// The series passed in is expected to be one segment's samples; a window
/// reaching past its first sample is an error.
inline double window_average(const std::vector<double>& times,
                             const std::vector<double>& values, double window,
                             double anchor) {
  if (times.size() != values.size())
    throw Error(Errc::ArityMismatch, "times and values differ in length");
  if (times.empty()) throw Error(Errc::EmptySeries, "empty series");
  if (!std::isfinite(window) || window <= 0)
    throw Error(Errc::InvalidSpec, "window must be positive");
  double eps = 1e-9 * std::max(1.0, std::fabs(anchor));
  if (anchor - window < times.front() - eps)
    throw Error(Errc::WindowTooLong, "window of " + numfmt::format_double(window) +
                                         " s reaches before the segment start");
  double sum = 0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] >= anchor - window - eps && times[k] <= anchor + eps) {
      sum += values[k];
      ++count;
    }
  }
  if (count == 0) throw Error(Errc::EmptySeries, "no samples inside the window");
  return sum / static_cast<double>(count);
}

// ---------------------------------------------------------------------------
// Verdicts
// ---------------------------------------------------------------------------

enum class Outcome { Pass, Fail, Inconclusive };

inline const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Pass: return "PASS";
    case Outcome::Fail: return "FAIL";
    default: return "INCONCLUSIVE";
  }
}

struct LevelResult {
  double expected = 0;
  double observed_mean = 0;
  bool within_tolerance = false;
  bool connected = false;

  friend bool operator==(const LevelResult&, const LevelResult&) = default;
};

struct Verdict {
  Outcome outcome = Outcome::Inconclusive;
  std::vector<LevelResult> per_level;
  std::vector<std::string> reasons;

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

struct EvaluateOptions {
  // Channel whose value above connected_threshold means "breaker closed".
  // Empty: connectivity is inferred from active power staying above
  // disconnect_power_fraction * Pn, or assumed when Pn is unknown.
  std::string connectivity_channel;
  double connected_threshold = 0.5;
  double disconnect_power_fraction = 0.02;
  double deadband = 0.02;                // pu, for step detection
  std::optional<double> min_dwell;       // default: half the smallest dwell
};

/// Evaluates one measured trace against a sequence spec. The target channel
/// is found by phenomenon (voltage for NOR, active power for APR) and
/// normalized by the matching nominal, so absolute-unit and per-unit traces
/// yield identical verdicts. Any disconnected sample fails the sequence;
/// otherwise a segment count mismatch is INCONCLUSIVE, and a matched
/// sequence passes iff every level's windowed mean is within tolerance and
/// its segment stayed connected.
inline Verdict evaluate(const trace::MeasurementTrace& tr, const TestSequenceSpec& spec,
                        const EvaluateOptions& options = {}) {
  validate_spec(spec);
  bool nor = spec.kind == SequenceKind::NormalOperatingRange;
  double nominal = nor ? spec.un : spec.pn;
  if (!std::isfinite(nominal) || nominal <= 0)
    throw Error(Errc::InvalidNominal, nor ? "spec has no nominal voltage"
                                          : "spec has no nominal power");
  std::string target_ph = vocab::annot(nor ? "Voltage" : "ActivePower");
  auto target = tr.channel_by_phenomenon(target_ph);
  if (!target)
    throw Error(Errc::ChannelMissing, "trace has no channel recording <" + target_ph + ">");

  std::vector<double> normalized = tr.column(*target);
  for (double& v : normalized) v /= nominal;

  Verdict verdict;

  // Connectivity, one flag per sample.
  std::size_t n = tr.times.size();
  std::vector<char> connected_at(n, 1);
  if (!options.connectivity_channel.empty()) {
    auto breaker = tr.channel_index(options.connectivity_channel);
    if (!breaker)
      throw Error(Errc::ChannelMissing,
                  "no connectivity channel '" + options.connectivity_channel + "'");
    std::vector<double> state = tr.column(*breaker);
    for (std::size_t k = 0; k < n; ++k)
      connected_at[k] = state[k] > options.connected_threshold;
  } else {
    auto power = tr.channel_by_phenomenon(vocab::annot("ActivePower"));
    if (power && spec.pn > 0) {
      double threshold = options.disconnect_power_fraction * spec.pn;
      std::vector<double> p = tr.column(*power);
      for (std::size_t k = 0; k < n; ++k) connected_at[k] = p[k] > threshold;
      verdict.reasons.push_back("connectivity inferred from active power staying above " +
                                numfmt::format_double(options.disconnect_power_fraction) +
                                " pu (no breaker channel)");
    } else {
      verdict.reasons.push_back(
          "connectivity assumed: no breaker channel and no nominal power to infer from");
    }
  }

  double min_dwell = options.min_dwell.value_or(
      std::min_element(spec.levels.begin(), spec.levels.end(),
                       [](const LevelSpec& a, const LevelSpec& b) {
                         return a.dwell < b.dwell;
                       })
          ->dwell /
      2.0);
  std::vector<StepSegment> segments =
      detect_steps(tr.times, normalized, min_dwell, options.deadband);

  for (std::size_t i = 0; i < spec.levels.size(); ++i) {
    LevelResult result;
    result.expected = spec.levels[i].setpoint;
    if (i < segments.size()) {
      const StepSegment& seg = segments[i];
      std::vector<double> seg_times(tr.times.begin() + seg.first_index,
                                    tr.times.begin() + seg.last_index + 1);
      std::vector<double> seg_values(normalized.begin() + seg.first_index,
                                     normalized.begin() + seg.last_index + 1);
      double window = spec.averaging_window;
      if (window > seg.duration) {
        window = seg.duration;
        verdict.reasons.push_back("level " + std::to_string(i + 1) +
                                  ": averaging window clamped to segment duration");
      }
      result.observed_mean =
          window_average(seg_times, seg_values, window, seg_times.back());
      result.within_tolerance =
          std::fabs(result.observed_mean - result.expected) <= spec.tolerance + 1e-12;
      result.connected = true;
      for (std::size_t k = seg.first_index; k <= seg.last_index; ++k)
        if (!connected_at[k]) result.connected = false;
    }
    verdict.per_level.push_back(result);
  }

  std::optional<double> first_disconnect;
  for (std::size_t k = 0; k < n; ++k)
    if (!connected_at[k]) {
      first_disconnect = tr.times[k];
      break;
    }

  if (first_disconnect) {
    verdict.outcome = Outcome::Fail;
    verdict.reasons.push_back("disconnection detected at t=" +
                              numfmt::format_double(*first_disconnect) + " s");
  } else if (segments.size() != spec.levels.size()) {
    verdict.outcome = Outcome::Inconclusive;
    verdict.reasons.push_back("expected " + std::to_string(spec.levels.size()) +
                              " step segments, detected " +
                              std::to_string(segments.size()));
  } else {
    verdict.outcome = Outcome::Pass;
    for (std::size_t i = 0; i < verdict.per_level.size(); ++i) {
      const LevelResult& r = verdict.per_level[i];
      if (!r.within_tolerance) {
        verdict.outcome = Outcome::Fail;
        verdict.reasons.push_back(
            "level " + std::to_string(i + 1) + " (" + numfmt::format_double(r.expected) +
            " pu): mean " + numfmt::format_double(r.observed_mean) +
            " outside tolerance " + numfmt::format_double(spec.tolerance));
      }
      if (!r.connected) {
        verdict.outcome = Outcome::Fail;
        verdict.reasons.push_back("level " + std::to_string(i + 1) +
                                  ": disconnected during segment");
      }
    }
  }
  return verdict;
}

/// RDF export: a Verdict node hanging off the given test-case IRI.
inline rdf::Graph verdict_rdf(const Verdict& verdict, const std::string& test_iri) {
  if (!rdf::detail::valid_iri(test_iri))
    throw Error(Errc::InvalidIri, "test IRI must be absolute");
  rdf::Graph g;
  g.add_prefix("htd", rdf::ns::htd);
  g.add_prefix("rdf", rdf::ns::rdf);
  g.add_prefix("rdfs", rdf::ns::rdfs);
  g.add_prefix("xsd", rdf::ns::xsd);
  auto test = rdf::make_iri(test_iri);
  auto node = rdf::make_iri(test_iri + "/verdict");
  g.insert(test, rdf::make_iri(vocab::htd("hasVerdict")), node);
  g.insert(node, rdf::make_iri(rdf::rdf_type), rdf::make_iri(vocab::htd("Verdict")));
  g.insert(node, rdf::make_iri(vocab::htd("verdictOutcome")),
           rdf::make_literal(outcome_name(verdict.outcome)));
  for (const auto& reason : verdict.reasons)
    g.insert(node, rdf::make_iri(vocab::htd("verdictReason")), rdf::make_literal(reason));
  return g;
}

/// Per-unit view of the target channel, for plot-data export.
inline trace::MeasurementTrace normalized_trace(const trace::MeasurementTrace& tr,
                                                const TestSequenceSpec& spec) {
  validate_spec(spec);
  bool nor = spec.kind == SequenceKind::NormalOperatingRange;
  double nominal = nor ? spec.un : spec.pn;
  if (!std::isfinite(nominal) || nominal <= 0)
    throw Error(Errc::InvalidNominal, "spec has no nominal");
  std::string target_ph = vocab::annot(nor ? "Voltage" : "ActivePower");
  auto target = tr.channel_by_phenomenon(target_ph);
  if (!target)
    throw Error(Errc::ChannelMissing, "trace has no channel recording <" + target_ph + ">");
  trace::MeasurementTrace out;
  out.channels = {{"level_pu", target_ph, "pu"}};
  out.times = tr.times;
  out.start_time = tr.start_time;
  for (std::size_t k = 0; k < tr.rows.size(); ++k)
    out.rows.push_back({tr.rows[k][*target] / nominal});
  return out;
}

}  // namespace testkg::en50549

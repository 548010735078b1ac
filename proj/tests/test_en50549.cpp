#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "testkg/en50549.hpp"
#include "testkg/synth.hpp"
#include "testkg/trace.hpp"

using namespace testkg;
using en50549::Outcome;
using en50549::StepSegment;
using en50549::TestSequenceSpec;

namespace {

testkg::Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const testkg::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected a testkg::Error";
  return testkg::Errc::IoError;
}

bool has_reason(const en50549::Verdict& v, std::string_view needle) {
  for (const auto& r : v.reasons)
    if (r.find(needle) != std::string::npos) return true;
  return false;
}

trace::MeasurementTrace voltage_trace(const std::vector<double>& times,
                                      const std::vector<double>& volts) {
  trace::MeasurementTrace tr;
  tr.channels = {{"AC_VRMS", vocab::annot("Voltage"), "V"}};
  tr.times = times;
  for (double v : volts) tr.rows.push_back({v});
  return tr;
}

}  // namespace

TEST(SequenceSpec, BuiltinSequences) {
  auto nor = en50549::nor_spec(230);
  EXPECT_EQ(nor.kind, en50549::SequenceKind::NormalOperatingRange);
  EXPECT_EQ(nor.un, 230.0);
  ASSERT_EQ(nor.levels.size(), 3u);
  EXPECT_EQ(nor.levels[0], (en50549::LevelSpec{0.85, 600}));
  EXPECT_EQ(nor.levels[1], (en50549::LevelSpec{1.00, 600}));
  EXPECT_EQ(nor.levels[2], (en50549::LevelSpec{1.10, 600}));
  EXPECT_NO_THROW(en50549::validate_spec(nor));

  auto apr = en50549::apr_spec(10000);
  ASSERT_EQ(apr.levels.size(), 12u);
  std::vector<double> setpoints;
  for (const auto& l : apr.levels) {
    setpoints.push_back(l.setpoint);
    EXPECT_EQ(l.dwell, 120.0);
  }
  EXPECT_EQ(setpoints,
            (std::vector<double>{0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1, 0.3, 0.6, 1.0}));
  EXPECT_NO_THROW(en50549::validate_spec(apr));

  EXPECT_EQ(code_of([] { en50549::nor_spec(0); }), Errc::InvalidNominal);
  EXPECT_EQ(code_of([] { en50549::apr_spec(-5); }), Errc::InvalidNominal);
}

TEST(SequenceSpec, ValidationRejectsBadFields) {
  auto base = en50549::nor_spec(230);

  auto broken = base;
  broken.levels.clear();
  EXPECT_EQ(code_of([&] { en50549::validate_spec(broken); }), Errc::InvalidSpec);

  broken = base;
  broken.levels[1].setpoint = 1.6;
  EXPECT_EQ(code_of([&] { en50549::validate_spec(broken); }), Errc::InvalidSpec);

  broken = base;
  broken.levels[1].setpoint = 0;
  EXPECT_EQ(code_of([&] { en50549::validate_spec(broken); }), Errc::InvalidSpec);

  broken = base;
  broken.levels[2].dwell = 0;
  EXPECT_EQ(code_of([&] { en50549::validate_spec(broken); }), Errc::InvalidSpec);

  broken = base;
  broken.averaging_window = 601;  // longer than the shortest dwell
  EXPECT_EQ(code_of([&] { en50549::validate_spec(broken); }), Errc::InvalidSpec);

  broken = base;
  broken.instantaneous_window = 0;
  EXPECT_EQ(code_of([&] { en50549::validate_spec(broken); }), Errc::InvalidSpec);

  broken = base;
  broken.tolerance = 0;
  EXPECT_EQ(code_of([&] { en50549::validate_spec(broken); }), Errc::InvalidSpec);
}

TEST(SequenceSpec, KindNames) {
  EXPECT_STREQ(en50549::kind_name(en50549::SequenceKind::NormalOperatingRange),
               "NormalOperatingRange");
  EXPECT_EQ(en50549::kind_from_text("nor"), en50549::SequenceKind::NormalOperatingRange);
  EXPECT_EQ(en50549::kind_from_text("ActivePowerReduction"),
            en50549::SequenceKind::ActivePowerReduction);
  EXPECT_EQ(en50549::kind_from_text("APR"), en50549::SequenceKind::ActivePowerReduction);
  EXPECT_FALSE(en50549::kind_from_text("frequency").has_value());
}

// ---------------------------------------------------------------------------
// Step detection
// ---------------------------------------------------------------------------

TEST(DetectSteps, CleanTwoLevelSignal) {
  std::vector<double> times{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<double> values{1, 1, 1, 1, 1, 2, 2, 2, 2, 2};
  auto segments = en50549::detect_steps(times, values, 0, 0.1);
  ASSERT_EQ(segments.size(), 2u);
  EXPECT_EQ(segments[0], (StepSegment{1.0, 0, 4, 0, 4}));
  EXPECT_EQ(segments[1], (StepSegment{2.0, 5, 4, 5, 9}));
}

TEST(DetectSteps, MinDwellFiltersShortRuns) {
  std::vector<double> times{0, 1, 2, 3, 4, 5};
  std::vector<double> values{1, 1, 1, 5, 5, 5};
  EXPECT_EQ(en50549::detect_steps(times, values, 2.0, 0.1).size(), 2u);
  EXPECT_EQ(en50549::detect_steps(times, values, 2.5, 0.1).size(), 0u);
}

TEST(DetectSteps, SingleSampleRunsAreTransitions) {
  std::vector<double> times{0, 1, 2, 3};
  std::vector<double> values{1, 5, 1, 5};
  EXPECT_TRUE(en50549::detect_steps(times, values, 0, 0.1).empty());
}

TEST(DetectSteps, Errors) {
  std::vector<double> t2{0, 1}, v2{1, 1};
  EXPECT_EQ(code_of([&] { en50549::detect_steps({0, 1, 2}, v2, 0, 0.1); }),
            Errc::ArityMismatch);
  EXPECT_EQ(code_of([&] { en50549::detect_steps({0}, {1}, 0, 0.1); }), Errc::EmptySeries);
  EXPECT_EQ(code_of([&] { en50549::detect_steps({0, 0}, v2, 0, 0.1); }),
            Errc::NonMonotoneTimestamps);
  EXPECT_EQ(code_of([&] { en50549::detect_steps(t2, v2, -1, 0.1); }), Errc::InvalidSpec);
  EXPECT_EQ(code_of([&] { en50549::detect_steps(t2, v2, 0, -0.1); }), Errc::InvalidSpec);
}

// Change-point recovery on noisy synthetic staircases: as long as the noise
// spread stays under the deadband and the level jumps exceed it, every
// plateau must come back with its level within the noise amplitude.
TEST(DetectSteps, RecoversNoisyStaircases) {
  std::mt19937_64 rng(90210);
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  const double noise = 0.02;        // uniform amplitude
  const double deadband = 0.05;     // > 2 * noise, so plateaus never split
  for (int round = 0; round < 50; ++round) {
    std::size_t k = 2 + static_cast<std::size_t>(rng() % 5);
    std::vector<double> levels;
    for (std::size_t i = 0; i < k; ++i) {
      double prev = levels.empty() ? 0.0 : levels.back();
      double next = prev + 0.3 + 0.4 * uniform();
      if (rng() % 2 && prev > 0.6) next = prev - 0.3 - 0.2 * uniform();
      levels.push_back(next);
    }
    std::vector<double> times, values;
    double t = 0;
    for (double level : levels) {
      std::size_t dwell = 20 + rng() % 30;
      for (std::size_t s = 0; s < dwell; ++s) {
        times.push_back(t);
        values.push_back(level + (2 * uniform() - 1) * noise);
        t += 1.0;
      }
    }
    auto segments = en50549::detect_steps(times, values, 10.0, deadband);
    ASSERT_EQ(segments.size(), levels.size()) << "round " << round;
    for (std::size_t i = 0; i < levels.size(); ++i)
      EXPECT_NEAR(segments[i].level, levels[i], noise + 1e-12) << "round " << round;
  }
}

// ---------------------------------------------------------------------------
// Windowed mean
// ---------------------------------------------------------------------------

TEST(WindowAverage, ClosedForms) {
  std::vector<double> times, constant, ramp;
  for (int k = 0; k <= 10; ++k) {
    times.push_back(k);
    constant.push_back(7.5);
    ramp.push_back(k);
  }
  EXPECT_DOUBLE_EQ(en50549::window_average(times, constant, 5, 10), 7.5);
  // Ramp: mean over [6, 10] is the midpoint 8; over the whole series, 5.
  EXPECT_DOUBLE_EQ(en50549::window_average(times, ramp, 4, 10), 8.0);
  EXPECT_DOUBLE_EQ(en50549::window_average(times, ramp, 10, 10), 5.0);
  // Anchor between samples: [5.5, 9.5] covers 6..9, midpoint 7.5.
  EXPECT_DOUBLE_EQ(en50549::window_average(times, ramp, 4, 9.5), 7.5);
}

TEST(WindowAverage, BoundaryInclusionUsesEps) {
  std::vector<double> times{0, 1, 2};
  std::vector<double> values{0, 1, 2};
  // Window reaching exactly the first sample includes it.
  EXPECT_DOUBLE_EQ(en50549::window_average(times, values, 2, 2), 1.0);
}

TEST(WindowAverage, Errors) {
  std::vector<double> times{0, 10};
  std::vector<double> values{1, 2};
  EXPECT_EQ(code_of([&] { en50549::window_average(times, {1}, 1, 10); }),
            Errc::ArityMismatch);
  EXPECT_EQ(code_of([&] { en50549::window_average({}, {}, 1, 10); }), Errc::EmptySeries);
  EXPECT_EQ(code_of([&] { en50549::window_average(times, values, 0, 10); }),
            Errc::InvalidSpec);
  EXPECT_EQ(code_of([&] { en50549::window_average(times, values, 10.5, 10); }),
            Errc::WindowTooLong);
  // Window fits the span but covers no sample.
  EXPECT_EQ(code_of([&] { en50549::window_average(times, values, 1, 9); }),
            Errc::EmptySeries);
}

// ---------------------------------------------------------------------------
// Sequence evaluation
// ---------------------------------------------------------------------------

TEST(Evaluate, VoltageRangePasses) {
  auto spec = en50549::nor_spec(230);
  auto tr = synth::generate_synthetic_trace(spec, 1.0, 0.002, std::nullopt, 42);
  auto verdict = en50549::evaluate(tr, spec);
  EXPECT_EQ(verdict.outcome, Outcome::Pass);
  ASSERT_EQ(verdict.per_level.size(), 3u);
  const double expected[] = {0.85, 1.0, 1.1};
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(verdict.per_level[i].observed_mean, expected[i], 0.01);
    EXPECT_TRUE(verdict.per_level[i].within_tolerance);
    EXPECT_TRUE(verdict.per_level[i].connected);
  }
  // No breaker channel and no nominal power: connectivity is assumed and the
  // verdict says so.
  EXPECT_TRUE(has_reason(verdict, "connectivity assumed"));
}

TEST(Evaluate, PowerReductionPasses) {
  auto spec = en50549::apr_spec(10000);
  auto tr = synth::generate_synthetic_trace(spec, 1.0, 0.002, std::nullopt, 43);
  auto verdict = en50549::evaluate(tr, spec);
  EXPECT_EQ(verdict.outcome, Outcome::Pass);
  ASSERT_EQ(verdict.per_level.size(), 12u);
  for (std::size_t i = 0; i < 12; ++i) {
    EXPECT_NEAR(verdict.per_level[i].observed_mean, spec.levels[i].setpoint, 0.01)
        << "level " << i + 1;
    EXPECT_TRUE(verdict.per_level[i].within_tolerance);
  }
  EXPECT_TRUE(has_reason(verdict, "connectivity inferred from active power"));
}

TEST(Evaluate, DisconnectionFailsWithInferredConnectivity) {
  auto spec = en50549::apr_spec(10000);
  auto tr = synth::generate_synthetic_trace(spec, 1.0, 0.002, 700.0, 43);
  auto verdict = en50549::evaluate(tr, spec);
  EXPECT_EQ(verdict.outcome, Outcome::Fail);
  EXPECT_TRUE(has_reason(verdict, "disconnection detected at t=700 s"));
  // The disconnection verdict takes precedence over the segment-count
  // mismatch the collapsed signal also causes.
  EXPECT_FALSE(has_reason(verdict, "step segments"));
}

TEST(Evaluate, BreakerChannelOverridesInference) {
  auto spec = en50549::apr_spec(10000);
  auto tr = synth::generate_synthetic_trace(spec, 1.0, 0.002, std::nullopt, 43);
  // Breaker says the unit dropped out at 600 s even though power stayed up.
  auto with_breaker = synth::with_breaker_channel(tr, 600.0);

  en50549::EvaluateOptions opts;
  opts.connectivity_channel = "Breaker";
  auto verdict = en50549::evaluate(with_breaker, spec, opts);
  EXPECT_EQ(verdict.outcome, Outcome::Fail);
  EXPECT_TRUE(has_reason(verdict, "disconnection detected at t=600 s"));
  EXPECT_FALSE(has_reason(verdict, "inferred"));

  // Without naming the channel, connectivity falls back to power inference
  // and the sequence passes.
  auto inferred = en50549::evaluate(with_breaker, spec);
  EXPECT_EQ(inferred.outcome, Outcome::Pass);

  opts.connectivity_channel = "NoSuchChannel";
  EXPECT_EQ(code_of([&] { en50549::evaluate(with_breaker, spec, opts); }),
            Errc::ChannelMissing);
}

TEST(Evaluate, ClosedBreakerPassesCleanly) {
  auto spec = en50549::nor_spec(230);
  auto tr = synth::with_breaker_channel(
      synth::generate_synthetic_trace(spec, 1.0, 0.002, std::nullopt, 42));
  en50549::EvaluateOptions opts;
  opts.connectivity_channel = "Breaker";
  auto verdict = en50549::evaluate(tr, spec, opts);
  EXPECT_EQ(verdict.outcome, Outcome::Pass);
  EXPECT_TRUE(verdict.reasons.empty());
}

TEST(Evaluate, SegmentCountMismatchIsInconclusive) {
  auto two_levels = en50549::nor_spec(230);
  two_levels.levels.pop_back();
  auto tr = synth::generate_synthetic_trace(two_levels, 1.0, 0.002, std::nullopt, 42);
  auto verdict = en50549::evaluate(tr, en50549::nor_spec(230));
  EXPECT_EQ(verdict.outcome, Outcome::Inconclusive);
  EXPECT_TRUE(has_reason(verdict, "expected 3 step segments, detected 2"));
  ASSERT_EQ(verdict.per_level.size(), 3u);
  EXPECT_FALSE(verdict.per_level[2].within_tolerance);
  EXPECT_FALSE(verdict.per_level[2].connected);
}

TEST(Evaluate, ToleranceDecidesBorderlineLevels) {
  auto shifted = en50549::nor_spec(230);
  shifted.levels[1].setpoint = 1.03;  // trace sits 0.03 pu above the spec level
  auto tr = synth::generate_synthetic_trace(shifted, 1.0, 0.002, std::nullopt, 42);

  auto spec = en50549::nor_spec(230);
  EXPECT_EQ(en50549::evaluate(tr, spec).outcome, Outcome::Pass);

  spec.tolerance = 0.02;
  auto verdict = en50549::evaluate(tr, spec);
  EXPECT_EQ(verdict.outcome, Outcome::Fail);
  EXPECT_FALSE(verdict.per_level[1].within_tolerance);
  EXPECT_TRUE(has_reason(verdict, "level 2"));
  EXPECT_TRUE(has_reason(verdict, "outside tolerance"));
}

TEST(Evaluate, AbsoluteAndPerUnitTracesAgree) {
  auto spec = en50549::nor_spec(230);
  auto volts = synth::generate_synthetic_trace(spec, 1.0, 0.002, std::nullopt, 42);
  auto pu = volts;
  for (auto& row : pu.rows) row[0] /= 230.0;

  auto from_volts = en50549::evaluate(volts, spec);
  auto from_pu = en50549::evaluate(pu, en50549::nor_spec(1.0));
  EXPECT_EQ(from_volts.outcome, from_pu.outcome);
  ASSERT_EQ(from_volts.per_level.size(), from_pu.per_level.size());
  for (std::size_t i = 0; i < from_volts.per_level.size(); ++i) {
    EXPECT_NEAR(from_volts.per_level[i].observed_mean, from_pu.per_level[i].observed_mean,
                1e-9);
    EXPECT_EQ(from_volts.per_level[i].within_tolerance,
              from_pu.per_level[i].within_tolerance);
  }
}

TEST(Evaluate, ShortSegmentClampsAveragingWindow) {
  std::vector<double> times, volts;
  for (int k = 0; k < 1210; ++k) {
    times.push_back(k);
    double level = k < 600 ? 0.85 : (k < 640 ? 1.0 : 1.1);
    volts.push_back(level * 230.0);
  }
  en50549::EvaluateOptions opts;
  opts.min_dwell = 0;
  auto verdict = en50549::evaluate(voltage_trace(times, volts), en50549::nor_spec(230), opts);
  EXPECT_EQ(verdict.outcome, Outcome::Pass);
  EXPECT_TRUE(has_reason(verdict, "level 2: averaging window clamped"));
  EXPECT_DOUBLE_EQ(verdict.per_level[1].observed_mean, 1.0);
}

TEST(Evaluate, InputErrors) {
  auto nor = en50549::nor_spec(230);
  auto power_only = synth::generate_synthetic_trace(en50549::apr_spec(10000), 1.0, 0, std::nullopt, 1);
  EXPECT_EQ(code_of([&] { en50549::evaluate(power_only, nor); }), Errc::ChannelMissing);

  TestSequenceSpec no_nominal;
  no_nominal.kind = en50549::SequenceKind::NormalOperatingRange;
  no_nominal.levels = {{0.85, 600}};
  EXPECT_EQ(code_of([&] {
              en50549::evaluate(synth::generate_synthetic_trace(nor, 1.0, 0, std::nullopt, 1),
                                no_nominal);
            }),
            Errc::InvalidNominal);
}

// ---------------------------------------------------------------------------
// Verdict export and per-unit views
// ---------------------------------------------------------------------------

TEST(VerdictRdf, GraphShape) {
  en50549::Verdict v;
  v.outcome = Outcome::Pass;
  v.reasons = {"alpha", "beta"};
  auto g = en50549::verdict_rdf(v, "https://x.org/test/t1");
  auto test = rdf::make_iri("https://x.org/test/t1");
  auto node = rdf::make_iri("https://x.org/test/t1/verdict");
  EXPECT_TRUE(g.contains({test, rdf::make_iri(vocab::htd("hasVerdict")), node}));
  EXPECT_TRUE(g.contains({node, rdf::make_iri(rdf::rdf_type),
                          rdf::make_iri(vocab::htd("Verdict"))}));
  EXPECT_TRUE(g.contains({node, rdf::make_iri(vocab::htd("verdictOutcome")),
                          rdf::make_literal("PASS")}));
  EXPECT_TRUE(g.contains({node, rdf::make_iri(vocab::htd("verdictReason")),
                          rdf::make_literal("alpha")}));
  EXPECT_TRUE(g.contains({node, rdf::make_iri(vocab::htd("verdictReason")),
                          rdf::make_literal("beta")}));
  EXPECT_EQ(g.size(), 5u);

  EXPECT_EQ(code_of([&] { en50549::verdict_rdf(v, "no spaces allowed"); }),
            Errc::InvalidIri);
}

TEST(NormalizedTrace, DividesByNominal) {
  auto spec = en50549::nor_spec(230);
  auto tr = synth::generate_synthetic_trace(spec, 1.0, 0.002, std::nullopt, 42);
  auto pu = en50549::normalized_trace(tr, spec);
  ASSERT_EQ(pu.channels.size(), 1u);
  EXPECT_EQ(pu.channels[0].name, "level_pu");
  EXPECT_EQ(pu.channels[0].phenomenon, vocab::annot("Voltage"));
  EXPECT_EQ(pu.channels[0].unit, "pu");
  ASSERT_EQ(pu.rows.size(), tr.rows.size());
  EXPECT_EQ(pu.times, tr.times);
  for (std::size_t k = 0; k < tr.rows.size(); ++k)
    EXPECT_DOUBLE_EQ(pu.rows[k][0], tr.rows[k][0] / 230.0);

  auto power_only = synth::generate_synthetic_trace(en50549::apr_spec(10000), 1.0, 0, std::nullopt, 1);
  EXPECT_EQ(code_of([&] { en50549::normalized_trace(power_only, spec); }),
            Errc::ChannelMissing);
}

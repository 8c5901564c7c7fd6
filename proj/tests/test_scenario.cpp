#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ibvs/config.hpp"
#include "ibvs/scenario.hpp"

namespace ibvs {
namespace {

// Equality that treats NaN == NaN, for record comparisons.
bool same(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

void expect_same_records(const std::vector<StepRecord>& a, const std::vector<StepRecord>& b) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const StepRecord& x = a[i];
    const StepRecord& y = b[i];
    ASSERT_TRUE(same(x.t, y.t)) << i;
    for (int j = 0; j < 6; ++j) ASSERT_TRUE(same(x.twist[j], y.twist[j])) << i;
    for (int j = 0; j < 3; ++j) ASSERT_TRUE(same(x.position(j), y.position(j))) << i;
    ASSERT_TRUE(same(x.euler.roll, y.euler.roll) && same(x.euler.pitch, y.euler.pitch) &&
                same(x.euler.yaw, y.euler.yaw))
        << i;
    ASSERT_TRUE(same(x.e_norm, y.e_norm)) << i;
    ASSERT_TRUE(same(x.cond_l, y.cond_l)) << i;
    ASSERT_EQ(x.valid, y.valid) << i;
    ASSERT_TRUE(same(x.det_age, y.det_age)) << i;
  }
}

ScenarioConfig short_ideal(double duration = 5.0) {
  ScenarioConfig c = preset("ideal");
  c.duration = duration;
  return c;
}

// Starts near the goal with no latency, no lag and no tilt so the loop is the
// bare control law.
ScenarioConfig near_goal() {
  ScenarioConfig c;
  const auto& goal = std::get<GoalCameraPose>(c.desired);
  c.initial_position = goal.position + Vector3<double>(0.03, -0.06, 0.02);
  c.initial_yaw = goal.yaw + 0.02;
  c.latency = LatencyModel::zero();
  c.plant.tau = 0;
  c.plant.tilt_model = false;
  c.warmup = 0;
  c.duration = 40;
  return c;
}

TEST(Run, StartingAtGoalStaysAtEquilibrium) {
  ScenarioConfig c;
  const auto& goal = std::get<GoalCameraPose>(c.desired);
  c.initial_position = goal.position;
  c.initial_yaw = goal.yaw;
  c.duration = 10;
  const RunResult r = run(c);
  ASSERT_FALSE(r.records.empty());
  for (const auto& rec : r.records) {
    ASSERT_LT(rec.e_norm, 1e-9) << "t=" << rec.t;
    ASSERT_LT(rec.twist.coeffs.norm(), 1e-9) << "t=" << rec.t;
  }
  EXPECT_LT((r.records.back().position - goal.position).norm(), 1e-9);
}

TEST(Run, RecordCountAndTimeBase) {
  for (double duration : {1.0, 2.5, 59.0}) {
    const RunResult r = run(short_ideal(duration));
    const double expected = duration * 30.0;
    EXPECT_LE(std::abs(double(r.records.size()) - expected), 1.0);
    EXPECT_EQ(r.records.front().t, 0.0);
    for (std::size_t i = 1; i < r.records.size(); ++i) ASSERT_GT(r.records[i].t, r.records[i - 1].t);
  }
}

TEST(Run, SameSeedIsBitIdentical) {
  ScenarioConfig c = preset("illumination");
  c.duration = 10;
  c.seed = 42;
  const RunResult a = run(c);
  const RunResult b = run(c);
  expect_same_records(a.records, b.records);
  std::ostringstream ca, cb;
  emit(a.records, TelemetryFormat::Csv, ca);
  emit(b.records, TelemetryFormat::Csv, cb);
  EXPECT_EQ(ca.str(), cb.str());
}

TEST(Run, DifferentSeedsDiffer) {
  ScenarioConfig c = preset("illumination");
  c.duration = 5;
  c.seed = 1;
  const RunResult a = run(c);
  c.seed = 2;
  const RunResult b = run(c);
  EXPECT_NE(a.records.back().position, b.records.back().position);
}

TEST(Run, BatchIsIndependentOfThreadCount) {
  ScenarioConfig c = preset("clutter");
  c.duration = 8;
  const std::vector<std::uint64_t> seeds = {3, 1, 4, 1, 5};
  const auto one = run_batch(c, seeds, 1);
  const auto many = run_batch(c, seeds, 4);
  ASSERT_EQ(one.size(), seeds.size());
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    expect_same_records(one[i].records, many[i].records);
    c.seed = seeds[i];
    expect_same_records(one[i].records, run(c).records);
  }
}

TEST(Run, DetectionAgeReflectsLatency) {
  const RunResult r = run(short_ideal(10));
  for (const auto& rec : r.records) {
    ASSERT_GE(rec.det_age, 0.11 - 1e-9);  // 60 ms + 50 ms minimum
    ASSERT_LT(rec.det_age, 0.5);
  }
}

TEST(Run, LosingTheTargetEndsTheRun) {
  ScenarioConfig c;
  c.initial_yaw = -M_PI / 2;  // facing away
  c.duration = 10;
  const RunResult r = run(c);
  EXPECT_EQ(r.status, RunStatus::LostTarget);
  EXPECT_LT(r.records.size(), 300u);
}

TEST(Run, InvalidConfigIsRejected) {
  ScenarioConfig c;
  c.duration = 0;
  EXPECT_THROW(run(c), ConfigError);
  c = ScenarioConfig{};
  c.controller.lambda = -1;
  EXPECT_THROW(run(c), ConfigError);
  c = ScenarioConfig{};
  c.desired = ExplicitPixels{};
  c.controller.depth_policy = DepthPolicy::Goal;
  EXPECT_THROW(run(c), ConfigError);
}

TEST(Run, ExplicitPixelsMatchGoalRendering) {
  ScenarioConfig c = short_ideal(3);
  const FeatureSetd d = desired_features(c);
  ExplicitPixels px;
  for (int i = 0; i < kCornerCount; ++i) px.pixels[i] = d.points[i];
  ScenarioConfig e = c;
  e.desired = px;
  expect_same_records(run(c).records, run(e).records);
}

// Near the goal the closed loop behaves like de/dt = -lambda e: the error
// shrinks monotonically inside an exponential envelope.
TEST(ClosedLoop, LocalExponentialDecay) {
  const ScenarioConfig c = near_goal();
  const RunResult r = run(c);
  ASSERT_EQ(r.status, RunStatus::Converged);
  const double lambda = c.controller.lambda;
  const double e0 = r.records.front().e_norm;
  ASSERT_GT(e0, 0.01);
  // Least-squares fit of log(e/e0) = -kappa * lambda * t.
  double num = 0, den = 0;
  for (const auto& rec : r.records) {
    const double x = lambda * rec.t;
    num += -x * std::log(rec.e_norm / e0);
    den += x * x;
  }
  const double kappa = num / den;
  EXPECT_GE(kappa, 0.5);
  EXPECT_LE(kappa, 1.5);
  for (std::size_t i = 1; i < r.records.size(); ++i) {
    ASSERT_LE(r.records[i].e_norm, r.records[i - 1].e_norm * (1 + 1e-12)) << "t=" << r.records[i].t;
    ASSERT_LE(r.records[i].e_norm, 1.05 * e0 * std::exp(-lambda * kappa * r.records[i].t)) << "t=" << r.records[i].t;
  }
}

// Depth underestimated by half slows the translational response but the
// error still decreases; a generous overestimate speeds it up.
TEST(ClosedLoop, ConstantDepthChangesRateNotStability) {
  ScenarioConfig c = near_goal();
  const double goal_depth = 1.0;  // goal camera to target plane
  auto error_at_end = [&](double depth) {
    ScenarioConfig d = c;
    d.controller.depth_policy = DepthPolicy::Constant;
    d.controller.constant_depth = depth;
    const RunResult r = run(d);
    for (std::size_t i = 1; i < r.records.size(); ++i) {
      EXPECT_LE(r.records[i].e_norm, r.records[i - 1].e_norm * (1 + 1e-9)) << "depth " << depth;
    }
    return r.records.back().e_norm / r.records.front().e_norm;
  };
  const double under = error_at_end(0.5 * goal_depth);
  const double exact = error_at_end(goal_depth);
  const double over = error_at_end(2.0 * goal_depth);
  EXPECT_LT(under, 1.0);
  EXPECT_GT(under, exact);
  EXPECT_LT(over, exact);
}

TEST(Summary, KnownRecords) {
  std::vector<StepRecord> recs;
  for (int i = 0; i < 100; ++i) {
    StepRecord r;
    r.t = i * 0.1;
    r.e_norm = i < 50 ? 1.0 : 0.01;
    r.cond_l = i == 10 ? 500.0 : 20.0;
    r.position = Vector3<double>(i * 0.01, 0, 0);
    recs.push_back(r);
  }
  recs[60].e_norm = std::nan("");  // a tick without features breaks the streak
  SummaryParams p;
  p.convergence_hold = 2.0;
  p.target_center = Vector3<double>(2.0, 0, 0);
  const RunSummary s = summarize(recs, p);
  EXPECT_EQ(s.record_count, 100u);
  EXPECT_EQ(s.initial_error, 1.0);
  ASSERT_TRUE(s.convergence_time.has_value());
  EXPECT_DOUBLE_EQ(*s.convergence_time, 6.1);
  EXPECT_DOUBLE_EQ(s.steady_state_error, 0.01);
  EXPECT_EQ(s.peak_cond, 500.0);
  EXPECT_NEAR(s.min_target_distance, 2.0 - 0.99, 1e-12);
}

TEST(Summary, EmptyRecords) {
  const RunSummary s = summarize({}, SummaryParams{});
  EXPECT_EQ(s.record_count, 0u);
  EXPECT_FALSE(s.convergence_time.has_value());
}

TEST(Emit, EmptyRunIsHeaderOnly) {
  std::ostringstream out;
  emit({}, TelemetryFormat::Csv, out);
  EXPECT_EQ(out.str(),
            "t,vx,vy,vz,wx,wy,wz,px,py,pz,roll,pitch,yaw,e_norm,cond_L,valid_1,valid_2,valid_3,valid_4,det_age\n");
  std::ostringstream json;
  emit({}, TelemetryFormat::JsonLines, json);
  EXPECT_EQ(json.str(), "");
}

TEST(Emit, OneRecordRoundTripsExactly) {
  StepRecord r;
  r.t = 1.0 / 3.0;
  r.twist = Twistd(Vector6<double>(0.1, -2.0 / 7.0, 1e-300, 0, 0, M_PI));
  r.position = Vector3<double>(-1.0000000000000002, 2.5, std::sqrt(2.0));
  r.euler = EulerZYXd{0.01, -0.02, M_PI / 2};
  r.e_norm = 0.123456789012345678;
  r.cond_l = std::numeric_limits<double>::infinity();
  r.valid = {true, false, true, true};
  r.det_age = std::nan("");
  for (TelemetryFormat f : {TelemetryFormat::Csv, TelemetryFormat::JsonLines}) {
    std::stringstream io;
    emit({r}, f, io);
    const std::string text = io.str();
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), f == TelemetryFormat::Csv ? 2 : 1);
    const auto back = read_telemetry(io, f);
    expect_same_records({r}, back);
  }
}

TEST(Emit, CsvAndJsonLinesAgree) {
  const RunResult r = run(preset("clutter"));
  std::stringstream csv, jsonl;
  emit(r.records, TelemetryFormat::Csv, csv);
  emit(r.records, TelemetryFormat::JsonLines, jsonl);
  expect_same_records(read_telemetry(csv, TelemetryFormat::Csv), read_telemetry(jsonl, TelemetryFormat::JsonLines));
}

TEST(Emit, SummaryFromFileEqualsInMemory) {
  const ScenarioConfig c = preset("occlusion");
  const RunResult r = run(c);
  const auto dir = std::filesystem::temp_directory_path() / "ibvs_summary_test";
  std::filesystem::create_directories(dir);
  for (TelemetryFormat f : {TelemetryFormat::Csv, TelemetryFormat::JsonLines}) {
    const auto path = dir / (f == TelemetryFormat::Csv ? "run.csv" : "run.jsonl");
    emit(r.records, f, path);
    const RunSummary from_file = summarize(read_telemetry(path, f), summary_params(c));
    EXPECT_TRUE(from_file == r.summary);
  }
  std::filesystem::remove_all(dir);
}

TEST(Emit, UnwritablePathReportsIt) {
  try {
    emit({}, TelemetryFormat::Csv, std::filesystem::path("/nonexistent-dir/x/run.csv"));
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent-dir/x/run.csv"), std::string::npos);
  }
}

TEST(Emit, RejectsWrongHeader) {
  std::istringstream in("t,vx\n0,1\n");
  EXPECT_THROW(read_telemetry(in, TelemetryFormat::Csv), Error);
}

}  // namespace
}  // namespace ibvs

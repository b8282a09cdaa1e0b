#include "relseg/train.hpp"

#include "relseg/simulate.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

using namespace relseg;

namespace {

SequenceData mean_shift(std::uint64_t seed) {
    Rng rng(derive_seed(seed, {7}));
    std::vector<double> obs;
    for (int t = 1; t <= 60; ++t) {
        obs.push_back(rng.normal(t < 31 ? 0.0 : 3.0, 1.0));
    }
    return SequenceData::scalar(obs);
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void check_trend(const FitResult& r) {
    for (const auto& trace : r.traces) {
        if (trace.size() < 20) {
            continue;
        }
        const std::vector<double> head(trace.begin(), trace.begin() + 10);
        const std::vector<double> tail(trace.end() - 10, trace.end());
        CHECK(median(tail) <= median(head));
    }
}

} // namespace

TEST_CASE("adam: zero gradient leaves parameters alone") {
    std::vector<double> x{1.0, -2.0};
    const std::vector<double> g{0.0, 0.0};
    AdamState state(2);
    adam_step(x, g, state, 0.1);
    adam_step(x, g, state, 0.1);
    CHECK(x == std::vector<double>{1.0, -2.0});
    CHECK(state.step == 2);
}

TEST_CASE("adam: first step") {
    std::vector<double> x{0.0, 0.0};
    const std::vector<double> g{1.0, -4.0};
    AdamState state(2);
    adam_step(x, g, state, 0.1);
    // m_hat = g, v_hat = g^2, so the step is lr g / (|g| + eps).
    CHECK(x[0] == doctest::Approx(-0.1 / (1.0 + 1e-8)).epsilon(1e-14));
    CHECK(x[1] == doctest::Approx(0.1 * 4.0 / (4.0 + 1e-8)).epsilon(1e-14));
    CHECK(state.first[0] == doctest::Approx(0.1));
    CHECK(state.second[1] == doctest::Approx(0.016));
}

TEST_CASE("adam: hand-computed second step") {
    std::vector<double> x{0.0};
    AdamState state(1);
    const std::vector<double> g1{1.0};
    const std::vector<double> g2{0.5};
    adam_step(x, g1, state, 0.1);
    adam_step(x, g2, state, 0.1);
    const double m = 0.9 * 0.1 + 0.1 * 0.5;
    const double v = 0.999 * 0.001 + 0.001 * 0.25;
    const double step = 0.1 * (m / (1 - 0.81)) / (std::sqrt(v / (1 - 0.999 * 0.999)) + 1e-8);
    CHECK(x[0] == doctest::Approx(-0.1 / (1.0 + 1e-8) - step).epsilon(1e-13));
}

TEST_CASE("adam: constant gradient moves against its sign") {
    std::vector<double> x{0.0, 0.0};
    const std::vector<double> g{0.3, -7.0};
    AdamState state(2);
    for (int i = 0; i < 50; ++i) {
        const auto before = x;
        adam_step(x, g, state, 0.01);
        CHECK(x[0] < before[0]);
        CHECK(x[1] > before[1]);
    }
}

TEST_CASE("adam: frozen entries keep value and moments") {
    std::vector<double> x{1.0, 1.0, 1.0};
    const std::vector<double> g{5.0, 5.0, 5.0};
    AdamState state(3);
    adam_step(x, g, state, 0.1, 2);
    CHECK(x[0] == 1.0);
    CHECK(x[1] == 1.0);
    CHECK(x[2] < 1.0);
    CHECK(state.first[0] == 0.0);
    CHECK(state.second[1] == 0.0);
}

TEST_CASE("adam: non-finite gradients abort") {
    std::vector<double> x{1.0, 1.0};
    const std::vector<double> bad{std::numeric_limits<double>::quiet_NaN(), 1.0};
    AdamState state(2);
    CHECK_THROWS_AS(adam_step(x, bad, state, 0.1), NumericalError);
    CHECK(x == std::vector<double>{1.0, 1.0});
    // A frozen entry is not inspected.
    CHECK_NOTHROW(adam_step(x, bad, state, 0.1, 1));
    std::vector<double> short_x{1.0};
    CHECK_THROWS_AS(adam_step(short_x, bad, state, 0.1), std::invalid_argument);
}

TEST_CASE("schedule validation") {
    TrainSchedule s;
    CHECK_NOTHROW(s.validate());
    s.integer_epochs = 400;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = TrainSchedule{};
    s.learning_rate = 0.0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = TrainSchedule{};
    s.restarts = 0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = TrainSchedule{};
    s.init_spread = -1.0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = TrainSchedule{};
    s.total_epochs = 0;
    s.integer_epochs = 0;
    CHECK_NOTHROW(s.validate());
}

TEST_CASE("a mean shift at t = 31 is recovered") {
    const NormalDgp dgp;
    const ModelConfig config{2, 0.125, 16.0, 60};
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        TrainSchedule schedule;
        schedule.seed = seed;
        const auto r = fit(mean_shift(seed), config, dgp, schedule);
        CHECK(r.best_loss == *std::min_element(r.per_restart_losses.begin(), r.per_restart_losses.end()));
        check_trend(r);
        if (r.change_points.size() == 1 && std::abs(r.change_points[0] - 31) <= 2) {
            ++hits;
        }
    }
    CHECK(hits >= 9);
}

TEST_CASE("zero epochs return the initialisation") {
    const NormalDgp dgp;
    const auto data = mean_shift(1);
    const ModelConfig config{3, 0.2, 8.0, 60};
    const Objective objective(config, data, dgp);
    ModelParams init = objective.zero_params();
    init.warp.trainable()[0] = 0.3;
    init.segments.row(1)[0] = 2.0;
    TrainSchedule schedule;
    schedule.total_epochs = 0;
    schedule.integer_epochs = 0;
    schedule.restarts = 1;
    const auto r = fit_from(data, config, dgp, schedule, init);
    CHECK(flatten(r.params) == flatten(init));
    CHECK(r.best_loss == objective.loss(init));
    CHECK(r.epochs_run == 0);
    CHECK(r.traces.at(0).empty());
}

TEST_CASE("fits are bit-identical across runs and worker counts") {
    const NormalDgp dgp;
    const auto data = mean_shift(3);
    const ModelConfig config{3, 0.125, 16.0, 60};
    TrainSchedule schedule;
    schedule.seed = 42;
    schedule.total_epochs = 120;
    schedule.integer_epochs = 40;
    schedule.restarts = 6;
    const auto a = fit(data, config, dgp, schedule, 1);
    const auto b = fit(data, config, dgp, schedule, 1);
    const auto c = fit(data, config, dgp, schedule, 4);
    for (const auto* other : {&b, &c}) {
        CHECK(other->best_loss == a.best_loss);
        CHECK(other->best_restart == a.best_restart);
        CHECK(flatten(other->params) == flatten(a.params));
        CHECK(other->hard_seg == a.hard_seg);
        CHECK(other->traces == a.traces);
        // NaN-free here, so plain comparison is exact.
        CHECK(other->per_restart_losses == a.per_restart_losses);
    }
    schedule.seed = 43;
    const auto d = fit(data, config, dgp, schedule, 1);
    CHECK(flatten(d.params) != flatten(a.params));
}

TEST_CASE("hard segmentation agrees with the fitted parameters") {
    const NormalDgp dgp;
    const auto data = mean_shift(4);
    const ModelConfig config{4, 0.125, 16.0, 60};
    TrainSchedule schedule;
    schedule.restarts = 3;
    const auto r = fit(data, config, dgp, schedule);
    const Objective objective(config, data, dgp);
    const auto zeta = objective.zeta_hat(r.params, AlignmentMode::hard);
    REQUIRE(zeta.size() == r.hard_seg.size());
    for (std::size_t t = 0; t < zeta.size(); ++t) {
        CHECK(static_cast<int>(zeta[t]) == r.hard_seg[t]);
    }
    CHECK(r.change_points == change_points(r.hard_seg));
    CHECK(std::is_sorted(r.hard_seg.begin(), r.hard_seg.end()));
    CHECK(r.best_loss == doctest::Approx(objective.loss(r.params, AlignmentMode::hard)).epsilon(1e-12));
    for (int k : r.empty_segments) {
        CHECK(std::find(r.hard_seg.begin(), r.hard_seg.end(), k) == r.hard_seg.end());
    }
    for (int k = 1; k <= 4; ++k) {
        const bool used = std::find(r.hard_seg.begin(), r.hard_seg.end(), k) != r.hard_seg.end();
        const bool listed = std::find(r.empty_segments.begin(), r.empty_segments.end(), k) != r.empty_segments.end();
        CHECK(used != listed);
    }
}

TEST_CASE("diverged restarts are discarded") {
    const NormalDgp dgp;
    const auto data = mean_shift(5);
    const ModelConfig config{2, 0.125, 16.0, 60};
    const Objective objective(config, data, dgp);
    ModelParams init = objective.zero_params();
    init.segments.row(0)[1] = -1e6;
    init.segments.row(1)[1] = -1e6;
    TrainSchedule schedule;
    schedule.total_epochs = 5;
    schedule.integer_epochs = 0;
    schedule.restarts = 2;
    CHECK_THROWS_AS(fit_from(data, config, dgp, schedule, init), OptimizationError);
}

TEST_CASE("mu stays fixed during integer epochs") {
    const NormalDgp dgp;
    const auto data = mean_shift(6);
    const ModelConfig config{2, 0.125, 16.0, 60};
    const Objective objective(config, data, dgp);
    ModelParams init = objective.zero_params();
    init.warp.trainable()[0] = 0.4;
    TrainSchedule schedule;
    schedule.total_epochs = 30;
    schedule.integer_epochs = 30;
    schedule.restarts = 1;
    const auto r = fit_from(data, config, dgp, schedule, init);
    CHECK(r.params.warp.mu()[1] == 0.4);
    CHECK(flatten(r.params) != flatten(init));
}

TEST_CASE("modes initialisation draws valid warps") {
    const NormalDgp dgp;
    const auto data = mean_shift(7);
    const ModelConfig config{5, 0.125, 16.0, 60};
    TrainSchedule schedule;
    schedule.total_epochs = 0;
    schedule.integer_epochs = 0;
    schedule.restarts = 20;
    schedule.warp_init = WarpInit::uniform_modes;
    const auto r = fit(data, config, dgp, schedule);
    const auto modes = modes_from_mu(r.params.warp);
    CHECK(std::is_sorted(modes.begin(), modes.end()));
    CHECK(modes.front() > 0.0);
    CHECK(modes.back() < 1.0);
}

TEST_CASE("one segment fits without warping parameters") {
    const NormalDgp dgp;
    const auto data = mean_shift(8);
    TrainSchedule schedule;
    schedule.restarts = 2;
    const auto r = fit(data, ModelConfig{1, 0.125, 16.0, 60}, dgp, schedule);
    CHECK(r.change_points.empty());
    CHECK(r.hard_seg == Segmentation(60, 1));
    CHECK(r.params.warp.trainable().empty());
}

TEST_CASE("fixed segmentation reproduces its labels") {
    Rng rng(9);
    for (int i = 0; i < 20; ++i) {
        const auto seg = random_segmentation(static_cast<int>(rng.uniform_int(2, 8)), 120, 3, rng);
        const auto fixed = fixed_segmentation(seg);
        const auto data = SequenceData::scalar(std::vector<double>(120, 0.0));
        const NormalDgp dgp;
        const Objective objective(fixed.config, data, dgp);
        ModelParams p = objective.zero_params();
        p.warp = fixed.warp;
        const auto zeta = objective.zeta_hat(p, AlignmentMode::hard);
        for (std::size_t t = 0; t < seg.size(); ++t) {
            CHECK(static_cast<int>(zeta[t]) == seg[t]);
        }
    }
}

TEST_CASE("fitting with the segmentation fixed recovers segment means") {
    Rng rng(10);
    const auto seg = segmentation_from_change_points(ChangePoints{21, 41}, 60);
    const std::vector<double> means{-2.0, 1.0, 4.0};
    std::vector<double> obs;
    for (int k : seg) {
        obs.push_back(rng.normal(means[static_cast<std::size_t>(k - 1)], 0.5));
    }
    TrainSchedule schedule;
    schedule.total_epochs = 2000;
    schedule.learning_rate = 0.05;
    const auto r = fit_fixed_segmentation(SequenceData::scalar(obs), seg, NormalDgp(), schedule);
    CHECK(r.hard_seg == seg);
    for (int k = 0; k < 3; ++k) {
        double sum = 0.0;
        for (std::size_t t = 0; t < 60; ++t) {
            sum += seg[t] == k + 1 ? obs[t] : 0.0;
        }
        CHECK(r.params.segments.row(k)[0] == doctest::Approx(sum / 20.0).epsilon(1e-4));
    }
}

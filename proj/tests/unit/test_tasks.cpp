#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "srtrl/errors.hpp"
#include "srtrl/tasks.hpp"

using namespace srtrl;

namespace {

std::filesystem::path write_tmp(const std::string& name, const std::string& body) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream(path) << body;
    return path;
}

}  // namespace

TEST_CASE("sine stream samples and continuity across the shift") {
    const auto task = sine_shift();
    REQUIRE(task.length() == 2000);
    CHECK(task.shift_points == std::vector<Step>{1000});
    CHECK(task.steps[0].x[0] == 0.0);
    CHECK(task.steps[1].x[0] == doctest::Approx(0.09983341664682815).epsilon(1e-15));
    CHECK(task.steps[17].x[0] == doctest::Approx(0.9916648104524686).epsilon(1e-15));
    CHECK(task.steps[1000].x[0] == doctest::Approx(-0.5063656411097588).epsilon(1e-13));
    CHECK(task.steps[1005].x[0] == doctest::Approx(0.82433986348825).epsilon(1e-13));
    for (Step t = 0; t + 1 < task.length(); ++t) {
        CHECK(task.steps[t].target[0] == task.steps[t + 1].x[0]);
        // Phase-continuous: no step jumps by more than the fast frequency allows.
        CHECK(std::abs(task.steps[t + 1].x[0] - task.steps[t].x[0]) <= 0.3 + 1e-12);
    }
    CHECK_THROWS_AS(sine_shift(100, 100), ContractViolation);
}

TEST_CASE("multi-sine has equal regimes") {
    const auto task = multi_sine();
    CHECK(task.length() == 4000);
    CHECK(task.shift_points == std::vector<Step>{1000, 2000, 3000});
    CHECK(std::abs(task.steps[2000].x[0] - task.steps[1999].x[0]) <= 0.3 + 1e-12);
}

TEST_CASE("Lorenz integrator") {
    const LorenzParams p;
    const double b = 8.0 / 3.0;
    const double r = std::sqrt(b * (p.rho - 1));
    const Vec3 fixed{r, r, p.rho - 1};
    const auto d = lorenz_derivative(fixed, p);
    for (double v : d) CHECK(std::abs(v) <= 1e-12);

    const auto s = rk4_step({1, 1, 1}, 0.01, p);
    CHECK(s[0] == doctest::Approx(1.0125671910736112).epsilon(1e-14));
    CHECK(s[1] == doctest::Approx(1.2599177989452743).epsilon(1e-14));
    CHECK(s[2] == doctest::Approx(0.9848909717916053).epsilon(1e-14));
}

TEST_CASE("RK4 local error shrinks 16x per halving of dt") {
    // Local error is O(dt^5), so with halving dt the one-step error drops by
    // 32; the accumulated error over a fixed horizon drops by 16. Compare a
    // fixed horizon against a very fine reference.
    const LorenzParams p;
    const Vec3 start{1, 1, 1};
    const double horizon = 0.16;
    auto integrate = [&](double dt) {
        Vec3 s = start;
        const int steps = static_cast<int>(std::lround(horizon / dt));
        for (int i = 0; i < steps; ++i) s = rk4_step(s, dt, p);
        return s;
    };
    const Vec3 ref = integrate(horizon / 8192);
    auto err = [&](double dt) {
        const Vec3 s = integrate(dt);
        return std::sqrt((s[0] - ref[0]) * (s[0] - ref[0]) + (s[1] - ref[1]) * (s[1] - ref[1]) +
                         (s[2] - ref[2]) * (s[2] - ref[2]));
    };
    const double ratio = err(0.01) / err(0.005);
    MESSAGE("error ratio " << ratio);
    CHECK(ratio == doctest::Approx(16.0).epsilon(0.2));
}

TEST_CASE("Lorenz stream is z-scored on the pre-shift block") {
    const auto task = lorenz_stream();
    CHECK(task.length() == 4000);
    CHECK(task.input_dim == 3);
    Vec mean = Vec::Zero(3);
    for (Step t = 0; t < 2000; ++t) mean += task.steps[t].x;
    mean /= 2000.0;
    CHECK(mean.cwiseAbs().maxCoeff() <= 1e-10);
    for (Step t = 0; t + 1 < task.length(); ++t) CHECK(task.steps[t].target == task.steps[t + 1].x);
}

TEST_CASE("copy task layout") {
    const auto task = copy_task(20, 5, 8, 5, 42);
    CHECK(task.length() == 20 * 15);
    CHECK(task.input_dim == 10);
    CHECK(task.output_dim == 8);
    // Independent walk: every recall step asks for the symbol shown 10 steps earlier.
    for (Index e = 0; e < 20; ++e) {
        for (Index s = 0; s < 5; ++s) {
            const auto& shown = task.steps[e * 15 + s];
            const auto& recall = task.steps[e * 15 + 10 + s];
            Index sym = -1;
            shown.x.maxCoeff(&sym);
            CHECK(sym < 8);
            CHECK_FALSE(shown.loss_active);
            CHECK(recall.loss_active);
            CHECK(recall.target_class == sym);
            CHECK(recall.x[9] == 1.0);
            CHECK(task.steps[e * 15 + 5 + s].x[8] == 1.0);
        }
    }
    CHECK(copy_task(20, 5, 8, 5, 42).steps[3].x == task.steps[3].x);
}

TEST_CASE("uniform guessing on the copy task scores 1/8") {
    const auto task = copy_task(4000, 5, 8, 5, 7);
    Rng rng(1);
    std::uniform_int_distribution<int> guess(0, 7);
    double hits = 0, count = 0;
    for (const auto& s : task.steps) {
        if (!s.loss_active) continue;
        hits += guess(rng) == s.target_class;
        ++count;
    }
    CHECK(hits / count == doctest::Approx(0.125).epsilon(0.05));
}

TEST_CASE("adding problem") {
    const auto task = adding_problem(2000, 50, 3);
    CHECK(task.length() == 100000);
    double se = 0, count = 0;
    for (Index q = 0; q < 2000; ++q) {
        double sum = 0;
        int markers = 0;
        for (Index t = 0; t < 50; ++t) {
            const auto& s = task.steps[q * 50 + t];
            if (s.x[1] == 1.0) {
                sum += s.x[0];
                ++markers;
                CHECK((t < 25) == (markers == 1));
            }
            CHECK(s.loss_active == (t == 49));
        }
        CHECK(markers == 2);
        const double target = task.steps[q * 50 + 49].target[0];
        CHECK(target == doctest::Approx(sum).epsilon(1e-15));
        se += (1.0 - target) * (1.0 - target);
        ++count;
    }
    CHECK(se / count == doctest::Approx(1.0 / 6.0).epsilon(0.05));
}

TEST_CASE("CSV stream: identity, PCA and z-score") {
    const auto path = write_tmp("srtrl_stream.csv",
                                "a,b,c,y\n1,2,0,0.5\n2,4,0,1.5\n3,6,1,2.5\n4,8,1,3.5\n5,10,0,4.5\n6,12,1,5.5\n");
    const auto plain = csv_stream(path, {"a", "b"}, {"y"}, 4);
    CHECK(plain.length() == 6);
    CHECK(plain.shift_points == std::vector<Step>{4});
    CHECK(plain.steps[2].x[1] == 6.0);
    CHECK(plain.steps[5].target[0] == 5.5);

    CsvTransform tf;
    CsvPreprocess pre;
    pre.pca_components = 2;
    const auto pca = csv_stream(path, {"a", "b", "c"}, {"y"}, 4, pre, &tf);
    CHECK(pca.input_dim == 2);
    CHECK(tf.explained_variance_ratio.sum() == doctest::Approx(1.0).epsilon(1e-12));

    CsvPreprocess z;
    z.zscore_inputs = true;
    z.zscore_targets = true;
    const auto zs = csv_stream(path, {"a"}, {"y"}, 4, z, &tf);
    // Pre-split a = 1..4: mean 2.5, sample sd sqrt(5/3).
    CHECK(tf.z_mean[0] == doctest::Approx(2.5));
    CHECK(tf.z_sd[0] == doctest::Approx(std::sqrt(5.0 / 3.0)));
    CHECK(zs.steps[0].x[0] == doctest::Approx(-1.5 / std::sqrt(5.0 / 3.0)));
}

TEST_CASE("CSV ingestion errors name the row") {
    const auto bad = write_tmp("srtrl_bad.csv", "a,y\n1,2\n3,x\n");
    try {
        csv_stream(bad, {"a"}, {"y"}, 1);
        FAIL("expected an ingestion error");
    } catch (const IngestionError& e) {
        CHECK(e.row() == 2);
    }
    const auto ragged = write_tmp("srtrl_ragged.csv", "a,y\n1,2\n3\n");
    CHECK_THROWS_AS(csv_stream(ragged, {"a"}, {"y"}, 1), IngestionError);
    CHECK_THROWS_AS(csv_stream(bad, {"zz"}, {"y"}, 1), IngestionError);
}

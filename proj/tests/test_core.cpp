#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cotrack/config.hpp"
#include "cotrack/errors.hpp"
#include "cotrack/geometry.hpp"
#include "cotrack/labels.hpp"

using namespace cotrack;

TEST_CASE("gaussian label peaks at the center with unit value") {
    const LabelMap l = gaussian_label(5, 5, 1.0);
    CHECK(l.peak_row == 2);
    CHECK(l.peak_col == 2);
    CHECK(l.values.at(2, 2) == doctest::Approx(1.0).epsilon(1e-12));
    // One cell right of center: exp(-1/(2 sigma^2)).
    CHECK(l.values.at(2, 3) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
}

TEST_CASE("gaussian label is circularly symmetric about the peak") {
    const LabelMap l = gaussian_label(5, 5, 1.0);
    for (int dr = -2; dr <= 2; ++dr)
        for (int dc = -2; dc <= 2; ++dc) {
            const double a = l.values.at((2 + dr + 5) % 5, (2 + dc + 5) % 5);
            const double b = l.values.at((2 - dr + 5) % 5, (2 - dc + 5) % 5);
            CHECK(a == doctest::Approx(b).epsilon(1e-12));
            CHECK(a > 0.0);
            CHECK(a <= 1.0);
        }
}

TEST_CASE("gaussian label transposes with its dimensions") {
    const LabelMap a = gaussian_label(4, 7, 1.3);
    const LabelMap b = gaussian_label(7, 4, 1.3);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 7; ++c)
            CHECK(a.values.at(r, c) == doctest::Approx(b.values.at(c, r)).epsilon(1e-12));
}

TEST_CASE("gaussian label rejects bad arguments") {
    CHECK_THROWS_AS(gaussian_label(0, 5, 1.0), InvalidArgument);
    CHECK_THROWS_AS(gaussian_label(5, 5, 0.0), InvalidArgument);
    CHECK_THROWS_AS(gaussian_label(5, 5, -1.0), InvalidArgument);
}

TEST_CASE("hann window endpoints and center") {
    const WindowWeights w = hann_window(3, 3);
    CHECK(w.values.at(0, 0) == doctest::Approx(0.0));
    CHECK(w.values.at(1, 1) == doctest::Approx(1.0));
    CHECK(w.values.at(0, 2) == doctest::Approx(0.0));
}

TEST_CASE("hann window of a single row is the 1-D profile") {
    const WindowWeights w = hann_window(1, 4);
    for (int c = 0; c < 4; ++c) {
        const double expect = 0.5 * (1.0 - std::cos(2.0 * M_PI * c / 3.0));
        CHECK(w.values.at(0, c) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("hann window is in range and symmetric under 180 degree rotation") {
    const WindowWeights w = hann_window(6, 9);
    for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 9; ++c) {
            CHECK(w.values.at(r, c) >= 0.0);
            CHECK(w.values.at(r, c) <= 1.0);
            CHECK(w.values.at(r, c) ==
                  doctest::Approx(w.values.at(5 - r, 8 - c)).epsilon(1e-12));
        }
    CHECK_THROWS_AS(hann_window(0, 3), InvalidArgument);
}

TEST_CASE("scale_bbox_about_center keeps the center") {
    const BBox b{10, 10, 20, 20};
    const BBox same = scale_bbox_about_center(b, 1.0);
    CHECK(same.x == doctest::Approx(10.0));
    CHECK(same.w == doctest::Approx(20.0));

    const BBox big = scale_bbox_about_center(b, 2.0);
    CHECK(big.x == doctest::Approx(0.0));
    CHECK(big.y == doctest::Approx(0.0));
    CHECK(big.w == doctest::Approx(40.0));
    CHECK(big.h == doctest::Approx(40.0));

    const BBox small = scale_bbox_about_center({0, 0, 4, 4}, 0.5);
    CHECK(small.x == doctest::Approx(1.0));
    CHECK(small.y == doctest::Approx(1.0));
    CHECK(small.w == doctest::Approx(2.0));

    CHECK_THROWS_AS(scale_bbox_about_center(b, 0.0), InvalidArgument);
    CHECK_THROWS_AS(scale_bbox_about_center(b, -2.0), InvalidArgument);
}

TEST_CASE("scaling down then up round-trips") {
    const BBox b{3.25, 7.5, 11.0, 4.75};
    for (double s : {0.5, 1.02, 2.7}) {
        const BBox back = scale_bbox_about_center(scale_bbox_about_center(b, s), 1.0 / s);
        CHECK(std::abs(back.x - b.x) < 1e-9);
        CHECK(std::abs(back.y - b.y) < 1e-9);
        CHECK(std::abs(back.w - b.w) < 1e-9);
        CHECK(std::abs(back.h - b.h) < 1e-9);
    }
}

TEST_CASE("clip_bbox clamps and pins") {
    const BBox inside = clip_bbox({5, 5, 10, 10}, 100, 100);
    CHECK(inside.x == 5.0);
    CHECK(inside.w == 10.0);

    const BBox left = clip_bbox({-5, 0, 10, 10}, 100, 100);
    CHECK(left.x == 0.0);
    CHECK(left.w == 5.0);
    CHECK(left.h == 10.0);

    const BBox pinned = clip_bbox({200, 200, 10, 10}, 100, 100);
    CHECK(pinned.x == 99.0);
    CHECK(pinned.y == 99.0);
    CHECK(pinned.w == 1.0);
    CHECK(pinned.h == 1.0);
}

TEST_CASE("clip_bbox is idempotent") {
    const BBox cases[] = {{-5, -5, 3, 3}, {98, 40, 30, 10}, {20, 20, 5, 5}, {500, -90, 7, 7}};
    for (const BBox& b : cases) {
        const BBox once = clip_bbox(b, 100, 100);
        const BBox twice = clip_bbox(once, 100, 100);
        CHECK(once.x == twice.x);
        CHECK(once.y == twice.y);
        CHECK(once.w == twice.w);
        CHECK(once.h == twice.h);
        CHECK(once.x >= 0.0);
        CHECK(once.x + once.w <= 100.0);
    }
}

namespace {

std::string write_temp_config(const std::string& text) {
    static int counter = 0;
    const auto path = std::filesystem::temp_directory_path() /
                      ("cotrack_cfg_" + std::to_string(counter++) + ".conf");
    std::ofstream out(path);
    out << text;
    return path.string();
}

} // namespace

TEST_CASE("empty config file keeps all defaults") {
    const TrackerConfig cfg = load_config(write_temp_config(""));
    CHECK(cfg.cell_size == 4);
    CHECK(cfg.padding == doctest::Approx(2.5));
    CHECK(cfg.learning_rate == doctest::Approx(0.015));
    CHECK(cfg.scale_factors.size() == 7);
    CHECK(cfg.scale_factors[3] == doctest::Approx(1.0));
    CHECK(cfg.features_enabled.size() == 3);
}

TEST_CASE("config invariant violations name the key") {
    CHECK_THROWS_WITH_AS(parse_config_text("padding = 0.5"),
                         doctest::Contains("padding"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_text("learning_rate = 1.5"),
                         doctest::Contains("learning_rate"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_text("scale_factors = [1.02, 1.0]"),
                         doctest::Contains("scale_factors"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_text("scale_factors = [0.9, 1.1]"),
                         doctest::Contains("scale_factors"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_text("mystery_key = 1"),
                         doctest::Contains("mystery_key"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_text("features_enabled = [hog, hog]"),
                         doctest::Contains("features_enabled"), ConfigError);
}

TEST_CASE("config parses lists and comments") {
    const TrackerConfig cfg = parse_config_text("# comment\n"
                                                "scale_factors = [0.98, 1.0, 1.02]\n"
                                                "features_enabled = [hog] # tail comment\n"
                                                "lambda0 = 0.05\n");
    REQUIRE(cfg.scale_factors.size() == 3);
    CHECK(cfg.scale_factors[0] == doctest::Approx(0.98));
    CHECK(cfg.scale_factors[2] == doctest::Approx(1.02));
    CHECK(cfg.features_enabled == std::vector<FeatureKind>{FeatureKind::Hog});
    CHECK(cfg.solver.lambda0 == doctest::Approx(0.05));
}

TEST_CASE("missing config file is an io error") {
    CHECK_THROWS_AS(load_config("/nonexistent/path.conf"), IoError);
}

TEST_CASE("epsilon scales with the square root of the variable count") {
    SolverConfig cfg;
    CHECK(cfg.epsilon_for(16) > 0.0);
    CHECK(cfg.epsilon_for(100) == doctest::Approx(10.0 * cfg.epsilon_factor));
}

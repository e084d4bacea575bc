#include "doctest.h"
#include "masklift/config.h"
#include "masklift/errors.h"

using namespace masklift;

TEST_SUITE("config") {

TEST_CASE("defaults") {
  const PipelineConfig c;
  CHECK(c.tau == 0.5);
  CHECK(c.depth_tolerance == 0.1);
  CHECK(c.view_stride == 10);
  CHECK(c.kappa == 8);
  CHECK(c.dedup_iou == 0.9);
  CHECK(c.refine_strategy.kind == StrategyKind::kDp);
  CHECK(c.overlap_mode == OverlapMode::kContainment);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("entries fed back through set reproduce the config") {
  PipelineConfig c;
  c.tau = 0.3;
  c.view_stride = 4;
  c.refine_strategy = RefineStrategy::parse("top_k(5)");
  c.overlap_mode = OverlapMode::kIou;
  c.noise.p_flip = 0.1 + 0.2;  // not exactly representable in short decimal
  c.noise.r_morph = 2;
  c.seed = 18446744073709551615ULL;
  c.threads = 3;
  PipelineConfig d;
  for (const auto& [k, v] : c.entries()) d.set(k, v);
  CHECK(d.entries() == c.entries());
  CHECK(d.noise.p_flip == c.noise.p_flip);
  CHECK(d.seed == c.seed);
}

TEST_CASE("bad keys and values are configuration errors") {
  PipelineConfig c;
  CHECK_THROWS_AS(c.set("taux", "0.5"), ConfigError);
  CHECK_THROWS_AS(c.set("tau", "half"), ConfigError);
  CHECK_THROWS_AS(c.set("tau", "nan"), ConfigError);
  CHECK_THROWS_AS(c.set("view_stride", "2.5"), ConfigError);
  CHECK_THROWS_AS(c.set("refine_strategy", "greedy"), ConfigError);
  CHECK_THROWS_AS(c.set("overlap_mode", "dice"), ConfigError);
  c.set("tau", " 0.25 ");
  CHECK(c.tau == 0.25);
}

TEST_CASE("validation ranges") {
  auto invalid = [](auto mutate) {
    PipelineConfig c;
    mutate(c);
    return c;
  };
  CHECK_THROWS_AS(invalid([](auto& c) { c.tau = 0.0; }).validate(), ConfigError);
  CHECK_THROWS_AS(invalid([](auto& c) { c.tau = 1.01; }).validate(), ConfigError);
  CHECK_NOTHROW(invalid([](auto& c) { c.tau = 1.0; }).validate());
  CHECK_THROWS_AS(invalid([](auto& c) { c.view_stride = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(invalid([](auto& c) { c.depth_tolerance = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(invalid([](auto& c) { c.kappa = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(invalid([](auto& c) { c.dedup_iou = 1.5; }).validate(), ConfigError);
  CHECK_THROWS_AS(invalid([](auto& c) { c.threads = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(invalid([](auto& c) { c.noise.p_flip = 2; }).validate(), ConfigError);
  CHECK_THROWS_AS(invalid([](auto& c) { c.max_rounds = 0; }).validate(), ConfigError);
}

TEST_CASE("config text: comments, blanks and malformed lines") {
  const auto e = parse_config_text(
      "# run settings\n\n tau = 0.4  # looser\nview_stride=5\n");
  REQUIRE(e.size() == 2);
  CHECK(e[0] == std::pair<std::string, std::string>{"tau", "0.4"});
  CHECK(e[1] == std::pair<std::string, std::string>{"view_stride", "5"});
  CHECK_THROWS_WITH_AS(parse_config_text("tau 0.4\n"),
                       doctest::Contains("config line 1"), ConfigError);
  CHECK_THROWS_AS(read_config_file("/nonexistent/masklift.cfg"), ConfigError);
}

TEST_CASE("overlap mode names") {
  for (OverlapMode m : {OverlapMode::kContainment, OverlapMode::kIou}) {
    CHECK(parse_overlap_mode(overlap_mode_name(m)) == m);
  }
}

}  // TEST_SUITE

#include <filesystem>
#include <limits>

#include "doctest.h"
#include "robreg/config.hpp"
#include "robreg/error.hpp"
#include "robreg/text.hpp"

using namespace robreg;

namespace {

Json minimal() { return Json{{"schema_version", kConfigSchemaVersion}}; }

std::vector<std::string> problems_of(const Json& user, const std::vector<std::string>& sets = {}) {
  try {
    config_from_json(merge_config(user, sets));
  } catch (const ConfigError& e) {
    return e.problems();
  }
  return {};
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("defaults") {
    const ExperimentConfig cfg = config_from_json(merge_config(minimal()));
    CHECK(cfg.target.kind() == TargetKind::Blocks);
    CHECK(cfg.noises.size() == 4);
    CHECK(cfg.noises[3] == NoiseModel::mixture(0.8, 100.0));
    CHECK(cfg.train_losses.size() == 5);
    CHECK(cfg.train_losses[2] == LossSpec::huber(1.345));
    CHECK(cfg.shape() == NetworkShape::nets256(1));
    CHECK(cfg.train.learning_rate == 0.01);
    CHECK(cfg.train.beta1 == 0.9);
    CHECK(cfg.train.beta2 == 0.99);
    CHECK(cfg.seed == 2021);
  }

  TEST_CASE("round trip through json") {
    Json user = minimal();
    user["target"] = {{"kind", "ka"}, {"d", 2}, {"ka_seed", 2021}};
    user["noises"] = Json::array({"t2", Json{{"kind", "mixture"}, {"xi", 0.7}, {"sd2", 50}}});
    user["train_losses"] = Json::array({Json{{"kind", "quantile"}, {"hyper", 0.3}}, "tukey"});
    user["n"] = {64, 256};
    user["hidden"] = {16, 16};
    user["inputs"] = {{"kind", "manifold"}, {"d_manifold", 1}, {"rho", 0.05}};
    const ExperimentConfig a = config_from_json(merge_config(user));
    const ExperimentConfig b = config_from_json(merge_config(config_to_json(a)));
    CHECK(config_to_json(a) == config_to_json(b));
    CHECK(a.target.dim() == 2);
    CHECK(a.target.name() == b.target.name());
    CHECK(b.noises[1] == NoiseModel::mixture(0.7, 50));
    CHECK(b.train_losses[0] == LossSpec::quantile(0.3));
    CHECK(b.ns == std::vector<int>{64, 256});
    CHECK(b.inputs.kind == InputDesign::Kind::Manifold);
  }

  TEST_CASE("dotted overrides") {
    Json j = default_config_json();
    apply_override(j, "train.lr=0.005");
    apply_override(j, "seed=11");
    apply_override(j, "target.kind=doppler");
    apply_override(j, "n=[32,64]");
    CHECK(j["train"]["lr"] == 0.005);
    CHECK(j["seed"] == 11);
    CHECK(j["target"]["kind"] == "doppler");
    const ExperimentConfig cfg = config_from_json(merge_config(minimal(), {"train.lr=0.005", "n=[32,64]"}));
    CHECK(cfg.train.learning_rate == 0.005);
    CHECK(cfg.ns.size() == 2);
    CHECK_THROWS_AS(apply_override(j, "train.learning_rate=1"), ConfigError);
    CHECK_THROWS_AS(apply_override(j, "nokey"), ConfigError);
    CHECK_THROWS_AS(apply_override(j, "seed.x=1"), ConfigError);
  }

  TEST_CASE("itemized errors") {
    Json user = minimal();
    user["replications"] = 0;
    user["test_size"] = -5;
    user["train_losses"] = Json::array();
    user["bogus"] = 1;
    const auto problems = problems_of(user);
    CHECK(problems.size() >= 4);
    std::string all;
    for (const auto& p : problems) all += p + "\n";
    CHECK(all.find("bogus") != std::string::npos);
    CHECK(all.find("replications") != std::string::npos);
    CHECK(all.find("train_losses") != std::string::npos);

    CHECK_FALSE(problems_of(Json{{"seed", 3}}).empty());
    CHECK_FALSE(problems_of(Json{{"schema_version", 99}}).empty());
    CHECK_FALSE(problems_of(Json::array()).empty());
    Json bad_loss = minimal();
    bad_loss["train_losses"] = {"huberish"};
    CHECK_FALSE(problems_of(bad_loss).empty());
    Json bad_noise = minimal();
    bad_noise["noises"] = {Json{{"kind", "mixture"}, {"xi", 2.0}}};
    CHECK_FALSE(problems_of(bad_noise).empty());
    Json short_schedule = minimal();
    short_schedule["train"] = {{"epochs", 10}};
    CHECK_FALSE(problems_of(short_schedule).empty());
    short_schedule["train"]["allow_short_schedule"] = true;
    CHECK(problems_of(short_schedule).empty());
  }

  TEST_CASE("loss and p parsing") {
    CHECK(loss_from_json(Json("lad")) == LossSpec::lad());
    CHECK(loss_from_json(Json{{"kind", "cauchy"}, {"hyper", 2.5}}) == LossSpec::cauchy(2.5));
    CHECK(loss_from_json(loss_to_json(LossSpec::tukey(3.0))) == LossSpec::tukey(3.0));
    CHECK_THROWS_AS(loss_from_json(Json{{"kind", "huber"}, {"hyper", -1}}), Error);
    CHECK(parse_p(Json("inf")) == std::numeric_limits<double>::infinity());
    CHECK(parse_p(Json(3)) == 3.0);
    CHECK(parse_p(Json("2.5")) == 2.5);
    CHECK_THROWS_AS(parse_p(Json("many")), Error);
  }

  TEST_CASE("files") {
    const auto dir = std::filesystem::temp_directory_path() / "robreg_config_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    const std::string good = (dir / "good.json").string();
    text::write_file(good, R"({"schema_version": 1, "seed": 5, "n": [64]})");
    const ExperimentConfig cfg = load_config(good, {"replications=3"});
    CHECK(cfg.seed == 5);
    CHECK(cfg.replications == 3);
    const std::string broken = (dir / "broken.json").string();
    text::write_file(broken, "{\"schema_version\": 1,");
    CHECK_THROWS_AS(load_config(broken), ConfigError);
    CHECK_THROWS_AS(load_config((dir / "absent.json").string()), Error);
    CHECK(load_config("").seed == 2021);
    for (const char* name : {"blocks128.json", "desk512.json", "smoke.json"})
      CHECK_NOTHROW(load_config(std::string(ROBREG_CONFIG_DIR) + "/" + name));
    std::filesystem::remove_all(dir);
  }
}

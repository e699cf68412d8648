#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "robreg/error.hpp"
#include "robreg/plots.hpp"

using namespace robreg;

namespace {

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t k = 0;
  for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++k;
  return k;
}

}  // namespace

TEST_SUITE("plots") {
  TEST_CASE("fit svg structure") {
    PrngStream rng(61);
    const TargetFn f = TargetFn::dj(TargetKind::Heavisine);
    const Dataset data = make_dataset(f, NoiseModel::cauchy(), 64, rng);
    std::vector<FitCurve> fits{{"ls", init_network(NetworkShape({1, 4, 1}), rng)},
                               {"huber", init_network(NetworkShape({1, 4, 1}), rng)}};
    const std::string svg = render_fit_svg(fits, f, data);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(count(svg, "<circle") == 64);
    CHECK(count(svg, "<polyline") == 3);
    CHECK(svg.find(">ls<") != std::string::npos);
    CHECK(svg.find(">huber<") != std::string::npos);
    CHECK(svg.find("nan") == std::string::npos);
    CHECK(svg.find("inf") == std::string::npos);
    CHECK(render_fit_svg(fits, f, data) == svg);
  }

  TEST_CASE("fit svg rejects multivariate data") {
    PrngStream rng(62);
    const TargetFn f = TargetFn::ka(2, ka_indices(2, 2021));
    const Dataset data = make_dataset(f, NoiseModel::normal(), 8, rng);
    CHECK_THROWS_WITH_AS(render_fit_svg({}, f, data), doctest::Contains("univariate only"),
                         InvalidArgument);
  }

  TEST_CASE("trace svg and file output") {
    TrainTrace pos{{4.0, 2.0, 1.0, 0.5}};
    TrainTrace mixed{{1.0, 0.0, -0.5}};
    const std::string svg = render_trace_svg({{"a", pos}, {"b", pos}});
    CHECK(count(svg, "<polyline") == 2);
    CHECK(svg.find("log10") != std::string::npos);
    CHECK(render_trace_svg({{"c", mixed}}).find("log10") == std::string::npos);

    const auto dir = std::filesystem::temp_directory_path() / "robreg_plots_test";
    std::filesystem::remove_all(dir);
    const std::string path = (dir / "nested" / "trace.svg").string();
    emit_trace_svg({{"a", pos}}, path);
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == render_trace_svg({{"a", pos}}));
    std::filesystem::remove_all(dir);
  }
}

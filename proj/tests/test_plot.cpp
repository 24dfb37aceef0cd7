#include <gtest/gtest.h>

#include <string>

#include "atlasid/plot.hpp"

using namespace atlasid;

namespace {

plot::Figure sample_figure() {
  plot::Figure fig;
  fig.title = "relative variograms";
  fig.reference_y = 0.1;
  plot::Series a{"g = 1e-4", "black", {1, 2, 4, 8}, {1.0, 0.8, 0.5, 0.2}};
  plot::Series b{"g = 2e-4", "red", {1, 2, 4, 8}, {1.0, 0.7, 0.3, 0.12}};
  fig.series = {a, b};
  return fig;
}

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST(Plot, DeterministicSvg) {
  const auto a = plot::render_svg(sample_figure());
  const auto b = plot::render_svg(sample_figure());
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.rfind("<svg", 0), 0u);
  EXPECT_NE(a.find("</svg>"), std::string::npos);
}

TEST(Plot, ContainsSeriesAxisAndReference) {
  const auto svg = plot::render_svg(sample_figure());
  // 8 data markers plus one legend marker per series.
  EXPECT_EQ(count(svg, "<circle"), 10u);
  EXPECT_EQ(count(svg, "fill=\"red\""), 5u);
  EXPECT_NE(svg.find("stroke-dasharray"), std::string::npos);
  EXPECT_NE(svg.find(">2^3<"), std::string::npos);
  EXPECT_NE(svg.find("g = 2e-4"), std::string::npos);
}

TEST(Plot, EscapesText) {
  auto fig = sample_figure();
  fig.title = "a<b & c";
  const auto svg = plot::render_svg(fig);
  EXPECT_NE(svg.find("a&lt;b &amp; c"), std::string::npos);
}

TEST(Plot, SkipsNonPositiveTimes) {
  auto fig = sample_figure();
  fig.series[0].t[0] = 0.0;
  EXPECT_EQ(count(plot::render_svg(fig), "<circle"), 9u);
  plot::Figure empty;
  EXPECT_NO_THROW(plot::render_svg(empty));
}

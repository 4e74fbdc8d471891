#include <gtest/gtest.h>

#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "macroplace/ppo.hpp"
#include "macroplace/report.hpp"
#include "support.hpp"

namespace macroplace {
namespace {

using testing::box_netlist;
using testing::fixture_design;

int count_of(const std::string& text, const std::string& needle) {
    int n = 0;
    for (std::size_t at = text.find(needle); at != std::string::npos; at = text.find(needle, at + 1)) ++n;
    return n;
}

std::set<std::string> macro_fills(const std::string& svg) {
    std::set<std::string> out;
    const std::regex re("<rect class=\"macro\"[^>]*fill=\"(#[0-9a-f]{6})\"");
    for (std::sregex_iterator it(svg.begin(), svg.end(), re), end; it != end; ++it) out.insert((*it)[1]);
    return out;
}

TEST(Svg, OneMacroGivesOneRectAndTheCanvas) {
    const Design d = Design::build(box_netlist(10, 10, {{"a", 3, 2}}));
    Placement p = Placement::empty(d);
    p.macros[0] = place_at_cell(d, {1, 1}, Orientation::R0);
    const std::string svg = render_svg(d, p);
    EXPECT_EQ(count_of(svg, "<rect class=\"macro\""), 1);
    EXPECT_EQ(count_of(svg, "<polygon class=\"canvas\""), 1);
    EXPECT_EQ(svg.rfind("</svg>\n"), svg.size() - 7);
}

TEST(Svg, OneRectPerDecomposedRectangle) {
    Netlist n = box_netlist(10, 10, {});
    Macro l;
    l.name = "l";
    l.shape = RectilinearShape::from_corners({{0, 0}, {0, 4}, {2, 4}, {2, 2}, {4, 2}, {4, 0}});
    n.macros.push_back(l);
    const Design d = Design::build(n);
    Placement p = Placement::empty(d);
    p.macros[0] = place_at_cell(d, {0, 0}, Orientation::R0);
    EXPECT_EQ(count_of(render_svg(d, p), "<rect class=\"macro\""),
              static_cast<int>(d.oriented(0, Orientation::R0).shape.rects().size()));
}

TEST(Svg, TwoGroupsGiveTwoColors) {
    const Design d = Design::build(box_netlist(10, 10, {{"g/a", 2, 2}, {"g/b", 2, 2}, {"h/c", 2, 2}}));
    ASSERT_EQ(d.group_count(), 2);
    Placement p = Placement::empty(d);
    p.macros[0] = place_at_cell(d, {0, 0}, Orientation::R0);
    p.macros[1] = place_at_cell(d, {0, 2}, Orientation::R0);
    p.macros[2] = place_at_cell(d, {3, 3}, Orientation::R0);
    EXPECT_EQ(macro_fills(render_svg(d, p)).size(), 2u);
}

TEST(Svg, PinsAndClustersAreDrawn) {
    const Design d = fixture_design("toy6.json");
    const EpisodeRecord rec = random_episode(d, {}, 0);
    const std::string svg = render_svg(d, rec.placement);
    int pins = 0;
    for (const Macro& m : d.netlist().macros) pins += static_cast<int>(m.pins.size());
    EXPECT_EQ(count_of(svg, "<line class=\"pin\""), pins);
    EXPECT_EQ(count_of(svg, "<circle class=\"cluster\""), d.cluster_count());
}

TEST(Svg, MatchesGoldenFile) {
    const Design d = fixture_design("toy6.json");
    const EpisodeRecord rec = random_episode(d, {}, 0);
    std::ifstream in(testing::golden("toy6_random_seed0.svg"), std::ios::binary);
    ASSERT_TRUE(in) << "missing golden file";
    std::stringstream want;
    want << in.rdbuf();
    EXPECT_EQ(render_svg(d, rec.placement), want.str());
}

TEST(Svg, InconsistentPlacementThrows) {
    const Design d = fixture_design("toy6.json");
    Placement p = Placement::empty(d);
    p.macros.pop_back();
    EXPECT_THROW(render_svg(d, p), InconsistentPlacement);
}

TEST(PlacementJson, RoundTripIsExact) {
    const Design d = fixture_design("fixture10.json");
    const EpisodeRecord rec = random_episode(d, {}, 4);
    const auto doc = placement_to_json(d, rec.placement);
    const Placement back = placement_from_json(d, nlohmann::json::parse(doc.dump()));
    for (int m = 0; m < d.macro_count(); ++m) {
        EXPECT_EQ(back.macros[m].origin, rec.placement.macros[m].origin);
        EXPECT_EQ(back.macros[m].anchor, rec.placement.macros[m].anchor);
        EXPECT_EQ(back.macros[m].orientation, rec.placement.macros[m].orientation);
    }
    EXPECT_EQ(back.clusters, rec.placement.clusters);
    EXPECT_EQ(compute_costs(d, back), rec.costs);
}

TEST(PlacementJson, ForeignPlacementIsRejected) {
    const Design toy = fixture_design("toy6.json");
    const Design big = fixture_design("fixture10.json");
    const auto doc = placement_to_json(big, random_episode(big, {}, 0).placement);
    EXPECT_THROW(placement_from_json(toy, doc), InconsistentPlacement);
    nlohmann::json renamed = nlohmann::json::parse(placement_to_json(toy, random_episode(toy, {}, 0).placement).dump());
    renamed["macros"][0]["name"] = "nobody";
    EXPECT_THROW(placement_from_json(toy, renamed), InconsistentPlacement);
}

TEST(CostsJson, CarriesWeightedTotalAndReward) {
    const ProxyCosts c{0.1, 0.9, 0.5, 1.0};
    const auto doc = costs_to_json(c, {});
    EXPECT_DOUBLE_EQ(doc.at("reward").get<double>(), -1.75);
    EXPECT_DOUBLE_EQ(doc.at("weighted_total").get<double>(), 1.75);
}

}  // namespace
}  // namespace macroplace

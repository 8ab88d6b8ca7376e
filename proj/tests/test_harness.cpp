#include <gtest/gtest.h>

#include <filesystem>

#include "smnuc/harness.hpp"

using namespace smnuc;

namespace {

WaterfallSearch quick_search() {
    WaterfallSearch s;
    s.lo_db = -4.0;
    s.hi_db = 20.0;
    s.step_db = 0.5;
    s.coarse_step_db = 2.0;
    s.stop.min_errors = 30;
    s.stop.max_blocks = 1000;
    s.stop.batch = 64;
    s.seed = 3;
    return s;
}

}  // namespace

TEST(Compare, SchemeAgainstItselfHasZeroGain) {
    const auto mcs = mcs_entry(4, 2);
    auto copy = scheme_sm(4, 2);
    copy.id = "sm-copy";
    const auto cmp = compare_schemes(mcs, {scheme_sm(4, 2), copy}, quick_search(), 0.1, FadingModel::fast, "sm", 300);
    ASSERT_EQ(cmp.table.size(), 2u);
    EXPECT_EQ(cmp.table[0].gain_db, 0.0);
    EXPECT_EQ(cmp.table[1].gain_db, 0.0);
    EXPECT_EQ(cmp.table[0].waterfall_snr_db, cmp.table[1].waterfall_snr_db);
    EXPECT_FALSE(cmp.evaluations.empty());
}

TEST(Compare, Validation) {
    const auto mcs = mcs_entry(4, 2);
    EXPECT_THROW(compare_schemes(mcs, {}, quick_search()), std::invalid_argument);
    EXPECT_THROW(compare_schemes(mcs, {scheme_sm(16, 2)}, quick_search()), std::invalid_argument);
    EXPECT_THROW(compare_schemes(mcs, {scheme_smp_no_feedback(4, 2)}, quick_search(), 0.1, FadingModel::fast, "sm", 300),
                 std::invalid_argument);
}

TEST(Compare, CsvLayout) {
    const std::vector<ComparisonRow> rows{{"sm", 4, 2, 2.5, 0.0}, {"proposed", 4, 2, 2.0, 0.5}};
    EXPECT_EQ(comparison_csv(rows), "scheme,mcs,n_t,waterfall_snr_db,gain_db\nsm,4,2,2.5,0\nproposed,4,2,2,0.5\n");
}

TEST(Export, WritesCsvPlotAndManifest) {
    const auto dir = std::filesystem::temp_directory_path() / "smnuc_export_test";
    std::filesystem::remove_all(dir);
    std::vector<BlerRow> rows{{"sm", 4, 2, 2.0, 128, 100, 100.0 / 128, 0.7, 0.85, "errors"},
                              {"sm", 4, 2, 1.0, 128, 120, 120.0 / 128, 0.88, 0.97, "errors"},
                              {"proposed", 4, 2, 1.0, 256, 100, 100.0 / 256, 0.33, 0.45, "errors"}};
    RunManifest m;
    m.command = "bler";
    m.config = {{"mcs", 4}};
    const auto files = export_results(rows, dir, m);
    EXPECT_TRUE(std::filesystem::exists(files.csv));
    EXPECT_TRUE(std::filesystem::exists(files.plot));
    EXPECT_TRUE(std::filesystem::exists(files.manifest));
    const auto back = read_bler_csv(files.csv);
    ASSERT_EQ(back.size(), 3u);
    EXPECT_EQ(back[2].scheme, "proposed");
    const std::string plot = read_file(files.plot);
    EXPECT_NE(plot.find("# sm n_t=2 mcs=4\n# snr_db bler ci_low ci_high\n1 0.9375"), std::string::npos);
    EXPECT_NE(plot.find("# proposed n_t=2 mcs=4"), std::string::npos);
    const auto j = nlohmann::json::parse(read_file(files.manifest));
    EXPECT_EQ(j["config_hash"], m.config_hash());
    std::filesystem::remove_all(dir);
}

TEST(Export, UnwritablePathFails) {
    RunManifest m;
    EXPECT_THROW(export_results({}, "/proc/smnuc_cannot_write", m), std::invalid_argument);
}

TEST(Grid, Construction) {
    const auto g = snr_grid(0.0, 1.0, 0.25);
    ASSERT_EQ(g.size(), 5u);
    EXPECT_EQ(g.back(), 1.0);
    EXPECT_THROW(snr_grid(1.0, 0.0, 0.1), std::invalid_argument);
}

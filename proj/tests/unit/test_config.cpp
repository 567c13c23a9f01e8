#include "qae/config.hpp"
#include "qae/errors.hpp"

#include <gtest/gtest.h>

using namespace qae;

TEST(KeyValueConfig, ParsesCommentsAndWhitespace) {
    auto c = KeyValueConfig::parse("# header\n\n seed = 7 \nwidths=8, 15,32\nname = a b # trailing\n");
    EXPECT_EQ(c.get_u64("seed", 0), 7u);
    EXPECT_EQ(c.get_size_list("widths", {}), (std::vector<std::size_t>{8, 15, 32}));
    EXPECT_EQ(c.get_string("name", ""), "a b");
    EXPECT_EQ(c.get_double("missing", 2.5), 2.5);
    EXPECT_FALSE(c.has("missing"));
}

TEST(KeyValueConfig, RejectsMalformedInput) {
    EXPECT_THROW(KeyValueConfig::parse("no equals sign\n"), FormatError);
    EXPECT_THROW(KeyValueConfig::parse("= value\n"), FormatError);
    EXPECT_THROW(KeyValueConfig::parse("a = 1\na = 2\n"), FormatError);
}

TEST(KeyValueConfig, TypedGetterErrors) {
    auto c = KeyValueConfig::parse("n = -3\nx = 1.5abc\nb = maybe\nl = 1,,2\n");
    EXPECT_THROW(c.get_size("n", 0), ArgumentError);
    EXPECT_THROW(c.get_double("x", 0), ArgumentError);
    EXPECT_THROW(c.get_bool("b", false), ArgumentError);
    EXPECT_THROW(c.get_size_list("l", {}), ArgumentError);
}

TEST(KeyValueConfig, BoolsAndDoubleLists) {
    auto c = KeyValueConfig::parse("t = true\nf = 0\nw = 0, 0.001,3e-3\n");
    EXPECT_TRUE(c.get_bool("t", false));
    EXPECT_FALSE(c.get_bool("f", true));
    EXPECT_EQ(c.get_double_list("w", {}), (std::vector<double>{0.0, 0.001, 0.003}));
}

TEST(KeyValueConfig, RequireKnownNamesTheUnknownKey) {
    auto c = KeyValueConfig::parse("seed = 1\nsede = 2\n");
    try {
        c.require_known({"seed"});
        FAIL();
    } catch (const ArgumentError& e) {
        EXPECT_NE(std::string(e.what()).find("sede"), std::string::npos);
    }
    EXPECT_NO_THROW(c.require_known({"seed", "sede"}));
}

TEST(KeyValueConfig, TextRoundTripIsSortedAndStable) {
    KeyValueConfig c;
    c.set("zeta", "1");
    c.set("alpha", "x y");
    EXPECT_EQ(c.to_text(), "alpha = x y\nzeta = 1\n");
    auto back = KeyValueConfig::parse(c.to_text());
    EXPECT_EQ(back.values(), c.values());
    EXPECT_EQ(back.to_text(), c.to_text());
}

TEST(KeyValueConfig, MergeLaterWins) {
    auto a = KeyValueConfig::parse("k = 1\nonly_a = 2\n");
    a.merge(KeyValueConfig::parse("k = 3\n"));
    EXPECT_EQ(a.get_string("k", ""), "3");
    EXPECT_EQ(a.get_string("only_a", ""), "2");
}

TEST(KeyValueConfig, LoadMissingFileFails) {
    EXPECT_THROW(KeyValueConfig::load("/nonexistent/qae.conf"), ArgumentError);
}

TEST(SplitList, Basics) {
    EXPECT_EQ(split_list("a, b ,c"), (std::vector<std::string>{"a", "b", "c"}));
    EXPECT_EQ(split_list("0:1;1:1", ';'), (std::vector<std::string>{"0:1", "1:1"}));
    EXPECT_TRUE(split_list("").empty());
}

TEST(Version, NonEmpty) { EXPECT_STRNE(version(), ""); }

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "urn/text.hpp"

using namespace urn;

TEST(Text, KeyValues)
{
    auto const kv = parse_key_values("# header\n[study]\nfamily = zipf\n s=2  # exponent\n\nname = \"a b\"\n");
    ASSERT_EQ(kv.size(), 3u);
    EXPECT_EQ(kv[0].first, "family");
    EXPECT_EQ(kv[0].second, "zipf");
    EXPECT_EQ(kv[1].first, "s");
    EXPECT_EQ(kv[1].second, "2");
    EXPECT_EQ(kv[2].second, "a b");
}

TEST(Text, KeyValueErrorsCarryLine)
{
    try
    {
        parse_key_values("a = 1\nbroken line\n");
        FAIL() << "expected a parse error";
    }
    catch (std::invalid_argument const& e)
    {
        EXPECT_NE(std::string(e.what()).find('2'), std::string::npos);
    }
}

TEST(Text, Numbers)
{
    EXPECT_EQ(parse_int("n", "1e7"), 10000000);
    EXPECT_EQ(parse_int("n", "42"), 42);
    EXPECT_THROW(parse_int("n", "1.5"), std::invalid_argument);
    EXPECT_DOUBLE_EQ(parse_double("x", "0.25"), 0.25);
    EXPECT_THROW(parse_double("x", "abc"), std::invalid_argument);
    EXPECT_TRUE(parse_bool("b", "true"));
    EXPECT_FALSE(parse_bool("b", "0"));
    EXPECT_EQ(parse_int_list("k", "1, 2,3"), (std::vector<int>{1, 2, 3}));
    EXPECT_EQ(parse_double_list("t", "1e4,1e8"), (std::vector<double>{1e4, 1e8}));
}

TEST(Text, ShortestRoundTrip)
{
    for (double x : {0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5, 0.0})
        EXPECT_EQ(parse_double("x", format_double(x)), x);
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(std::numeric_limits<double>::quiet_NaN()), "nan");
}

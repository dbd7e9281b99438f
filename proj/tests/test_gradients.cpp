#include <gtest/gtest.h>

#include "gradient_cases.hpp"

namespace sumkit::testing {
namespace {

class GradientCaseTest : public ::testing::TestWithParam<std::size_t> {};

TEST_P(GradientCaseTest, MatchesCentralDifferences) {
  const GradientCase& c = gradient_cases().at(GetParam());
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const GradCheckResult r = c.run(seed);
    EXPECT_LE(r.max_relative_error, kGradientTolerance)
        << c.name << " seed " << seed << ": " << r.worst_param << "[" << r.worst_index
        << "] analytic " << r.analytic << " numeric " << r.numeric;
    EXPECT_GT(r.coordinates_checked, 0u);
    EXPECT_GT(r.coordinates_checked, 4 * r.coordinates_skipped)
        << "skipped " << r.coordinates_skipped << " one-sided " << r.one_sided << " " << c.name << " seed " << seed;
    EXPECT_GE(r.cosine, 0.999) << c.name << " seed " << seed;
  }
}

INSTANTIATE_TEST_SUITE_P(AllCases, GradientCaseTest,
                         ::testing::Range<std::size_t>(0, gradient_cases().size()),
                         [](const ::testing::TestParamInfo<std::size_t>& info) {
                           return gradient_cases().at(info.param).name;
                         });

}  // namespace
}  // namespace sumkit::testing

#include <gtest/gtest.h>

#include <numbers>
#include <set>

#include "sparsephase/experiment.hpp"
#include "test_support.hpp"

using namespace sparsephase;
using sparsephase::testing::bit_equal;
using sparsephase::testing::random_field;

namespace {

PhantomSpec spec_of(PhantomKind kind, std::uint64_t pattern_seed = 1) {
  PhantomSpec s;
  s.kind = kind;
  s.pattern_seed = pattern_seed;
  return s;
}

ComplexField rotate(const ComplexField& f, double theta) {
  ComplexField out = f;
  for (auto& v : out.data()) v *= std::polar(1.0, theta);
  return out;
}

// Independent TV: plain double loop over the support with the bounding box as the grid edge.
double tv_loop(const ComplexField& f, std::size_t lo, std::size_t hi) {
  double sum = 0.0;
  for (std::size_t y = lo; y < hi; ++y) {
    for (std::size_t x = lo; x < hi; ++x) {
      const double dxr = x + 1 < hi ? f(x + 1, y).real() - f(x, y).real() : 0.0;
      const double dxi = x + 1 < hi ? f(x + 1, y).imag() - f(x, y).imag() : 0.0;
      const double dyr = y + 1 < hi ? f(x, y + 1).real() - f(x, y).real() : 0.0;
      const double dyi = y + 1 < hi ? f(x, y + 1).imag() - f(x, y).imag() : 0.0;
      sum += std::sqrt(dxr * dxr + dxi * dxi + dyr * dyr + dyi * dyi);
    }
  }
  return sum;
}

}  // namespace

// ---- supports ---------------------------------------------------------------

TEST(MakeSupport, FullScale) {
  const auto m = make_support(512, 250);
  EXPECT_EQ(m.count(), 62500u);
  EXPECT_TRUE(m.is_centro_symmetric());
}

TEST(MakeSupport, DeskScale) {
  const auto m = make_support(128, 60);
  EXPECT_EQ(m.count(), 3600u);
  EXPECT_TRUE(m.is_centro_symmetric());
}

TEST(MakeSupport, SmallCase) {
  const auto m = make_support(8, 2);
  for (std::size_t y = 0; y < 8; ++y) {
    for (std::size_t x = 0; x < 8; ++x) EXPECT_EQ(m(x, y), (x == 3 || x == 4) && (y == 3 || y == 4));
  }
}

TEST(MakeSupport, RejectsSizeViolations) {
  EXPECT_THROW(make_support(128, 70), std::invalid_argument);
  EXPECT_THROW(make_support(128, 64), std::invalid_argument);
  EXPECT_THROW(make_support(128, 31), std::invalid_argument);
  EXPECT_THROW(make_support(127, 30), std::invalid_argument);
}

TEST(TriangularTruncation, TwoByTwo) {
  const auto t = triangular_truncation(make_support(8, 2));
  EXPECT_EQ(t.count(), 3u);
  EXPECT_TRUE(t(3, 3));
  EXPECT_TRUE(t(3, 4));
  EXPECT_TRUE(t(4, 4));
  EXPECT_FALSE(t(4, 3));
}

TEST(TriangularTruncation, CountsAndAsymmetry) {
  for (std::size_t n : {2u, 4u, 10u, 60u}) {
    const auto t = triangular_truncation(make_support(4 * n, n));
    std::size_t expected = 0;
    for (std::size_t i = 1; i <= n; ++i) expected += i;
    EXPECT_EQ(t.count(), expected);
    EXPECT_FALSE(t.is_centro_symmetric());
  }
}

TEST(TriangularTruncation, RejectsNonSquareBlock) {
  std::vector<std::uint8_t> in(64, 0);
  for (std::size_t x = 2; x < 5; ++x) in[3 * 8 + x] = in[4 * 8 + x] = 1;
  EXPECT_THROW(triangular_truncation(SupportMask(8, 8, in)), std::invalid_argument);
  EXPECT_THROW(triangular_truncation(triangular_truncation(make_support(16, 6))), std::invalid_argument);
}

// ---- phantoms ---------------------------------------------------------------

TEST(BinaryPhantom, UnitModulusInsideZeroOutside) {
  const auto spec = spec_of(PhantomKind::BinaryPhase);
  const auto g = make_phantom(spec);
  const auto m = make_support(spec.image_size, spec.support_size);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (m[i]) {
      EXPECT_NEAR(std::abs(g[i]), 1.0, 1e-15);
    } else {
      EXPECT_EQ(g[i], complex_t{});
    }
  }
}

TEST(BinaryPhantom, TwoPhaseLevels) {
  const auto spec = spec_of(PhantomKind::BinaryPhase, 4);
  const auto g = make_phantom(spec);
  const auto m = make_support(spec.image_size, spec.support_size);
  std::size_t low = 0;
  std::size_t high = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!m[i]) continue;
    const double phi = std::arg(g[i]);
    if (std::abs(phi) < 1e-12) {
      ++low;
    } else if (std::abs(phi - spec.phase_step) < 1e-12) {
      ++high;
    } else {
      ADD_FAILURE() << "unexpected phase " << phi;
    }
  }
  EXPECT_GT(low, 0u);
  EXPECT_GT(high, 0u);
}

TEST(BinaryPhantom, TvAgreesWithLoop) {
  const auto spec = spec_of(PhantomKind::BinaryPhase);
  const auto g = make_phantom(spec);
  const std::size_t lo = (spec.image_size - spec.support_size) / 2;
  EXPECT_EQ(tv_value(g, make_support(spec.image_size, spec.support_size)), tv_loop(g, lo, lo + spec.support_size));
}

TEST(BinaryPhantom, DeterministicPerPatternSeed) {
  const auto a = make_phantom(spec_of(PhantomKind::BinaryPhase, 3));
  EXPECT_TRUE(bit_equal(a, make_phantom(spec_of(PhantomKind::BinaryPhase, 3))));
  EXPECT_FALSE(bit_equal(a, make_phantom(spec_of(PhantomKind::BinaryPhase, 4))));
}

TEST(BinaryPhantom, IsFarFromItsTwin) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto spec = spec_of(PhantomKind::BinaryPhase, seed);
    const auto g = make_phantom(spec);
    const auto m = make_support(spec.image_size, spec.support_size);
    const auto t = twin_correlations(twin_of(g), g, m);
    EXPECT_LE(t.c_up, kMaxPhantomTwinCorrelation) << "pattern seed " << seed;
  }
}

TEST(GrayPhantom, RangeAndModulus) {
  const auto spec = spec_of(PhantomKind::GrayPhase);
  const auto g = make_phantom(spec);
  const auto m = make_support(spec.image_size, spec.support_size);
  double lo = 10.0;
  double hi = -10.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!m[i]) continue;
    EXPECT_NEAR(std::abs(g[i]), 1.0, 1e-15);
    const double phi = std::arg(g[i]);
    lo = std::min(lo, phi);
    hi = std::max(hi, phi);
  }
  EXPECT_NEAR(lo, 0.0, 1e-12);
  EXPECT_NEAR(hi, spec.phase_range, 1e-12);
}

TEST(GrayPhantom, HasSmoothAndEdgeContent) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto spec = spec_of(PhantomKind::GrayPhase, seed);
    const auto g = make_phantom(spec);
    const std::size_t lo = (spec.image_size - spec.support_size) / 2;
    const std::size_t hi = lo + spec.support_size;
    std::vector<double> mods;
    for (std::size_t y = lo; y < hi; ++y) {
      for (std::size_t x = lo; x < hi; ++x) {
        const double dx = x + 1 < hi ? std::arg(g(x + 1, y)) - std::arg(g(x, y)) : 0.0;
        const double dy = y + 1 < hi ? std::arg(g(x, y + 1)) - std::arg(g(x, y)) : 0.0;
        mods.push_back(std::hypot(dx, dy));
      }
    }
    auto sorted = mods;
    std::sort(sorted.begin(), sorted.end());
    const double median = 0.5 * (sorted[sorted.size() / 2 - 1] + sorted[sorted.size() / 2]);
    const auto sharp = std::count_if(mods.begin(), mods.end(), [&](double v) { return v > 4.0 * median; });
    EXPECT_GE(static_cast<double>(sharp), 0.05 * static_cast<double>(mods.size())) << "pattern seed " << seed;
  }
}

TEST(GrayPhantom, Deterministic) {
  EXPECT_TRUE(bit_equal(make_phantom(spec_of(PhantomKind::GrayPhase, 2)), make_phantom(spec_of(PhantomKind::GrayPhase, 2))));
}

TEST(PhantomSpec, Validation) {
  PhantomSpec s;
  s.support_size = 64;
  EXPECT_THROW(make_phantom(s), std::invalid_argument);
}

// ---- twin -------------------------------------------------------------------

TEST(Twin, IsAnInvolution) {
  const auto f = random_field(10, 6, 3);
  EXPECT_TRUE(bit_equal(twin_of(twin_of(f)), f));
}

TEST(Twin, FlipConjugateConvention) {
  const auto f = random_field(4, 6, 2);
  const auto t = twin_of(f);
  EXPECT_EQ(t(0, 0), std::conj(f(3, 5)));
  EXPECT_EQ(t(1, 4), std::conj(f(2, 1)));
}

TEST(Twin, SharesFourierMagnitudeWithPhantom) {
  const auto g = make_phantom(spec_of(PhantomKind::BinaryPhase));
  const auto a = synthesize_magnitude(g);
  const auto b = synthesize_magnitude(twin_of(g));
  double peak = 0.0;
  for (double v : a.data()) peak = std::max(peak, v);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_LE(std::abs(a[i] - b[i]), 1e-12 * peak);
}

// ---- alignment and metrics ----------------------------------------------------

TEST(AlignGlobalPhase, RemovesConstantShift) {
  const auto spec = spec_of(PhantomKind::GrayPhase);
  const auto truth = make_phantom(spec);
  const auto m = make_support(spec.image_size, spec.support_size);
  const auto aligned = align_global_phase(rotate(truth, std::numbers::pi / 3.0), truth, m);
  for (std::size_t i = 0; i < truth.size(); ++i) EXPECT_LT(std::abs(aligned[i] - truth[i]), 1e-12);
  const auto same = align_global_phase(truth, truth, m);
  for (std::size_t i = 0; i < truth.size(); ++i) EXPECT_LT(std::abs(same[i] - truth[i]), 1e-15);
}

TEST(AlignGlobalPhase, BeatsGridSearch) {
  const auto truth = random_field(8, 8, 5);
  const auto recon = random_field(8, 8, 6);
  const SupportMask m(8, 8, std::vector<std::uint8_t>(64, 1));
  auto real_corr = [&](const ComplexField& r) {
    double s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) s += (r[i] * std::conj(truth[i])).real();
    return s;
  };
  const double best = real_corr(align_global_phase(recon, truth, m));
  for (int k = 0; k < 360; ++k) {
    EXPECT_GE(best + 1e-12, real_corr(rotate(recon, 2.0 * std::numbers::pi * k / 360.0)));
  }
}

TEST(AlignGlobalPhase, ZeroOverlapThrows) {
  const SupportMask m(4, 4, std::vector<std::uint8_t>(16, 1));
  EXPECT_THROW(align_global_phase(ComplexField(4, 4), random_field(4, 4, 1), m), std::domain_error);
}

class TwinMetricsFixture : public ::testing::Test {
 protected:
  PhantomSpec spec = spec_of(PhantomKind::BinaryPhase);
  ComplexField truth = make_phantom(spec);
  SupportMask mask = make_support(spec.image_size, spec.support_size);
};

TEST_F(TwinMetricsFixture, TruthIsSingleImage) {
  const auto t = twin_correlations(truth, truth, mask);
  EXPECT_NEAR(t.c_up, 1.0, 1e-12);
  EXPECT_LT(t.c_twin, 0.2);
  EXPECT_FALSE(t.twin_present);
}

TEST_F(TwinMetricsFixture, TwinIsDetected) {
  const auto t = twin_correlations(twin_of(truth), truth, mask);
  EXPECT_NEAR(t.c_twin, 1.0, 1e-12);
  EXPECT_FALSE(t.twin_present);
}

TEST_F(TwinMetricsFixture, SuperpositionHasBoth) {
  ComplexField mix = truth;
  const auto tw = twin_of(truth);
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = 0.5 * (mix[i] + tw[i]);
  const auto t = twin_correlations(mix, truth, mask);
  EXPECT_NEAR(t.c_up, t.c_twin, 1e-12);
  EXPECT_GT(t.c_up, 0.35);
  EXPECT_TRUE(t.twin_present);
}

TEST_F(TwinMetricsFixture, InvariantUnderGlobalPhase) {
  ComplexField mix = truth;
  const auto tw = twin_of(truth);
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = 0.7 * mix[i] + 0.3 * tw[i];
  const auto a = twin_correlations(mix, truth, mask);
  const auto b = twin_correlations(rotate(mix, 1.234), truth, mask);
  EXPECT_NEAR(a.c_up, b.c_up, 1e-12);
  EXPECT_NEAR(a.c_twin, b.c_twin, 1e-12);
}

TEST_F(TwinMetricsFixture, ThresholdIsConfigurable) {
  ComplexField mix = truth;
  const auto tw = twin_of(truth);
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = 0.5 * (mix[i] + tw[i]);
  EXPECT_FALSE(twin_correlations(mix, truth, mask, 0.99).twin_present);
}

TEST_F(TwinMetricsFixture, DegenerateNormThrows) {
  EXPECT_THROW(twin_correlations(ComplexField(truth.width(), truth.height()), truth, mask), std::domain_error);
}

TEST_F(TwinMetricsFixture, PhaseRmse) {
  EXPECT_NEAR(phase_rmse(rotate(truth, 0.4), truth, mask), 0.0, 1e-12);
  EXPECT_GT(phase_rmse(twin_of(truth), truth, mask), 0.1);
  EXPECT_NEAR(best_phase_rmse(twin_of(truth), truth, mask), 0.0, 1e-12);
}

TEST(WrapPhase, HalfOpenInterval) {
  EXPECT_DOUBLE_EQ(wrap_phase(std::numbers::pi), -std::numbers::pi);
  EXPECT_DOUBLE_EQ(wrap_phase(-std::numbers::pi), -std::numbers::pi);
  EXPECT_NEAR(wrap_phase(3.0 * std::numbers::pi / 2.0), -std::numbers::pi / 2.0, 1e-15);
  EXPECT_NEAR(wrap_phase(0.25), 0.25, 1e-15);
}

// ---- statistics ---------------------------------------------------------------

TEST(MeanAndStd, Cases) {
  EXPECT_EQ(mean_and_std({4.5}), (std::pair{4.5, 0.0}));
  EXPECT_EQ(mean_and_std({5.0, 5.0, 5.0}), (std::pair{5.0, 0.0}));
  const auto [m, s] = mean_and_std({1.0, 2.0, 3.0});
  EXPECT_DOUBLE_EQ(m, 2.0);
  EXPECT_DOUBLE_EQ(s, 1.0);
  EXPECT_THROW(mean_and_std({}), std::invalid_argument);
}

TEST_F(TwinMetricsFixture, RunStatisticsSummarizes) {
  RunReport a;
  a.final_field = truth;
  a.penalty_trace = {10.0, 1.0};
  a.seed = 1;
  RunReport b;
  b.final_field = truth;
  const auto tw = twin_of(truth);
  for (std::size_t i = 0; i < truth.size(); ++i) b.final_field[i] = 0.5 * (truth[i] + tw[i]);
  b.penalty_trace = {3.0};
  b.seed = 2;

  const auto s = run_statistics({a, b}, truth, mask);
  EXPECT_EQ(s.runs, 2u);
  EXPECT_EQ(s.twin_count, 1u);
  EXPECT_DOUBLE_EQ(s.twin_fraction, 0.5);
  EXPECT_DOUBLE_EQ(s.penalty_mean, 2.0);
  EXPECT_DOUBLE_EQ(s.penalty_std, std::sqrt(2.0));
  ASSERT_EQ(s.rows.size(), 2u);
  EXPECT_EQ(s.rows[0].seed, 1u);
  EXPECT_DOUBLE_EQ(s.rows[0].final_tv, tv_value(truth, mask));
  EXPECT_FALSE(s.rows[0].twin.twin_present);
  EXPECT_TRUE(s.rows[1].twin.twin_present);
  EXPECT_THROW(run_statistics({}, truth, mask), std::invalid_argument);
}

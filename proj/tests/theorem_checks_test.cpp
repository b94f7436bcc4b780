#include <flowforce/dj_solver.hpp>
#include <flowforce/theorem_checks.hpp>

#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <cstdint>

namespace ff = flowforce;
using ff::CheckStatus;

namespace {

const ff::Branch& scaled_branch() {
  static const ff::Branch br = ff::continue_branch(ff::ProblemTag::flow_force_scaled, 1.1, 0.03, 60, 64, 16);
  return br;
}

const ff::Branch& psi_branch() {
  static const ff::Branch br = ff::continue_branch(ff::ProblemTag::irrotational_psi, 1.2, 0.03, 60, 64, 16);
  return br;
}

const ff::CheckEntry& entry(const ff::CheckReport& rep, const std::string& name) {
  for (const auto& e : rep.entries)
    if (e.name == name) return e;
  throw std::out_of_range(name);
}

}  // namespace

TEST(Barrier, StreamsAboveAndBelow) {
  const ff::CheckEntry up = ff::check_barrier(1.5, 1.5, 0.0, 1e-10);
  EXPECT_EQ(up.status, CheckStatus::pass);
  EXPECT_NEAR(up.value, 0.375, 1e-15);
  // Supercritical stream d = 0.3 sits below r^2/2 and is exempt.
  const ff::CheckEntry lo = ff::check_barrier(ff::stream_head(0.3), ff::stream_flow_force(0.3), 0.0, 1e-10);
  EXPECT_EQ(lo.status, CheckStatus::exempt);
  EXPECT_LT(lo.value, 0.0);
}

TEST(Barrier, WavesNeedStrictMargin) {
  EXPECT_EQ(ff::check_barrier(2.0, 2.1, 0.01, 1e-10).status, CheckStatus::pass);
  EXPECT_EQ(ff::check_barrier(2.0, 2.0, 0.01, 1e-10).status, CheckStatus::fail);
  EXPECT_EQ(ff::check_barrier(2.0, 1.9, 0.01, 1e-10).status, CheckStatus::fail);
  // The tolerance never rescues a wave.
  EXPECT_EQ(ff::check_barrier(2.0, 2.0 - 1e-12, 0.01, 1e-6).status, CheckStatus::fail);
}

TEST(ScaledHeadBounds, Verdicts) {
  const ff::CheckEntry in = ff::check_scaled_head_bounds(ff::scaled_bernoulli(1.1), 0.01);
  EXPECT_EQ(in.status, CheckStatus::pass);
  EXPECT_NEAR(in.value, ff::scaled_bernoulli(1.1) - std::sqrt(1.5), 1e-15);
  EXPECT_EQ(ff::check_scaled_head_bounds(1.5, 0.01).status, CheckStatus::fail);
  EXPECT_EQ(ff::check_scaled_head_bounds(1.2, 0.01).status, CheckStatus::fail);
  EXPECT_EQ(ff::check_scaled_head_bounds(std::sqrt(1.5), 0.01).status, CheckStatus::fail);
  EXPECT_EQ(ff::check_scaled_head_bounds(1.5, 0.0).status, CheckStatus::exempt);
}

TEST(Region, Verdicts) {
  EXPECT_EQ(ff::check_region(2.0, 2.0, 1e-10).status, CheckStatus::pass);
  const ff::CheckEntry below = ff::check_region(2.0, 1.5, 1e-10);
  EXPECT_EQ(below.status, CheckStatus::fail);
  EXPECT_EQ(below.note, "below the lower boundary");
  EXPECT_EQ(ff::check_region(2.0, 2.5, 1e-10).note, "above the upper boundary");
  EXPECT_EQ(ff::check_region(1.5, 1.5, 1e-10).status, CheckStatus::pass);
  EXPECT_EQ(ff::check_region(1.2, 1.5, 1e-10).status, CheckStatus::skip);
  // Both conjugate streams of r = 2 sit on the boundary.
  const ff::BoundaryPair b = ff::bl_boundaries(2.0);
  EXPECT_EQ(ff::check_region(2.0, b.F_minus, 1e-12).status, CheckStatus::pass);
  EXPECT_EQ(ff::check_region(2.0, b.F_plus, 1e-12).status, CheckStatus::pass);
}

TEST(Unidirectional, StreamPassesWrongHeadFails) {
  const ff::WaveField w = ff::make_stream_wave_field(1.0, 16, 33, 2.0);
  EXPECT_EQ(ff::check_unidirectional(ff::cumulative_flow_force(w), 1e-8).status, CheckStatus::pass);
  ff::WaveField bad = w;
  bad.bernoulli = 0.5;  // below the bed kinetic head 1/(2 d^2)
  const ff::CheckEntry e = ff::check_unidirectional(ff::cumulative_flow_force(bad), 1e-8);
  EXPECT_EQ(e.status, CheckStatus::fail);
  EXPECT_LT(e.value, 0.0);
}

TEST(Stagnation, DetectsFlatAndFolded) {
  ff::HeightField h = ff::discrete_stream(ff::ProblemTag::flow_force_scaled, 1.0, 8, 8, 1.0);
  EXPECT_EQ(ff::check_stagnation(h).status, CheckStatus::pass);
  h.h(5, 4) = h.h(5, 3);
  const ff::CheckEntry e = ff::check_stagnation(h);
  EXPECT_EQ(e.status, CheckStatus::fail);
  EXPECT_EQ(e.note, "column 5");
  const ff::CheckReport rep = ff::verify_height_field(h, 1e-12);
  EXPECT_FALSE(rep.pass());
  EXPECT_EQ(entry(rep, "residual").status, CheckStatus::fail);
}

TEST(Residual, StoredValueBoundsRecomputed) {
  const ff::WaveSolution& s = scaled_branch().points.back();
  EXPECT_EQ(ff::check_residual(s.h, s.residual_norm).status, CheckStatus::pass);
  ff::HeightField bumped = s.h;
  bumped.h(7, 8) += 1e-4;
  EXPECT_EQ(ff::check_residual(bumped, s.residual_norm).status, CheckStatus::fail);
}

TEST(ComparisonEndpoints, ExactOnStreams) {
  const ff::HeightField hs = ff::discrete_stream(ff::ProblemTag::flow_force_scaled, 1.1, 8, 32, 1.0);
  for (const ff::CheckEntry& e : ff::comparison_endpoints(hs, 1e-13)) {
    EXPECT_EQ(e.status, CheckStatus::pass) << e.name;
    EXPECT_NEAR(e.value, 0.0, 1e-13);
  }
  const ff::HeightField Hc = ff::height_from_stream(1.1, 8, 400, 1.0);
  for (const ff::CheckEntry& e : ff::comparison_endpoints(Hc, 1e-10, false)) EXPECT_NEAR(e.value, 0.0, 1e-6);
}

TEST(ComparisonEndpoints, HoldOnBranchAndDetectLowSurface) {
  for (const ff::WaveSolution& s : scaled_branch().points) {
    const double tol = ff::solver_tolerance(s.residual_norm);
    for (const ff::CheckEntry& e : ff::comparison_endpoints(s.h, tol))
      ASSERT_EQ(e.status, CheckStatus::pass) << e.name << " a=" << s.amplitude << " v=" << e.value;
  }
  // Halving the depth under the same head puts R above R(inf zeta).
  ff::HeightField low = scaled_branch().points.back().h;
  for (std::size_t k = 0; k < low.h.size(); ++k) low.h.data()[k] *= 0.5;
  const auto ends = ff::comparison_endpoints(low, 1e-9);
  EXPECT_EQ(ends[1].name, "endpoint_lower");
  EXPECT_EQ(ends[1].status, CheckStatus::fail);
}

TEST(ComparisonEquation, VanishesOnOwnStream) {
  const ff::HeightField H = ff::height_from_stream(1.1, 8, 32, 1.0);
  const ff::ComparisonField cf = ff::w_equation_residual(H, 1.1);
  EXPECT_EQ(cf.w.max_abs(), 0.0);
  EXPECT_EQ(cf.residual, 0.0);
}

TEST(ComparisonEquation, MatchesDifferenceOfOperators) {
  // For two streams the w residual is L[H1] - E[H2]; both tend to zero.
  auto res = [](std::size_t np) {
    return ff::w_equation_residual(ff::height_from_stream(0.8, 8, np, 1.0), 0.9).residual;
  };
  const double r1 = res(64), r2 = res(128);
  EXPECT_GE(std::log2(r1 / r2), 1.8) << r1 << " " << r2;
}

TEST(ComparisonEquation, WithinThresholdOnBranch) {
  for (std::size_t n = 1; n < scaled_branch().points.size(); ++n) {
    const ff::HeightField& h = scaled_branch().points[n].h;
    const std::vector<double> z = h.surface();
    const double d = *std::max_element(z.begin(), z.end());
    const ff::CheckEntry e = ff::check_comparison_stencil(h, d);
    EXPECT_EQ(e.status, CheckStatus::pass) << n << " " << e.value << " " << e.threshold;
    const ff::CheckEntry c = ff::check_comparison_equation(h, d, scaled_branch().points[n].residual_norm);
    EXPECT_EQ(c.status, CheckStatus::pass) << n << " " << c.value << " " << c.threshold;
  }
}

TEST(ComparisonEquation, DiscreteFormVanishesOnStreamsOnly) {
  const ff::HeightField hs = ff::discrete_stream(ff::ProblemTag::flow_force_scaled, 1.1, 8, 16, 1.0);
  const ff::ComparisonField own = ff::discrete_comparison(hs, 1.1);
  EXPECT_LE(own.w.max_abs(), 1e-15);
  EXPECT_LE(own.residual, 1e-12);
  // Another stream of the same grid also solves the interior equations.
  EXPECT_LE(ff::discrete_comparison(hs, 1.25).residual, 1e-12);
  ff::HeightField bumped = hs;
  bumped.h(3, 8) += 1e-3;
  EXPECT_EQ(ff::check_comparison_equation(bumped, 1.1, 1e-12).status, CheckStatus::fail);
  EXPECT_THROW(ff::discrete_comparison(ff::discrete_stream(ff::ProblemTag::irrotational_psi, 1.0, 8, 8, 1.0), 1.0),
               ff::DomainError);
}

TEST(VerifySuite, ScaledBranchPasses) {
  for (const ff::WaveSolution& s : scaled_branch().points) {
    const ff::CheckReport rep = ff::verify_height_field(s.h, s.residual_norm);
    EXPECT_TRUE(rep.pass()) << "a=" << s.amplitude;
    if (s.amplitude > 0.0) { EXPECT_EQ(entry(rep, "scaled_head_bounds").status, CheckStatus::pass); }
  }
}

TEST(VerifySuite, IrrotationalBranchPasses) {
  for (const ff::WaveSolution& s : psi_branch().points) {
    const ff::CheckReport rep = ff::verify_height_field(s.h, s.residual_norm);
    EXPECT_TRUE(rep.pass()) << "a=" << s.amplitude;
    EXPECT_EQ(entry(rep, "barrier").status, CheckStatus::pass);
    EXPECT_EQ(entry(rep, "region").status, CheckStatus::pass);
  }
}

TEST(VerifySuite, FormulationsAgreeOnFlowForce) {
  // (q, p) flow force against the physical-field flow force of the same wave.
  const ff::WaveSolution& s = psi_branch().points.back();
  const ff::WaveField w = ff::physical_field(s.h, 2 * s.h.np() + 1);
  EXPECT_NEAR(ff::flow_force(w), s.flow_force, 1e-3);
  const ff::CheckReport a = ff::verify_height_field(s.h, s.residual_norm);
  const ff::CheckReport b = ff::verify_wave_field(w);
  EXPECT_EQ(entry(a, "barrier").status, entry(b, "barrier").status);
  EXPECT_EQ(entry(a, "region").status, entry(b, "region").status);
}

TEST(VerifySuite, Deterministic) {
  const ff::WaveSolution& s = scaled_branch().points.back();
  const ff::CheckReport a = ff::verify_height_field(s.h, s.residual_norm);
  const ff::CheckReport b = ff::verify_height_field(s.h, s.residual_norm);
  ASSERT_EQ(a.entries.size(), b.entries.size());
  for (std::size_t n = 0; n < a.entries.size(); ++n) {
    EXPECT_EQ(a.entries[n].name, b.entries[n].name);
    EXPECT_EQ(a.entries[n].status, b.entries[n].status);
    EXPECT_EQ(std::bit_cast<std::uint64_t>(a.entries[n].value), std::bit_cast<std::uint64_t>(b.entries[n].value));
  }
}

TEST(Report, VerdictIgnoresSkipAndExempt) {
  ff::CheckReport rep;
  rep.entries.push_back({"a", CheckStatus::pass, 0.0, 0.0, "", ""});
  rep.entries.push_back({"b", CheckStatus::skip, 0.0, 0.0, "", ""});
  rep.entries.push_back({"c", CheckStatus::exempt, 0.0, 0.0, "", ""});
  EXPECT_TRUE(rep.pass());
  rep.entries.push_back({"d", CheckStatus::fail, 0.0, 0.0, "", ""});
  EXPECT_FALSE(rep.pass());
  EXPECT_STREQ(ff::to_string(CheckStatus::exempt), "exempt");
}

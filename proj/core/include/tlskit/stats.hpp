#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tlskit/core.hpp"

namespace tlskit {

enum class PatientGroup : std::uint8_t { Invasion, NoInvasion };

// Per-patient TLS burden: detected structure count over slide area.
struct PatientDensity {
  std::string patient_id;
  std::uint64_t tls_count = 0;
  double area_mm2 = 0.0;
  double density = 0.0;  // tls_count / area_mm2
  PatientGroup group = PatientGroup::NoInvasion;
};

// count / area; throws ZeroArea unless area_mm2 > 0.
double tls_density(std::uint64_t tls_count, double area_mm2);

PatientDensity make_patient_density(std::string patient_id, std::uint64_t tls_count,
                                    double area_mm2, PatientGroup group);

enum class TestMethod : std::uint8_t { ShapiroWilk, MannWhitneyExact, MannWhitneyNormalApprox };

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  TestMethod method = TestMethod::ShapiroWilk;
};

// Shapiro-Wilk normality test, Royston's AS R94 approximation (valid for
// 3 <= n <= 5000). Throws TooFewSamples below n=3 and ZeroVariance for a
// constant sample.
TestResult shapiro_wilk(std::span<const double> sample);

enum class Alternative : std::uint8_t { TwoSided, Less, Greater };

// Rank-derived U statistics: U1 counts pairs with x > y (ties half) and
// U2 = n1*n2 - U1. Exposed separately so the U1 + U2 identity is testable.
struct MannWhitneyU {
  double u1 = 0.0;
  double u2 = 0.0;
  bool has_ties = false;
};

MannWhitneyU mann_whitney_components(std::span<const double> x, std::span<const double> y);

// Mann-Whitney U test. The reported statistic is min(U1, U2). P-values are
// exact (full enumeration of rank arrangements) when n1 + n2 <= 16 and the
// pooled sample is tie-free; otherwise the normal approximation with
// midrank tie correction and 0.5 continuity correction is used.
TestResult mann_whitney_u(std::span<const double> x, std::span<const double> y,
                          Alternative alternative = Alternative::TwoSided);

struct GroupSummary {
  PatientGroup group = PatientGroup::NoInvasion;
  std::size_t n = 0;
  double median_density = 0.0;
  // Absent when the group is constant (normality is then untestable).
  std::optional<TestResult> normality;
};

struct GroupComparison {
  GroupSummary invasion;
  GroupSummary no_invasion;
  TestResult mann_whitney;
};

// Protocol: per-group Shapiro-Wilk, then a two-sided Mann-Whitney U across
// groups. Both groups need at least 3 members (GroupTooSmall otherwise).
GroupComparison group_compare(std::span<const PatientDensity> patients);

// Standard normal CDF and quantile (Wichura's AS 241, ~1e-16 accurate).
double normal_cdf(double z);
double normal_quantile(double p);

}  // namespace tlskit

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "tlskit/rng.hpp"
#include "tlskit/stats.hpp"

using namespace tlskit;

namespace {

// --- Independent AS R94 oracle ----------------------------------------------
// Transliterated 1-based from the published routine, with Acklam's inverse
// normal (|rel err| < 1.2e-9) instead of AS 241, so it shares no code with
// the library implementation.

double acklam_inv_norm(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1 - plow;
  if (p < plow) {
    const double q = std::sqrt(-2 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  if (p <= phigh) {
    const double q = p - 0.5, r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  }
  const double q = std::sqrt(-2 * std::log(1 - p));
  return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
         ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
}

double oracle_poly(const double* cc, int nord, double x) {
  double res = cc[0];
  if (nord == 1) return res;
  double p = x * cc[nord - 1];
  for (int j = nord - 2; j >= 1; --j) p = (p + cc[j]) * x;
  return res + p;
}

// Returns {W, p}. x must be sorted ascending, n in [3, 5000].
std::pair<double, double> swilk_oracle(std::vector<double> x) {
  const int n = int(x.size());
  const int n2 = n / 2;
  static const double small_val = 1e-19;
  static const double g[2] = {-2.273, 0.459};
  static const double cc1[6] = {0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056};
  static const double cc2[6] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
  static const double cc3[4] = {0.5440, -0.39978, 0.025054, -6.714e-4};
  static const double cc4[4] = {1.3822, -0.77857, 0.062767, -0.0020322};
  static const double cc5[4] = {-1.5861, -0.31082, -0.083751, 0.0038915};
  static const double cc6[3] = {-0.4803, -0.082676, 0.0030302};

  std::vector<double> a1(n2 + 1);  // 1-based
  if (n == 3) {
    a1[1] = std::sqrt(0.5);
  } else {
    const double an25 = n + 0.25;
    double summ2 = 0.0;
    for (int i = 1; i <= n2; ++i) {
      a1[i] = acklam_inv_norm((i - 0.375) / an25);
      summ2 += a1[i] * a1[i];
    }
    summ2 *= 2.0;
    const double ssumm2 = std::sqrt(summ2);
    const double rsn = 1.0 / std::sqrt(double(n));
    const double aa1 = oracle_poly(cc1, 6, rsn) - a1[1] / ssumm2;
    int i1;
    double fac;
    if (n > 5) {
      i1 = 3;
      const double aa2 = -a1[2] / ssumm2 + oracle_poly(cc2, 6, rsn);
      fac = std::sqrt((summ2 - 2.0 * a1[1] * a1[1] - 2.0 * a1[2] * a1[2]) /
                      (1.0 - 2.0 * aa1 * aa1 - 2.0 * aa2 * aa2));
      a1[2] = aa2;
    } else {
      i1 = 2;
      fac = std::sqrt((summ2 - 2.0 * a1[1] * a1[1]) / (1.0 - 2.0 * aa1 * aa1));
    }
    a1[1] = aa1;
    for (int i = i1; i <= n2; ++i) a1[i] = -a1[i] / fac;
  }

  const double range = x[n - 1] - x[0];
  REQUIRE(range > small_val);

  double sx = 0.0;
  for (int i = 0; i < n; ++i) sx += x[i] / range;
  sx /= n;
  double sa = 0.0;
  for (int i = 0; i < n; ++i) {
    const int j = n - 1 - i;
    if (i != j) sa += (i < j ? -1.0 : 1.0) * a1[std::min(i, j) + 1];
  }
  sa /= n;

  double ssa = 0.0, ssx = 0.0, sax = 0.0;
  for (int i = 0; i < n; ++i) {
    const int j = n - 1 - i;
    const double asa =
        (i != j ? (i < j ? -1.0 : 1.0) * a1[std::min(i, j) + 1] : 0.0) - sa;
    const double xsx = x[i] / range - sx;
    ssa += asa * asa;
    ssx += xsx * xsx;
    sax += asa * xsx;
  }
  const double ssassx = std::sqrt(ssa * ssx);
  const double w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
  const double w = 1.0 - w1;

  double pw;
  if (n == 3) {
    const double pi6 = 1.90985931710274;
    const double stqr = 1.04719755119660;
    pw = std::clamp(pi6 * (std::asin(std::sqrt(w)) - stqr), 0.0, 1.0);
  } else {
    double y = std::log(1.0 - w);
    double m, s;
    const double an = n;
    if (n <= 11) {
      const double gamma = oracle_poly(g, 2, an);
      if (y >= gamma) return {w, 0.0};
      y = -std::log(gamma - y);
      m = oracle_poly(cc3, 4, an);
      s = std::exp(oracle_poly(cc4, 4, an));
    } else {
      m = oracle_poly(cc5, 4, std::log(an));
      s = std::exp(oracle_poly(cc6, 3, std::log(an)));
    }
    pw = 1.0 - 0.5 * std::erfc(-((y - m) / s) / std::sqrt(2.0));
  }
  return {w, pw};
}

}  // namespace

TEST_CASE("tls_density arithmetic and errors") {
  CHECK(tls_density(10, 100.0) == 0.1);
  CHECK(tls_density(0, 50.0) == 0.0);
  CHECK(tls_density(7, 3.5) == 2.0);
  CHECK_THROWS_AS(tls_density(1, 0.0), Error);
  CHECK_THROWS_AS(tls_density(1, -2.0), Error);

  const PatientDensity p = make_patient_density("p1", 7, 3.5, PatientGroup::Invasion);
  CHECK(p.density == 2.0);
}

TEST_CASE("shapiro_wilk closed-form n=3") {
  for (auto triple : {std::vector<double>{1, 2, 3}, {0, 2, 4}, {1, 2.5, 4}, {-3, 0, 3},
                      {10, 12, 14}}) {
    const TestResult r = shapiro_wilk(triple);
    CHECK(r.statistic == 1.0);  // evenly spaced: exact
    CHECK(r.p_value == doctest::Approx(1.0).epsilon(1e-9));
  }
  const TestResult skewed = shapiro_wilk(std::vector<double>{1, 2, 10});
  CHECK(skewed.statistic == doctest::Approx(0.8321917808).epsilon(1e-8));
  CHECK(skewed.p_value == doctest::Approx(0.1939175215).epsilon(1e-6));
}

TEST_CASE("shapiro_wilk rejects degenerate samples") {
  CHECK_THROWS_AS(shapiro_wilk(std::vector<double>{1, 2}), Error);
  CHECK_THROWS_AS(shapiro_wilk(std::vector<double>{5, 5, 5}), Error);
  try {
    shapiro_wilk(std::vector<double>{5, 5, 5});
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ZeroVariance);
  }
}

TEST_CASE("shapiro_wilk matches the independently coded oracle") {
  // Frozen cross-check values for [1..5] (W also matches the AS R94 value
  // 0.98676 reported by independent implementations of the algorithm).
  const TestResult five = shapiro_wilk(std::vector<double>{1, 2, 3, 4, 5});
  CHECK(five.statistic == doctest::Approx(0.9867621552).epsilon(1e-8));
  CHECK(five.p_value == doctest::Approx(0.9671739350).epsilon(1e-6));

  SplitMix64 rng(0x5117);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 3 + int(rng.next_u64() % 98);
    std::vector<double> x(n);
    for (double& v : x) v = rng.next_gaussian() * 3.0 + 1.0;
    if (trial % 3 == 0)
      for (double& v : x) v = std::exp(v * 0.3);  // skewed alternative
    std::sort(x.begin(), x.end());
    const auto [w_ref, p_ref] = swilk_oracle(x);
    const TestResult r = shapiro_wilk(x);
    REQUIRE(r.statistic == doctest::Approx(w_ref).epsilon(1e-6));
    REQUIRE(r.p_value == doctest::Approx(p_ref).epsilon(2e-5));
  }
}

TEST_CASE("shapiro_wilk W is location and scale invariant") {
  SplitMix64 rng(0x10CA);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 5 + int(rng.next_u64() % 40);
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) x[i] = rng.next_gaussian();
    const double a = rng.next_uniform(0.1, 10.0);
    const double b = rng.next_uniform(-100.0, 100.0);
    for (int i = 0; i < n; ++i) y[i] = a * x[i] + b;
    CHECK(shapiro_wilk(x).statistic ==
          doctest::Approx(shapiro_wilk(y).statistic).epsilon(1e-10));
  }
}

TEST_CASE("mann_whitney_u enumerated exact examples") {
  const TestResult r1 = mann_whitney_u(std::vector<double>{1, 2}, std::vector<double>{3, 4});
  CHECK(r1.statistic == 0.0);
  CHECK(r1.method == TestMethod::MannWhitneyExact);
  CHECK(r1.p_value == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  const TestResult r2 = mann_whitney_u(std::vector<double>{1, 3}, std::vector<double>{2, 4});
  CHECK(r2.statistic == 1.0);
  CHECK(r2.p_value == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  // Larger enumeration, frozen from the exact null distribution C(8,4):
  // x > y pair count U1 = 6, two-sided p = 48/70.
  const TestResult r3 =
      mann_whitney_u(std::vector<double>{1, 2, 5, 8}, std::vector<double>{3, 4, 6, 7});
  CHECK(r3.statistic == 6.0);
  CHECK(r3.p_value == doctest::Approx(48.0 / 70.0).epsilon(1e-12));
  const TestResult r3l = mann_whitney_u(std::vector<double>{1, 2, 5, 8},
                                        std::vector<double>{3, 4, 6, 7}, Alternative::Less);
  CHECK(r3l.p_value == doctest::Approx(24.0 / 70.0).epsilon(1e-12));
}

TEST_CASE("mann_whitney_u identical multisets under the approximation") {
  std::vector<double> x{3, 1, 4, 1, 5, 9, 2, 6, 5, 3};
  const TestResult r = mann_whitney_u(x, x);
  CHECK(r.method == TestMethod::MannWhitneyNormalApprox);
  CHECK(r.p_value == 1.0);
  CHECK(r.statistic == 50.0);  // n1*n2/2, the null mean
}

TEST_CASE("mann_whitney_u errors on empty samples") {
  CHECK_THROWS_AS(mann_whitney_u(std::vector<double>{}, std::vector<double>{1.0}), Error);
}

TEST_CASE("U1 + U2 == n1*n2 always") {
  SplitMix64 rng(0x1212);
  for (int trial = 0; trial < 300; ++trial) {
    const int n1 = 1 + int(rng.next_u64() % 30);
    const int n2 = 1 + int(rng.next_u64() % 30);
    std::vector<double> x(n1), y(n2);
    // Coarse values force plenty of ties.
    for (double& v : x) v = double(rng.next_u64() % 8);
    for (double& v : y) v = double(rng.next_u64() % 8);
    const MannWhitneyU u = mann_whitney_components(x, y);
    CHECK(u.u1 + u.u2 == double(n1) * n2);
    CHECK(u.u1 >= 0.0);
    CHECK(u.u2 >= 0.0);
  }
}

TEST_CASE("mann_whitney p is invariant under strictly monotone transforms") {
  SplitMix64 rng(0x3030);
  for (int trial = 0; trial < 40; ++trial) {
    const int n1 = 3 + int(rng.next_u64() % 12);
    const int n2 = 3 + int(rng.next_u64() % 12);
    std::vector<double> x(n1), y(n2);
    for (double& v : x) v = rng.next_gaussian();
    for (double& v : y) v = rng.next_gaussian() + 0.4;

    auto fx = x, fy = y;
    for (double& v : fx) v = std::exp(2.0 * v) + 1.0;
    for (double& v : fy) v = std::exp(2.0 * v) + 1.0;

    const TestResult a = mann_whitney_u(x, y);
    const TestResult b = mann_whitney_u(fx, fy);
    CHECK(a.statistic == b.statistic);
    CHECK(a.p_value == doctest::Approx(b.p_value).epsilon(1e-12));
  }
}

TEST_CASE("exact and approximate p agree for moderate tie-free samples") {
  // n1 = n2 = 8 rides the exact path; the continuity-corrected normal
  // approximation should land close even at this size.
  SplitMix64 rng(0xAB);
  for (int trial = 0; trial < 60; ++trial) {
    const int n1 = 8, n2 = 8;
    std::vector<double> x(n1), y(n2);
    for (double& v : x) v = rng.next_gaussian();
    for (double& v : y) v = rng.next_gaussian() + 0.7;
    const MannWhitneyU u = mann_whitney_components(x, y);
    if (u.has_ties) continue;
    const TestResult exact = mann_whitney_u(x, y);
    REQUIRE(exact.method == TestMethod::MannWhitneyExact);

    const double mu = n1 * n2 / 2.0;
    const double sigma = std::sqrt(n1 * n2 * (n1 + n2 + 1.0) / 12.0);
    const double approx_p =
        std::min(1.0, 2.0 * normal_cdf((std::min(u.u1, u.u2) - mu + 0.5) / sigma));
    CHECK(std::abs(exact.p_value - approx_p) < 0.03);
  }
}

TEST_CASE("group_compare protocol") {
  std::vector<PatientDensity> patients;
  SplitMix64 rng(0x6006);
  for (int i = 0; i < 20; ++i)
    patients.push_back(make_patient_density("inv" + std::to_string(i),
                                            std::uint64_t(40 + (rng.next_u64() % 20)), 10.0,
                                            PatientGroup::Invasion));
  for (int i = 0; i < 18; ++i)
    patients.push_back(make_patient_density("no" + std::to_string(i),
                                            std::uint64_t(rng.next_u64() % 20), 10.0,
                                            PatientGroup::NoInvasion));

  const GroupComparison cmp = group_compare(patients);
  CHECK(cmp.invasion.n == 20);
  CHECK(cmp.no_invasion.n == 18);
  CHECK(cmp.invasion.median_density > cmp.no_invasion.median_density);
  REQUIRE(cmp.invasion.normality.has_value());
  CHECK(cmp.mann_whitney.p_value < 0.001);  // strongly separated groups
}

TEST_CASE("group_compare rejects small groups") {
  std::vector<PatientDensity> two;
  two.push_back(make_patient_density("a", 1, 1.0, PatientGroup::Invasion));
  two.push_back(make_patient_density("b", 2, 1.0, PatientGroup::Invasion));
  for (int i = 0; i < 5; ++i)
    two.push_back(make_patient_density("n" + std::to_string(i), i, 1.0, PatientGroup::NoInvasion));
  CHECK_THROWS_AS(group_compare(two), Error);
  try {
    group_compare(two);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::GroupTooSmall);
  }
}

TEST_CASE("group_compare tolerates a constant group (normality omitted)") {
  std::vector<PatientDensity> patients;
  for (int i = 0; i < 5; ++i)
    patients.push_back(make_patient_density("c" + std::to_string(i), 3, 1.0, PatientGroup::Invasion));
  for (int i = 0; i < 5; ++i)
    patients.push_back(
        make_patient_density("v" + std::to_string(i), i, 1.0, PatientGroup::NoInvasion));
  const GroupComparison cmp = group_compare(patients);
  CHECK_FALSE(cmp.invasion.normality.has_value());
  CHECK(cmp.no_invasion.normality.has_value());
}

TEST_CASE("normal quantile and cdf round-trip") {
  for (double p : {0.001, 0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99, 0.999}) {
    CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
  }
  CHECK(normal_quantile(0.5) == 0.0);
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963985).epsilon(1e-9));
  CHECK_THROWS_AS(normal_quantile(0.0), Error);
  CHECK_THROWS_AS(normal_quantile(1.0), Error);
}

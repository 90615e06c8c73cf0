// Nonparametric statistics for the clinical pipeline.
//
// Shapiro-Wilk follows Royston's AS R94 approximation (Applied Statistics 44,
// 1995): Blom scores m_i = ppnd((i - 3/8)/(n + 1/4)) are polynomial-corrected
// at the two extreme positions, renormalized, and W is the squared
// correlation between the sorted sample and the antisymmetric weight vector.
// Significance comes from Royston's normalizing transformations: for
// 4 <= n <= 11 the statistic -ln(gamma - ln(1-W)) is treated as normal, for
// n >= 12 it is ln(1-W); n = 3 has the closed-form arcsine distribution.
//
// Mann-Whitney U ranks the pooled sample with midranks for ties and derives
// U1 = R1 - n1(n1+1)/2. Small tie-free problems (n1 + n2 <= 16) get exact
// p-values by enumerating all C(N, n1) rank arrangements; larger or tied
// problems use the normal approximation with the usual tie-corrected
// variance and a 0.5 continuity correction. The two-sided p doubles the
// smaller tail and clamps at 1, so identical samples report p = 1.

#include "tlskit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace tlskit {

// ---------------------------------------------------------------------------
// Normal distribution helpers
// ---------------------------------------------------------------------------

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// AS 241 PPND16 (Wichura 1988).
double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw Error(Errc::InvalidValue, "quantile needs p in (0,1), got " + std::to_string(p));

  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num = (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                             6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                           1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
                         1.3314166789178437745e2) * r + 3.3871328727963666080e0);
    const double den = (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                             3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                           5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
                         4.2313330701600911252e1) * r + 1.0);
    return q * num / den;
  }

  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    const double num = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                             2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                           3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
                         4.63033784615654529590e0) * r + 1.42343711074968357734e0);
    const double den = (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                             1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                           6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
                         2.05319162663775882187e0) * r + 1.0);
    val = num / den;
  } else {
    r -= 5.0;
    const double num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                             1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                           2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
                         5.46378491116411436990e0) * r + 6.65790464350110377720e0);
    const double den = (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                             1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                           1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                         5.99832206555887937690e-1) * r + 1.0);
    val = num / den;
  }
  return q < 0.0 ? -val : val;
}

// ---------------------------------------------------------------------------
// TLS density
// ---------------------------------------------------------------------------

double tls_density(std::uint64_t tls_count, double area_mm2) {
  if (!(area_mm2 > 0.0))
    throw Error(Errc::ZeroArea, "WSI area must be positive, got " + std::to_string(area_mm2));
  return double(tls_count) / area_mm2;
}

PatientDensity make_patient_density(std::string patient_id, std::uint64_t tls_count,
                                    double area_mm2, PatientGroup group) {
  PatientDensity p;
  p.patient_id = std::move(patient_id);
  p.tls_count = tls_count;
  p.area_mm2 = area_mm2;
  p.density = tls_density(tls_count, area_mm2);
  p.group = group;
  return p;
}

// ---------------------------------------------------------------------------
// Shapiro-Wilk (AS R94)
// ---------------------------------------------------------------------------

namespace {

double poly(std::span<const double> c, double x) {
  double acc = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
  return acc;
}

// Upper-half weight coefficients a[0] = a_n, a[1] = a_{n-1}, ... for n >= 4.
std::vector<double> swilk_weights(int n) {
  constexpr double c1[] = {0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056};
  constexpr double c2[] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};

  const int n2 = n / 2;
  std::vector<double> m(n2);
  double ssq = 0.0;
  for (int i = 1; i <= n2; ++i) {
    m[i - 1] = normal_quantile((i - 0.375) / (n + 0.25));  // negative (lower half)
    ssq += m[i - 1] * m[i - 1];
  }
  ssq *= 2.0;
  const double root_ssq = std::sqrt(ssq);
  const double rsn = 1.0 / std::sqrt(double(n));

  std::vector<double> a(n2);
  const double a_n = poly(c1, rsn) - m[0] / root_ssq;
  int first_plain;
  double fac;
  if (n > 5) {
    const double a_n1 = poly(c2, rsn) - m[1] / root_ssq;
    fac = std::sqrt((ssq - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) /
                    (1.0 - 2.0 * a_n * a_n - 2.0 * a_n1 * a_n1));
    a[1] = a_n1;
    first_plain = 2;
  } else {
    fac = std::sqrt((ssq - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a_n * a_n));
    first_plain = 1;
  }
  a[0] = a_n;
  for (int k = first_plain; k < n2; ++k) a[k] = -m[k] / fac;
  return a;
}

double swilk_p_value(double w, int n) {
  constexpr double g[] = {-2.273, 0.459};
  constexpr double c3[] = {0.5440, -0.39978, 0.025054, -6.714e-4};
  constexpr double c4[] = {1.3822, -0.77857, 0.062767, -0.0020322};
  constexpr double c5[] = {-1.5861, -0.31082, -0.083751, 0.0038915};
  constexpr double c6[] = {-0.4803, -0.082676, 0.0030302};

  if (n == 3) {
    const double pi6 = 6.0 / std::numbers::pi;
    const double stqr = std::asin(std::sqrt(0.75));
    const double p = pi6 * (std::asin(std::sqrt(w)) - stqr);
    return std::clamp(p, 0.0, 1.0);
  }
  if (w >= 1.0) return 1.0;

  const double an = double(n);
  double y, mean, sd;
  if (n <= 11) {
    const double gamma = poly(g, an);
    const double lw = std::log1p(-w);
    if (lw >= gamma) return 0.0;  // beyond the transform's support
    y = -std::log(gamma - lw);
    mean = poly(c3, an);
    sd = std::exp(poly(c4, an));
  } else {
    y = std::log1p(-w);
    mean = poly(c5, std::log(an));
    sd = std::exp(poly(c6, std::log(an)));
  }
  return std::clamp(1.0 - normal_cdf((y - mean) / sd), 0.0, 1.0);
}

}  // namespace

TestResult shapiro_wilk(std::span<const double> sample) {
  const int n = int(sample.size());
  if (n < 3) throw Error(Errc::TooFewSamples, "Shapiro-Wilk needs n >= 3, got " + std::to_string(n));
  if (n > 5000)
    throw Error(Errc::InvalidValue, "AS R94 is calibrated for n <= 5000, got " + std::to_string(n));

  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  if (!(x[n - 1] - x[0] > 0.0))
    throw Error(Errc::ZeroVariance, "constant sample; W is undefined");

  double w;
  if (n == 3) {
    // Closed form: weights are (-sqrt(1/2), 0, sqrt(1/2)).
    const double mean = (x[0] + x[1] + x[2]) / 3.0;
    double ssx = 0.0;
    for (double v : x) ssx += (v - mean) * (v - mean);
    w = std::clamp(0.5 * (x[2] - x[0]) * (x[2] - x[0]) / ssx, 0.0, 1.0);
  } else {
    const std::vector<double> upper = swilk_weights(n);
    std::vector<double> weights(n, 0.0);
    for (std::size_t k = 0; k < upper.size(); ++k) {
      weights[k] = -upper[k];
      weights[n - 1 - k] = upper[k];
    }

    double abar = 0.0, xbar = 0.0;
    for (int i = 0; i < n; ++i) {
      abar += weights[i];
      xbar += x[i];
    }
    abar /= n;
    xbar /= n;
    double ssa = 0.0, ssx = 0.0, sax = 0.0;
    for (int i = 0; i < n; ++i) {
      const double da = weights[i] - abar;
      const double dx = x[i] - xbar;
      ssa += da * da;
      ssx += dx * dx;
      sax += da * dx;
    }
    // 1 - W computed by difference of factors; accurate when W is near 1.
    const double root = std::sqrt(ssa * ssx);
    const double w1 = (root - sax) * (root + sax) / (ssa * ssx);
    w = std::clamp(1.0 - w1, 0.0, 1.0);
  }

  return TestResult{w, swilk_p_value(w, n), TestMethod::ShapiroWilk};
}

// ---------------------------------------------------------------------------
// Mann-Whitney U
// ---------------------------------------------------------------------------

namespace {

struct RankedPool {
  double r1 = 0.0;            // rank sum of the first sample
  bool has_ties = false;
  double tie_correction = 0;  // sum over tie groups of (t^3 - t)
};

RankedPool rank_pool(std::span<const double> x, std::span<const double> y) {
  struct Obs {
    double value;
    bool from_x;
  };
  std::vector<Obs> pool;
  pool.reserve(x.size() + y.size());
  for (double v : x) pool.push_back({v, true});
  for (double v : y) pool.push_back({v, false});
  std::sort(pool.begin(), pool.end(), [](const Obs& a, const Obs& b) { return a.value < b.value; });

  RankedPool out;
  std::size_t i = 0;
  while (i < pool.size()) {
    std::size_t j = i;
    while (j + 1 < pool.size() && pool[j + 1].value == pool[i].value) ++j;
    const double t = double(j - i + 1);
    const double midrank = 0.5 * (double(i + 1) + double(j + 1));
    if (t > 1) {
      out.has_ties = true;
      out.tie_correction += t * t * t - t;
    }
    for (std::size_t k = i; k <= j; ++k)
      if (pool[k].from_x) out.r1 += midrank;
    i = j + 1;
  }
  return out;
}

// Counts of rank arrangements per U1 value, for tie-free pools of size
// n1 + n2. Enumerates every n1-subset of {1..N}.
std::vector<std::int64_t> exact_u_distribution(int n1, int n2) {
  const int n = n1 + n2;
  std::vector<std::int64_t> dist(std::size_t(n1) * n2 + 1, 0);
  std::vector<int> pick(n1);
  for (int i = 0; i < n1; ++i) pick[i] = i + 1;

  const int base = n1 * (n1 + 1) / 2;
  for (;;) {
    int sum = 0;
    for (int v : pick) sum += v;
    ++dist[sum - base];

    int i = n1 - 1;
    while (i >= 0 && pick[i] == n - (n1 - 1 - i)) --i;
    if (i < 0) break;
    ++pick[i];
    for (int k = i + 1; k < n1; ++k) pick[k] = pick[k - 1] + 1;
  }
  return dist;
}

}  // namespace

MannWhitneyU mann_whitney_components(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw Error(Errc::EmptySample, "both samples must be non-empty");
  const double n1 = double(x.size());
  const double n2 = double(y.size());
  const RankedPool pool = rank_pool(x, y);
  MannWhitneyU u;
  u.u1 = pool.r1 - n1 * (n1 + 1.0) / 2.0;
  u.u2 = n1 * n2 - u.u1;
  u.has_ties = pool.has_ties;
  return u;
}

TestResult mann_whitney_u(std::span<const double> x, std::span<const double> y,
                          Alternative alternative) {
  if (x.empty() || y.empty()) throw Error(Errc::EmptySample, "both samples must be non-empty");
  const int n1 = int(x.size());
  const int n2 = int(y.size());
  const double n1n2 = double(n1) * double(n2);
  const RankedPool pool = rank_pool(x, y);
  MannWhitneyU u;
  u.u1 = pool.r1 - double(n1) * (n1 + 1.0) / 2.0;
  u.u2 = n1n2 - u.u1;
  u.has_ties = pool.has_ties;
  const double u_min = std::min(u.u1, u.u2);

  if (n1 + n2 <= 16 && !u.has_ties) {
    const std::vector<std::int64_t> dist = exact_u_distribution(n1, n2);
    double total = 0.0;
    for (auto c : dist) total += double(c);

    const auto tail_le = [&](double bound) {
      std::int64_t acc = 0;
      for (std::size_t v = 0; v < dist.size(); ++v)
        if (double(v) <= bound) acc += dist[v];
      return double(acc) / total;
    };
    const auto tail_ge = [&](double bound) {
      std::int64_t acc = 0;
      for (std::size_t v = 0; v < dist.size(); ++v)
        if (double(v) >= bound) acc += dist[v];
      return double(acc) / total;
    };

    double p;
    switch (alternative) {
      case Alternative::Less: p = tail_le(u.u1); break;
      case Alternative::Greater: p = tail_ge(u.u1); break;
      case Alternative::TwoSided:
      default: p = std::min(1.0, tail_le(u_min) + tail_ge(n1n2 - u_min)); break;
    }
    return TestResult{u_min, p, TestMethod::MannWhitneyExact};
  }

  const double n = double(n1 + n2);
  const double mu = n1n2 / 2.0;
  const double sigma_sq = n1n2 / 12.0 * ((n + 1.0) - pool.tie_correction / (n * (n - 1.0)));

  double p;
  if (sigma_sq <= 0.0) {
    p = 1.0;  // every pooled value identical
  } else {
    const double sigma = std::sqrt(sigma_sq);
    switch (alternative) {
      case Alternative::Less: p = normal_cdf((u.u1 - mu + 0.5) / sigma); break;
      case Alternative::Greater: p = 1.0 - normal_cdf((u.u1 - mu - 0.5) / sigma); break;
      case Alternative::TwoSided:
      default: p = std::min(1.0, 2.0 * normal_cdf((u_min - mu + 0.5) / sigma)); break;
    }
  }
  return TestResult{u_min, std::clamp(p, 0.0, 1.0), TestMethod::MannWhitneyNormalApprox};
}

// ---------------------------------------------------------------------------
// Group comparison
// ---------------------------------------------------------------------------

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

GroupSummary summarize(PatientGroup g, const std::vector<double>& densities) {
  GroupSummary s;
  s.group = g;
  s.n = densities.size();
  s.median_density = median(densities);
  try {
    s.normality = shapiro_wilk(densities);
  } catch (const Error& e) {
    if (e.code() != Errc::ZeroVariance) throw;
  }
  return s;
}

}  // namespace

GroupComparison group_compare(std::span<const PatientDensity> patients) {
  std::vector<double> invasion, no_invasion;
  for (const PatientDensity& p : patients)
    (p.group == PatientGroup::Invasion ? invasion : no_invasion).push_back(p.density);

  if (invasion.size() < 3 || no_invasion.size() < 3)
    throw Error(Errc::GroupTooSmall, "need >= 3 patients per group, got " +
                                         std::to_string(invasion.size()) + " invasion / " +
                                         std::to_string(no_invasion.size()) + " no-invasion");

  GroupComparison cmp;
  cmp.invasion = summarize(PatientGroup::Invasion, invasion);
  cmp.no_invasion = summarize(PatientGroup::NoInvasion, no_invasion);
  cmp.mann_whitney = mann_whitney_u(invasion, no_invasion, Alternative::TwoSided);
  return cmp;
}

}  // namespace tlskit

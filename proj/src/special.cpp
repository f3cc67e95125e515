#include "snc/special.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace snc {

namespace {

constexpr double kInvSqrt2 = 0.7071067811865475244008443621048;
constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599344;
constexpr double kTwoPi = 6.2831853071795864769252867665590;

// 24-point Gauss-Legendre nodes/weights on [0,1] (symmetric pairs folded
// out below from the [-1,1] rule).
constexpr int kGlN = 12;
constexpr std::array<double, kGlN> kGlX = {
    0.0640568928626056260850430826247450385909,
    0.1911188674736163091586398207570696318404,
    0.3150426796961633743867932913198102407864,
    0.4337935076260451384870842319133497124524,
    0.5454214713888395356583756172183723700107,
    0.6480936519369755692524957869107476266696,
    0.7401241915785543642438281030999784255232,
    0.8200019859739029219539498726697452080761,
    0.8864155270044010342131543419821967550873,
    0.9382745520027327585236490017087214496548,
    0.9747285559713094981983919930081690617411,
    0.9951872199970213601799974097007368118745};
constexpr std::array<double, kGlN> kGlW = {
    0.1279381953467521569740561652246953718517,
    0.1258374563468282961213753825111836887264,
    0.1216704729278033912044631534762624256070,
    0.1155056680537256013533444839067835598622,
    0.1074442701159656347825773424466062227946,
    0.0976186521041138882698806644642471544279,
    0.0861901615319532759171852029837426671850,
    0.0733464814110803057340336152531165181193,
    0.0592985849154367807463677585001085845412,
    0.0442774388174198061686027482113382288593,
    0.0285313886289336631813078159518782864491,
    0.0123412297999871995468056670700372915759};

// One 24-point Gauss-Legendre panel of the Owen integrand on [lo,hi].
double owen_panel(double h2, double lo, double hi) {
  const double c = 0.5 * (lo + hi);
  const double r = 0.5 * (hi - lo);
  double acc = 0.0;
  for (int k = 0; k < kGlN; ++k) {
    const double t1 = c + r * kGlX[k];
    const double t2 = c - r * kGlX[k];
    const double f1 = std::exp(-0.5 * h2 * (1.0 + t1 * t1)) / (1.0 + t1 * t1);
    const double f2 = std::exp(-0.5 * h2 * (1.0 + t2 * t2)) / (1.0 + t2 * t2);
    acc += kGlW[k] * (f1 + f2);
  }
  return acc * r;
}

// Owen's T for h >= 0, 0 < a <= 1, by composite Gauss-Legendre on the
// defining integral. Panels shrink with h so the e^{-h^2 t^2/2} peak near
// t=0 stays resolved.
double owen_core(double h, double a) {
  const double h2 = h * h;
  if (0.5 * h2 > 745.0) return 0.0;  // integrand underflows everywhere
  int panels = 1;
  if (h > 1.0) panels = static_cast<int>(std::ceil(a * h));
  if (panels < 1) panels = 1;
  if (panels > 8) panels = 8;
  double acc = 0.0;
  const double step = a / panels;
  for (int i = 0; i < panels; ++i)
    acc += owen_panel(h2, i * step, (i + 1) * step);
  return acc / kTwoPi;
}

}  // namespace

double norm_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double norm_logpdf(double x) {
  return -0.5 * x * x - 0.91893853320467274178032973640562;
}

double norm_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("norm_quantile: p must lie in (0,1)");
  // Wichura (1988), algorithm AS 241, PPND16.
  const double q = p - 0.5;
  double r;
  if (std::fabs(q) <= 0.425) {
    r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                 6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
               1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
             1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                 3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
               5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
             4.2313330701600911252e+1) * r + 1.0);
  }
  r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double x;
  if (r <= 5.0) {
    r -= 1.6;
    x = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
            3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
          4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
          2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    x = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
          5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
  }
  return (q < 0.0) ? -x : x;
}

double norm_logcdf(double x) {
  if (x > -20.0) return std::log(norm_cdf(x));
  // asymptotic expansion: Phi(x) ~ phi(x)/|x| (1 - 1/x^2 + 3/x^4 - 15/x^6)
  const double x2 = x * x;
  const double corr = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
  return norm_logpdf(x) - std::log(-x) + std::log(corr);
}

double owen_t(double h, double a) {
  if (std::isnan(h) || std::isnan(a)) return std::numeric_limits<double>::quiet_NaN();
  if (a == 0.0) return 0.0;
  double sign = 1.0;
  if (a < 0.0) {
    a = -a;
    sign = -1.0;
  }
  h = std::fabs(h);
  if (std::isinf(a)) {
    // T(h,inf) = (1 - Phi(h))/2 for h >= 0
    return sign * 0.5 * norm_cdf(-h);
  }
  if (a <= 1.0) return sign * owen_core(h, a);
  // reduction to slope <= 1: T(h,a) + T(ah,1/a) = (Phi(h)+Phi(ah))/2 - Phi(h)Phi(ah)
  const double ph = norm_cdf(h);
  const double pah = norm_cdf(a * h);
  const double t = 0.5 * (ph + pah) - ph * pah - owen_core(a * h, 1.0 / a);
  return sign * t;
}

double gamma_p(double a, double x) {
  if (!(a > 0.0)) throw std::domain_error("gamma_p: a must be positive");
  if (x < 0.0) throw std::domain_error("gamma_p: x must be nonnegative");
  if (x == 0.0) return 0.0;
  const double gln = std::lgamma(a);
  if (x < a + 1.0) {
    // series representation
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < 500; ++n) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * 1e-16)
        return sum * std::exp(-x + a * std::log(x) - gln);
    }
    return sum * std::exp(-x + a * std::log(x) - gln);
  }
  // continued fraction for Q(a,x)
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  const double q = std::exp(-x + a * std::log(x) - gln) * h;
  return 1.0 - q;
}

double gamma_p_inv(double a, double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("gamma_p_inv: p must lie in (0,1)");
  // Wilson-Hilferty start, then safeguarded Newton.
  double x;
  {
    const double g = norm_quantile(p);
    const double t = 1.0 - 1.0 / (9.0 * a) + g / (3.0 * std::sqrt(a));
    x = a * t * t * t;
    if (!(x > 0.0)) x = a * std::exp((std::log(p) + std::lgamma(a + 1.0)) / a);
    if (!(x > 0.0) || !std::isfinite(x)) x = 0.5 * a;
  }
  const double gln = std::lgamma(a);
  double lo = 0.0, hi = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 100; ++it) {
    const double f = gamma_p(a, x) - p;
    if (f > 0.0) hi = x; else lo = x;
    const double logpdf = -x + (a - 1.0) * std::log(x) - gln;
    double step = f * std::exp(-logpdf);
    double xn = x - step;
    if (!(xn > lo && (xn < hi))) {
      xn = std::isfinite(hi) ? 0.5 * (lo + hi) : 2.0 * x;
    }
    if (std::fabs(xn - x) <= 1e-14 * (std::fabs(x) + 1e-300)) return xn;
    x = xn;
  }
  return x;
}

}  // namespace snc

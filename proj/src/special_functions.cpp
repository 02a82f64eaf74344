#include "pmiris/special_functions.hpp"

#include "pmiris/error.hpp"

#include <cmath>
#include <limits>

namespace pmiris::special {

namespace {

constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;
constexpr int kMaxIter = 100000;

// Continued fraction for I_x(a, b); converges fast for x < (a + 1) / (a + b + 2).
double beta_cf(double a, double b, double x) {
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) <= kEps) return h;
    }
    throw Error(ErrorCode::InvalidArgument, "incomplete beta continued fraction did not converge");
}

double log_beta_prefactor(double a, double b, double x) {
    return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
}

double gamma_series(double s, double x) {
    double ap = s, sum = 1.0 / s, del = sum;
    for (int n = 0; n < kMaxIter; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * kEps) return sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
    }
    throw Error(ErrorCode::InvalidArgument, "incomplete gamma series did not converge");
}

double gamma_cf(double s, double x) {
    double b = x + 1.0 - s, c = 1.0 / kTiny, d = 1.0 / b, h = d;
    for (int i = 1; i <= kMaxIter; ++i) {
        const double an = -i * (i - s);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) <= kEps) return std::exp(-x + s * std::log(x) - std::lgamma(s)) * h;
    }
    throw Error(ErrorCode::InvalidArgument, "incomplete gamma continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0) || !(b > 0)) throw Error(ErrorCode::InvalidArgument, "incomplete beta needs a, b > 0");
    if (!(x >= 0 && x <= 1)) throw Error(ErrorCode::InvalidArgument, "incomplete beta needs x in [0,1]");
    if (x == 0) return 0.0;
    if (x == 1) return 1.0;
    if (x < (a + 1.0) / (a + b + 2.0)) return std::exp(log_beta_prefactor(a, b, x)) * beta_cf(a, b, x) / a;
    return 1.0 - std::exp(log_beta_prefactor(b, a, 1.0 - x)) * beta_cf(b, a, 1.0 - x) / b;
}

double gamma_p(double s, double x) {
    if (!(s > 0) || !(x >= 0)) throw Error(ErrorCode::InvalidArgument, "incomplete gamma needs s > 0, x >= 0");
    if (x == 0) return 0.0;
    if (std::isinf(x)) return 1.0;
    return x < s + 1.0 ? gamma_series(s, x) : 1.0 - gamma_cf(s, x);
}

double gamma_q(double s, double x) {
    if (!(s > 0) || !(x >= 0)) throw Error(ErrorCode::InvalidArgument, "incomplete gamma needs s > 0, x >= 0");
    if (x == 0) return 1.0;
    if (std::isinf(x)) return 0.0;
    return x < s + 1.0 ? 1.0 - gamma_series(s, x) : gamma_cf(s, x);
}

double f_survival(double f, double d1, double d2) {
    if (!(d1 > 0) || !(d2 > 0)) throw Error(ErrorCode::InvalidArgument, "F distribution needs positive df");
    if (!(f > 0)) return 1.0;
    if (std::isinf(f)) return 0.0;
    // 1 - I_x(d1/2, d2/2) with x = d1 f / (d1 f + d2) equals I_{1-x}(d2/2, d1/2)
    return incomplete_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f));
}

double chi2_survival(double x, double k) {
    if (!(k > 0)) throw Error(ErrorCode::InvalidArgument, "chi-squared needs k > 0");
    if (!(x > 0)) return 1.0;
    return gamma_q(k / 2.0, x / 2.0);
}

}  // namespace pmiris::special

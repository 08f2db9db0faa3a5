#include "fracwave/mittag_leffler.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>

#include "fracwave/errors.hpp"

namespace fracwave {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSeriesSwitch = 1.0;
constexpr double kTailTolerance = 1e-16;
constexpr double kQuadratureTolerance = 1e-11;
constexpr int kMaxTailTerms = 60;
constexpr int kMaxSeriesTerms = 10000;
// Split the cut integral at |s| = x^(1/alpha) only while e^{-|s|} still
// matters in double precision.
constexpr double kSplitLimit = 60.0;

bool is_integer(double v) { return std::floor(v) == v; }

// sin(pi v) and cos(pi v) with exact zeros at integers and half-integers.
double sin_pi(double v) {
  if (is_integer(v)) return 0.0;
  double r = std::fmod(v, 2.0);
  if (r < 0) r += 2.0;
  if (r == 0.5) return 1.0;
  if (r == 1.5) return -1.0;
  return std::sin(kPi * r);
}

double cos_pi(double v) {
  if (is_integer(v + 0.5)) return 0.0;
  double r = std::fmod(v, 2.0);
  if (r < 0) r += 2.0;
  if (r == 0.0) return 1.0;
  if (r == 1.0) return -1.0;
  return std::cos(kPi * r);
}

std::string describe(double alpha, double beta, double z) {
  std::ostringstream os;
  os.precision(17);
  os << "(alpha=" << alpha << ", beta=" << beta << ", z=" << z << ")";
  return os.str();
}

// Double-exponential quadrature with level halving; `node(t)` returns the
// transformed integrand (integrand times Jacobian) at t. Returns false when
// the node budget runs out first.
template <class Node>
bool de_quadrature(Node&& node, double t_lo, double t_hi, std::size_t max_nodes,
                   double tol, double& result) {
  double h = 0.5;
  double sum = 0.0;
  double abs_sum = 0.0;
  std::size_t used = 0;
  for (double t = t_lo; t <= t_hi + 1e-12; t += h) {
    const double v = node(t);
    sum += v;
    abs_sum += std::abs(v);
    ++used;
  }
  double estimate = h * sum;
  for (int level = 1;; ++level) {
    const double step = h;
    h *= 0.5;
    const auto added = static_cast<std::size_t>((t_hi - t_lo) / step + 0.5);
    if (used + added > max_nodes) {
      result = estimate;
      return false;
    }
    for (std::size_t i = 0; i < added; ++i) {
      const double v = node(t_lo + h + static_cast<double>(i) * step);
      sum += v;
      abs_sum += std::abs(v);
    }
    used += added;
    const double refined = h * sum;
    const double change = std::abs(refined - estimate);
    estimate = refined;
    if (level >= 3 && change <= tol * h * abs_sum) {
      result = estimate;
      return true;
    }
  }
}

}  // namespace

double rgamma(double x) {
  if (x <= 0.0 && is_integer(x)) return 0.0;
  if (x > 170.0) {
    return std::exp(-std::lgamma(x));
  }
  return 1.0 / std::tgamma(x);
}

MittagLeffler::MittagLeffler(MlParams params) : params_(params) {
  if (!(params.alpha > 0.0) || !std::isfinite(params.alpha)) {
    std::ostringstream os;
    os << "Mittag-Leffler parameter alpha must satisfy alpha > 0, got " << params.alpha;
    throw DomainError(os.str());
  }
  if (!std::isfinite(params.beta)) {
    throw DomainError("Mittag-Leffler parameter beta must be finite");
  }
  const double a = params.alpha;
  reduced_beta_ = params.beta;
  shift_count_ = 0;
  while (reduced_beta_ >= a + 1.0) {
    reduced_beta_ -= a;
    ++shift_count_;
  }
  const double b = reduced_beta_;
  rgamma_beta_ = rgamma(params.beta);
  sin_pi_beta_ = sin_pi(b);
  sin_pi_alpha_minus_beta_ = sin_pi(a - b);
  cos_pi_alpha_ = cos_pi(a);
  // |s^alpha + x|^2 >= x^2 * bound_denominator_^2 on the branch cut.
  bound_denominator_ = cos_pi_alpha_ < 0.0 ? std::abs(sin_pi(a)) : 1.0;

  tail_coeffs_.reserve(kMaxTailTerms);
  tail_log_bounds_.reserve(kMaxTailTerms);
  for (int j = 1; j <= kMaxTailTerms; ++j) {
    tail_coeffs_.push_back(rgamma(b - a * j));
    tail_log_bounds_.push_back(std::lgamma(a * (j + 1) - b + 1.0));
  }
}

double MittagLeffler::operator()(double z) const {
  if (!std::isfinite(z)) {
    throw DomainError("Mittag-Leffler argument must be finite " +
                      describe(params_.alpha, params_.beta, z));
  }
  if (z == 0.0) return rgamma_beta_;
  const double a = params_.alpha;
  const double b = params_.beta;
  if (a == 1.0 && b == 1.0) return std::exp(z);
  if (a == 2.0 && z < 0.0 && (b == 1.0 || b == 2.0)) {
    const double r = std::sqrt(-z);
    return b == 1.0 ? std::cos(r) : std::sin(r) / r;
  }
  if (z > 0.0 || z >= -kSeriesSwitch) return series(z);

  double rb = reduced_beta_;
  double value = negative_axis(-z);
  for (int m = 0; m < shift_count_; ++m) {
    value = (value - rgamma(rb)) / z;
    rb += a;
  }
  return value;
}

double MittagLeffler::series(double z) const {
  const double a = params_.alpha;
  const double b = params_.beta;
  const double log_abs_z = std::log(std::abs(z));
  // Terms stop growing once k*alpha + beta exceeds |z|^(1/alpha) + 1.
  const double growth_end = std::pow(std::abs(z), 1.0 / a) + 2.0;
  double sum = 0.0;
  double carry = 0.0;
  for (int k = 0; k < kMaxSeriesTerms; ++k) {
    const double arg = k * a + b;
    double term;
    if (arg > 2.0) {
      term = std::exp(k * log_abs_z - std::lgamma(arg));
      if (z < 0.0 && (k % 2 == 1)) term = -term;
    } else {
      term = std::pow(z, k) * rgamma(arg);
    }
    const double y = term - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
    if (arg > growth_end &&
        std::abs(term) <= std::numeric_limits<double>::epsilon() * 1e-2 * std::abs(sum)) {
      return sum;
    }
    if (arg > growth_end && term == 0.0) return sum;
  }
  throw ConvergenceError("Mittag-Leffler series did not converge " +
                         describe(params_.alpha, params_.beta, z));
}

double MittagLeffler::negative_axis(double x) const {
  const double a = params_.alpha;
  const double b = reduced_beta_;
  if (a == 1.0) {
    if (b == 1.0) return std::exp(-x);
    throw DomainError("alpha = 1 with non-integer beta is only supported for |z| <= 1 " +
                      describe(a, params_.beta, -x));
  }
  if (is_integer(a) && static_cast<long>(a) % 2 == 1) {
    throw DomainError("odd integer alpha puts poles on the branch cut " +
                      describe(a, params_.beta, -x));
  }
  double tail = 0.0;
  if (!algebraic_tail(x, tail)) tail = cut_integral(x);
  return residues(x) + tail;
}

double MittagLeffler::residues(double x) const {
  // Poles of s^(a-b)/(s^a + x) on the principal sheet:
  // s_m = x^(1/a) exp(i pi (1+2m)/a) with |1+2m| < a.
  const double a = params_.alpha;
  const double b = reduced_beta_;
  const double radius = std::pow(x, 1.0 / a);
  double total = 0.0;
  for (int m = 0; 1 + 2 * m < a; ++m) {
    const double theta = kPi * (1 + 2 * m) / a;
    const std::complex<double> log_s(std::log(radius), theta);
    const std::complex<double> s = std::exp(log_s);
    // Residue (1/a) s^(1-b) e^s; the conjugate pole contributes the conjugate.
    const std::complex<double> res = std::exp((1.0 - b) * log_s + s);
    total += 2.0 * res.real() / a;
  }
  return total;
}

bool MittagLeffler::algebraic_tail(double x, double& value) const {
  // Cut integral = sum_{j=1}^{J} (-1)^(j-1) x^-j / Gamma(b - a j) + R_J with
  // |R_J| <= Gamma(a(J+1) - b + 1) / (pi * bound_denominator * x^(J+1)).
  if (bound_denominator_ <= 0.0) return false;
  const double log_x = std::log(x);
  const double log_scale = std::log(kPi * bound_denominator_);
  int best = -1;
  double best_log_bound = std::numeric_limits<double>::infinity();
  for (int j = 1; j <= kMaxTailTerms; ++j) {
    const double lb = tail_log_bounds_[j - 1] - log_scale - (j + 1) * log_x;
    if (lb < best_log_bound) {
      best_log_bound = lb;
      best = j;
    } else if (lb > best_log_bound + 5.0) {
      break;
    }
  }
  if (best < 0 || best_log_bound > std::log(kTailTolerance)) return false;
  double sum = 0.0;
  double power = 1.0;
  for (int j = 1; j <= best; ++j) {
    power /= x;
    const double term = tail_coeffs_[j - 1] * power;
    sum += (j % 2 == 1) ? term : -term;
  }
  value = sum;
  return true;
}

double MittagLeffler::cut_integral(double x) const {
  // (1/pi) int_0^inf e^-r r^(a-b) [r^a sin(pi b) - x sin(pi(a-b))] / D(r) dr,
  // D(r) = r^(2a) + 2 x r^a cos(pi a) + x^2.
  if (sin_pi_beta_ == 0.0 && sin_pi_alpha_minus_beta_ == 0.0) return 0.0;
  const double a = params_.alpha;
  const double b = reduced_beta_;
  const double c1 = sin_pi_beta_ / kPi;
  const double c2 = x * sin_pi_alpha_minus_beta_ / kPi;
  const double cpa = cos_pi_alpha_;

  // Without the power factor r^(a-b).
  auto smooth = [&](double r, double log_r) {
    const double ra = std::exp(a * log_r);
    const double d = ra * ra + 2.0 * x * ra * cpa + x * x;
    return std::exp(-r) * (ra * c1 - c2) / d;
  };

  // y = r^g with g = 1 + a - b > 0 absorbs the endpoint power:
  // r^(a-b) dr = dy / g.
  const double g = 1.0 + a - b;
  const double inv_g = 1.0 / g;
  auto in_y = [&](double y) {
    if (!(y > 0.0)) return 0.0;
    const double log_r = std::log(y) * inv_g;
    const double r = std::exp(log_r);
    return smooth(r, log_r) * inv_g;
  };

  const std::size_t budget = kMaxQuadratureNodes;
  const double split = std::pow(x, 1.0 / a);
  double total = 0.0;
  bool ok = true;
  if (split < kSplitLimit) {
    // [0, split] in y with tanh-sinh, [split, inf) in r with exp-sinh.
    const double y_end = std::pow(split, g);
    auto left = [&](double t) {
      const double u = 0.5 * kPi * std::sinh(t);
      const double ch = std::cosh(u);
      const double w = 0.25 * kPi * y_end * std::cosh(t) / (ch * ch);
      if (w == 0.0) return 0.0;
      const double y = y_end / (1.0 + std::exp(-2.0 * u));
      return w * in_y(y);
    };
    auto right = [&](double t) {
      const double e = std::exp(0.5 * kPi * std::sinh(t));
      const double w = e * 0.5 * kPi * std::cosh(t);
      const double r = split + e;
      if (!std::isfinite(w) || r > 800.0) return 0.0;
      const double log_r = std::log(r);
      return w * smooth(r, log_r) * std::exp((a - b) * log_r);
    };
    double left_value = 0.0;
    double right_value = 0.0;
    ok = de_quadrature(left, -4.0, 4.0, budget / 2, kQuadratureTolerance, left_value) && ok;
    ok = de_quadrature(right, -4.0, 3.0, budget / 2, kQuadratureTolerance, right_value) && ok;
    total = left_value + right_value;
  } else {
    auto whole = [&](double t) {
      const double e = std::exp(0.5 * kPi * std::sinh(t));
      const double w = e * 0.5 * kPi * std::cosh(t);
      if (!std::isfinite(w)) return 0.0;
      return w * in_y(e);
    };
    ok = de_quadrature(whole, -4.0, 4.0, budget, kQuadratureTolerance, total);
  }
  if (!ok) {
    throw ConvergenceError("Mittag-Leffler contour quadrature exhausted its node budget " +
                           describe(a, params_.beta, -x));
  }
  return total;
}

double ml(const MlParams& params, double z) { return MittagLeffler(params)(z); }

KernelEvaluator::KernelEvaluator(const FracOrders& orders, Kernel which)
    : alpha_(orders.alpha), which_(which), ml_([&] {
        switch (which) {
          case Kernel::kInitialValue: return MlParams{orders.alpha, 1.0};
          case Kernel::kInitialVelocity: return MlParams{orders.alpha, 2.0};
          case Kernel::kForcing: return MlParams{orders.alpha, orders.alpha};
          case Kernel::kForcingIntegral: return MlParams{orders.alpha, orders.alpha + 1.0};
        }
        return MlParams{orders.alpha, 1.0};
      }()) {}

double KernelEvaluator::operator()(double lambda_beta, double t) const {
  if (t < 0.0 || !std::isfinite(t)) {
    throw DomainError("kernel time must be finite and non-negative");
  }
  if (lambda_beta < 0.0) throw DomainError("kernel eigenvalue must be non-negative");
  if (t == 0.0) return which_ == Kernel::kInitialValue ? 1.0 : 0.0;
  const double ta = std::pow(t, alpha_);
  const double e = ml_(-lambda_beta * ta);
  switch (which_) {
    case Kernel::kInitialValue: return e;
    case Kernel::kInitialVelocity: return t * e;
    case Kernel::kForcing: return std::pow(t, alpha_ - 1.0) * e;
    case Kernel::kForcingIntegral: return ta * e;
  }
  return e;
}

double ml_kernel(const FracOrders& orders, double lambda_beta, double t, Kernel which) {
  return KernelEvaluator(orders, which)(lambda_beta, t);
}

}  // namespace fracwave

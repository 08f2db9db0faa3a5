#include "fracwave/mittag_leffler_hp.hpp"

#include <boost/multiprecision/mpfr.hpp>
#include <cmath>
#include <sstream>

#include "fracwave/errors.hpp"

namespace fracwave {
namespace {

using Real = boost::multiprecision::mpfr_float;

constexpr int kMaxTerms = 10000;

Real sum_series(const MlParams& params, double z, double tol, unsigned digits) {
  if (!(params.alpha > 0.0) || !std::isfinite(params.alpha) || !std::isfinite(params.beta)) {
    throw DomainError("Mittag-Leffler parameter alpha must satisfy alpha > 0");
  }
  if (!std::isfinite(z)) throw DomainError("Mittag-Leffler argument must be finite");
  if (!(tol > 0.0)) throw DomainError("series tolerance must be positive");
  if (digits == 0) {
    const double cancellation = std::pow(std::abs(z), 1.0 / params.alpha) / std::log(10.0);
    if (!(cancellation < 1e5)) {
      throw ConvergenceError("extended-precision series would need more than 1e5 digits");
    }
    digits = 40 + static_cast<unsigned>(std::ceil(cancellation));
  }
  Real::default_precision(digits);
  const Real zz(z);
  const Real alpha(params.alpha);
  const Real beta(params.beta);
  const Real threshold(tol);
  Real sum(0);
  Real power(1);
  for (int k = 0; k < kMaxTerms; ++k) {
    const Real arg = alpha * k + beta;
    Real term(0);
    // 1/Gamma vanishes at the non-positive integers.
    if (!(arg <= 0 && floor(arg) == arg)) term = power / tgamma(arg);
    sum += term;
    // The series is entire; the magnitude test is only meaningful once the
    // terms have started to decrease, which happens after the argument of
    // Gamma passes |z|^(1/alpha).
    if (k > 0 && arg > pow(abs(zz), 1 / alpha) + 1 && abs(term) < threshold * (abs(sum) + 1)) {
      return sum;
    }
    power *= zz;
  }
  std::ostringstream os;
  os << "extended-precision Mittag-Leffler series exhausted " << kMaxTerms << " terms at z=" << z;
  throw ConvergenceError(os.str());
}

}  // namespace

double ml_series_hp(const MlParams& params, double z, double tol, unsigned digits) {
  return sum_series(params, z, tol, digits).convert_to<double>();
}

std::string ml_series_hp_string(const MlParams& params, double z, double tol, unsigned digits,
                                unsigned output_digits) {
  const Real sum = sum_series(params, z, tol, digits);
  return sum.str(output_digits, std::ios_base::scientific);
}

}  // namespace fracwave

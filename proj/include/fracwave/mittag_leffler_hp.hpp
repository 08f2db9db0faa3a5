#pragma once

#include <string>

#include "fracwave/mittag_leffler.hpp"

namespace fracwave {

/// Direct partial summation of sum_k z^k / Gamma(k alpha + beta) in MPFR
/// arithmetic. Summation stops at the first term whose magnitude falls below
/// tol * (|partial sum| + 1).
///
/// `digits` is the working precision in decimal digits; 0 selects
/// 40 + log10(e) * |z|^(1/alpha), enough to absorb the cancellation of the
/// alternating series. Intended as a slow reference for |z| <= 50 with
/// alpha >= 1; larger |z| is accepted as long as the precision covers the
/// cancellation.
///
/// Throws DomainError for alpha <= 0, non-finite z or tol <= 0, and
/// ConvergenceError after 10000 terms.
double ml_series_hp(const MlParams& params, double z, double tol, unsigned digits = 0);

/// Same summation, returning the sum as a decimal string with
/// `output_digits` significant digits.
std::string ml_series_hp_string(const MlParams& params, double z, double tol,
                                unsigned digits, unsigned output_digits);

}  // namespace fracwave

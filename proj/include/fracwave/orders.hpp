#pragma once

namespace fracwave {

/// Orders of the Caputo time derivative (alpha) and of the spectral
/// fractional Laplacian (beta).
struct FracOrders {
  double alpha = 1.5;
  double beta = 0.75;
};

/// Throws DomainError unless 1 < alpha <= 2 and 1/2 < beta <= 1.
void validate(const FracOrders& orders);

}  // namespace fracwave

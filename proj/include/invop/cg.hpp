#pragma once

#include "invop/op.hpp"

namespace invop {

struct CgResult {
    Tensor x;
    std::size_t iterations = 0;
    double relResidual = 0.0;
    bool converged = false;
};

/// Conjugate gradient for A x = b with A symmetric positive definite,
/// matrix-free through Op::apply. Stops when ||r|| <= tol * ||b||.
CgResult conjugateGradient(const OpPtr& A, const Tensor& b, const Tensor& x0, double tol,
                           std::size_t maxit);

} // namespace invop

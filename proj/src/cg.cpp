#include "invop/cg.hpp"

#include <cmath>

namespace invop {

CgResult conjugateGradient(const OpPtr& A, const Tensor& b, const Tensor& x0, double tol,
                           std::size_t maxit) {
    const double nb = norm(b);
    if (nb == 0.0) return {Tensor::zeros(b.shape(), b.kind()), 0, 0.0, true};

    CgResult res;
    res.x = x0;
    Tensor r = sub(b, A->apply(res.x));
    Tensor p = r;
    double rs = normSq(r);

    for (std::size_t it = 0; it < maxit; ++it) {
        if (std::sqrt(rs) <= tol * nb) {
            res.iterations = it;
            res.relResidual = std::sqrt(rs) / nb;
            res.converged = true;
            return res;
        }
        Tensor ap = A->apply(p);
        const double pap = inner(p, ap).real();
        if (pap <= 0.0) break; // lost positive definiteness numerically
        const double alpha = rs / pap;
        res.x.axpyInPlace(alpha, p);
        r.axpyInPlace(-alpha, ap);
        const double rsNew = normSq(r);
        const double beta = rsNew / rs;
        rs = rsNew;
        Tensor pNew = r;
        pNew.axpyInPlace(beta, p);
        p = std::move(pNew);
        res.iterations = it + 1;
    }
    res.relResidual = std::sqrt(rs) / nb;
    res.converged = std::sqrt(rs) <= tol * nb;
    return res;
}

} // namespace invop

#include "morse/newton.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace morse {

RootResult find_gradient_root(FieldWorkspace& ws, const std::vector<double>& seed,
                              double grad_tol, int max_iter) {
    const int n = ws.dim();
    RootResult res;
    res.x = seed;
    std::vector<double> grad(static_cast<std::size_t>(n)), hess(static_cast<std::size_t>(n * n));

    double lambda = 1e-8;
    ws.hessian(res.x.data(), grad.data(), hess.data());
    Eigen::Map<Eigen::VectorXd> g(grad.data(), n);
    double gn = g.norm();

    for (int it = 0; it < max_iter; ++it) {
        res.iters = it;
        if (gn < grad_tol) {
            res.converged = true;
            break;
        }
        Eigen::Map<Eigen::MatrixXd> H(hess.data(), n, n);
        // Solve (H^T H + lambda I) d = -H^T g; H is symmetric here.
        Eigen::MatrixXd A = H * H;
        Eigen::VectorXd rhs = -(H * g);
        bool stepped = false;
        for (int tries = 0; tries < 60; ++tries) {
            Eigen::MatrixXd Adamp = A + lambda * Eigen::MatrixXd::Identity(n, n);
            Eigen::VectorXd d = Adamp.ldlt().solve(rhs);
            if (!d.allFinite()) {
                lambda *= 10;
                continue;
            }
            std::vector<double> xn(res.x);
            for (int i = 0; i < n; ++i) xn[static_cast<std::size_t>(i)] += d[i];
            std::vector<double> gn_vec(static_cast<std::size_t>(n));
            std::vector<double> hn(static_cast<std::size_t>(n * n));
            double vtrial;
            try {
                vtrial = ws.hessian(xn.data(), gn_vec.data(), hn.data());
            } catch (const DomainError&) {
                lambda *= 10;
                continue;
            }
            (void)vtrial;
            double gn_new = 0;
            for (double v : gn_vec) gn_new += v * v;
            gn_new = std::sqrt(gn_new);
            if (gn_new < gn || gn_new < grad_tol) {
                res.x = std::move(xn);
                grad = std::move(gn_vec);
                hess = std::move(hn);
                new (&g) Eigen::Map<Eigen::VectorXd>(grad.data(), n);
                gn = gn_new;
                lambda = std::max(lambda / 3, 1e-14);
                stepped = true;
                break;
            }
            lambda *= 10;
            if (lambda > 1e16) break;
        }
        if (!stepped) break;
    }
    if (gn < grad_tol) res.converged = true;
    res.grad_norm = gn;
    return res;
}

}  // namespace morse

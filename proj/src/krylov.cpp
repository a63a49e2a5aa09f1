#include "viscomem/krylov.hpp"

#include <cmath>
#include <vector>

namespace viscomem {

namespace {

double dot(const SpectralField& a, const SpectralField& b) { return inner(a, b, 0.0); }
double norm(const SpectralField& a) { return std::sqrt(dot(a, a)); }

}  // namespace

KrylovResult pcg(const LinearMap& apply, const LinearMap& precond, const SpectralField& b, const SpectralField& x0,
                 double rel_tol, int max_iter) {
    KrylovResult res;
    res.x = x0;
    const double bnorm = norm(b);
    if (bnorm == 0.0) {
        res.x = SpectralField(b.domain());
        res.converged = true;
        return res;
    }
    SpectralField r = b - apply(res.x);
    double rn = norm(r);
    if (rn <= rel_tol * bnorm) {
        res.residual = rn / bnorm;
        res.converged = true;
        return res;
    }
    SpectralField z = precond(r);
    SpectralField p = z;
    double rz = dot(r, z);
    for (int it = 1; it <= max_iter; ++it) {
        const SpectralField Ap = apply(p);
        const double pAp = dot(p, Ap);
        if (!(pAp > 0.0)) break;
        const double alpha = rz / pAp;
        res.x.axpy(alpha, p);
        r.axpy(-alpha, Ap);
        rn = norm(r);
        res.iterations = it;
        if (rn <= rel_tol * bnorm) {
            res.converged = true;
            break;
        }
        z = precond(r);
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        p *= beta;
        p += z;
    }
    res.residual = rn / bnorm;
    return res;
}

KrylovResult gmres(const LinearMap& apply, const LinearMap& precond, const SpectralField& b, double rel_tol,
                   int max_iter, int restart) {
    KrylovResult res;
    res.x = SpectralField(b.domain());
    const double bnorm = norm(b);
    if (bnorm == 0.0) {
        res.converged = true;
        return res;
    }
    int total = 0;
    SpectralField r = b;
    double beta = bnorm;
    while (total < max_iter) {
        const int m = std::min(restart, max_iter - total);
        std::vector<SpectralField> V;
        V.reserve(static_cast<std::size_t>(m) + 1);
        V.push_back((1.0 / beta) * r);
        std::vector<std::vector<double>> H(static_cast<std::size_t>(m) + 1, std::vector<double>(m, 0.0));
        std::vector<double> cs(m, 0.0), sn(m, 0.0), g(static_cast<std::size_t>(m) + 1, 0.0);
        g[0] = beta;
        int k = 0;
        bool done = false;
        for (; k < m; ++k) {
            SpectralField w = apply(precond(V[k]));
            for (int i = 0; i <= k; ++i) {
                H[i][k] = dot(w, V[i]);
                w.axpy(-H[i][k], V[i]);
            }
            H[k + 1][k] = norm(w);
            for (int i = 0; i < k; ++i) {
                const double t = cs[i] * H[i][k] + sn[i] * H[i + 1][k];
                H[i + 1][k] = -sn[i] * H[i][k] + cs[i] * H[i + 1][k];
                H[i][k] = t;
            }
            const double denom = std::hypot(H[k][k], H[k + 1][k]);
            cs[k] = denom == 0.0 ? 1.0 : H[k][k] / denom;
            sn[k] = denom == 0.0 ? 0.0 : H[k + 1][k] / denom;
            H[k][k] = denom;
            H[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k] * g[k];
            ++total;
            const double sub = norm(w);
            if (std::abs(g[k + 1]) <= rel_tol * bnorm || sub == 0.0) {
                ++k;
                done = true;
                break;
            }
            V.push_back((1.0 / sub) * w);
        }
        // Back substitution for the k x k triangular system.
        std::vector<double> y(k, 0.0);
        for (int i = k - 1; i >= 0; --i) {
            double s = g[i];
            for (int j = i + 1; j < k; ++j) s -= H[i][j] * y[j];
            y[i] = H[i][i] != 0.0 ? s / H[i][i] : 0.0;
        }
        SpectralField update(b.domain());
        for (int i = 0; i < k; ++i) update.axpy(y[i], V[i]);
        res.x += precond(update);
        r = b - apply(res.x);
        beta = norm(r);
        res.iterations = total;
        res.residual = beta / bnorm;
        if (beta <= rel_tol * bnorm || (done && k == 0)) break;
    }
    res.converged = res.residual <= rel_tol;
    return res;
}

}  // namespace viscomem

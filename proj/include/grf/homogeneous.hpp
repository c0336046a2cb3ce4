#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "grf/lie_algebra.hpp"
#include "grf/tensor.hpp"

namespace grf {

/// Symmetric-part SPD check; returns smallest eigenvalue.
inline double smallest_eigenvalue_sym(const Tensor& g, std::size_t p = 0) {
    const int n = g.dim;
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) M(i, j) = g.at(p, static_cast<std::size_t>(i) * n + j);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()));
    return es.eigenvalues().minCoeff();
}

/// Left-invariant geometry on a compact unimodular group: a point (g, b, f)
/// plus background 3-form H0.  Every tensor is a single fiber (pts = 1) and
/// every derivative is an algebraic Gamma-contraction.
class HomogState {
public:
    LieAlgebra alg;
    Tensor g, b, H0;
    double fval = 0.0;

    // caches, read-only after construction
    Tensor ginv, H, Gamma;
    double sqrtdetg = 1.0, volume = 1.0;

    HomogState() = default;

    HomogState(LieAlgebra alg_, Tensor g_, Tensor b_, Tensor H0_, std::optional<double> f = std::nullopt)
        : alg(std::move(alg_)), g(std::move(g_)), b(std::move(b_)), H0(std::move(H0_)) {
        validate(alg);
        rebuild();
        fval = f ? *f : std::log(volume);  // normalized constant minimizer
    }

    int n() const { return alg.n; }
    std::size_t pts() const { return 1; }

    const Tensor& metric() const { return g; }
    const Tensor& metric_inv() const { return ginv; }
    const Tensor& torsion() const { return H; }
    const Tensor& christoffel() const { return Gamma; }

    /// d f as a 1-form; invariant functions are constant.
    Tensor grad_f() const { return Tensor(n(), 1, 1); }

    Tensor f_field() const {
        Tensor t(n(), 0, 1);
        t.a[0] = fval;
        return t;
    }

    /// Rebuild all caches after assigning g/b/H0.
    void rebuild() {
        const int nn = n();
        if (g.order != 2 || b.order != 2 || H0.order != 3)
            throw std::invalid_argument("homog state: wrong tensor orders");
        require_antisymmetric(b, 1e-12, "state b");
        require_antisymmetric(H0, 1e-12, "state H0");
        Eigen::MatrixXd M(nn, nn);
        for (int i = 0; i < nn; ++i)
            for (int j = 0; j < nn; ++j) M(i, j) = g.a[static_cast<std::size_t>(i) * nn + j];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()));
        if (es.eigenvalues().minCoeff() <= 0.0)
            throw std::invalid_argument("metric not SPD: smallest eigenvalue " +
                                        std::to_string(es.eigenvalues().minCoeff()));
        Eigen::MatrixXd Mi = M.inverse();
        ginv = Tensor(nn, 2, 1);
        for (int i = 0; i < nn; ++i)
            for (int j = 0; j < nn; ++j) ginv.a[static_cast<std::size_t>(i) * nn + j] = Mi(i, j);
        sqrtdetg = std::sqrt(M.determinant());
        volume = alg.vol0 * sqrtdetg;
        H = H0 + chevalley_d(b, alg);
        if (double r = chevalley_d(H, alg).norm_inf(); r > 1e-10)
            throw std::invalid_argument("state: dH != 0, residual " + std::to_string(r));
        Gamma = koszul_connection(g, alg);
    }

    /// Copy with new (g, b); f reset to the normalized constant minimizer.
    HomogState with_gb(Tensor g_, Tensor b_) const {
        HomogState s(*this);
        s.g = std::move(g_);
        s.b = std::move(b_);
        s.rebuild();
        s.fval = std::log(s.volume);
        return s;
    }

    /// Covariant derivative of an invariant tensor, derivative slot first:
    /// (nabla T)(m, i...) = -sum_slots Gamma(m,i_s)^a T(..a..).
    Tensor nabla(const Tensor& T) const { return nabla_with_gamma(T, Gamma); }

    /// Same contraction pattern for arbitrary connection coefficients
    /// (all indices down, Gamma'(m,j,k) = <D_{e_m} e_j, e_k>).
    Tensor nabla_with_gamma(const Tensor& T, const Tensor& Gdown) const {
        const int nn = n(), p = T.order;
        Tensor out(nn, p + 1, T.pts);
        std::vector<int> idx(p + 1 > 1 ? p + 1 : 1);
        // Gup(m,j,a) = Gdown(m,j,b) ginv(b,a)
        Tensor Gup(nn, 3, 1);
        for (int m = 0; m < nn; ++m)
            for (int j = 0; j < nn; ++j)
                for (int a = 0; a < nn; ++a) {
                    double s = 0.0;
                    for (int bb = 0; bb < nn; ++bb)
                        s += Gdown.a[(static_cast<std::size_t>(m) * nn + j) * nn + bb] *
                             ginv.a[static_cast<std::size_t>(bb) * nn + a];
                    Gup.a[(static_cast<std::size_t>(m) * nn + j) * nn + a] = s;
                }
        for (std::size_t c = 0; c < out.comps(); ++c) {
            decode(c, nn, p + 1, idx.data());
            const int m = idx[0];
            double v = 0.0;
            for (int s = 0; s < p; ++s) {
                const int is = idx[1 + s];
                std::size_t stride = Tensor::ipow(nn, p - 1 - s);
                std::size_t base = 0;
                for (int t = 0; t < p; ++t)
                    if (t != s) base += static_cast<std::size_t>(idx[1 + t]) * Tensor::ipow(nn, p - 1 - t);
                for (int a = 0; a < nn; ++a)
                    v -= Gup.a[(static_cast<std::size_t>(m) * nn + is) * nn + a] *
                         T.a[base + static_cast<std::size_t>(a) * stride];
            }
            out.a[c] = v;
        }
        return out;
    }

    /// Riemann tensor of the Levi-Civita connection, sign convention
    /// R(X,Y,Z,W) = <nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z, W>.
    Tensor riemann() const { return riemann_from_gamma(Gamma); }

    /// Curvature of an arbitrary left-invariant connection given by Gdown.
    Tensor riemann_from_gamma(const Tensor& Gdown) const {
        const int nn = n();
        Tensor Gup(nn, 3, 1);
        for (int m = 0; m < nn; ++m)
            for (int j = 0; j < nn; ++j)
                for (int a = 0; a < nn; ++a) {
                    double s = 0.0;
                    for (int bb = 0; bb < nn; ++bb)
                        s += Gdown.a[(static_cast<std::size_t>(m) * nn + j) * nn + bb] *
                             ginv.a[static_cast<std::size_t>(bb) * nn + a];
                    Gup.a[(static_cast<std::size_t>(m) * nn + j) * nn + a] = s;
                }
        auto gu = [&](int m, int j, int a) { return Gup.a[(static_cast<std::size_t>(m) * nn + j) * nn + a]; };
        auto gd = [&](int m, int j, int a) { return Gdown.a[(static_cast<std::size_t>(m) * nn + j) * nn + a]; };
        Tensor R(nn, 4, 1);
        for (int i = 0; i < nn; ++i)
            for (int j = 0; j < nn; ++j)
                for (int k = 0; k < nn; ++k)
                    for (int l = 0; l < nn; ++l) {
                        double v = 0.0;
                        for (int a = 0; a < nn; ++a)
                            v += gu(j, k, a) * gd(i, a, l) - gu(i, k, a) * gd(j, a, l);
                        for (int m = 0; m < nn; ++m) v -= alg.c_at(i, j, m) * gd(m, k, l);
                        R.a[((static_cast<std::size_t>(i) * nn + j) * nn + k) * nn + l] = v;
                    }
        return R;
    }

    /// f-twisted integral of an invariant scalar: s * e^{-f} * vol(G, g).
    double integrate(const Tensor& scalar) const {
        if (scalar.order != 0) throw std::invalid_argument("integrate: scalar expected");
        return scalar.a[0] * std::exp(-fval) * volume;
    }

    double integrate_raw(const Tensor& scalar) const {
        if (scalar.order != 0) throw std::invalid_argument("integrate: scalar expected");
        return scalar.a[0] * volume;
    }
};

/// Fully antisymmetric eps-tensor scaled by kappa on the su(2) slots of an
/// algebra whose basis contains {i1,i2,i3} with eps structure.
inline Tensor cartan_three_form(int n, int i1, int i2, int i3, double kappa) {
    Tensor H(n, 3, 1);
    int id[3] = {i1, i2, i3};
    int perm[6][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}, {1, 0, 2}, {0, 2, 1}, {2, 1, 0}};
    double sgn[6] = {1, 1, 1, -1, -1, -1};
    for (int p = 0; p < 6; ++p) {
        std::size_t c = (static_cast<std::size_t>(id[perm[p][0]]) * n + id[perm[p][1]]) * n + id[perm[p][2]];
        H.a[c] = sgn[p] * kappa;
    }
    return H;
}

inline Tensor identity_metric(int n) {
    Tensor g(n, 2, 1);
    for (int i = 0; i < n; ++i) g.a[static_cast<std::size_t>(i) * n + i] = 1.0;
    return g;
}

/// su(2), g = id, H0 = kappa * eps; a steady soliton exactly when kappa = +-1.
inline HomogState su2_state(double kappa) {
    LieAlgebra L = su2();
    return HomogState(L, identity_metric(3), Tensor(3, 2, 1), cartan_three_form(3, 0, 1, 2, kappa));
}

inline HomogState abelian_state(int n) {
    LieAlgebra L = abelian(n);
    return HomogState(L, identity_metric(n), Tensor(n, 2, 1), Tensor(n, 3, 1));
}

/// Hopf carrier SU(2) x U(1): g = id, H0 = -eps on the su(2) slots {1,2,3}.
/// The scale is pinned so that the state is Bismut-flat and H = -d^c(omega)
/// for the Samelson structure J e1 = e2, J e3 = e0.
inline HomogState hopf_state() {
    LieAlgebra L = su2_u1();
    return HomogState(L, identity_metric(4), Tensor(4, 2, 1), cartan_three_form(4, 1, 2, 3, -1.0));
}

}  // namespace grf

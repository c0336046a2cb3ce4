#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "grf/tensor.hpp"

namespace grf {

/// Structure constants of a compact (unimodular) Lie algebra in a fixed basis:
/// c(i,j,k) is the coefficient of e_k in [e_i, e_j].
///
/// `vol0` is the total volume of the chosen group model when g is the identity
/// matrix in this basis; left-invariant metrics then have volume
/// vol0 * sqrt(det g).  The value only shifts the constant minimizer f and
/// never enters any curvature, residual or spectrum.
struct LieAlgebra {
    int n = 0;
    Tensor c;          // order 3, pts = 1
    std::string name;
    double vol0 = 1.0;

    double c_at(int i, int j, int k) const {
        return c.a[(static_cast<std::size_t>(i) * n + j) * n + k];
    }
};

inline double jacobi_residual(const LieAlgebra& L) {
    const int n = L.n;
    double m = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    double s = 0.0;
                    for (int a = 0; a < n; ++a)
                        s += L.c_at(i, j, a) * L.c_at(a, k, l) + L.c_at(j, k, a) * L.c_at(a, i, l) +
                             L.c_at(k, i, a) * L.c_at(a, j, l);
                    m = std::max(m, std::abs(s));
                }
    return m;
}

inline double unimodularity_residual(const LieAlgebra& L) {
    double m = 0.0;
    for (int j = 0; j < L.n; ++j) {
        double s = 0.0;
        for (int i = 0; i < L.n; ++i) s += L.c_at(i, j, i);
        m = std::max(m, std::abs(s));
    }
    return m;
}

/// Rejects algebras that are not antisymmetric, not Jacobi, or not unimodular.
/// Nonunimodular input is a hard error: constant-density integration by parts,
/// assumed by every f-twisted adjoint, fails otherwise.
inline void validate(const LieAlgebra& L, double tol = 1e-12) {
    if (L.c.dim != L.n || L.c.order != 3 || L.c.pts != 1)
        throw std::invalid_argument("lie algebra: malformed structure tensor");
    double anti = 0.0;
    for (int i = 0; i < L.n; ++i)
        for (int j = 0; j < L.n; ++j)
            for (int k = 0; k < L.n; ++k)
                anti = std::max(anti, std::abs(L.c_at(i, j, k) + L.c_at(j, i, k)));
    if (anti > tol) throw std::invalid_argument(L.name + ": structure constants not antisymmetric");
    if (double r = jacobi_residual(L); r > tol)
        throw std::invalid_argument(L.name + ": Jacobi residual " + std::to_string(r));
    if (double r = unimodularity_residual(L); r > tol)
        throw std::invalid_argument(L.name + ": not unimodular, residual " + std::to_string(r));
}

inline LieAlgebra abelian(int n) {
    LieAlgebra L;
    L.n = n;
    L.c = Tensor(n, 3, 1);
    L.name = "abelian:" + std::to_string(n);
    L.vol0 = std::pow(2.0 * std::numbers::pi, n);
    return L;
}

/// su(2) with c(i,j,k) = eps_ijk.  g = id is the bi-invariant round metric
/// (sectional curvature 1/4, i.e. the radius-2 three-sphere), vol0 = 16 pi^2.
inline LieAlgebra su2() {
    LieAlgebra L;
    L.n = 3;
    L.c = Tensor(3, 3, 1);
    auto set = [&](int i, int j, int k, double v) { L.c.a[(i * 3 + j) * 3 + k] = v; };
    set(0, 1, 2, 1.0), set(1, 0, 2, -1.0);
    set(1, 2, 0, 1.0), set(2, 1, 0, -1.0);
    set(2, 0, 1, 1.0), set(0, 2, 1, -1.0);
    L.name = "su2";
    L.vol0 = 16.0 * std::numbers::pi * std::numbers::pi;
    return L;
}

/// su(2) + u(1), the Hopf surface carrier S^3 x S^1.  Basis: e0 central,
/// e1..e3 the su(2) factor with eps structure constants.
inline LieAlgebra su2_u1() {
    LieAlgebra L;
    L.n = 4;
    L.c = Tensor(4, 3, 1);
    auto set = [&](int i, int j, int k, double v) { L.c.a[(static_cast<std::size_t>(i) * 4 + j) * 4 + k] = v; };
    set(1, 2, 3, 1.0), set(2, 1, 3, -1.0);
    set(2, 3, 1, 1.0), set(3, 2, 1, -1.0);
    set(3, 1, 2, 1.0), set(1, 3, 2, -1.0);
    L.name = "hopf";
    L.vol0 = 32.0 * std::pow(std::numbers::pi, 3);
    return L;
}

/// Chevalley–Eilenberg differential of an invariant p-form:
///   (d w)(x_0..x_p) = sum_{i<j} (-1)^{i+j} w([x_i,x_j], x_0..^i..^j..x_p).
inline Tensor chevalley_d(const Tensor& form, const LieAlgebra& L) {
    require_antisymmetric(form, 1e-12, "chevalley_d");
    const int n = L.n, p = form.order;
    Tensor out(n, p + 1, 1);
    std::vector<int> idx(p + 1), sub(p < 1 ? 1 : p);
    for (std::size_t c = 0; c < out.comps(); ++c) {
        decode(c, n, p + 1, idx.data());
        double v = 0.0;
        for (int i = 0; i <= p; ++i)
            for (int j = i + 1; j <= p; ++j) {
                // sub = ([x_i,x_j]-slot, remaining indices in order)
                int t = 1;
                for (int s = 0; s <= p; ++s)
                    if (s != i && s != j) sub[t++] = idx[s];
                double sgn = ((i + j) % 2 == 0) ? 1.0 : -1.0;
                for (int a = 0; a < n; ++a) {
                    double cc = L.c_at(idx[i], idx[j], a);
                    if (cc == 0.0) continue;
                    sub[0] = a;
                    v += sgn * cc * form.a[encode(sub.data(), n, p)];
                }
            }
        out.a[c] = v;
    }
    return out;
}

/// Levi-Civita coefficients of a left-invariant metric, all indices down:
/// Gamma(m,j,k) = <nabla_{e_m} e_j, e_k>, from the Koszul formula
///   2<nabla_x y, z> = <[x,y],z> - <[y,z],x> + <[z,x],y>.
/// `ginv` must be the inverse of `g`; SPD is the caller's responsibility.
inline Tensor koszul_connection(const Tensor& g, const LieAlgebra& L) {
    const int n = L.n;
    Tensor cg(n, 3, 1);  // <[e_i,e_j], e_k>
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                double s = 0.0;
                for (int a = 0; a < n; ++a) s += L.c_at(i, j, a) * g.a[a * n + k];
                cg.a[(static_cast<std::size_t>(i) * n + j) * n + k] = s;
            }
    Tensor G(n, 3, 1);
    for (int m = 0; m < n; ++m)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                auto at = [&](int a, int b, int c3) { return cg.a[(static_cast<std::size_t>(a) * n + b) * n + c3]; };
                G.a[(static_cast<std::size_t>(m) * n + j) * n + k] =
                    0.5 * (at(m, j, k) - at(j, k, m) + at(k, m, j));
            }
    return G;
}

}  // namespace grf

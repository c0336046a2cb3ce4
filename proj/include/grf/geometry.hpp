#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "grf/tensor.hpp"

namespace grf {

/// Which metric connection acts on the tensor slots.
///   lc    : Levi-Civita on every slot
///   plus  : nabla + H/2   (torsion +H) on every slot
///   minus : nabla - H/2   on every slot
///   bar   : mixed, minus on slot 0 and plus on slot 1 (2-tensors only)
enum class Conn { lc, plus, minus, bar };

namespace detail {

/// Torsion correction of a connection acting on the tensor slots of T,
/// skipping the first `skip` slots (used when T is already a derivative and
/// its leading 1-form slots take the Levi-Civita connection).  Output has a
/// new leading slot m: C(m, I) = sum_slots sgn_s * (-1/2) H(m, i_s, a) T(..a^..).
template <class S>
Tensor torsion_correction(const S& s, const Tensor& T, Conn kind, int skip) {
    const int n = s.n(), p = T.order;
    Tensor out(n, p + 1, T.pts);
    if (kind == Conn::lc) return out;
    const Tensor& H = s.torsion();
    const Tensor& gi = s.metric_inv();
    // Hup(m,i,a) = H(m,i,b) g^{ba}
    Tensor Hup(n, 3, T.pts);
    for (std::size_t q = 0; q < T.pts; ++q) {
        const double* h = H.pt(q);
        const double* giq = gi.pt(q);
        double* y = Hup.pt(q);
        for (int m = 0; m < n; ++m)
            for (int i = 0; i < n; ++i)
                for (int a = 0; a < n; ++a) {
                    double v = 0.0;
                    for (int b = 0; b < n; ++b) v += h[(m * n + i) * n + b] * giq[b * n + a];
                    y[(m * n + i) * n + a] = v;
                }
    }
    std::vector<int> idx(p + 1);
    for (std::size_t c = 0; c < out.comps(); ++c) {
        decode(c, n, p + 1, idx.data());
        const int m = idx[0];
        std::size_t cin = 0;
        for (int t = 0; t < p; ++t) cin = cin * n + static_cast<std::size_t>(idx[1 + t]);
        for (std::size_t q = 0; q < T.pts; ++q) {
            const double* hu = Hup.pt(q);
            const double* x = T.pt(q);
            double v = 0.0;
            for (int sslot = skip; sslot < p; ++sslot) {
                double coef;
                if (kind == Conn::plus) coef = -0.5;
                else if (kind == Conn::minus) coef = 0.5;
                else  // bar: +1/2 on the first unskipped slot, -1/2 on the second
                    coef = (sslot == skip) ? 0.5 : -0.5;
                const int is = idx[1 + sslot];
                std::size_t stride = Tensor::ipow(n, p - 1 - sslot);
                std::size_t base = cin - static_cast<std::size_t>(is) * stride;
                for (int a = 0; a < n; ++a)
                    v += coef * hu[(m * n + is) * n + a] * x[base + static_cast<std::size_t>(a) * stride];
            }
            out.at(q, c) += v;
        }
    }
    return out;
}

}  // namespace detail

/// Covariant derivative with the chosen connection, derivative slot first.
template <class S>
Tensor nabla_conn(const S& s, const Tensor& T, Conn kind) {
    Tensor out = s.nabla(T);
    if (kind != Conn::lc) out += detail::torsion_correction(s, T, kind, 0);
    return out;
}

/// Raise one slot with g^{-1}.
template <class S>
Tensor raise_slot(const S& s, const Tensor& T, int slot) {
    const int n = s.n(), p = T.order;
    const Tensor& gi = s.metric_inv();
    Tensor next(n, p, T.pts);
    std::size_t stride = Tensor::ipow(n, p - 1 - slot);
    for (std::size_t q = 0; q < T.pts; ++q) {
        const double* giq = gi.pt(q);
        const double* x = T.pt(q);
        double* y = next.pt(q);
        for (std::size_t c = 0; c < T.comps(); ++c) {
            int is = static_cast<int>((c / stride) % static_cast<std::size_t>(n));
            std::size_t base = c - static_cast<std::size_t>(is) * stride;
            double v = 0.0;
            for (int a = 0; a < n; ++a) v += giq[is * n + a] * x[base + static_cast<std::size_t>(a) * stride];
            y[c] = v;
        }
    }
    return next;
}

/// Raise every slot with g^{-1}.
template <class S>
Tensor raise_all(const S& s, const Tensor& T) {
    Tensor cur = T;
    for (int slot = 0; slot < T.order; ++slot) cur = raise_slot(s, cur, slot);
    return cur;
}

/// Pointwise full contraction <T1, T2>_g as an order-0 field.
template <class S>
Tensor inner_pt(const S& s, const Tensor& T1, const Tensor& T2) {
    T1.check_shape(T2);
    Tensor up = raise_all(s, T2);
    Tensor out(s.n(), 0, T1.pts);
    const std::size_t nc = T1.comps();
    for (std::size_t q = 0; q < T1.pts; ++q) {
        const double* x = T1.pt(q);
        const double* y = up.pt(q);
        double v = 0.0;
        for (std::size_t c = 0; c < nc; ++c) v += x[c] * y[c];
        out.at(q, 0) = v;
    }
    return out;
}

/// f-twisted L^2 inner product and norm.
template <class S>
double inner_f(const S& s, const Tensor& T1, const Tensor& T2) {
    return s.integrate(inner_pt(s, T1, T2));
}

template <class S>
double norm_f(const S& s, const Tensor& T) {
    return std::sqrt(std::max(0.0, inner_f(s, T, T)));
}

/// f-twisted rough Laplacian of the chosen connection,
/// -(nabla')^{*_f} nabla' = trace_g nabla' nabla' - nabla'_{grad f}.
template <class S>
Tensor laplace_conn_f(const S& s, const Tensor& T, Conn kind) {
    const int n = s.n(), p = T.order;
    Tensor A = nabla_conn(s, T, kind);
    Tensor G = s.nabla(A);
    if (kind != Conn::lc) G += detail::torsion_correction(s, A, kind, 1);
    const Tensor& gi = s.metric_inv();
    Tensor df = s.grad_f();
    Tensor out(n, p, T.pts);
    const std::size_t stride_n = Tensor::ipow(n, p);      // slot 1 stride in G
    const std::size_t stride_m = stride_n * static_cast<std::size_t>(n);  // slot 0 stride
    for (std::size_t q = 0; q < T.pts; ++q) {
        const double* giq = gi.pt(q);
        const double* Gq = G.pt(q);
        const double* Aq = A.pt(q);
        const double* dfq = df.pt(q);
        double* y = out.pt(q);
        for (std::size_t c = 0; c < out.comps(); ++c) {
            double v = 0.0;
            for (int m = 0; m < n; ++m)
                for (int a = 0; a < n; ++a) {
                    v += giq[m * n + a] *
                         (Gq[static_cast<std::size_t>(m) * stride_m + static_cast<std::size_t>(a) * stride_n + c] -
                          dfq[m] * Aq[static_cast<std::size_t>(a) * stride_n + c]);
                }
            y[c] = v;
        }
    }
    return out;
}

/// Exterior derivative as the alternation of the Levi-Civita derivative;
/// on the lattice the Christoffel terms cancel exactly, so d(d w) = 0 to
/// roundoff on both backends.
template <class S>
Tensor dext(const S& s, const Tensor& form) {
    const int n = s.n(), p = form.order;
    Tensor A = s.nabla(form);
    Tensor out(n, p + 1, form.pts);
    std::vector<int> idx(p + 1), sub(p + 1);
    for (std::size_t c = 0; c < out.comps(); ++c) {
        decode(c, n, p + 1, idx.data());
        for (int k = 0; k <= p; ++k) {
            sub[0] = idx[k];
            int t = 1;
            for (int ss = 0; ss <= p; ++ss)
                if (ss != k) sub[t++] = idx[ss];
            double sgn = (k % 2 == 0) ? 1.0 : -1.0;
            std::size_t cin = encode(sub.data(), n, p + 1);
            for (std::size_t q = 0; q < form.pts; ++q) out.at(q, c) += sgn * A.at(q, cin);
        }
    }
    return out;
}

/// First-slot contracted derivative: out = -nabla^m T_{m,...} + c_f * (grad f)^m T_{m,...}.
/// With c_f = 1 this is both the f-twisted divergence on tensors and d^*_f on
/// forms; with c_f = 0 it is the unweighted d^*.
template <class S>
Tensor dstar_f_impl(const S& s, const Tensor& T, double c_f) {
    if (T.order < 1) throw std::invalid_argument("dstar: order >= 1 expected");
    const int n = s.n(), p = T.order;
    Tensor A = s.nabla(T);
    const Tensor& gi = s.metric_inv();
    Tensor df = s.grad_f();
    Tensor out(n, p - 1, T.pts);
    const std::size_t stride_first = Tensor::ipow(n, p - 1);
    const std::size_t stride_deriv = Tensor::ipow(n, p);
    for (std::size_t q = 0; q < T.pts; ++q) {
        const double* giq = gi.pt(q);
        const double* Aq = A.pt(q);
        const double* Tq = T.pt(q);
        const double* dfq = df.pt(q);
        double* y = out.pt(q);
        for (std::size_t c = 0; c < out.comps(); ++c) {
            double v = 0.0;
            for (int m = 0; m < n; ++m)
                for (int a = 0; a < n; ++a)
                    v += giq[m * n + a] *
                         (-Aq[static_cast<std::size_t>(a) * stride_deriv + static_cast<std::size_t>(m) * stride_first + c] +
                          c_f * dfq[a] * Tq[static_cast<std::size_t>(m) * stride_first + c]);
            y[c] = v;
        }
    }
    return out;
}

template <class S>
Tensor dstar_f(const S& s, const Tensor& form) { return dstar_f_impl(s, form, 1.0); }

template <class S>
Tensor dstar0(const S& s, const Tensor& form) { return dstar_f_impl(s, form, 0.0); }

/// f-twisted divergence (same contraction; kept as its own name for clarity).
template <class S>
Tensor div_f(const S& s, const Tensor& T) { return dstar_f_impl(s, T, 1.0); }

/// f-twisted Hodge Laplacian with the geometer sign, -(d d^*_f + d^*_f d);
/// on functions it reduces to Delta_f.
template <class S>
Tensor hodge_f(const S& s, const Tensor& form) {
    Tensor out(form.dim, form.order, form.pts);
    if (form.order >= 1) out += dext(s, dstar_f(s, form));
    if (form.order < s.n()) out += dstar_f(s, dext(s, form));
    out *= -1.0;
    return out;
}

template <class S>
Tensor laplace_f(const S& s, const Tensor& T) { return laplace_conn_f(s, T, Conn::lc); }

/// Interior product with the raised 1-form X: (i_X T)_{...} = X^m T_{m,...}.
template <class S>
Tensor interior_raised(const S& s, const Tensor& X1form, const Tensor& T) {
    const int n = s.n(), p = T.order;
    const Tensor& gi = s.metric_inv();
    Tensor out(n, p - 1, T.pts);
    const std::size_t stride = Tensor::ipow(n, p - 1);
    for (std::size_t q = 0; q < T.pts; ++q) {
        const double* giq = gi.pt(q);
        const double* Tq = T.pt(q);
        const double* Xq = X1form.pt(q);
        double* y = out.pt(q);
        for (std::size_t c = 0; c < out.comps(); ++c) {
            double v = 0.0;
            for (int m = 0; m < n; ++m)
                for (int a = 0; a < n; ++a)
                    v += giq[m * n + a] * Xq[a] * Tq[static_cast<std::size_t>(m) * stride + c];
            y[c] = v;
        }
    }
    return out;
}

/// Hessian through the plus connection: ((nabla^+)^2 phi)_{ij} =
/// nabla_i nabla_j phi - (1/2) H_{ij}{}^a nabla_a phi.
template <class S>
Tensor hessian_plus(const S& s, const Tensor& scalar) {
    return nabla_conn(s, s.nabla(scalar), Conn::plus);
}

/// Everything the curvature of a state provides.  Rm carries the convention
/// R(X,Y,Z,W) = <nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z, W>;
/// Rmp is assembled from Rm, nabla H and the H*H terms; Rcp, Rp are traces.
/// H2(i,j) = H_{ikl} H_j{}^{kl} and |H|^2 = tr_g H2.
struct CurvaturePack {
    Tensor Rm, Rc, Rsc;          // Levi-Civita
    Tensor Rmp, Rcp, Rp;         // Bismut (+) curvature
    Tensor H2, normH2, dstarH;   // H^2, |H|^2, d^* H
    Tensor nablaH;               // (nabla_m H)_{jkl}, derivative slot first
};

template <class S>
CurvaturePack curvature(const S& s) {
    const int n = s.n();
    const std::size_t np = s.pts();
    const Tensor& gi = s.metric_inv();
    const Tensor& H = s.torsion();
    CurvaturePack P;
    P.Rm = s.riemann();
    P.nablaH = s.nabla(H);

    auto trace14 = [&](const Tensor& R4) {
        Tensor rc(n, 2, np);
        for (std::size_t q = 0; q < np; ++q) {
            const double* giq = gi.pt(q);
            const double* r = R4.pt(q);
            double* y = rc.pt(q);
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    double v = 0.0;
                    for (int i = 0; i < n; ++i)
                        for (int a = 0; a < n; ++a)
                            v += giq[i * n + a] * r[((static_cast<std::size_t>(i) * n + j) * n + k) * n + a];
                    y[j * n + k] = v;
                }
        }
        return rc;
    };
    auto trace_g = [&](const Tensor& T2) {
        Tensor sc(n, 0, np);
        for (std::size_t q = 0; q < np; ++q) {
            const double* giq = gi.pt(q);
            const double* x = T2.pt(q);
            double v = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) v += giq[i * n + j] * x[i * n + j];
            sc.at(q, 0) = v;
        }
        return sc;
    };

    P.Rc = trace14(P.Rm);
    P.Rsc = trace_g(P.Rc);

    // Hup(i,l,a) = H_{ilm} g^{ma};  HH(i,l,j,k) = <H(e_i,e_l), H(e_j,e_k)>
    Tensor Hup(n, 3, np);
    for (std::size_t q = 0; q < np; ++q) {
        const double* giq = gi.pt(q);
        const double* h = H.pt(q);
        double* y = Hup.pt(q);
        for (int i = 0; i < n; ++i)
            for (int l = 0; l < n; ++l)
                for (int a = 0; a < n; ++a) {
                    double v = 0.0;
                    for (int m = 0; m < n; ++m) v += h[(i * n + l) * n + m] * giq[m * n + a];
                    y[(i * n + l) * n + a] = v;
                }
    }
    P.Rmp = Tensor(n, 4, np);
    for (std::size_t q = 0; q < np; ++q) {
        const double* rm = P.Rm.pt(q);
        const double* nh = P.nablaH.pt(q);
        const double* hu = Hup.pt(q);
        const double* h = H.pt(q);
        double* y = P.Rmp.pt(q);
        const std::size_t n3 = static_cast<std::size_t>(n) * n * n;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l) {
                        double hh_il_jk = 0.0, hh_jl_ik = 0.0;
                        for (int a = 0; a < n; ++a) {
                            hh_il_jk += hu[(i * n + l) * n + a] * h[(j * n + k) * n + a];
                            hh_jl_ik += hu[(j * n + l) * n + a] * h[(i * n + k) * n + a];
                        }
                        std::size_t c = ((static_cast<std::size_t>(i) * n + j) * n + k) * n + l;
                        y[c] = rm[c] +
                               0.5 * nh[static_cast<std::size_t>(i) * n3 + (static_cast<std::size_t>(j) * n + k) * n + l] -
                               0.5 * nh[static_cast<std::size_t>(j) * n3 + (static_cast<std::size_t>(i) * n + k) * n + l] -
                               0.25 * hh_il_jk + 0.25 * hh_jl_ik;
                    }
    }
    P.Rcp = trace14(P.Rmp);
    P.Rp = trace_g(P.Rcp);

    // H2(i,j) = H_{iab} H_{jcd} g^{ac} g^{bd}
    P.H2 = Tensor(n, 2, np);
    for (std::size_t q = 0; q < np; ++q) {
        const double* giq = gi.pt(q);
        const double* hu = Hup.pt(q);
        const double* h = H.pt(q);
        double* y = P.H2.pt(q);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double v = 0.0;
                for (int a = 0; a < n; ++a)
                    for (int b = 0; b < n; ++b)
                        for (int c = 0; c < n; ++c) v += h[(i * n + a) * n + b] * giq[a * n + c] * hu[(j * n + c) * n + b];
                y[i * n + j] = v;
            }
    }
    P.normH2 = trace_g(P.H2);
    P.dstarH = dstar0(s, H);
    return P;
}

/// Bismut curvature computed directly as the curvature tensor of the
/// connection with coefficients Gamma + H/2 (the independent route; agrees
/// with the assembled Rm^+ exactly on the homogeneous backend and to stencil
/// order on the lattice).
template <class S>
Tensor bismut_riemann_direct(const S& s) {
    Tensor Gp = s.christoffel();
    Gp.axpy(0.5, s.torsion());
    return s.riemann_from_gamma(Gp);
}

/// Twisted Bakry-Emery curvature
///   Rc^{H,f} = Rc - H^2/4 + Hess f - (d^* H + i_{grad f} H)/2,
/// returned as the full non-symmetric 2-tensor.
template <class S>
Tensor rc_Hf(const S& s, const CurvaturePack& P) {
    Tensor out = P.Rc;
    out.axpy(-0.25, P.H2);
    out += s.nabla(s.grad_f());
    Tensor skew = P.dstarH;
    skew += interior_raised(s, s.grad_f(), s.torsion());
    out.axpy(-0.5, skew);
    return out;
}

template <class S>
Tensor rc_Hf(const S& s) {
    CurvaturePack P = curvature(s);
    return rc_Hf(s, P);
}

/// Untwisted Rc^H = Rc - H^2/4 - d^*H/2 (the f-less gradient).
template <class S>
Tensor rc_H(const S& s, const CurvaturePack& P) {
    Tensor out = P.Rc;
    out.axpy(-0.25, P.H2);
    out.axpy(-0.5, P.dstarH);
    return out;
}

/// f-twisted L^2 norms of the two steady-soliton equations
///   Rc - H^2/4 + Hess f = 0   and   d^*H + i_{grad f} H = 0,
/// using the state's f as-is.
template <class S>
std::pair<double, double> soliton_residual(const S& s) {
    CurvaturePack P = curvature(s);
    Tensor sym = P.Rc;
    sym.axpy(-0.25, P.H2);
    sym += s.nabla(s.grad_f());
    Tensor skew = P.dstarH;
    skew += interior_raised(s, s.grad_f(), s.torsion());
    return {norm_f(s, sym), norm_f(s, skew)};
}

/// Max-norm residual of the first Bianchi identity of the Bismut connection,
///   cyc_{XYZ} R^+(X,Y,Z,W) = ( cyc_{XYZ} (nabla^+_X H)(Y,Z,W) + (nabla^+_W H)(X,Y,Z) ) / 2,
/// evaluated with the directly computed connection curvature.
template <class S>
double bianchi_residual(const S& s) {
    const int n = s.n();
    const std::size_t np = s.pts();
    Tensor Rp = bismut_riemann_direct(s);
    Tensor NH = nabla_conn(s, s.torsion(), Conn::plus);
    double m = 0.0;
    const std::size_t n3 = static_cast<std::size_t>(n) * n * n;
    auto r4 = [&](const double* t, int i, int j, int k, int l) {
        return t[((static_cast<std::size_t>(i) * n + j) * n + k) * n + l];
    };
    auto nh = [&](const double* t, int m0, int j, int k, int l) {
        return t[static_cast<std::size_t>(m0) * n3 + (static_cast<std::size_t>(j) * n + k) * n + l];
    };
    for (std::size_t q = 0; q < np; ++q) {
        const double* rp = Rp.pt(q);
        const double* dh = NH.pt(q);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l) {
                        double lhs = r4(rp, i, j, k, l) + r4(rp, j, k, i, l) + r4(rp, k, i, j, l);
                        double rhs = 0.5 * (nh(dh, i, j, k, l) + nh(dh, j, k, i, l) + nh(dh, k, i, j, l) +
                                            nh(dh, l, i, j, k));
                        m = std::max(m, std::abs(lhs - rhs));
                    }
    }
    return m;
}

}  // namespace grf

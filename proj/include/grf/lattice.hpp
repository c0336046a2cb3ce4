#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "grf/tensor.hpp"

namespace grf {

/// Periodic finite-difference grid on the flat torus T^3 (optionally T^4).
struct LatticeGrid {
    int dim = 3;
    int N = 16;
    double L = 2.0 * std::numbers::pi;
    int stencil_order = 2;

    void validate() const {
        if (dim != 3 && dim != 4) throw std::invalid_argument("lattice: dim must be 3 or 4");
        if (N < 8) throw std::invalid_argument("lattice: N >= 8 required");
        if (L <= 0.0) throw std::invalid_argument("lattice: period must be positive");
        if (stencil_order != 2 && stencil_order != 4)
            throw std::invalid_argument("lattice: stencil order must be 2 or 4");
    }

    std::size_t pts() const { return Tensor::ipow(N, dim); }
    double h() const { return L / N; }
    double cell_volume() const { return std::pow(h(), dim); }
};

/// Precomputed periodic neighbor tables (one and two steps along each axis).
struct GridTables {
    LatticeGrid grid;
    std::vector<std::vector<std::int32_t>> plus1, minus1, plus2, minus2;

    explicit GridTables(const LatticeGrid& g) : grid(g) {
        grid.validate();
        const int d = g.dim, N = g.N;
        const std::size_t np = g.pts();
        plus1.assign(d, {}), minus1.assign(d, {}), plus2.assign(d, {}), minus2.assign(d, {});
        std::vector<int> x(d);
        for (int a = 0; a < d; ++a) {
            plus1[a].resize(np), minus1[a].resize(np), plus2[a].resize(np), minus2[a].resize(np);
        }
        for (std::size_t p = 0; p < np; ++p) {
            std::size_t r = p;
            for (int a = d - 1; a >= 0; --a) {
                x[a] = static_cast<int>(r % N);
                r /= N;
            }
            for (int a = 0; a < d; ++a) {
                auto shifted = [&](int step) {
                    std::size_t q = 0;
                    for (int s = 0; s < d; ++s) {
                        int xs = (s == a) ? ((x[s] + step) % N + N) % N : x[s];
                        q = q * N + static_cast<std::size_t>(xs);
                    }
                    return static_cast<std::int32_t>(q);
                };
                plus1[a][p] = shifted(1);
                minus1[a][p] = shifted(-1);
                plus2[a][p] = shifted(2);
                minus2[a][p] = shifted(-2);
            }
        }
    }
};

/// Central difference of declared stencil order along one axis, applied
/// componentwise; exact on polynomials up to the stencil order.
inline Tensor partial_derivative(const Tensor& T, int axis, const GridTables& tab) {
    const auto& g = tab.grid;
    if (axis < 0 || axis >= g.dim) throw std::invalid_argument("partial_derivative: bad axis");
    Tensor out(T.dim, T.order, T.pts);
    const std::size_t nc = T.comps();
    const double h = g.h();
    if (g.stencil_order == 2) {
        const double c1 = 1.0 / (2.0 * h);
        for (std::size_t p = 0; p < T.pts; ++p) {
            const double* xp = T.pt(tab.plus1[axis][p]);
            const double* xm = T.pt(tab.minus1[axis][p]);
            double* y = out.pt(p);
            for (std::size_t c = 0; c < nc; ++c) y[c] = c1 * (xp[c] - xm[c]);
        }
    } else {
        const double c1 = 8.0 / (12.0 * h), c2 = 1.0 / (12.0 * h);
        for (std::size_t p = 0; p < T.pts; ++p) {
            const double* xp = T.pt(tab.plus1[axis][p]);
            const double* xm = T.pt(tab.minus1[axis][p]);
            const double* xp2 = T.pt(tab.plus2[axis][p]);
            const double* xm2 = T.pt(tab.minus2[axis][p]);
            double* y = out.pt(p);
            for (std::size_t c = 0; c < nc; ++c) y[c] = c1 * (xp[c] - xm[c]) - c2 * (xp2[c] - xm2[c]);
        }
    }
    return out;
}

/// Coordinate exterior derivative (no metric): exact alternation of the
/// stencil derivative, so d(d w) = 0 to roundoff on periodic grids.
inline Tensor d_coordinate(const Tensor& form, const GridTables& tab) {
    const int n = form.dim, p = form.order;
    std::vector<Tensor> dT(n);
    for (int a = 0; a < n; ++a) dT[a] = partial_derivative(form, a, tab);
    Tensor out(n, p + 1, form.pts);
    std::vector<int> idx(p + 1), sub(p > 0 ? p : 1);
    for (std::size_t c = 0; c < out.comps(); ++c) {
        decode(c, n, p + 1, idx.data());
        for (std::size_t q = 0; q < form.pts; ++q) {
            double v = 0.0;
            for (int k = 0; k <= p; ++k) {
                int t = 0;
                for (int s = 0; s <= p; ++s)
                    if (s != k) sub[t++] = idx[s];
                double sgn = (k % 2 == 0) ? 1.0 : -1.0;
                v += sgn * dT[idx[k]].at(q, encode(sub.data(), n, p));
            }
            out.at(q, c) = v;
        }
    }
    return out;
}

/// Periodic lattice geometry: flat background torus with field-valued
/// (g, b, f) and background closed 3-form H0.  Stencil derivatives carry
/// Christoffel corrections computed from the g field.
class LatticeState {
public:
    std::shared_ptr<const GridTables> tab;
    Tensor g, b, H0, f;  // orders 2, 2, 3, 0

    // caches, read-only after construction
    Tensor ginv, H, Gamma, Gup, df, sqrtg;
    Tensor w;  // e^{-f} sqrt(det g) * cell volume, the f-twisted measure density

    LatticeState() = default;

    LatticeState(std::shared_ptr<const GridTables> tab_, Tensor g_, Tensor b_, Tensor H0_, Tensor f_)
        : tab(std::move(tab_)), g(std::move(g_)), b(std::move(b_)), H0(std::move(H0_)), f(std::move(f_)) {
        rebuild();
    }

    const LatticeGrid& grid() const { return tab->grid; }
    int n() const { return grid().dim; }
    std::size_t pts() const { return grid().pts(); }

    const Tensor& metric() const { return g; }
    const Tensor& metric_inv() const { return ginv; }
    const Tensor& torsion() const { return H; }
    const Tensor& christoffel() const { return Gamma; }
    Tensor grad_f() const { return df; }
    Tensor f_field() const { return f; }

    void rebuild() {
        const int nn = n();
        const std::size_t np = pts();
        if (g.order != 2 || b.order != 2 || H0.order != 3 || f.order != 0)
            throw std::invalid_argument("lattice state: wrong tensor orders");
        if (g.pts != np || b.pts != np || H0.pts != np || f.pts != np)
            throw std::invalid_argument("lattice state: field size mismatch");
        require_antisymmetric(b, 1e-12, "state b");
        require_antisymmetric(H0, 1e-12, "state H0");

        ginv = Tensor(nn, 2, np);
        sqrtg = Tensor(nn, 0, np);
        Eigen::Matrix4d M = Eigen::Matrix4d::Zero();
        for (std::size_t p = 0; p < np; ++p) {
            for (int i = 0; i < nn; ++i)
                for (int j = 0; j < nn; ++j) M(i, j) = g.at(p, static_cast<std::size_t>(i) * nn + j);
            auto blk = M.topLeftCorner(nn, nn);
            double det = blk.determinant();
            if (!(det > 0.0)) {
                Eigen::MatrixXd blkm = blk;
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(blkm);
                throw std::invalid_argument("metric not SPD at point " + std::to_string(p) +
                                            ": smallest eigenvalue " + std::to_string(es.eigenvalues().minCoeff()));
            }
            Eigen::MatrixXd Mi = Eigen::MatrixXd(blk).inverse();
            for (int i = 0; i < nn; ++i)
                for (int j = 0; j < nn; ++j) ginv.at(p, static_cast<std::size_t>(i) * nn + j) = Mi(i, j);
            sqrtg.at(p, 0) = std::sqrt(det);
        }
        if (double r = antisymmetry_defect(H0); r > 1e-12)
            throw std::invalid_argument("H0 not antisymmetric");
        if (double r = d_coordinate(H0, *tab).norm_inf(); r > 1e-9)
            throw std::invalid_argument("H0 not closed: |dH0| = " + std::to_string(r));
        H = H0 + d_coordinate(b, *tab);

        // Gamma(m,j,k) = (D_m g_jk + D_j g_mk - D_k g_mj) / 2
        std::vector<Tensor> dg(nn);
        for (int a = 0; a < nn; ++a) dg[a] = partial_derivative(g, a, *tab);
        Gamma = Tensor(nn, 3, np);
        Gup = Tensor(nn, 3, np);
        for (std::size_t p = 0; p < np; ++p)
            for (int m = 0; m < nn; ++m)
                for (int j = 0; j < nn; ++j)
                    for (int k = 0; k < nn; ++k)
                        Gamma.at(p, (static_cast<std::size_t>(m) * nn + j) * nn + k) =
                            0.5 * (dg[m].at(p, static_cast<std::size_t>(j) * nn + k) +
                                   dg[j].at(p, static_cast<std::size_t>(m) * nn + k) -
                                   dg[k].at(p, static_cast<std::size_t>(m) * nn + j));
        raise_last_slot_into(Gamma, Gup);

        df = partialgrad(f);
        w = Tensor(nn, 0, np);
        const double cv = grid().cell_volume();
        for (std::size_t p = 0; p < np; ++p) w.at(p, 0) = std::exp(-f.at(p, 0)) * sqrtg.at(p, 0) * cv;
    }

    LatticeState with_gb(Tensor g_, Tensor b_) const {
        LatticeState s(*this);
        s.g = std::move(g_);
        s.b = std::move(b_);
        s.rebuild();
        return s;
    }

    LatticeState with_f(Tensor f_) const {
        LatticeState s(*this);
        s.f = std::move(f_);
        s.rebuild();
        return s;
    }

    Tensor partialgrad(const Tensor& s) const {
        Tensor out(n(), 1, pts());
        for (int a = 0; a < n(); ++a) {
            Tensor da = partial_derivative(s, a, *tab);
            for (std::size_t p = 0; p < pts(); ++p) out.at(p, a) = da.at(p, 0);
        }
        return out;
    }

    void raise_last_slot_into(const Tensor& G3, Tensor& out) const {
        const int nn = n();
        for (std::size_t p = 0; p < pts(); ++p) {
            const double* gi = ginv.pt(p);
            const double* x = G3.pt(p);
            double* y = out.pt(p);
            for (int m = 0; m < nn; ++m)
                for (int j = 0; j < nn; ++j)
                    for (int a = 0; a < nn; ++a) {
                        double s = 0.0;
                        for (int bb = 0; bb < nn; ++bb)
                            s += x[(m * nn + j) * nn + bb] * gi[bb * nn + a];
                        y[(m * nn + j) * nn + a] = s;
                    }
        }
    }

    /// Covariant derivative, derivative slot first:
    /// (nabla T)(m, i...) = D_m T(i...) - sum_slots Gamma(m,i_s)^a T(..a..).
    Tensor nabla(const Tensor& T) const { return nabla_impl(T, Gup); }

    Tensor nabla_with_gamma(const Tensor& T, const Tensor& Gdown) const {
        Tensor Gu(n(), 3, pts());
        raise_last_slot_into(Gdown, Gu);
        return nabla_impl(T, Gu);
    }

    Tensor riemann() const { return riemann_from_gamma(Gamma); }

    /// Curvature of the connection with coefficients Gdown(m,j,k) = <D'_m e_j, e_k>,
    /// from the commutator of coordinate derivatives.
    Tensor riemann_from_gamma(const Tensor& Gdown) const {
        const int nn = n();
        const std::size_t np = pts();
        Tensor Gu(nn, 3, np);
        raise_last_slot_into(Gdown, Gu);
        std::vector<Tensor> dGu(nn);
        for (int a = 0; a < nn; ++a) dGu[a] = partial_derivative(Gu, a, *tab);
        Tensor R(nn, 4, np);
        for (std::size_t p = 0; p < np; ++p) {
            const double* gu = Gu.pt(p);
            const double* gg = g.pt(p);
            double* r = R.pt(p);
            for (int i = 0; i < nn; ++i)
                for (int j = 0; j < nn; ++j)
                    for (int k = 0; k < nn; ++k)
                        for (int l = 0; l < nn; ++l) {
                            double up = 0.0;
                            for (int bb = 0; bb < nn; ++bb) {
                                double v = dGu[i].at(p, (static_cast<std::size_t>(j) * nn + k) * nn + bb) -
                                           dGu[j].at(p, (static_cast<std::size_t>(i) * nn + k) * nn + bb);
                                for (int a = 0; a < nn; ++a)
                                    v += gu[(j * nn + k) * nn + a] * gu[(i * nn + a) * nn + bb] -
                                         gu[(i * nn + k) * nn + a] * gu[(j * nn + a) * nn + bb];
                                up += v * gg[bb * nn + l];
                            }
                            r[((static_cast<std::size_t>(i) * nn + j) * nn + k) * nn + l] = up;
                        }
        }
        return R;
    }

    /// f-twisted integral: sum of scalar * e^{-f} sqrt(det g) * cell volume.
    double integrate(const Tensor& scalar) const {
        if (scalar.order != 0) throw std::invalid_argument("integrate: scalar expected");
        double s = 0.0;
        for (std::size_t p = 0; p < pts(); ++p) s += scalar.at(p, 0) * w.at(p, 0);
        return s;
    }

    double integrate_raw(const Tensor& scalar) const {
        if (scalar.order != 0) throw std::invalid_argument("integrate: scalar expected");
        const double cv = grid().cell_volume();
        double s = 0.0;
        for (std::size_t p = 0; p < pts(); ++p) s += scalar.at(p, 0) * sqrtg.at(p, 0) * cv;
        return s;
    }

private:
    Tensor nabla_impl(const Tensor& T, const Tensor& Gu) const {
        const int nn = n(), p = T.order;
        const std::size_t np = pts();
        std::vector<Tensor> dT(nn);
        for (int a = 0; a < nn; ++a) dT[a] = partial_derivative(T, a, *tab);
        Tensor out(nn, p + 1, np);
        std::vector<int> idx(p + 1 > 1 ? p + 1 : 1);
        const std::size_t nc_out = out.comps();
        for (std::size_t c = 0; c < nc_out; ++c) {
            decode(c, nn, p + 1, idx.data());
            const int m = idx[0];
            std::size_t cin = 0;
            for (int t = 0; t < p; ++t) cin = cin * nn + static_cast<std::size_t>(idx[1 + t]);
            for (std::size_t q = 0; q < np; ++q) {
                double v = dT[m].at(q, cin);
                const double* gu = Gu.pt(q);
                const double* x = T.pt(q);
                for (int s = 0; s < p; ++s) {
                    const int is = idx[1 + s];
                    std::size_t stride = Tensor::ipow(nn, p - 1 - s);
                    std::size_t base = cin - static_cast<std::size_t>(is) * stride;
                    for (int a = 0; a < nn; ++a)
                        v -= gu[(m * nn + is) * nn + a] * x[base + static_cast<std::size_t>(a) * stride];
                }
                out.at(q, c) = v;
            }
        }
        return out;
    }
};

/// Self-adjoint divergence-form Laplacian div(w g^{-1} grad u) / w for a
/// positive weight field w.  Diagonal terms use the compact conservative
/// stencil (backward difference of midpoint-averaged coefficient times
/// forward difference), which has no odd-even null modes; off-diagonal terms
/// use centered differences.  Both pieces are exactly symmetric in the
/// w-weighted pairing.
inline Tensor laplace_sbp(const LatticeState& S, const Tensor& u, const Tensor& weight) {
    const int nn = S.n();
    const std::size_t np = S.pts();
    const double h = S.grid().h();
    const auto& tab = *S.tab;
    Tensor out(nn, 0, np);
    // diagonal part
    for (int m = 0; m < nn; ++m) {
        const auto& ip = tab.plus1[m];
        const auto& im = tab.minus1[m];
        for (std::size_t p = 0; p < np; ++p) {
            auto coef = [&](std::size_t q) {
                return weight.at(q, 0) * S.ginv.at(q, static_cast<std::size_t>(m) * nn + m);
            };
            double ap = 0.5 * (coef(p) + coef(ip[p]));
            double am = 0.5 * (coef(p) + coef(im[p]));
            out.at(p, 0) += (ap * (u.at(ip[p], 0) - u.at(p, 0)) - am * (u.at(p, 0) - u.at(im[p], 0))) / (h * h);
        }
    }
    // mixed part, centered
    for (int j = 0; j < nn; ++j) {
        Tensor dj = partial_derivative(u, j, tab);
        for (int m = 0; m < nn; ++m) {
            if (m == j) continue;
            Tensor fm(nn, 0, np);
            for (std::size_t p = 0; p < np; ++p)
                fm.at(p, 0) = weight.at(p, 0) * S.ginv.at(p, static_cast<std::size_t>(m) * nn + j) * dj.at(p, 0);
            Tensor dm = partial_derivative(fm, m, tab);
            for (std::size_t p = 0; p < np; ++p) out.at(p, 0) += dm.at(p, 0);
        }
    }
    for (std::size_t p = 0; p < np; ++p) out.at(p, 0) /= weight.at(p, 0);
    return out;
}

/// Wide variant built from the centered stencil only: matches the operator
/// compositions nabla..nabla exactly on flat states.  Its kernel contains the
/// per-axis sawtooth modes, which the centered stencil cannot see; callers
/// must keep right-hand sides orthogonal to them.
inline Tensor laplace_wide(const LatticeState& S, const Tensor& u, const Tensor& weight) {
    const int nn = S.n();
    Tensor flux(nn, 1, S.pts());
    for (int j = 0; j < nn; ++j) {
        Tensor dj = partial_derivative(u, j, *S.tab);
        for (std::size_t p = 0; p < S.pts(); ++p)
            for (int m = 0; m < nn; ++m)
                flux.at(p, m) += weight.at(p, 0) * S.ginv.at(p, static_cast<std::size_t>(m) * nn + j) * dj.at(p, 0);
    }
    Tensor out(nn, 0, S.pts());
    for (int m = 0; m < nn; ++m) {
        Tensor fm(nn, 0, S.pts());
        for (std::size_t p = 0; p < S.pts(); ++p) fm.at(p, 0) = flux.at(p, m);
        Tensor dm = partial_derivative(fm, m, *S.tab);
        for (std::size_t p = 0; p < S.pts(); ++p) out.at(p, 0) += dm.at(p, 0);
    }
    for (std::size_t p = 0; p < S.pts(); ++p) out.at(p, 0) /= weight.at(p, 0);
    return out;
}

/// Basis of the sawtooth kernel of the wide stencil: products of (-1)^{x_a}
/// over nonempty axis subsets.
inline std::vector<Tensor> sawtooth_modes(const LatticeState& S) {
    const int nn = S.n(), N = S.grid().N;
    const std::size_t np = S.pts();
    std::vector<Tensor> modes;
    if (N % 2 != 0) return modes;
    for (int mask = 1; mask < (1 << nn); ++mask) {
        Tensor t(nn, 0, np);
        std::vector<int> x(nn);
        for (std::size_t p = 0; p < np; ++p) {
            std::size_t r = p;
            for (int a = nn - 1; a >= 0; --a) {
                x[a] = static_cast<int>(r % N);
                r /= N;
            }
            int sgn = 1;
            for (int a = 0; a < nn; ++a)
                if ((mask >> a) & 1 && (x[a] & 1)) sgn = -sgn;
            t.at(p, 0) = sgn;
        }
        modes.push_back(std::move(t));
    }
    return modes;
}

/// Conjugate gradient for a self-adjoint operator on scalar fields, in the
/// weighted pairing sum(a * b * w).  Returns the residual norm reached.
inline double conjugate_gradient(const std::function<Tensor(const Tensor&)>& A, const Tensor& rhs, Tensor& x,
                                 const Tensor& weight, double tol, int max_iter) {
    auto dot = [&](const Tensor& a, const Tensor& b) {
        double s = 0.0;
        for (std::size_t p = 0; p < a.pts; ++p) s += a.at(p, 0) * b.at(p, 0) * weight.at(p, 0);
        return s;
    };
    Tensor r = rhs;
    r -= A(x);
    Tensor p = r;
    double rr = dot(r, r);
    const double stop = tol * tol * std::max(dot(rhs, rhs), 1e-300);
    for (int it = 0; it < max_iter && rr > stop; ++it) {
        Tensor Ap = A(p);
        double alpha = rr / dot(p, Ap);
        x.axpy(alpha, p);
        r.axpy(-alpha, Ap);
        double rr2 = dot(r, r);
        p *= rr2 / rr;
        p += r;
        rr = rr2;
    }
    return std::sqrt(rr);
}

struct GroundState {
    double lambda = 0.0;
    Tensor u;         // ground state, \int u^2 dV = 1, u > 0
    Tensor f;         // -2 ln u, shifted so \int e^{-f} dV = 1
    double residual = 0.0;
    int iterations = 0;
};

/// Smallest eigenpair of -4 Lap + V on (M, g) by shifted inverse-power
/// iteration with conjugate-gradient inner solves.
inline GroundState ground_state(const LatticeState& S, const Tensor& V, double tol = 1e-10, int max_outer = 200) {
    const std::size_t np = S.pts();
    if (V.order != 0 || V.pts != np) throw std::invalid_argument("ground_state: scalar potential expected");
    Tensor w0(S.n(), 0, np);
    const double cv = S.grid().cell_volume();
    for (std::size_t p = 0; p < np; ++p) w0.at(p, 0) = S.sqrtg.at(p, 0) * cv;

    double vmin = V.a[0];
    for (std::size_t p = 0; p < np; ++p) vmin = std::min(vmin, V.at(p, 0));
    const double shift = vmin - 1.0;

    auto apply_A = [&](const Tensor& u) {
        Tensor lap = laplace_sbp(S, u, w0);
        Tensor out(S.n(), 0, np);
        for (std::size_t p = 0; p < np; ++p) out.at(p, 0) = -4.0 * lap.at(p, 0) + V.at(p, 0) * u.at(p, 0);
        return out;
    };
    auto apply_B = [&](const Tensor& u) {
        Tensor out = apply_A(u);
        for (std::size_t p = 0; p < np; ++p) out.at(p, 0) -= shift * u.at(p, 0);
        return out;
    };
    auto dot = [&](const Tensor& a, const Tensor& b) {
        double s = 0.0;
        for (std::size_t p = 0; p < np; ++p) s += a.at(p, 0) * b.at(p, 0) * w0.at(p, 0);
        return s;
    };

    Tensor u(S.n(), 0, np);
    for (std::size_t p = 0; p < np; ++p) u.at(p, 0) = 1.0 + 1e-3 * std::sin(static_cast<double>(p % 97));
    u *= 1.0 / std::sqrt(dot(u, u));

    GroundState gs;
    for (int it = 0; it < max_outer; ++it) {
        Tensor x = u;
        conjugate_gradient(apply_B, u, x, w0, 1e-13, 4 * static_cast<int>(np));
        x *= 1.0 / std::sqrt(dot(x, x));
        u = x;
        Tensor Au = apply_A(u);
        double lam = dot(u, Au);
        Au.axpy(-lam, u);
        gs.lambda = lam;
        gs.residual = std::sqrt(dot(Au, Au));
        gs.iterations = it + 1;
        if (gs.residual < tol) break;
    }
    if (gs.residual >= tol)
        throw std::runtime_error("ground_state: no convergence, eigen-residual " + std::to_string(gs.residual));

    double mean = 0.0;
    for (std::size_t p = 0; p < np; ++p) mean += u.at(p, 0);
    if (mean < 0.0) u *= -1.0;
    double umax = 0.0, umin = 1e300;
    for (std::size_t p = 0; p < np; ++p) {
        umax = std::max(umax, u.at(p, 0));
        umin = std::min(umin, u.at(p, 0));
    }
    if (umin <= 1e-12 * umax)
        throw std::runtime_error("ground_state: ground state not positive (min/max = " +
                                 std::to_string(umin / umax) + ")");

    gs.u = u;
    gs.f = Tensor(S.n(), 0, np);
    const double lognorm = std::log(dot(u, u));  // ~0, keeps \int e^{-f} dV = 1 exactly
    for (std::size_t p = 0; p < np; ++p) gs.f.at(p, 0) = -2.0 * std::log(u.at(p, 0)) + lognorm;
    return gs;
}

/// Flat reference state: g = id, b = 0, H0 = 0, f = 0.
inline LatticeState flat_state(const LatticeGrid& grid) {
    auto tab = std::make_shared<const GridTables>(grid);
    const std::size_t np = grid.pts();
    Tensor g(grid.dim, 2, np);
    for (std::size_t p = 0; p < np; ++p)
        for (int i = 0; i < grid.dim; ++i) g.at(p, static_cast<std::size_t>(i) * grid.dim + i) = 1.0;
    return LatticeState(tab, g, Tensor(grid.dim, 2, np), Tensor(grid.dim, 3, np), Tensor(grid.dim, 0, np));
}

}  // namespace grf
